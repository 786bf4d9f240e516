#include "sonarcursor/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "sonarcursor/errors.hpp"

namespace sonar {

namespace {

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u16(std::string& s, std::uint16_t v) {
  for (int i = 0; i < 2; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
std::uint32_t get_u32(const std::string& s, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[off + i]);
  return v;
}
std::uint16_t get_u16(const std::string& s, std::size_t off) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(s[off]) |
                                    (static_cast<unsigned char>(s[off + 1]) << 8));
}

}  // namespace

void write_wav(const std::string& path, const std::vector<double>& samples, int sample_rate) {
  if (sample_rate <= 0) throw ConfigError("wav: sample rate must be positive");
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, data_bytes);
  for (double x : samples) {
    const double c = std::clamp(x, -1.0, 1.0);
    const auto v = static_cast<std::int16_t>(std::lround(c * 32767.0));
    put_u16(out, static_cast<std::uint16_t>(v));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("wav: cannot open for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw ConfigError("wav: short write: " + path);
}

WavData read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("wav: cannot open: " + path);
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (buf.size() < 44 || buf.compare(0, 4, "RIFF") != 0 || buf.compare(8, 4, "WAVE") != 0)
    throw ConfigError("wav: not a RIFF/WAVE file: " + path);

  WavData out;
  std::size_t pos = 12;
  bool have_fmt = false;
  int channels = 0, bits = 0;
  while (pos + 8 <= buf.size()) {
    const std::string id = buf.substr(pos, 4);
    const std::uint32_t len = get_u32(buf, pos + 4);
    pos += 8;
    if (pos + len > buf.size()) throw ConfigError("wav: truncated chunk: " + path);
    if (id == "fmt ") {
      if (len < 16) throw ConfigError("wav: malformed fmt chunk: " + path);
      if (get_u16(buf, pos) != 1) throw ConfigError("wav: only PCM supported: " + path);
      channels = get_u16(buf, pos + 2);
      out.sample_rate = static_cast<int>(get_u32(buf, pos + 4));
      bits = get_u16(buf, pos + 14);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw ConfigError("wav: data before fmt: " + path);
      if (channels != 1 || bits != 16)
        throw ConfigError("wav: expected mono 16-bit PCM: " + path);
      out.samples.reserve(len / 2);
      for (std::size_t i = 0; i + 1 < len; i += 2) {
        const auto v = static_cast<std::int16_t>(get_u16(buf, pos + i));
        out.samples.push_back(v / 32767.0);
      }
      return out;
    }
    pos += len + (len & 1);
  }
  throw ConfigError("wav: no data chunk: " + path);
}

}  // namespace sonar
