#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "sonarcursor/errors.hpp"
#include "sonarcursor/wav.hpp"

using namespace sonar;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("wavtest_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("round trip preserves samples to one quantization step") {
  TempFile f("roundtrip.wav");
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> samples;
  for (int i = 0; i < 4800; ++i) samples.push_back(u(rng));
  write_wav(f.path, samples, 48000);
  WavData back = read_wav(f.path);
  CHECK(back.sample_rate == 48000);
  REQUIRE(back.samples.size() == samples.size());
  for (size_t i = 0; i < samples.size(); ++i)
    CHECK(std::abs(back.samples[i] - samples[i]) <= 1.0 / 32767.0);
}

TEST_CASE("out-of-range samples clip to full scale") {
  TempFile f("clip.wav");
  write_wav(f.path, {2.0, -2.0, 0.0, 1.0, -1.0}, 48000);
  WavData back = read_wav(f.path);
  REQUIRE(back.samples.size() == 5);
  CHECK(back.samples[0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(back.samples[1] == doctest::Approx(-1.0).epsilon(1e-3));
  CHECK(back.samples[2] == doctest::Approx(0.0).epsilon(1e-3));
  CHECK(back.samples[3] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(back.samples[4] == doctest::Approx(-1.0).epsilon(1e-3));
}

TEST_CASE("writes are byte-identical across calls") {
  TempFile a("det_a.wav"), b("det_b.wav");
  std::vector<double> samples;
  for (int i = 0; i < 1000; ++i) samples.push_back(std::sin(0.01 * i));
  write_wav(a.path, samples, 48000);
  write_wav(b.path, samples, 48000);
  const std::string sa = slurp(a.path), sb = slurp(b.path);
  CHECK(!sa.empty());
  CHECK(sa == sb);
}

TEST_CASE("malformed and truncated files are rejected") {
  TempFile f("bad.wav");
  {
    std::ofstream out(f.path, std::ios::binary);
    out << "this is not a riff container at all";
  }
  CHECK_THROWS_AS(read_wav(f.path), ConfigError);

  // valid header, then chop the data chunk short
  TempFile g("trunc.wav");
  write_wav(g.path, std::vector<double>(100, 0.5), 48000);
  const std::string whole = slurp(g.path);
  {
    std::ofstream out(g.path, std::ios::binary);
    out.write(whole.data(), static_cast<std::streamsize>(whole.size() - 60));
  }
  CHECK_THROWS_AS(read_wav(g.path), ConfigError);

  CHECK_THROWS_AS(read_wav("wavtest_does_not_exist.wav"), ConfigError);
}
