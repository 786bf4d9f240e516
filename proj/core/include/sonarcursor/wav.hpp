#pragma once

// wav - minimal mono 16-bit PCM RIFF reader/writer. Samples are doubles in
// [-1, 1]; values outside clip on write.

#include <string>
#include <vector>

namespace sonar {

struct WavData {
  int sample_rate = 0;
  std::vector<double> samples;
};

void write_wav(const std::string& path, const std::vector<double>& samples, int sample_rate);
WavData read_wav(const std::string& path);  // throws ConfigError on malformed input

}  // namespace sonar
