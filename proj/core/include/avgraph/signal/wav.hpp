#pragma once

#include <string>
#include <vector>

namespace avgraph::signal {

struct WavData {
  std::vector<double> samples;  // mono, [-1, 1]
  int sample_rate_hz = 0;
};

// Reads a RIFF/WAVE file. PCM 16-bit and IEEE float 32-bit are supported;
// multi-channel input is downmixed by averaging.
WavData read_wav(const std::string& path);

// Writes mono PCM 16-bit. Samples are clipped to [-1, 1].
void write_wav(const std::string& path, const std::vector<double>& samples,
               int sample_rate_hz);

}  // namespace avgraph::signal
