#include "avgraph/signal/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace avgraph::signal {

namespace {

std::uint32_t rd_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t rd_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void wr_u32(std::ofstream& f, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  f.write(reinterpret_cast<const char*>(b), 4);
}

void wr_u16(std::ofstream& f, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff)};
  f.write(reinterpret_cast<const char*>(b), 2);
}

}  // namespace

WavData read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("wav: cannot open " + path);
  std::vector<unsigned char> raw((std::istreambuf_iterator<char>(f)),
                                 std::istreambuf_iterator<char>());
  if (raw.size() < 44 || std::memcmp(raw.data(), "RIFF", 4) != 0 ||
      std::memcmp(raw.data() + 8, "WAVE", 4) != 0)
    throw std::runtime_error("wav: not a RIFF/WAVE file: " + path);

  int rate = 0, channels = 0, bits = 0, format = 0;
  std::size_t data_off = 0, data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= raw.size()) {
    const unsigned char* hdr = raw.data() + pos;
    std::uint32_t chunk_len = rd_u32(hdr + 4);
    if (std::memcmp(hdr, "fmt ", 4) == 0 && pos + 8 + 16 <= raw.size()) {
      const unsigned char* p = hdr + 8;
      format = rd_u16(p);
      channels = rd_u16(p + 2);
      rate = static_cast<int>(rd_u32(p + 4));
      bits = rd_u16(p + 14);
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data_off = pos + 8;
      data_len = std::min<std::size_t>(chunk_len, raw.size() - data_off);
    }
    pos += 8 + chunk_len + (chunk_len & 1);
  }
  if (rate <= 0 || channels <= 0 || data_off == 0)
    throw std::runtime_error("wav: missing fmt/data chunk: " + path);
  if (!((format == 1 && bits == 16) || (format == 3 && bits == 32)))
    throw std::runtime_error("wav: unsupported encoding (need PCM16 or float32): " + path);

  const std::size_t bytes_per = static_cast<std::size_t>(bits / 8);
  const std::size_t n_frames = data_len / (bytes_per * static_cast<std::size_t>(channels));

  WavData w;
  w.sample_rate_hz = rate;
  w.samples.resize(n_frames);
  const unsigned char* d = raw.data() + data_off;
  for (std::size_t i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      const unsigned char* s = d + (i * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)) * bytes_per;
      if (format == 1) {
        std::int16_t v = static_cast<std::int16_t>(s[0] | (s[1] << 8));
        acc += static_cast<double>(v) / 32768.0;
      } else {
        float v;
        std::memcpy(&v, s, 4);
        acc += static_cast<double>(v);
      }
    }
    w.samples[i] = acc / channels;
  }
  return w;
}

void write_wav(const std::string& path, const std::vector<double>& samples,
               int sample_rate_hz) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("wav: cannot write " + path);
  const std::uint32_t data_len = static_cast<std::uint32_t>(samples.size() * 2);
  f.write("RIFF", 4);
  wr_u32(f, 36 + data_len);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  wr_u32(f, 16);
  wr_u16(f, 1);  // PCM
  wr_u16(f, 1);  // mono
  wr_u32(f, static_cast<std::uint32_t>(sample_rate_hz));
  wr_u32(f, static_cast<std::uint32_t>(sample_rate_hz) * 2);
  wr_u16(f, 2);
  wr_u16(f, 16);
  f.write("data", 4);
  wr_u32(f, data_len);
  for (double x : samples) {
    double c = std::clamp(x, -1.0, 1.0);
    auto v = static_cast<std::int16_t>(std::lround(c * 32767.0));
    unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff)};
    f.write(reinterpret_cast<const char*>(b), 2);
  }
}

}  // namespace avgraph::signal
