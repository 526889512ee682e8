#include "fixture_gen.hpp"

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "avgraph/image/raster.hpp"
#include "avgraph/signal/wav.hpp"
#include "avgraph/util/rng.hpp"

namespace fixture {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void write_clip(const std::filesystem::path& root, const ClipSpec& spec) {
  namespace fs = std::filesystem;
  using avgraph::img::Rgb;

  const fs::path frames_dir = root / "frames";
  fs::create_directories(frames_dir);

  avgraph::Rng rng(20240901);
  const int W = spec.width, H = spec.height;
  for (int f = 0; f < spec.n_frames; ++f) {
    Rgb im;
    im.r.resize(H, W);
    im.g.resize(H, W);
    im.b.resize(H, W);

    // Vertical gradient background with a slow global brightness swing, a
    // moving bright square, and low-amplitude deterministic grain.
    const double swing = 30.0 * std::sin(2.0 * kPi * f / spec.n_frames);
    const int sq = 12;
    const int sx = 4 + (f * 3) % (W - sq - 8);
    const int sy = 6 + (f * 2) % (H - sq - 12);
    for (int i = 0; i < H; ++i) {
      for (int j = 0; j < W; ++j) {
        double base = 40.0 + 140.0 * i / (H - 1) + swing;
        double r = base * 0.9, g = base, b = base * 1.15;
        if (i >= sy && i < sy + sq && j >= sx && j < sx + sq) {
          r = 230.0;
          g = 210.0;
          b = 170.0;
        }
        const double grain = rng.uniform(-6.0, 6.0);
        auto clip = [](double v) { return v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v); };
        im.r(i, j) = clip(r + grain);
        im.g(i, j) = clip(g + grain);
        im.b(i, j) = clip(b + grain);
      }
    }
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%04d.ppm", f);
    avgraph::img::write_ppm((frames_dir / name).string(), im);
  }

  // Audio: quiet hum, a modulated two-harmonic voiced burst, quiet tail.
  const int rate = spec.sample_rate_hz;
  const int n = static_cast<int>(std::lround(spec.audio_seconds * rate));
  std::vector<double> s(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    double v = 0.004 * std::sin(2.0 * kPi * 55.0 * t);
    if (t >= 0.5 && t < 1.35) {
      const double env = 0.55 + 0.45 * std::sin(2.0 * kPi * 4.0 * (t - 0.5));
      v += env * (0.35 * std::sin(2.0 * kPi * 180.0 * t) +
                  0.15 * std::sin(2.0 * kPi * 360.0 * t) +
                  0.05 * std::sin(2.0 * kPi * 1200.0 * t));
    }
    s[static_cast<std::size_t>(i)] = v;
  }
  avgraph::signal::write_wav((root / "clip.wav").string(), s, rate);
}

}  // namespace fixture
