#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "avgraph/image/raster.hpp"

namespace avgraph::frames {

// Mean intensity over all pixels. Throws on an empty raster.
double mean_brightness(const img::Gray& im);

// Variance of the 3x3 Laplacian response (kernel 0 1 0 / 1 -4 1 / 0 1 0)
// taken over non-border pixels. Population variance. Requires dims >= 3x3.
double laplacian_variance(const img::Gray& im);

// Sobel gradient magnitude with hysteresis thresholding: pixels >= high seed
// edges, pixels in [low, high) survive only when 8-connected to a kept pixel.
// Gradients exist on interior pixels only. Requires 0 <= low < high.
int edge_count(const img::Gray& im, double low = 50.0, double high = 150.0);

// Population standard deviation of intensity.
double contrast_std(const img::Gray& im);

// Per-channel means; a grayscale frame reports its mean on all three.
std::array<double, 3> channel_means(const img::Frame& f);

struct FrameQualityRecord {
  int frame_index = 0;
  std::int64_t timestamp_ms = 0;
  double brightness_mean = 0.0;
  double blur_laplacian_var = 0.0;
  int edge_count = 0;
  double contrast_std = 0.0;
  double r_mean = 0.0, g_mean = 0.0, b_mean = 0.0;
};

struct EdgeThresholds {
  double low = 50.0;
  double high = 150.0;
};

// One record per frame; timestamp_ms = round(index * 1000 / fps). fps > 0.
std::vector<FrameQualityRecord> quality_table(const std::vector<img::Frame>& frames,
                                              double fps,
                                              const EdgeThresholds& thr = {});

// CSV with the fixed column set, one row per record, no trailing newline gaps.
std::string quality_csv(const std::vector<FrameQualityRecord>& records);
void write_quality_csv(const std::string& path,
                       const std::vector<FrameQualityRecord>& records);

}  // namespace avgraph::frames
