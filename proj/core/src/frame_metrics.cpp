#include "avgraph/frame_metrics.hpp"

#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <stdexcept>

namespace avgraph::frames {

double mean_brightness(const img::Gray& im) {
  if (im.size() == 0) throw std::invalid_argument("mean_brightness: empty raster");
  return im.mean();
}

double laplacian_variance(const img::Gray& im) {
  if (im.rows() < 3 || im.cols() < 3)
    throw std::invalid_argument("laplacian_variance: raster smaller than 3x3");
  const Eigen::Index h = im.rows(), w = im.cols();
  double sum = 0.0, sum2 = 0.0;
  const double n = static_cast<double>((h - 2) * (w - 2));
  for (Eigen::Index y = 1; y + 1 < h; ++y) {
    for (Eigen::Index x = 1; x + 1 < w; ++x) {
      double v = im(y - 1, x) + im(y + 1, x) + im(y, x - 1) + im(y, x + 1) - 4.0 * im(y, x);
      sum += v;
      sum2 += v * v;
    }
  }
  double mean = sum / n;
  return sum2 / n - mean * mean;
}

int edge_count(const img::Gray& im, double low, double high) {
  if (!(low >= 0.0 && low < high))
    throw std::invalid_argument("edge_count: need 0 <= low < high");
  const Eigen::Index h = im.rows(), w = im.cols();
  if (h < 3 || w < 3) return 0;

  // 0 = none, 1 = weak, 2 = strong
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> cls =
      Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(h, w);
  std::deque<std::pair<Eigen::Index, Eigen::Index>> frontier;

  for (Eigen::Index y = 1; y + 1 < h; ++y) {
    for (Eigen::Index x = 1; x + 1 < w; ++x) {
      double gx = (im(y - 1, x + 1) + 2.0 * im(y, x + 1) + im(y + 1, x + 1)) -
                  (im(y - 1, x - 1) + 2.0 * im(y, x - 1) + im(y + 1, x - 1));
      double gy = (im(y + 1, x - 1) + 2.0 * im(y + 1, x) + im(y + 1, x + 1)) -
                  (im(y - 1, x - 1) + 2.0 * im(y - 1, x) + im(y - 1, x + 1));
      double mag = std::sqrt(gx * gx + gy * gy);
      if (mag >= high) {
        cls(y, x) = 2;
        frontier.emplace_back(y, x);
      } else if (mag >= low) {
        cls(y, x) = 1;
      }
    }
  }

  // grow strong edges through weak pixels (8-connectivity)
  int count = static_cast<int>(frontier.size());
  while (!frontier.empty()) {
    auto [y, x] = frontier.front();
    frontier.pop_front();
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        Eigen::Index ny = y + dy, nx = x + dx;
        if (ny < 0 || nx < 0 || ny >= h || nx >= w) continue;
        if (cls(ny, nx) == 1) {
          cls(ny, nx) = 2;
          ++count;
          frontier.emplace_back(ny, nx);
        }
      }
  }
  return count;
}

double contrast_std(const img::Gray& im) {
  if (im.size() == 0) throw std::invalid_argument("contrast_std: empty raster");
  double mean = im.mean();
  double var = (im.array() - mean).square().mean();
  return std::sqrt(var);
}

std::array<double, 3> channel_means(const img::Frame& f) {
  if (f.rgb) return {f.rgb->r.mean(), f.rgb->g.mean(), f.rgb->b.mean()};
  double m = mean_brightness(f.gray);
  return {m, m, m};
}

std::vector<FrameQualityRecord> quality_table(const std::vector<img::Frame>& frames,
                                              double fps, const EdgeThresholds& thr) {
  if (!(fps > 0.0)) throw std::invalid_argument("quality_table: fps must be positive");
  std::vector<FrameQualityRecord> out;
  out.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    FrameQualityRecord r;
    r.frame_index = static_cast<int>(i);
    r.timestamp_ms = std::llround(static_cast<double>(i) * 1000.0 / fps);
    r.brightness_mean = mean_brightness(f.gray);
    r.blur_laplacian_var = laplacian_variance(f.gray);
    r.edge_count = edge_count(f.gray, thr.low, thr.high);
    r.contrast_std = contrast_std(f.gray);
    auto ch = channel_means(f);
    r.r_mean = ch[0];
    r.g_mean = ch[1];
    r.b_mean = ch[2];
    out.push_back(r);
  }
  return out;
}

namespace {
std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}
}  // namespace

std::string quality_csv(const std::vector<FrameQualityRecord>& records) {
  std::string s =
      "frame_index,timestamp_ms,brightness_mean,blur_laplacian_var,edge_count,"
      "contrast_std,r_mean,g_mean,b_mean\n";
  for (const auto& r : records) {
    s += std::to_string(r.frame_index);
    s += ',';
    s += std::to_string(r.timestamp_ms);
    s += ',';
    s += fmt_double(r.brightness_mean);
    s += ',';
    s += fmt_double(r.blur_laplacian_var);
    s += ',';
    s += std::to_string(r.edge_count);
    s += ',';
    s += fmt_double(r.contrast_std);
    s += ',';
    s += fmt_double(r.r_mean);
    s += ',';
    s += fmt_double(r.g_mean);
    s += ',';
    s += fmt_double(r.b_mean);
    s += '\n';
  }
  return s;
}

void write_quality_csv(const std::string& path,
                       const std::vector<FrameQualityRecord>& records) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("quality_csv: cannot write " + path);
  f << quality_csv(records);
}

}  // namespace avgraph::frames
