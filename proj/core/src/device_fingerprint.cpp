#include "avgraph/device_fingerprint.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "avgraph/signal/fft.hpp"

namespace avgraph::device {

using json = nlohmann::json;

namespace {

constexpr double kTiny = 1e-12;

double pearson(const std::vector<double>& x, const std::vector<double>& y,
               bool& degenerate) {
  const size_t n = x.size();
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, syy = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx < kTiny || syy < kTiny) {
    degenerate = true;
    return 0.0;
  }
  degenerate = false;
  return sxy / std::sqrt(sxx * syy);
}

// Normalized distance from the centered DC bin; the farthest bin maps to 1.
Eigen::MatrixXd radius_grid(Eigen::Index rows, Eigen::Index cols) {
  const double cr = static_cast<double>(rows / 2);
  const double cc = static_cast<double>(cols / 2);
  Eigen::MatrixXd r(rows, cols);
  double maxr = 0.0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double d = std::hypot(i - cr, j - cc);
      r(i, j) = d;
      maxr = std::max(maxr, d);
    }
  }
  if (maxr > 0) r /= maxr;
  return r;
}

}  // namespace

Eigen::MatrixXd fft2_log_magnitude(const img::Gray& image) {
  if (image.rows() < 8 || image.cols() < 8)
    throw std::invalid_argument("image must be at least 8x8");
  const Eigen::MatrixXcd F = signal::fft2_real(image);
  const Eigen::Index R = F.rows(), C = F.cols();
  Eigen::MatrixXd out(R, C);
  for (Eigen::Index i = 0; i < R; ++i) {
    for (Eigen::Index j = 0; j < C; ++j) {
      // fftshift: DC moves to (R/2, C/2).
      out((i + R / 2) % R, (j + C / 2) % C) = std::log1p(std::abs(F(i, j)));
    }
  }
  return out;
}

BandEnergy band_energy_ratios(const Eigen::MatrixXd& spectrum, double r_low,
                              double r_high) {
  if (!(r_low > 0 && r_low < r_high && r_high < 1))
    throw std::invalid_argument("band radii must satisfy 0 < r_low < r_high < 1");
  const Eigen::MatrixXd r = radius_grid(spectrum.rows(), spectrum.cols());
  const Eigen::Index cr = spectrum.rows() / 2, cc = spectrum.cols() / 2;

  BandEnergy be;
  double total = 0.0;
  for (Eigen::Index i = 0; i < spectrum.rows(); ++i) {
    for (Eigen::Index j = 0; j < spectrum.cols(); ++j) {
      if (i == cr && j == cc) continue;
      const double e = spectrum(i, j) * spectrum(i, j);
      total += e;
      if (r(i, j) < r_low) be.low += e;
      else if (r(i, j) < r_high) be.mid += e;
      else be.high += e;
    }
  }
  if (total < kTiny) {
    return BandEnergy{0.0, 0.0, 0.0, true};
  }
  be.low /= total;
  be.mid /= total;
  be.high /= total;
  return be;
}

SymmetryScore symmetry_score(const Eigen::MatrixXd& spectrum) {
  const Eigen::Index R = spectrum.rows(), C = spectrum.cols();
  const Eigen::Index half = C / 2;
  std::vector<double> left, right;
  left.reserve(R * half);
  right.reserve(R * half);
  for (Eigen::Index i = 0; i < R; ++i) {
    for (Eigen::Index j = 0; j < half; ++j) {
      left.push_back(spectrum(i, j));
      right.push_back(spectrum(i, C - 1 - j));
    }
  }
  SymmetryScore s;
  s.value = pearson(left, right, s.degenerate);
  return s;
}

double spectral_entropy(const Eigen::MatrixXd& spectrum) {
  const Eigen::Index cr = spectrum.rows() / 2, cc = spectrum.cols() / 2;
  double total = 0.0;
  for (Eigen::Index i = 0; i < spectrum.rows(); ++i) {
    for (Eigen::Index j = 0; j < spectrum.cols(); ++j) {
      if (i == cr && j == cc) continue;
      total += spectrum(i, j) * spectrum(i, j);
    }
  }
  if (total <= 0.0) throw std::invalid_argument("spectrum carries no energy");

  double h = 0.0;
  for (Eigen::Index i = 0; i < spectrum.rows(); ++i) {
    for (Eigen::Index j = 0; j < spectrum.cols(); ++j) {
      if (i == cr && j == cc) continue;
      const double e = spectrum(i, j) * spectrum(i, j);
      if (e <= 0.0) continue;
      const double p = e / total;
      h -= p * std::log2(p);
    }
  }
  return h;
}

double center_energy_region(const Eigen::MatrixXd& spectrum, double quantile) {
  if (!(quantile > 0 && quantile <= 1))
    throw std::invalid_argument("quantile must lie in (0,1]");
  const Eigen::Index R = spectrum.rows(), C = spectrum.cols();
  const Eigen::MatrixXd r = radius_grid(R, C);

  struct Bin {
    double radius;
    double energy;
  };
  std::vector<Bin> bins;
  bins.reserve(R * C);
  double total = 0.0;
  for (Eigen::Index i = 0; i < R; ++i) {
    for (Eigen::Index j = 0; j < C; ++j) {
      const double e = spectrum(i, j) * spectrum(i, j);
      bins.push_back({r(i, j), e});
      total += e;
    }
  }
  if (total <= 0.0) throw std::invalid_argument("spectrum carries no energy");

  std::sort(bins.begin(), bins.end(),
            [](const Bin& a, const Bin& b) { return a.radius < b.radius; });

  double cum = 0.0;
  size_t count = 0;
  size_t idx = 0;
  while (idx < bins.size() && cum < quantile * total) {
    // Whole radius shells enter at once (disk sweep).
    const double shell = bins[idx].radius;
    while (idx < bins.size() && bins[idx].radius == shell) {
      cum += bins[idx].energy;
      ++count;
      ++idx;
    }
  }
  return static_cast<double>(count) / static_cast<double>(bins.size());
}

bool sharpen_detect(const Eigen::MatrixXd& spectrum, double factor, double r_high,
                    int shells) {
  if (shells < 4) throw std::invalid_argument("need at least 4 radial shells");
  const Eigen::MatrixXd r = radius_grid(spectrum.rows(), spectrum.cols());

  std::vector<double> energy(shells, 0.0);
  std::vector<int> count(shells, 0);
  for (Eigen::Index i = 0; i < spectrum.rows(); ++i) {
    for (Eigen::Index j = 0; j < spectrum.cols(); ++j) {
      int s = static_cast<int>(r(i, j) * shells);
      s = std::min(s, shells - 1);
      energy[s] += spectrum(i, j) * spectrum(i, j);
      count[s] += 1;
    }
  }
  std::vector<double> profile(shells, 0.0);
  double total = 0.0;
  for (int s = 0; s < shells; ++s) {
    if (count[s] > 0) profile[s] = energy[s] / count[s];
    total += energy[s];
  }
  if (total <= 0.0) return false;

  int peak0 = 0;
  for (int s = 1; s < shells; ++s) {
    if (profile[s] > profile[peak0]) peak0 = s;
  }
  if (peak0 >= shells - 2) return false;

  int valley = peak0 + 1;
  for (int s = peak0 + 1; s < shells; ++s) {
    if (profile[s] < profile[valley]) valley = s;
  }

  double outer = -1.0;
  for (int s = valley + 1; s < shells; ++s) {
    const double shell_center = (s + 0.5) / shells;
    if (shell_center < r_high) continue;
    outer = std::max(outer, profile[s]);
  }
  if (outer < 0) return false;
  if (profile[valley] <= 0.0) return outer > 0.0;
  return outer / profile[valley] >= factor;
}

ImageSpectralFeatures image_spectral_features(const img::Gray& image) {
  const Eigen::MatrixXd spec = fft2_log_magnitude(image);
  const BandEnergy be = band_energy_ratios(spec);
  ImageSpectralFeatures f;
  f.fft_mid_energy_ratio = be.mid;
  f.fft_high_energy_suppression = be.high;
  f.fft_symmetry_score = symmetry_score(spec).value;
  f.compression_entropy = be.degenerate ? 0.0 : spectral_entropy(spec);
  f.center_energy_region = center_energy_region(spec);
  f.sharpness_post_filter = sharpen_detect(spec);
  return f;
}

ImageSpectralFeatures average_features(const std::vector<ImageSpectralFeatures>& v) {
  if (v.empty()) throw std::invalid_argument("no feature rows to average");
  ImageSpectralFeatures m;
  int sharpen_votes = 0;
  for (const auto& f : v) {
    m.fft_mid_energy_ratio += f.fft_mid_energy_ratio;
    m.fft_high_energy_suppression += f.fft_high_energy_suppression;
    m.fft_symmetry_score += f.fft_symmetry_score;
    m.compression_entropy += f.compression_entropy;
    m.center_energy_region += f.center_energy_region;
    sharpen_votes += f.sharpness_post_filter ? 1 : 0;
  }
  const double n = static_cast<double>(v.size());
  m.fft_mid_energy_ratio /= n;
  m.fft_high_energy_suppression /= n;
  m.fft_symmetry_score /= n;
  m.compression_entropy /= n;
  m.center_energy_region /= n;
  m.sharpness_post_filter = 2 * sharpen_votes > static_cast<int>(v.size());
  return m;
}

AudioSpectralFeatures audio_spectral_features(const std::vector<double>& samples,
                                              int sample_rate_hz) {
  if (sample_rate_hz <= 0) throw std::invalid_argument("bad sample rate");
  if (samples.size() < static_cast<size_t>(sample_rate_hz))
    throw std::invalid_argument("need at least one second of audio");

  constexpr size_t kWin = 1024;
  constexpr size_t kHop = 512;
  if (samples.size() < kWin)
    throw std::invalid_argument("need at least one second of audio");

  std::vector<double> window(kWin);
  for (size_t i = 0; i < kWin; ++i)
    window[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / kWin);

  const size_t segments = (samples.size() - kWin) / kHop + 1;
  std::vector<double> psd(kWin / 2 + 1, 0.0);
  std::vector<double> buf(kWin);
  for (size_t s = 0; s < segments; ++s) {
    for (size_t i = 0; i < kWin; ++i) buf[i] = samples[s * kHop + i] * window[i];
    const auto spec = signal::fft_real(buf);
    for (size_t b = 0; b <= kWin / 2; ++b) psd[b] += std::norm(spec[b]);
  }
  for (double& v : psd) v /= static_cast<double>(segments);

  const double bin_hz = static_cast<double>(sample_rate_hz) / kWin;
  auto band_stats = [&](double lo_hz, double hi_hz) {
    double sum = 0.0;
    int count = 0;
    for (size_t b = 1; b < psd.size(); ++b) {
      const double f = b * bin_hz;
      if (f >= lo_hz && f <= hi_hz) {
        sum += psd[b];
        ++count;
      }
    }
    return std::pair<double, double>(sum, count > 0 ? sum / count : 0.0);
  };

  double total = 0.0;
  for (size_t b = 1; b < psd.size(); ++b) total += psd[b];

  const auto [low_sum, low_mean] = band_stats(0.0, 300.0 - 1e-9);
  const auto [mid_sum, mid_mean] = band_stats(500.0, 2500.0);
  const auto [high_sum, high_mean] =
      band_stats(4000.0 + 1e-9, sample_rate_hz / 2.0);
  (void)low_sum;
  (void)high_sum;

  AudioSpectralFeatures f;
  f.mid_freq_energy_density = total > kTiny ? mid_sum / total : 0.0;
  if (mid_mean > kTiny) {
    f.high_freq_suppression_rate =
        std::clamp(1.0 - high_mean / mid_mean, 0.0, 1.0);
    f.low_freq_drop_ratio = std::clamp(1.0 - low_mean / mid_mean, 0.0, 1.0);
  }

  // Symmetry of the averaged profile: first half vs reversed second half.
  {
    std::vector<double> ac(psd.begin() + 1, psd.end());
    const size_t half = ac.size() / 2;
    std::vector<double> a(ac.begin(), ac.begin() + half);
    std::vector<double> b(ac.rbegin(), ac.rbegin() + half);
    bool degenerate = false;
    f.spectral_symmetry_index = std::clamp(pearson(a, b, degenerate), 0.0, 1.0);
  }

  // Dispersion (std, kHz) of local-maximum locations above 4 kHz. The floor
  // keeps round-off dust in otherwise silent bands from counting as peaks.
  {
    double psd_max = 0.0;
    for (double v : psd) psd_max = std::max(psd_max, v);
    const double floor = 1e-9 * psd_max;
    std::vector<double> peaks;
    for (size_t b = 2; b + 1 < psd.size(); ++b) {
      const double fhz = b * bin_hz;
      if (fhz <= 4000.0) continue;
      if (psd[b] <= floor) continue;
      if (psd[b] > psd[b - 1] && psd[b] > psd[b + 1]) peaks.push_back(fhz / 1000.0);
    }
    if (peaks.size() >= 2) {
      const double mean = std::accumulate(peaks.begin(), peaks.end(), 0.0) /
                          peaks.size();
      double var = 0.0;
      for (double p : peaks) var += (p - mean) * (p - mean);
      f.noise_peak_dispersion = std::sqrt(var / peaks.size());
    }
  }
  return f;
}

const char* codec_name(CodecType c) {
  switch (c) {
    case CodecType::H264: return "H264";
    case CodecType::H265: return "H265";
    case CodecType::MJPEG: return "MJPEG";
    case CodecType::Unknown: return "Unknown";
  }
  return "Unknown";
}

const char* device_class_name(DeviceClass d) {
  switch (d) {
    case DeviceClass::MobileMid: return "MobileMid";
    case DeviceClass::MobileHigh: return "MobileHigh";
    case DeviceClass::ProCam: return "ProCam";
    case DeviceClass::Unknown: return "Unknown";
  }
  return "Unknown";
}

const char* pass_count_name(PassCount p) {
  switch (p) {
    case PassCount::Native: return "Native";
    case PassCount::Transcoded: return "Transcoded";
    case PassCount::Unknown: return "Unknown";
  }
  return "Unknown";
}

double Rule::param(const std::string& key, double fallback) const {
  for (const auto& [k, v] : params) {
    if (k == key) return v;
  }
  return fallback;
}

RuleSet default_rules() {
  RuleSet rs;
  rs.rules.push_back({"R1", 0.87, "codec_h264",
                      {{"mid_min", 0.6}, {"high_share_max", 0.35}}});
  rs.rules.push_back({"R2", 0.91, "pass_count",
                      {{"symmetry_min", 0.8}, {"entropy_max", 4.5}}});
  rs.rules.push_back({"R3", 0.76, "device_mobile_mid",
                      {{"entropy_min", 2.5}, {"entropy_max", 5.5}}});
  rs.rules.push_back({"R4", 0.66, "entropy_confidence", {{"entropy_scale", 8.0}}});
  return rs;
}

namespace {

std::string fmt_inputs(std::initializer_list<std::pair<const char*, double>> kv) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [k, v] : kv) {
    if (!first) os << ", ";
    first = false;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s=%.6g", k, v);
    os << buf;
  }
  return os.str();
}

}  // namespace

DeviceFingerprint classify_device(const ImageSpectralFeatures& img_features,
                                  const std::optional<AudioSpectralFeatures>& audio,
                                  const RuleSet& rules) {
  (void)audio;  // default rules key off image statistics only
  DeviceFingerprint fp;
  for (const Rule& r : rules.rules) {
    if (r.action == "codec_h264") {
      if (img_features.fft_mid_energy_ratio >= r.param("mid_min", 0.6) &&
          img_features.fft_high_energy_suppression <=
              r.param("high_share_max", 0.35)) {
        fp.codec_type_label = CodecType::H264;
        fp.rule_trace.push_back(
            {r.id,
             fmt_inputs({{"mid", img_features.fft_mid_energy_ratio},
                         {"high_share", img_features.fft_high_energy_suppression}}),
             r.priority});
      }
    } else if (r.action == "pass_count") {
      // Pass-count evidence only makes sense once a codec was identified.
      if (fp.codec_type_label != CodecType::Unknown) {
        const bool native =
            img_features.fft_symmetry_score >= r.param("symmetry_min", 0.8) &&
            img_features.compression_entropy <= r.param("entropy_max", 4.5);
        fp.compression_pass_count = native ? PassCount::Native
                                           : PassCount::Transcoded;
        fp.rule_trace.push_back(
            {r.id,
             fmt_inputs({{"symmetry", img_features.fft_symmetry_score},
                         {"entropy", img_features.compression_entropy}}),
             r.priority});
      }
    } else if (r.action == "device_mobile_mid") {
      if (img_features.sharpness_post_filter &&
          img_features.compression_entropy >= r.param("entropy_min", 2.5) &&
          img_features.compression_entropy <= r.param("entropy_max", 5.5)) {
        fp.device_class_label = DeviceClass::MobileMid;
        fp.rule_trace.push_back(
            {r.id,
             fmt_inputs({{"sharpen", 1.0},
                         {"entropy", img_features.compression_entropy}}),
             r.priority});
      }
    } else if (r.action == "entropy_confidence") {
      const double scale = r.param("entropy_scale", 8.0);
      const double contribution =
          r.priority *
          (1.0 - std::min(img_features.compression_entropy, scale) / scale);
      fp.rule_trace.push_back(
          {r.id, fmt_inputs({{"entropy", img_features.compression_entropy}}),
           contribution});
    } else {
      throw std::invalid_argument("unknown rule action: " + r.action);
    }
  }
  return fp;
}

std::string rules_json(const RuleSet& rules) {
  json j;
  json arr = json::array();
  for (const Rule& r : rules.rules) {
    json params = json::object();
    for (const auto& [k, v] : r.params) params[k] = v;
    arr.push_back({{"id", r.id},
                   {"priority", r.priority},
                   {"action", r.action},
                   {"params", std::move(params)}});
  }
  j["rules"] = std::move(arr);
  return j.dump(2);
}

RuleSet rules_from_json(const std::string& text) {
  const json j = json::parse(text);
  RuleSet rs;
  for (const auto& r : j.at("rules")) {
    Rule rule;
    rule.id = r.at("id").get<std::string>();
    rule.priority = r.at("priority").get<double>();
    rule.action = r.at("action").get<std::string>();
    if (r.contains("params")) {
      for (auto it = r["params"].begin(); it != r["params"].end(); ++it) {
        rule.params.emplace_back(it.key(), it.value().get<double>());
      }
    }
    rs.rules.push_back(std::move(rule));
  }
  if (rs.rules.empty()) throw std::invalid_argument("rule set is empty");
  return rs;
}

RuleSet load_rules(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open rules file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return rules_from_json(ss.str());
}

std::string fingerprint_json(const DeviceFingerprint& fp) {
  json j;
  j["codec_type_label"] = codec_name(fp.codec_type_label);
  j["device_class_label"] = device_class_name(fp.device_class_label);
  j["compression_pass_count"] = pass_count_name(fp.compression_pass_count);
  json trace = json::array();
  for (const auto& t : fp.rule_trace) {
    trace.push_back({{"rule_id", t.rule_id},
                     {"fired_inputs", t.fired_inputs},
                     {"contribution", t.contribution}});
  }
  j["rule_trace"] = std::move(trace);
  return j.dump(2);
}

}  // namespace avgraph::device
