#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "avgraph/image/raster.hpp"

namespace avgraph::device {

// Centered log(1+|F|) spectrum of a grayscale raster zero-padded to powers of
// two; DC lands at (rows/2, cols/2). Input must be at least 8x8.
Eigen::MatrixXd fft2_log_magnitude(const img::Gray& image);

struct BandEnergy {
  double low = 0.0;
  double mid = 0.0;
  double high = 0.0;
  bool degenerate = false;  // no off-center energy
};

// Squared-cell energy fractions over radial annuli [0,r_low), [r_low,r_high),
// [r_high,1]; radius normalized by the farthest bin so the annuli partition
// the plane. The center (DC) bin is excluded.
BandEnergy band_energy_ratios(const Eigen::MatrixXd& spectrum, double r_low = 0.15,
                              double r_high = 0.60);

struct SymmetryScore {
  double value = 0.0;  // Pearson correlation, left half vs mirrored right half
  bool degenerate = false;
};

SymmetryScore symmetry_score(const Eigen::MatrixXd& spectrum);

// Shannon entropy (bits) of the energy distribution over bins, center excluded.
// Throws when there is no off-center energy.
double spectral_entropy(const Eigen::MatrixXd& spectrum);

// Area fraction of the smallest centered disk holding >= quantile of the total
// energy (center bin included here; a DC-only image yields the minimal disk).
double center_energy_region(const Eigen::MatrixXd& spectrum, double quantile = 0.5);

// True when the radial energy profile dips after its peak and recovers beyond
// r_high by at least `factor` times the valley level (halo left by sharpening).
bool sharpen_detect(const Eigen::MatrixXd& spectrum, double factor = 1.3,
                    double r_high = 0.60, int shells = 32);

struct ImageSpectralFeatures {
  double fft_mid_energy_ratio = 0.0;
  // Share of off-center energy left in the high band; compression drives it
  // toward zero, hence "suppression" reads low for heavily compressed frames.
  double fft_high_energy_suppression = 0.0;
  double fft_symmetry_score = 0.0;
  double compression_entropy = 0.0;
  double center_energy_region = 0.0;
  bool sharpness_post_filter = false;
};

ImageSpectralFeatures image_spectral_features(const img::Gray& image);

// Component-wise mean; the sharpen flag by majority vote.
ImageSpectralFeatures average_features(const std::vector<ImageSpectralFeatures>& v);

struct AudioSpectralFeatures {
  double mid_freq_energy_density = 0.0;   // 500-2500 Hz share of AC power
  double high_freq_suppression_rate = 0.0;  // 1 - high/mid mean level, clamped
  double spectral_symmetry_index = 0.0;
  double noise_peak_dispersion = 0.0;  // std of >4 kHz peak locations, kHz
  double low_freq_drop_ratio = 0.0;    // 1 - sub-300 Hz/mid mean level, clamped
};

// Welch-averaged power spectrum (1024-sample Hann windows, 50% overlap).
// Requires at least one second of audio.
AudioSpectralFeatures audio_spectral_features(const std::vector<double>& samples,
                                              int sample_rate_hz);

enum class CodecType { H264, H265, MJPEG, Unknown };
enum class DeviceClass { MobileMid, MobileHigh, ProCam, Unknown };
enum class PassCount { Native, Transcoded, Unknown };

const char* codec_name(CodecType c);
const char* device_class_name(DeviceClass d);
const char* pass_count_name(PassCount p);

struct TraceEntry {
  std::string rule_id;
  std::string fired_inputs;
  double contribution = 0.0;
};

struct DeviceFingerprint {
  CodecType codec_type_label = CodecType::Unknown;
  DeviceClass device_class_label = DeviceClass::Unknown;
  PassCount compression_pass_count = PassCount::Unknown;
  std::vector<TraceEntry> rule_trace;
};

struct Rule {
  std::string id;
  double priority = 0.0;
  std::string action;
  // Threshold parameters, keyed by name (see default_rules()).
  std::vector<std::pair<std::string, double>> params;

  double param(const std::string& key, double fallback) const;
};

struct RuleSet {
  std::vector<Rule> rules;
};

// R1: mid >= 0.6 and high share <= 0.35 -> H264-family codec (prio 0.87).
// R2: symmetry >= 0.8 and entropy <= 4.5 -> Native else Transcoded, evaluated
//     only once a codec was identified (prio 0.91).
// R3: sharpening halo and entropy in [2.5, 5.5] -> MobileMid (prio 0.76).
// R4: entropy-derived confidence term, trace only (prio 0.66).
RuleSet default_rules();

DeviceFingerprint classify_device(const ImageSpectralFeatures& img_features,
                                  const std::optional<AudioSpectralFeatures>& audio,
                                  const RuleSet& rules);

std::string rules_json(const RuleSet& rules);
RuleSet rules_from_json(const std::string& text);
RuleSet load_rules(const std::string& path);

std::string fingerprint_json(const DeviceFingerprint& fp);

}  // namespace avgraph::device
