#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace avgraph::audio {

inline constexpr double kLogFloor = 1e-10;

// Accepted input rates. 44.1 kHz input is low-passed and resampled to 16 kHz
// before analysis; 8 kHz and 16 kHz pass through.
bool supported_rate(int rate_hz);
std::pair<std::vector<double>, int> resample_for_analysis(
    const std::vector<double>& samples, int rate_hz);

// Magnitude STFT: Hann window (periodic), zero-padded to the next power of
// two. Rows are frequency bins (nfft/2+1), columns are frames; frame count is
// floor((n - win)/hop) + 1. Throws when samples are shorter than one window.
Eigen::MatrixXd stft_magnitude(const std::vector<double>& samples, int rate_hz,
                               double win_ms = 25.0, double hop_ms = 10.0);

struct MelSpectrogram {
  int bands = 128;
  double hop_ms = 10.0;
  double fmin_hz = 0.0;
  double fmax_hz = 4000.0;
  int sample_rate_hz = 16000;
  Eigen::MatrixXd frames;  // bands x time, non-negative
};

// Triangular filterbank, unit peak, corners uniform on the mel scale.
// Returns bands x bins weights for the given FFT size and rate.
Eigen::MatrixXd mel_filterbank(int bands, int nfft, int rate_hz, double fmin_hz,
                               double fmax_hz);

MelSpectrogram mel_spectrogram(const std::vector<double>& samples, int rate_hz,
                               int bands = 128);

// Median-filter harmonic/percussive split with squared soft masks. Median
// windows use symmetric reflection at the borders. Masks sum to 1 per cell;
// outputs reconstruct the input exactly.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> hpss_separate(const Eigen::MatrixXd& spec,
                                                          int median_time = 17,
                                                          int median_freq = 17);

struct EnergyEnvelope {
  std::vector<double> energy;  // linear, one value per hop
  double hop_ms = 10.0;
};

EnergyEnvelope energy_envelope(const std::vector<double>& samples, int rate_hz,
                               double win_ms = 25.0, double hop_ms = 10.0);

struct Segment {
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
};

// Active where smoothed log-energy exceeds median + threshold_db; gaps under
// min_gap_ms merge, segments under min_seg_ms drop.
std::vector<Segment> voice_activity(const EnergyEnvelope& env, double threshold_db = 6.0,
                                    double min_gap_ms = 200.0, double min_seg_ms = 250.0);

// Peak times (ms) of the 2-8 Hz band-passed envelope inside speech segments.
std::vector<double> syllable_peak_times(const EnergyEnvelope& env,
                                        const std::vector<Segment>& segments);

struct WpmResult {
  double wpm = 50.0;
  bool no_speech = false;
};

// (peaks / rho) words * 60 / speech seconds, clamped to [50, 200].
WpmResult wpm_estimate(const std::vector<Segment>& segments, std::size_t n_peaks,
                       double rho = 1.5);

struct PitchResult {
  double variance = 0.0;  // Var(f0) / mean(f0)^2, clamped to [0, 1.5]
  bool unvoiced = false;
  std::vector<double> f0_hz;
};

// Autocorrelation f0 per 25 ms frame inside segments, 60-400 Hz search,
// voicing threshold 0.3 on the normalized peak.
PitchResult pitch_variance(const std::vector<double>& samples, int rate_hz,
                           const std::vector<Segment>& segments);

double pause_gap_ratio(const std::vector<Segment>& segments, std::int64_t total_ms);

// Mean signed first difference of log-energy within +-200 ms of each energy
// peak, scaled so a 20 dB/s rise maps to +1.0, clamped to [-1.5, 2.0].
double command_slope(const EnergyEnvelope& env, double full_scale_db_per_s = 20.0);

struct RegionPrototype {
  std::string region;
  std::vector<double> centroid;
};

struct AccentResult {
  double similarity = 0.0;  // (1 + max cosine) / 2
  std::string top1;
  std::vector<double> distribution;  // aligned with prototype order
};

AccentResult accent_attribution(const std::vector<double>& embedding,
                                const std::vector<RegionPrototype>& prototypes,
                                double temperature = 1.0);

// 13 MFCCs per frame (orthonormal DCT-II of the 26-band log-mel), embedding
// is per-coefficient mean then standard deviation (dimension 26). Requires
// at least one second of audio.
std::vector<double> mfcc_stats(const std::vector<double>& samples, int rate_hz);

struct Projection2D {
  std::vector<std::array<double, 2>> points;
  bool rank_deficient = false;
};

// Top-2 PCA with a fixed sign convention (first nonzero loading positive).
Projection2D accent_projection_2d(const std::vector<std::vector<double>>& embeddings);

struct AcousticVariables {
  double wpm_rate = 50.0;                       // V1
  double pitch_variance = 0.0;                  // V2
  double pause_gap_ratio = 0.0;                 // V3
  double command_slope = 0.0;                   // V4
  double accent_similarity_score = 0.0;         // V5
  std::string accent_class_top1 = "Unknown";    // Y4
  std::vector<double> accent_probability_distribution;
  bool no_speech = false;
  bool unvoiced = false;
  bool accent_skipped = true;  // true when no prototypes were supplied
};

// Full extraction at analysis rate; prototype list may be empty, which skips
// accent attribution. Clamps every variable into its documented range.
AcousticVariables extract_acoustics(const std::vector<double>& samples, int rate_hz,
                                    const std::vector<RegionPrototype>& prototypes,
                                    double temperature = 1.0);

std::vector<RegionPrototype> load_prototypes(const std::string& path);

std::string melspec_csv(const MelSpectrogram& mel);

}  // namespace avgraph::audio
