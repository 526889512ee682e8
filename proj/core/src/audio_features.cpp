#include "avgraph/audio_features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <stdexcept>

#include "avgraph/signal/fft.hpp"

namespace avgraph::audio {

namespace {
constexpr double kPi = 3.14159265358979323846;

double clamp(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

double log_db(double energy) { return 10.0 * std::log10(std::max(energy, kLogFloor)); }

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double hi = *mid;
  if (v.size() % 2 == 1) return hi;
  auto lo_it = std::max_element(v.begin(), mid);
  return 0.5 * (*lo_it + hi);
}

// centered moving average with clamped borders
std::vector<double> moving_average(const std::vector<double>& x, int half) {
  const int n = static_cast<int>(x.size());
  std::vector<double> out(x.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    int a = std::max(0, i - half), b = std::min(n - 1, i + half);
    double s = 0.0;
    for (int j = a; j <= b; ++j) s += x[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = s / (b - a + 1);
  }
  return out;
}

}  // namespace

bool supported_rate(int rate_hz) {
  return rate_hz == 8000 || rate_hz == 16000 || rate_hz == 44100;
}

std::pair<std::vector<double>, int> resample_for_analysis(
    const std::vector<double>& samples, int rate_hz) {
  if (!supported_rate(rate_hz))
    throw std::invalid_argument("audio: unsupported sample rate " + std::to_string(rate_hz));
  if (rate_hz != 44100) return {samples, rate_hz};

  // windowed-sinc low-pass at 7 kHz, then linear interpolation at 44100/16000
  constexpr int kTaps = 101;
  constexpr int kHalf = kTaps / 2;
  const double fcn = 7000.0 / 44100.0;
  std::array<double, kTaps> h{};
  double sum = 0.0;
  for (int i = 0; i < kTaps; ++i) {
    int m = i - kHalf;
    double v = (m == 0) ? 2.0 * fcn : std::sin(2.0 * kPi * fcn * m) / (kPi * m);
    v *= 0.54 - 0.46 * std::cos(2.0 * kPi * i / (kTaps - 1));
    h[static_cast<std::size_t>(i)] = v;
    sum += v;
  }
  for (auto& v : h) v /= sum;

  const int n = static_cast<int>(samples.size());
  std::vector<double> filtered(samples.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int t = 0; t < kTaps; ++t) {
      int j = i + t - kHalf;
      if (j >= 0 && j < n) acc += h[static_cast<std::size_t>(t)] * samples[static_cast<std::size_t>(j)];
    }
    filtered[static_cast<std::size_t>(i)] = acc;
  }

  const double ratio = 44100.0 / 16000.0;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(static_cast<double>(n) / ratio) + 1);
  for (std::size_t k = 0;; ++k) {
    double t = static_cast<double>(k) * ratio;
    auto i0 = static_cast<std::size_t>(t);
    if (i0 + 1 >= samples.size()) break;
    double frac = t - static_cast<double>(i0);
    out.push_back(filtered[i0] * (1.0 - frac) + filtered[i0 + 1] * frac);
  }
  return {std::move(out), 16000};
}

Eigen::MatrixXd stft_magnitude(const std::vector<double>& samples, int rate_hz,
                               double win_ms, double hop_ms) {
  const int win = static_cast<int>(std::lround(win_ms * rate_hz / 1000.0));
  const int hop = static_cast<int>(std::lround(hop_ms * rate_hz / 1000.0));
  if (win < 2 || hop < 1) throw std::invalid_argument("stft: window/hop too small");
  const auto n = static_cast<int>(samples.size());
  if (n < win) throw std::invalid_argument("stft: samples shorter than one window");

  const std::size_t nfft = signal::next_pow2(static_cast<std::size_t>(win));
  const int n_frames = (n - win) / hop + 1;
  const auto bins = static_cast<Eigen::Index>(nfft / 2 + 1);

  std::vector<double> window(static_cast<std::size_t>(win));
  for (int i = 0; i < win; ++i)
    window[static_cast<std::size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / win);

  Eigen::MatrixXd mag(bins, n_frames);
  std::vector<std::complex<double>> buf(nfft);
  for (int f = 0; f < n_frames; ++f) {
    std::fill(buf.begin(), buf.end(), std::complex<double>{0.0, 0.0});
    const int off = f * hop;
    for (int i = 0; i < win; ++i)
      buf[static_cast<std::size_t>(i)] = {samples[static_cast<std::size_t>(off + i)] * window[static_cast<std::size_t>(i)], 0.0};
    signal::fft(buf, false);
    for (Eigen::Index b = 0; b < bins; ++b) mag(b, f) = std::abs(buf[static_cast<std::size_t>(b)]);
  }
  return mag;
}

Eigen::MatrixXd mel_filterbank(int bands, int nfft, int rate_hz, double fmin_hz,
                               double fmax_hz) {
  if (bands < 1) throw std::invalid_argument("mel_filterbank: bands must be >= 1");
  auto hz_to_mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
  auto mel_to_hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };

  const double mel_lo = hz_to_mel(fmin_hz), mel_hi = hz_to_mel(fmax_hz);
  std::vector<double> corners(static_cast<std::size_t>(bands) + 2);
  for (int i = 0; i < bands + 2; ++i)
    corners[static_cast<std::size_t>(i)] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (bands + 1));

  const int bins = nfft / 2 + 1;
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(bands, bins);
  for (int b = 0; b < bins; ++b) {
    const double f = static_cast<double>(b) * rate_hz / nfft;
    for (int m = 0; m < bands; ++m) {
      const double fl = corners[static_cast<std::size_t>(m)];
      const double fc = corners[static_cast<std::size_t>(m) + 1];
      const double fr = corners[static_cast<std::size_t>(m) + 2];
      if (f > fl && f < fc)
        fb(m, b) = (f - fl) / (fc - fl);
      else if (f == fc)
        fb(m, b) = 1.0;
      else if (f > fc && f < fr)
        fb(m, b) = (fr - f) / (fr - fc);
    }
  }
  return fb;
}

MelSpectrogram mel_spectrogram(const std::vector<double>& samples, int rate_hz,
                               int bands) {
  auto [x, rate] = resample_for_analysis(samples, rate_hz);
  if (x.empty()) throw std::invalid_argument("mel_spectrogram: empty samples");

  MelSpectrogram mel;
  mel.bands = bands;
  mel.sample_rate_hz = rate;
  const Eigen::MatrixXd mag = stft_magnitude(x, rate, 25.0, mel.hop_ms);
  const int win = static_cast<int>(std::lround(25.0 * rate / 1000.0));
  const auto nfft = static_cast<int>(signal::next_pow2(static_cast<std::size_t>(win)));
  const Eigen::MatrixXd fb = mel_filterbank(bands, nfft, rate, mel.fmin_hz, mel.fmax_hz);
  mel.frames = fb * mag;
  return mel;
}

namespace {

// median filter one row/column with symmetric reflection
std::vector<double> medfilt(const std::vector<double>& x, int len) {
  const int n = static_cast<int>(x.size());
  const int half = len / 2;
  std::vector<double> out(x.size());
  std::vector<double> win(static_cast<std::size_t>(len));
  for (int i = 0; i < n; ++i) {
    for (int d = -half; d <= half; ++d) {
      int j = i + d;
      if (j < 0) j = -j - 1;
      if (j >= n) j = 2 * n - j - 1;
      j = std::clamp(j, 0, n - 1);
      win[static_cast<std::size_t>(d + half)] = x[static_cast<std::size_t>(j)];
    }
    std::vector<double> tmp = win;
    auto mid = tmp.begin() + static_cast<std::ptrdiff_t>(tmp.size() / 2);
    std::nth_element(tmp.begin(), mid, tmp.end());
    out[static_cast<std::size_t>(i)] = *mid;  // len odd by construction
  }
  return out;
}

}  // namespace

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> hpss_separate(const Eigen::MatrixXd& spec,
                                                          int median_time,
                                                          int median_freq) {
  if (spec.rows() < 3 || spec.cols() < 3)
    throw std::invalid_argument("hpss_separate: spectrogram smaller than 3x3");
  if (median_time % 2 == 0 || median_freq % 2 == 0)
    throw std::invalid_argument("hpss_separate: median lengths must be odd");

  const Eigen::Index nb = spec.rows(), nt = spec.cols();
  Eigen::MatrixXd H(nb, nt), P(nb, nt);

  std::vector<double> line;
  for (Eigen::Index b = 0; b < nb; ++b) {  // harmonic: median along time
    line.assign(static_cast<std::size_t>(nt), 0.0);
    for (Eigen::Index t = 0; t < nt; ++t) line[static_cast<std::size_t>(t)] = spec(b, t);
    auto f = medfilt(line, median_time);
    for (Eigen::Index t = 0; t < nt; ++t) H(b, t) = f[static_cast<std::size_t>(t)];
  }
  for (Eigen::Index t = 0; t < nt; ++t) {  // percussive: median along frequency
    line.assign(static_cast<std::size_t>(nb), 0.0);
    for (Eigen::Index b = 0; b < nb; ++b) line[static_cast<std::size_t>(b)] = spec(b, t);
    auto f = medfilt(line, median_freq);
    for (Eigen::Index b = 0; b < nb; ++b) P(b, t) = f[static_cast<std::size_t>(b)];
  }

  Eigen::MatrixXd harm(nb, nt), perc(nb, nt);
  for (Eigen::Index b = 0; b < nb; ++b)
    for (Eigen::Index t = 0; t < nt; ++t) {
      const double h2 = H(b, t) * H(b, t);
      const double p2 = P(b, t) * P(b, t);
      const double den = h2 + p2;
      const double mh = den > 0.0 ? h2 / den : 0.5;
      harm(b, t) = mh * spec(b, t);
      perc(b, t) = (1.0 - mh) * spec(b, t);
    }
  return {std::move(harm), std::move(perc)};
}

EnergyEnvelope energy_envelope(const std::vector<double>& samples, int rate_hz,
                               double win_ms, double hop_ms) {
  const int win = static_cast<int>(std::lround(win_ms * rate_hz / 1000.0));
  const int hop = static_cast<int>(std::lround(hop_ms * rate_hz / 1000.0));
  const auto n = static_cast<int>(samples.size());
  if (win < 1 || hop < 1 || n < win)
    throw std::invalid_argument("energy_envelope: samples shorter than one window");
  EnergyEnvelope env;
  env.hop_ms = hop_ms;
  const int n_frames = (n - win) / hop + 1;
  env.energy.resize(static_cast<std::size_t>(n_frames));
  for (int f = 0; f < n_frames; ++f) {
    double s = 0.0;
    for (int i = 0; i < win; ++i) {
      double v = samples[static_cast<std::size_t>(f * hop + i)];
      s += v * v;
    }
    env.energy[static_cast<std::size_t>(f)] = s;
  }
  return env;
}

std::vector<Segment> voice_activity(const EnergyEnvelope& env, double threshold_db,
                                    double min_gap_ms, double min_seg_ms) {
  if (env.energy.empty()) throw std::invalid_argument("voice_activity: empty envelope");
  std::vector<double> db(env.energy.size());
  for (std::size_t i = 0; i < env.energy.size(); ++i) db[i] = log_db(env.energy[i]);
  db = moving_average(db, 2);
  const double thr = median_of(db) + threshold_db;

  std::vector<Segment> segs;
  const auto n = static_cast<int>(db.size());
  int start = -1;
  for (int i = 0; i <= n; ++i) {
    bool active = i < n && db[static_cast<std::size_t>(i)] > thr;
    if (active && start < 0) start = i;
    if (!active && start >= 0) {
      segs.push_back({static_cast<std::int64_t>(std::llround(start * env.hop_ms)),
                      static_cast<std::int64_t>(std::llround(i * env.hop_ms))});
      start = -1;
    }
  }

  // merge close segments, then drop short ones
  std::vector<Segment> merged;
  for (const auto& s : segs) {
    if (!merged.empty() && static_cast<double>(s.start_ms - merged.back().end_ms) < min_gap_ms)
      merged.back().end_ms = s.end_ms;
    else
      merged.push_back(s);
  }
  std::vector<Segment> out;
  for (const auto& s : merged)
    if (static_cast<double>(s.end_ms - s.start_ms) >= min_seg_ms) out.push_back(s);
  return out;
}

namespace {
bool in_segments(double t_ms, const std::vector<Segment>& segs) {
  for (const auto& s : segs)
    if (t_ms >= static_cast<double>(s.start_ms) && t_ms < static_cast<double>(s.end_ms))
      return true;
  return false;
}
}  // namespace

std::vector<double> syllable_peak_times(const EnergyEnvelope& env,
                                        const std::vector<Segment>& segments) {
  const auto n = static_cast<int>(env.energy.size());
  if (n < 3) return {};
  const double fs = 1000.0 / env.hop_ms;

  // RBJ biquad band-pass centered on sqrt(2*8) = 4 Hz, Q = f0/(f2-f1)
  const double f0 = 4.0, q = 4.0 / 6.0;
  const double w0 = 2.0 * kPi * f0 / fs;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  const double b0 = alpha / a0, b2 = -alpha / a0;
  const double a1 = -2.0 * std::cos(w0) / a0, a2 = (1.0 - alpha) / a0;

  std::vector<double> y(env.energy.size(), 0.0);
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
  for (int i = 0; i < n; ++i) {
    double x = env.energy[static_cast<std::size_t>(i)];
    double v = b0 * x + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = x;
    y2 = y1;
    y1 = v;
    y[static_cast<std::size_t>(i)] = v;
  }

  std::vector<double> peaks;
  const double min_sep_ms = 120.0;
  double last = -1e18;
  for (int i = 1; i + 1 < n; ++i) {
    double t_ms = i * env.hop_ms;
    if (y[static_cast<std::size_t>(i)] <= 0.0) continue;
    if (!(y[static_cast<std::size_t>(i)] > y[static_cast<std::size_t>(i) - 1] &&
          y[static_cast<std::size_t>(i)] >= y[static_cast<std::size_t>(i) + 1]))
      continue;
    if (!in_segments(t_ms, segments)) continue;
    if (t_ms - last < min_sep_ms) continue;
    peaks.push_back(t_ms);
    last = t_ms;
  }
  return peaks;
}

WpmResult wpm_estimate(const std::vector<Segment>& segments, std::size_t n_peaks,
                       double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("wpm_estimate: rho must be positive");
  double speech_s = 0.0;
  for (const auto& s : segments) speech_s += static_cast<double>(s.end_ms - s.start_ms) / 1000.0;
  WpmResult r;
  if (speech_s <= 0.0 || n_peaks == 0) {
    r.wpm = 50.0;
    r.no_speech = true;
    return r;
  }
  r.wpm = clamp(static_cast<double>(n_peaks) / rho * 60.0 / speech_s, 50.0, 200.0);
  return r;
}

PitchResult pitch_variance(const std::vector<double>& samples, int rate_hz,
                           const std::vector<Segment>& segments) {
  const int win = static_cast<int>(std::lround(25.0 * rate_hz / 1000.0));
  const int hop = static_cast<int>(std::lround(10.0 * rate_hz / 1000.0));
  const auto n = static_cast<int>(samples.size());
  PitchResult out;
  if (n < win) {
    out.unvoiced = true;
    return out;
  }

  const int lag_min = std::max(2, static_cast<int>(std::ceil(static_cast<double>(rate_hz) / 400.0)));
  const int lag_max = std::min(win - 2, static_cast<int>(std::floor(static_cast<double>(rate_hz) / 60.0)));

  const int n_frames = (n - win) / hop + 1;
  for (int f = 0; f < n_frames; ++f) {
    const int off = f * hop;
    const double center_ms = (off + win / 2.0) * 1000.0 / rate_hz;
    if (!in_segments(center_ms, segments)) continue;

    double r0 = 0.0;
    for (int i = 0; i < win; ++i) {
      double v = samples[static_cast<std::size_t>(off + i)];
      r0 += v * v;
    }
    if (r0 < 1e-12) continue;

    double best = 0.0;
    int best_lag = 0;
    for (int lag = lag_min; lag <= lag_max; ++lag) {
      double r = 0.0;
      for (int i = 0; i + lag < win; ++i)
        r += samples[static_cast<std::size_t>(off + i)] * samples[static_cast<std::size_t>(off + i + lag)];
      double norm = r / r0;
      if (norm > best) {
        best = norm;
        best_lag = lag;
      }
    }
    if (best > 0.3 && best_lag > 0)
      out.f0_hz.push_back(static_cast<double>(rate_hz) / best_lag);
  }

  if (out.f0_hz.empty()) {
    out.unvoiced = true;
    return out;
  }
  double mean = std::accumulate(out.f0_hz.begin(), out.f0_hz.end(), 0.0) /
                static_cast<double>(out.f0_hz.size());
  double var = 0.0;
  for (double v : out.f0_hz) var += (v - mean) * (v - mean);
  var /= static_cast<double>(out.f0_hz.size());
  out.variance = clamp(var / (mean * mean), 0.0, 1.5);
  return out;
}

double pause_gap_ratio(const std::vector<Segment>& segments, std::int64_t total_ms) {
  if (total_ms <= 0) throw std::invalid_argument("pause_gap_ratio: total_ms must be positive");
  std::int64_t speech = 0;
  for (const auto& s : segments) speech += s.end_ms - s.start_ms;
  return clamp(static_cast<double>(total_ms - speech) / static_cast<double>(total_ms), 0.0, 1.0);
}

double command_slope(const EnergyEnvelope& env, double full_scale_db_per_s) {
  const auto n = static_cast<int>(env.energy.size());
  if (n < 2) throw std::invalid_argument("command_slope: envelope too short");
  std::vector<double> db(env.energy.size());
  for (std::size_t i = 0; i < env.energy.size(); ++i) db[i] = log_db(env.energy[i]);
  const std::vector<double> sm = moving_average(db, 2);
  const double med = median_of(sm);

  const int hops200 = std::max(1, static_cast<int>(std::lround(200.0 / env.hop_ms)));
  double total = 0.0;
  int n_peaks = 0;
  for (int i = 0; i < n; ++i) {
    bool left_ok = (i == 0) || sm[static_cast<std::size_t>(i)] > sm[static_cast<std::size_t>(i) - 1];
    bool right_ok = (i == n - 1) || sm[static_cast<std::size_t>(i)] >= sm[static_cast<std::size_t>(i) + 1];
    if (!(left_ok && right_ok && sm[static_cast<std::size_t>(i)] > med)) continue;
    int a = std::max(0, i - hops200), b = std::min(n - 1, i + hops200);
    if (b <= a) continue;
    double mean_diff = (db[static_cast<std::size_t>(b)] - db[static_cast<std::size_t>(a)]) /
                       static_cast<double>(b - a);
    total += mean_diff;
    ++n_peaks;
  }
  if (n_peaks == 0) return 0.0;
  const double db_per_hop = total / n_peaks;
  const double db_per_s = db_per_hop * 1000.0 / env.hop_ms;
  return clamp(db_per_s / full_scale_db_per_s, -1.5, 2.0);
}

AccentResult accent_attribution(const std::vector<double>& embedding,
                                const std::vector<RegionPrototype>& prototypes,
                                double temperature) {
  if (prototypes.size() < 2)
    throw std::invalid_argument("accent_attribution: need at least 2 prototypes");
  if (!(temperature > 0.0))
    throw std::invalid_argument("accent_attribution: temperature must be positive");
  double en = 0.0;
  for (double v : embedding) en += v * v;
  en = std::sqrt(en);
  if (en < 1e-12) throw std::invalid_argument("accent_attribution: degenerate embedding");

  std::vector<double> cos_sim(prototypes.size());
  for (std::size_t k = 0; k < prototypes.size(); ++k) {
    const auto& c = prototypes[k].centroid;
    if (c.size() != embedding.size())
      throw std::invalid_argument("accent_attribution: dimension mismatch");
    double dot = 0.0, cn = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      dot += embedding[i] * c[i];
      cn += c[i] * c[i];
    }
    cn = std::sqrt(cn);
    if (cn < 1e-12) throw std::invalid_argument("accent_attribution: degenerate centroid");
    cos_sim[k] = dot / (en * cn);
  }

  AccentResult r;
  std::size_t best = 0;
  for (std::size_t k = 1; k < cos_sim.size(); ++k)
    if (cos_sim[k] > cos_sim[best]) best = k;
  r.top1 = prototypes[best].region;
  r.similarity = (1.0 + cos_sim[best]) / 2.0;

  const double mx = cos_sim[best] / temperature;
  double denom = 0.0;
  r.distribution.resize(cos_sim.size());
  for (std::size_t k = 0; k < cos_sim.size(); ++k) {
    r.distribution[k] = std::exp(cos_sim[k] / temperature - mx);
    denom += r.distribution[k];
  }
  for (auto& p : r.distribution) p /= denom;
  return r;
}

std::vector<double> mfcc_stats(const std::vector<double>& samples, int rate_hz) {
  auto [x, rate] = resample_for_analysis(samples, rate_hz);
  if (static_cast<int>(x.size()) < rate)
    throw std::invalid_argument("mfcc_stats: need at least one second of audio");

  constexpr int kMelBands = 26;
  constexpr int kCoeffs = 13;
  MelSpectrogram mel = mel_spectrogram(x, rate, kMelBands);
  const Eigen::Index nt = mel.frames.cols();

  // orthonormal DCT-II basis over the mel bands
  Eigen::MatrixXd dct(kCoeffs, kMelBands);
  for (int k = 0; k < kCoeffs; ++k) {
    const double s = (k == 0) ? std::sqrt(1.0 / kMelBands) : std::sqrt(2.0 / kMelBands);
    for (int m = 0; m < kMelBands; ++m)
      dct(k, m) = s * std::cos(kPi * (2.0 * m + 1.0) * k / (2.0 * kMelBands));
  }

  Eigen::MatrixXd logmel = mel.frames.array().max(kLogFloor).log().matrix();
  Eigen::MatrixXd coeffs = dct * logmel;  // kCoeffs x nt

  std::vector<double> emb(2 * kCoeffs, 0.0);
  for (int k = 0; k < kCoeffs; ++k) {
    double mean = coeffs.row(k).mean();
    double var = (coeffs.row(k).array() - mean).square().sum() / static_cast<double>(nt);
    emb[static_cast<std::size_t>(k)] = mean;
    emb[static_cast<std::size_t>(k + kCoeffs)] = std::sqrt(std::max(0.0, var));
  }
  return emb;
}

Projection2D accent_projection_2d(const std::vector<std::vector<double>>& embeddings) {
  if (embeddings.size() < 3)
    throw std::invalid_argument("accent_projection_2d: need at least 3 embeddings");
  const std::size_t d = embeddings.front().size();
  for (const auto& e : embeddings)
    if (e.size() != d)
      throw std::invalid_argument("accent_projection_2d: dimension mismatch");

  const auto m = static_cast<Eigen::Index>(embeddings.size());
  Eigen::MatrixXd X(m, static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m; ++i)
    for (std::size_t j = 0; j < d; ++j)
      X(i, static_cast<Eigen::Index>(j)) = embeddings[static_cast<std::size_t>(i)][j];
  Eigen::RowVectorXd mean = X.colwise().mean();
  X.rowwise() -= mean;

  Eigen::MatrixXd cov = X.transpose() * X / static_cast<double>(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("accent_projection_2d: eigensolver failed");

  const Eigen::Index last = cov.rows() - 1;
  Eigen::VectorXd pc1 = es.eigenvectors().col(last);
  Eigen::VectorXd pc2 = Eigen::VectorXd::Zero(cov.rows());
  if (cov.rows() >= 2) pc2 = es.eigenvectors().col(last - 1);
  auto fix_sign = [](Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (std::abs(v(i)) > 1e-12) {
        if (v(i) < 0) v = -v;
        return;
      }
  };
  fix_sign(pc1);
  fix_sign(pc2);

  Projection2D out;
  const double lam_max = es.eigenvalues()(last);
  const double lam2 = cov.rows() >= 2 ? es.eigenvalues()(last - 1) : 0.0;
  out.rank_deficient = lam2 <= 1e-12 * std::max(1.0, lam_max);

  out.points.resize(embeddings.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    double px = X.row(i).dot(pc1.transpose());
    double py = out.rank_deficient ? 0.0 : X.row(i).dot(pc2.transpose());
    out.points[static_cast<std::size_t>(i)] = {px, py};
  }
  return out;
}

AcousticVariables extract_acoustics(const std::vector<double>& samples, int rate_hz,
                                    const std::vector<RegionPrototype>& prototypes,
                                    double temperature) {
  auto [x, rate] = resample_for_analysis(samples, rate_hz);
  AcousticVariables av;
  const auto total_ms = static_cast<std::int64_t>(
      std::llround(static_cast<double>(x.size()) * 1000.0 / rate));

  EnergyEnvelope env = energy_envelope(x, rate);
  auto segments = voice_activity(env);

  auto peaks = syllable_peak_times(env, segments);
  auto wr = wpm_estimate(segments, peaks.size());
  av.wpm_rate = wr.wpm;
  av.no_speech = wr.no_speech;

  auto pr = pitch_variance(x, rate, segments);
  av.pitch_variance = pr.variance;
  av.unvoiced = pr.unvoiced;

  av.pause_gap_ratio = total_ms > 0 ? pause_gap_ratio(segments, total_ms) : 1.0;
  av.command_slope = command_slope(env);

  if (prototypes.size() >= 2) {
    auto emb = mfcc_stats(x, rate);
    auto ar = accent_attribution(emb, prototypes, temperature);
    av.accent_similarity_score = clamp(ar.similarity, 0.0, 1.0);
    av.accent_class_top1 = ar.top1;
    av.accent_probability_distribution = ar.distribution;
    av.accent_skipped = false;
  }
  return av;
}

std::vector<RegionPrototype> load_prototypes(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("prototypes: cannot open " + path);
  nlohmann::json j;
  f >> j;
  const nlohmann::json& arr = j.is_array() ? j : j.at("prototypes");
  std::vector<RegionPrototype> out;
  for (const auto& p : arr) {
    RegionPrototype rp;
    rp.region = p.at("region").get<std::string>();
    rp.centroid = p.at("centroid").get<std::vector<double>>();
    out.push_back(std::move(rp));
  }
  if (out.size() >= 2) {
    const std::size_t d = out.front().centroid.size();
    for (const auto& p : out)
      if (p.centroid.size() != d)
        throw std::runtime_error("prototypes: centroid dimensions differ");
  }
  return out;
}

std::string melspec_csv(const MelSpectrogram& mel) {
  std::string s = "band";
  char buf[64];
  for (Eigen::Index t = 0; t < mel.frames.cols(); ++t) {
    std::snprintf(buf, sizeof(buf), ",t%lld", static_cast<long long>(t));
    s += buf;
  }
  s += '\n';
  for (Eigen::Index b = 0; b < mel.frames.rows(); ++b) {
    s += std::to_string(b);
    for (Eigen::Index t = 0; t < mel.frames.cols(); ++t) {
      std::snprintf(buf, sizeof(buf), ",%.9g", mel.frames(b, t));
      s += buf;
    }
    s += '\n';
  }
  return s;
}

}  // namespace avgraph::audio
