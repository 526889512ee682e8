#include <cmath>
#include <complex>
#include <nlohmann/json.hpp>
#include <optional>
#include <vector>

#include "avgraph/device_fingerprint.hpp"
#include "avgraph/util/rng.hpp"
#include "doctest.h"
#include "test_support.hpp"

namespace device = avgraph::device;
using avgraph::Rng;
using testsup::kPi;

namespace {

// Mirror of the published geometry: distances from the (rows/2, cols/2) bin
// scaled so the farthest bin is 1.
Eigen::MatrixXd radius_ref(Eigen::Index rows, Eigen::Index cols) {
  const double cr = static_cast<double>(rows / 2);
  const double cc = static_cast<double>(cols / 2);
  Eigen::MatrixXd r(rows, cols);
  double maxr = 0.0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      r(i, j) = std::hypot(static_cast<double>(i) - cr, static_cast<double>(j) - cc);
      maxr = std::max(maxr, r(i, j));
    }
  return r / maxr;
}

Eigen::MatrixXd profile_spectrum(const std::vector<double>& profile, int n) {
  const int shells = static_cast<int>(profile.size());
  auto r = radius_ref(n, n);
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      int s = std::min(static_cast<int>(r(i, j) * shells), shells - 1);
      m(i, j) = std::sqrt(profile[static_cast<std::size_t>(s)]);
    }
  return m;
}

std::vector<double> tone_mix(const std::vector<std::pair<double, double>>& freqs_amps,
                             double seconds, int rate) {
  const int n = static_cast<int>(seconds * rate);
  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  for (auto [f, a] : freqs_amps)
    for (int i = 0; i < n; ++i)
      x[static_cast<std::size_t>(i)] += a * std::sin(2.0 * kPi * f * i / rate + 0.7 * f);
  return x;
}

}  // namespace

TEST_CASE("fft2_log_magnitude: constant and single-tone images") {
  Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(16, 16, 2.0);
  auto spec = device::fft2_log_magnitude(flat);
  REQUIRE(spec.rows() == 16);
  REQUIRE(spec.cols() == 16);
  CHECK(spec(8, 8) == doctest::Approx(std::log1p(512.0)).epsilon(1e-12));
  spec(8, 8) = 0.0;
  CHECK(spec.cwiseAbs().maxCoeff() < 1e-6);

  Eigen::MatrixXd wave(16, 16);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) wave(i, j) = 60.0 + 50.0 * std::cos(2.0 * kPi * 3.0 * j / 16.0);
  auto ws = device::fft2_log_magnitude(wave);
  CHECK(ws(8, 8) == doctest::Approx(std::log1p(15360.0)).epsilon(1e-9));
  CHECK(ws(8, 11) == doctest::Approx(std::log1p(6400.0)).epsilon(1e-9));
  CHECK(ws(8, 5) == doctest::Approx(std::log1p(6400.0)).epsilon(1e-9));
  CHECK(ws(4, 4) < 1e-6);

  CHECK_THROWS(device::fft2_log_magnitude(Eigen::MatrixXd::Zero(7, 16)));
  CHECK_THROWS(device::fft2_log_magnitude(Eigen::MatrixXd::Zero(16, 7)));
}

TEST_CASE("fft2_log_magnitude matches the quadratic-time DFT") {
  Rng rng(202);
  Eigen::MatrixXd im(12, 10);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 10; ++j) im(i, j) = rng.uniform(0.0, 255.0);

  Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(16, 16);
  padded.topLeftCorner(12, 10) = im;
  auto F = testsup::dft2(padded);
  Eigen::MatrixXd want(16, 16);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      want((i + 8) % 16, (j + 8) % 16) = std::log1p(std::abs(F(i, j)));

  auto got = device::fft2_log_magnitude(im);
  REQUIRE(got.rows() == 16);
  REQUIRE(got.cols() == 16);
  CHECK((got - want).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("band_energy_ratios: hand-placed cells give exact fractions") {
  Eigen::MatrixXd spec = Eigen::MatrixXd::Zero(17, 17);
  spec(8, 9) = 1.0;   // r = 1/sqrt(128) -> low
  spec(12, 8) = 2.0;  // r = 4/sqrt(128) -> mid
  spec(0, 0) = 3.0;   // r = 1 -> high
  spec(8, 8) = 100.0; // center excluded

  auto be = device::band_energy_ratios(spec);
  CHECK_FALSE(be.degenerate);
  CHECK(be.low == doctest::Approx(1.0 / 14.0).epsilon(1e-12));
  CHECK(be.mid == doctest::Approx(4.0 / 14.0).epsilon(1e-12));
  CHECK(be.high == doctest::Approx(9.0 / 14.0).epsilon(1e-12));

  Eigen::MatrixXd dc_only = Eigen::MatrixXd::Zero(16, 16);
  dc_only(8, 8) = 5.0;
  CHECK(device::band_energy_ratios(dc_only).degenerate);

  CHECK_THROWS(device::band_energy_ratios(spec, 0.0, 0.5));
  CHECK_THROWS(device::band_energy_ratios(spec, 0.6, 0.5));
  CHECK_THROWS(device::band_energy_ratios(spec, 0.2, 1.0));
}

TEST_CASE("band_energy_ratios: random spectrum against the annulus sums") {
  Rng rng(321);
  Eigen::MatrixXd spec(20, 24);
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 24; ++j) spec(i, j) = rng.uniform(0.0, 3.0);
  auto r = radius_ref(20, 24);
  double low = 0, mid = 0, high = 0, total = 0;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 24; ++j) {
      if (i == 10 && j == 12) continue;
      const double e = spec(i, j) * spec(i, j);
      total += e;
      if (r(i, j) < 0.15) low += e;
      else if (r(i, j) < 0.60) mid += e;
      else high += e;
    }
  auto be = device::band_energy_ratios(spec);
  CHECK(be.low == doctest::Approx(low / total).epsilon(1e-12));
  CHECK(be.mid == doctest::Approx(mid / total).epsilon(1e-12));
  CHECK(be.high == doctest::Approx(high / total).epsilon(1e-12));
  CHECK(be.low + be.mid + be.high == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("symmetry_score: mirrored, anti-mirrored, flat") {
  Rng rng(55);
  Eigen::MatrixXd m(9, 9);
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) m(i, j) = rng.uniform(0.0, 4.0);
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 4; ++j) m(i, 8 - j) = m(i, j);
  auto sym = device::symmetry_score(m);
  CHECK_FALSE(sym.degenerate);
  CHECK(sym.value == doctest::Approx(1.0).epsilon(1e-12));

  Eigen::MatrixXd anti = m;
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 4; ++j) anti(i, 8 - j) = 10.0 - anti(i, j);
  auto as = device::symmetry_score(anti);
  CHECK(as.value == doctest::Approx(-1.0).epsilon(1e-12));

  auto flat = device::symmetry_score(Eigen::MatrixXd::Constant(6, 6, 3.0));
  CHECK(flat.degenerate);
  CHECK(flat.value == 0.0);

  // independent Pearson over the documented pairing
  Eigen::MatrixXd rnd(8, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) rnd(i, j) = rng.uniform(0.0, 1.0);
  std::vector<double> left, right;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 4; ++j) {
      left.push_back(rnd(i, j));
      right.push_back(rnd(i, 7 - j));
    }
  CHECK(device::symmetry_score(rnd).value ==
        doctest::Approx(testsup::pearson_ref(left, right)).epsilon(1e-12));
}

TEST_CASE("spectral_entropy: uniform bins and concentrated energy") {
  Eigen::MatrixXd spec = Eigen::MatrixXd::Zero(16, 16);
  spec(8, 8) = 42.0;  // excluded
  int placed = 0;
  for (int j = 0; j < 16 && placed < 16; ++j) {
    if (j == 8) continue;
    spec(0, j) = 1.0;
    ++placed;
  }
  spec(1, 0) = 1.0;  // 15 on row 0 plus this one = 16 equal cells
  CHECK(device::spectral_entropy(spec) == 4.0);

  Eigen::MatrixXd single = Eigen::MatrixXd::Zero(16, 16);
  single(2, 3) = 7.0;
  CHECK(device::spectral_entropy(single) == 0.0);

  CHECK_THROWS(device::spectral_entropy(Eigen::MatrixXd::Zero(8, 8)));
  Eigen::MatrixXd dc = Eigen::MatrixXd::Zero(8, 8);
  dc(4, 4) = 9.0;
  CHECK_THROWS(device::spectral_entropy(dc));
}

TEST_CASE("center_energy_region: disk sweep in whole shells") {
  Eigen::MatrixXd dc = Eigen::MatrixXd::Zero(16, 16);
  dc(8, 8) = 3.0;
  CHECK(device::center_energy_region(dc) == doctest::Approx(1.0 / 256.0).epsilon(1e-15));

  Rng rng(77);
  Eigen::MatrixXd spec(12, 12);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) spec(i, j) = rng.uniform(0.1, 1.0);
  const double q = 0.5;
  auto r = radius_ref(12, 12);
  struct Bin {
    double radius, energy;
  };
  std::vector<Bin> bins;
  double total = 0.0;
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) {
      bins.push_back({r(i, j), spec(i, j) * spec(i, j)});
      total += bins.back().energy;
    }
  std::sort(bins.begin(), bins.end(),
            [](const Bin& a, const Bin& b) { return a.radius < b.radius; });
  double cum = 0.0;
  std::size_t count = 0, idx = 0;
  while (idx < bins.size() && cum < q * total) {
    const double shell = bins[idx].radius;
    while (idx < bins.size() && bins[idx].radius == shell) {
      cum += bins[idx].energy;
      ++count;
      ++idx;
    }
  }
  CHECK(device::center_energy_region(spec, q) ==
        doctest::Approx(static_cast<double>(count) / 144.0).epsilon(1e-15));

  CHECK_THROWS(device::center_energy_region(Eigen::MatrixXd::Zero(8, 8)));
  CHECK_THROWS(device::center_energy_region(dc, 0.0));
  CHECK_THROWS(device::center_energy_region(dc, 1.5));
}

TEST_CASE("sharpen_detect: halo recovery versus monotone decay") {
  std::vector<double> halo(32, 0.2);
  halo[0] = 1.0;
  halo[1] = 5.0;
  for (int s = 24; s < 32; ++s) halo[static_cast<std::size_t>(s)] = 1.0;
  CHECK(device::sharpen_detect(profile_spectrum(halo, 64)));

  std::vector<double> decay(32);
  for (int s = 0; s < 32; ++s) decay[static_cast<std::size_t>(s)] = 5.0 - 0.15 * s;
  CHECK_FALSE(device::sharpen_detect(profile_spectrum(decay, 64)));

  std::vector<double> zero_valley(32, 0.0);
  zero_valley[1] = 4.0;
  for (int s = 19; s < 32; ++s) zero_valley[static_cast<std::size_t>(s)] = 0.5;
  CHECK(device::sharpen_detect(profile_spectrum(zero_valley, 64)));

  std::vector<double> rising(32);
  for (int s = 0; s < 32; ++s) rising[static_cast<std::size_t>(s)] = 0.1 + 0.1 * s;
  CHECK_FALSE(device::sharpen_detect(profile_spectrum(rising, 64)));

  CHECK_FALSE(device::sharpen_detect(Eigen::MatrixXd::Zero(16, 16)));
  CHECK_THROWS(device::sharpen_detect(Eigen::MatrixXd::Zero(16, 16), 1.3, 0.6, 3));
}

TEST_CASE("image_spectral_features: fields stay in range on texture") {
  Rng rng(31415);
  Eigen::MatrixXd im(32, 32);
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j) im(i, j) = 120.0 + 60.0 * rng.uniform(-1.0, 1.0);
  auto f = device::image_spectral_features(im);
  CHECK(f.fft_mid_energy_ratio >= 0.0);
  CHECK(f.fft_mid_energy_ratio <= 1.0);
  CHECK(f.fft_high_energy_suppression >= 0.0);
  CHECK(f.fft_high_energy_suppression <= 1.0);
  CHECK(f.fft_symmetry_score >= -1.0);
  CHECK(f.fft_symmetry_score <= 1.0);
  CHECK(f.compression_entropy > 0.0);
  CHECK(f.center_energy_region > 0.0);
  CHECK(f.center_energy_region <= 1.0);
}

TEST_CASE("average_features: componentwise mean, majority sharpen vote") {
  device::ImageSpectralFeatures a;
  a.fft_mid_energy_ratio = 0.2;
  a.compression_entropy = 3.0;
  a.sharpness_post_filter = true;
  device::ImageSpectralFeatures b;
  b.fft_mid_energy_ratio = 0.6;
  b.compression_entropy = 5.0;
  b.sharpness_post_filter = false;

  auto m = device::average_features({a, b});
  CHECK(m.fft_mid_energy_ratio == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(m.compression_entropy == doctest::Approx(4.0).epsilon(1e-15));
  CHECK_FALSE(m.sharpness_post_filter);  // exactly half is not a majority

  auto m3 = device::average_features({a, a, b});
  CHECK(m3.sharpness_post_filter);
  CHECK_THROWS(device::average_features({}));
}

TEST_CASE("audio_spectral_features: band statistics on crafted signals") {
  const int rate = 16000;

  // mid-band content only
  std::vector<std::pair<double, double>> mids;
  for (double f = 600.0; f <= 2400.0; f += 120.0) mids.push_back({f, 0.15});
  auto mid_sig = tone_mix(mids, 1.5, rate);
  auto fm = device::audio_spectral_features(mid_sig, rate);
  CHECK(fm.mid_freq_energy_density >= 0.95);
  CHECK(fm.high_freq_suppression_rate >= 0.99);
  CHECK(fm.low_freq_drop_ratio >= 0.99);

  // white noise: flat spectrum, scattered peaks
  Rng rng(8899);
  std::vector<double> noise(24000);
  for (auto& v : noise) v = 0.3 * rng.gaussian();
  auto fn = device::audio_spectral_features(noise, rate);
  CHECK(fn.high_freq_suppression_rate < 0.15);
  CHECK(fn.noise_peak_dispersion > 0.5);
  CHECK(fn.mid_freq_energy_density < 0.5);

  // two exact-bin tones above 4 kHz: peak locations {5.0, 7.0} kHz
  auto two = tone_mix({{5000.0, 0.5}, {7000.0, 0.5}}, 1.5, rate);
  auto ft = device::audio_spectral_features(two, rate);
  CHECK(ft.noise_peak_dispersion == doctest::Approx(1.0).epsilon(1e-9));

  auto one = tone_mix({{6000.0, 0.5}}, 1.5, rate);
  CHECK(device::audio_spectral_features(one, rate).noise_peak_dispersion == 0.0);

  // mirror-aligned tone pair: bins 64 and 449 pair up under reversal
  auto mirror = tone_mix({{1000.0, 0.5}, {449.0 * rate / 1024.0, 0.5}}, 1.5, rate);
  CHECK(device::audio_spectral_features(mirror, rate).spectral_symmetry_index >= 0.9);
  CHECK(fn.spectral_symmetry_index <= 0.4);

  CHECK_THROWS(device::audio_spectral_features(std::vector<double>(8000, 0.1), rate));
}

TEST_CASE("classify_device: anchor point fires all three label rules") {
  device::ImageSpectralFeatures f;
  f.fft_mid_energy_ratio = 0.71;
  f.fft_high_energy_suppression = 0.21;
  f.fft_symmetry_score = 0.85;
  f.compression_entropy = 3.82;
  f.sharpness_post_filter = true;

  auto fp = device::classify_device(f, std::nullopt, device::default_rules());
  CHECK(fp.codec_type_label == device::CodecType::H264);
  CHECK(fp.device_class_label == device::DeviceClass::MobileMid);
  CHECK(fp.compression_pass_count == device::PassCount::Native);
  REQUIRE(fp.rule_trace.size() == 4);
  CHECK(fp.rule_trace[0].rule_id == "R1");
  CHECK(fp.rule_trace[0].contribution == doctest::Approx(0.87));
  CHECK(fp.rule_trace[3].rule_id == "R4");
  CHECK(fp.rule_trace[3].contribution ==
        doctest::Approx(0.66 * (1.0 - 3.82 / 8.0)).epsilon(1e-12));
  CHECK(fp.rule_trace[0].fired_inputs.find("mid=0.71") != std::string::npos);
}

TEST_CASE("classify_device: neutral features leave every label unknown") {
  device::ImageSpectralFeatures f;
  f.fft_mid_energy_ratio = 0.33;
  f.fft_high_energy_suppression = 0.5;
  f.fft_symmetry_score = 0.0;
  f.compression_entropy = 8.0;
  f.sharpness_post_filter = false;

  auto fp = device::classify_device(f, std::nullopt, device::default_rules());
  CHECK(fp.codec_type_label == device::CodecType::Unknown);
  CHECK(fp.device_class_label == device::DeviceClass::Unknown);
  CHECK(fp.compression_pass_count == device::PassCount::Unknown);
  REQUIRE(fp.rule_trace.size() == 1);
  CHECK(fp.rule_trace[0].rule_id == "R4");
  CHECK(fp.rule_trace[0].contribution == doctest::Approx(0.0));
}

TEST_CASE("classify_device: grid agreement with the published thresholds") {
  const auto rules = device::default_rules();
  for (double mid : {0.5, 0.7})
    for (double high : {0.2, 0.4})
      for (double sym : {0.7, 0.9})
        for (double entropy : {2.0, 4.0, 6.0, 10.0})
          for (bool sharpen : {false, true}) {
            device::ImageSpectralFeatures f;
            f.fft_mid_energy_ratio = mid;
            f.fft_high_energy_suppression = high;
            f.fft_symmetry_score = sym;
            f.compression_entropy = entropy;
            f.sharpness_post_filter = sharpen;
            auto fp = device::classify_device(f, std::nullopt, rules);

            const bool codec = mid >= 0.6 && high <= 0.35;
            CHECK(fp.codec_type_label ==
                  (codec ? device::CodecType::H264 : device::CodecType::Unknown));
            if (codec) {
              const bool native = sym >= 0.8 && entropy <= 4.5;
              CHECK(fp.compression_pass_count ==
                    (native ? device::PassCount::Native : device::PassCount::Transcoded));
            } else {
              CHECK(fp.compression_pass_count == device::PassCount::Unknown);
            }
            const bool mobile = sharpen && entropy >= 2.5 && entropy <= 5.5;
            CHECK(fp.device_class_label ==
                  (mobile ? device::DeviceClass::MobileMid : device::DeviceClass::Unknown));
            REQUIRE_FALSE(fp.rule_trace.empty());
            const auto& last = fp.rule_trace.back();
            CHECK(last.rule_id == "R4");
            CHECK(last.contribution ==
                  doctest::Approx(0.66 * (1.0 - std::min(entropy, 8.0) / 8.0))
                      .epsilon(1e-12));
          }
}

TEST_CASE("classify_device: unknown rule actions are rejected") {
  device::RuleSet rs;
  rs.rules.push_back({"RX", 0.5, "frobnicate", {}});
  device::ImageSpectralFeatures f;
  CHECK_THROWS(device::classify_device(f, std::nullopt, rs));
}

TEST_CASE("rules and fingerprints serialize round trip") {
  auto rules = device::default_rules();
  auto text = device::rules_json(rules);
  auto back = device::rules_from_json(text);
  REQUIRE(back.rules.size() == 4);
  CHECK(back.rules[0].id == "R1");
  CHECK(back.rules[0].param("mid_min", -1.0) == doctest::Approx(0.6));
  CHECK(back.rules[0].param("absent", -1.0) == doctest::Approx(-1.0));
  CHECK(device::rules_json(back) == text);
  CHECK_THROWS(device::rules_from_json(R"({"rules":[]})"));

  auto dir = testsup::scratch_dir("rules");
  testsup::write_file(dir / "r.json", text);
  auto loaded = device::load_rules((dir / "r.json").string());
  CHECK(device::rules_json(loaded) == text);
  CHECK_THROWS(device::load_rules((dir / "missing.json").string()));

  device::ImageSpectralFeatures f;
  f.fft_mid_energy_ratio = 0.71;
  f.fft_high_energy_suppression = 0.21;
  f.fft_symmetry_score = 0.85;
  f.compression_entropy = 3.82;
  f.sharpness_post_filter = true;
  auto fp = device::classify_device(f, std::nullopt, rules);
  auto j = nlohmann::json::parse(device::fingerprint_json(fp));
  CHECK(j["codec_type_label"] == "H264");
  CHECK(j["device_class_label"] == "MobileMid");
  CHECK(j["compression_pass_count"] == "Native");
  REQUIRE(j["rule_trace"].size() == 4);
  CHECK(j["rule_trace"][0]["rule_id"] == "R1");
}
