#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "avgraph/audio_features.hpp"
#include "avgraph/gat.hpp"
#include "avgraph/graph.hpp"
#include "avgraph/signal/fft.hpp"
#include "avgraph/spectral.hpp"
#include "avgraph/util/rng.hpp"

namespace {

using namespace avgraph;

graph::HeteroTemporalGraph make_graph(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<graph::FeatureRecord> records;
  for (int i = 0; i < n; ++i) {
    graph::FeatureRecord rec;
    rec.modality = i % 2 == 0 ? graph::Modality::Image : graph::Modality::Audio;
    rec.timestamp_ms = i * 60;
    rec.features.assign(rec.modality == graph::Modality::Image ? 8 : 5, 0.0);
    for (auto& f : rec.features) f = rng.uniform();
    records.push_back(std::move(rec));
  }
  return graph::build_graph(records, std::nullopt, {});
}

void bm_eigendecompose(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(7);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.uniform() < 0.2) A(i, j) = A(j, i) = rng.uniform();
    }
  }
  const Eigen::MatrixXd L = spectral::normalized_laplacian(A);
  for (auto _ : state) {
    auto eig = spectral::eigendecompose(L);
    benchmark::DoNotOptimize(eig.values);
  }
}
BENCHMARK(bm_eigendecompose)->Arg(32)->Arg(64)->Arg(128);

void bm_gat_forward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto g = make_graph(n, 11);
  auto layer = gat::seeded_layer(8, 8, 1, 3);
  Rng rng(5);
  Eigen::MatrixXd X(n, 8);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 8; ++j) X(i, j) = rng.uniform();
  for (auto _ : state) {
    auto h = gat::forward(layer, g, X);
    benchmark::DoNotOptimize(h);
  }
}
BENCHMARK(bm_gat_forward)->Arg(16)->Arg(64);

void bm_fft2(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(13);
  Eigen::MatrixXd img(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) img(i, j) = rng.uniform() * 255.0;
  for (auto _ : state) {
    auto spec = signal::fft2_real(img);
    benchmark::DoNotOptimize(spec);
  }
}
BENCHMARK(bm_fft2)->Arg(128)->Arg(256);

void bm_mel_spectrogram(benchmark::State& state) {
  Rng rng(17);
  std::vector<double> samples(16000);
  for (auto& s : samples) s = rng.uniform(-0.5, 0.5);
  for (auto _ : state) {
    auto mel = audio::mel_spectrogram(samples, 16000);
    benchmark::DoNotOptimize(mel.frames);
  }
}
BENCHMARK(bm_mel_spectrogram);

void bm_hpss(benchmark::State& state) {
  Rng rng(19);
  std::vector<double> samples(16000);
  for (size_t i = 0; i < samples.size(); ++i)
    samples[i] = std::sin(2.0 * M_PI * 440.0 * i / 16000.0) +
                 0.3 * rng.uniform(-1.0, 1.0);
  const auto spec = audio::stft_magnitude(samples, 16000);
  for (auto _ : state) {
    auto [h, p] = audio::hpss_separate(spec);
    benchmark::DoNotOptimize(h);
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(bm_hpss);

}  // namespace

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
