#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "avgraph/gat.hpp"
#include "avgraph/graph.hpp"
#include "avgraph/util/rng.hpp"
#include "doctest.h"
#include "test_support.hpp"

namespace gat = avgraph::gat;
namespace graph = avgraph::graph;
using avgraph::Rng;
using graph::EdgeKind;

namespace {

Eigen::MatrixXd random_features(Rng& rng, int n, int dim) {
  Eigen::MatrixXd x(n, dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < dim; ++j) x(i, j) = rng.uniform(-1.0, 1.0);
  return x;
}

double oracle_leaky(double slope, double x) { return x > 0 ? x : slope * x; }
double oracle_elu(double x) { return x > 0 ? x : std::exp(x) - 1.0; }

// Dense reference: per node, softmax over incoming-masked logits, then the
// weighted sum of transformed neighbors. Mirrors only the contract, not the
// implementation's sparse bookkeeping.
Eigen::MatrixXd dense_forward_oracle(const gat::GatLayer& layer,
                                     const graph::HeteroTemporalGraph& g,
                                     const Eigen::MatrixXd& x) {
  const int n = static_cast<int>(g.nodes.size());
  const int out = layer.out_dim();
  const auto& W = layer.heads[0].W;
  const auto& a = layer.heads[0].a;
  Eigen::MatrixXd z = x * W.transpose();

  // mask[i][j]: j feeds i; kind bits follow EdgeKind order
  std::vector<std::vector<unsigned>> mask(static_cast<std::size_t>(n),
                                          std::vector<unsigned>(static_cast<std::size_t>(n), 0));
  std::vector<std::vector<bool>> present(static_cast<std::size_t>(n),
                                         std::vector<bool>(static_cast<std::size_t>(n), false));
  for (const auto& e : g.edges) {
    if (e.kind != EdgeKind::Attention && e.kind != EdgeKind::TemporalCausal) continue;
    int s = -1, d = -1;
    for (int i = 0; i < n; ++i) {
      if (g.nodes[static_cast<std::size_t>(i)].id == e.src) s = i;
      if (g.nodes[static_cast<std::size_t>(i)].id == e.dst) d = i;
    }
    present[static_cast<std::size_t>(d)][static_cast<std::size_t>(s)] = true;
    mask[static_cast<std::size_t>(d)][static_cast<std::size_t>(s)] |=
        1u << static_cast<unsigned>(e.kind);
  }
  if (layer.include_self)
    for (int i = 0; i < n; ++i) present[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = true;

  Eigen::MatrixXd result(n, out);
  for (int i = 0; i < n; ++i) {
    std::vector<int> js;
    for (int j = 0; j < n; ++j)
      if (present[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) js.push_back(j);
    REQUIRE_FALSE(js.empty());

    Eigen::VectorXd e(static_cast<Eigen::Index>(js.size()));
    for (std::size_t t = 0; t < js.size(); ++t) {
      const int j = js[t];
      double u = z.row(i).dot(a.head(out)) + z.row(j).dot(a.tail(out));
      double logit = oracle_leaky(layer.leaky_slope, u);
      if (layer.use_edge_bias && j != i) {
        const unsigned m = mask[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        for (int k = 0; k < 4; ++k)
          if (m & (1u << k)) logit += layer.edge_bias[k];
      }
      e[static_cast<Eigen::Index>(t)] = logit;
    }
    Eigen::VectorXd w = (e.array() - e.maxCoeff()).exp();
    Eigen::VectorXd alpha = w / w.sum();
    Eigen::VectorXd s = Eigen::VectorXd::Zero(out);
    for (std::size_t t = 0; t < js.size(); ++t)
      s += alpha[static_cast<Eigen::Index>(t)] * z.row(js[t]).transpose();
    for (int c = 0; c < out; ++c) result(i, c) = oracle_elu(s[c]);
  }
  return result;
}

}  // namespace

TEST_CASE("attention_row: rows are distributions and match a direct softmax") {
  Rng rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const int in = 2 + static_cast<int>(rng.below(5));
    const int out = 1 + static_cast<int>(rng.below(4));
    auto layer = gat::seeded_layer(in, out, 1, 500 + static_cast<std::uint64_t>(trial));
    Eigen::VectorXd hi(in);
    for (int k = 0; k < in; ++k) hi[k] = rng.uniform(-2.0, 2.0);
    const int m = 1 + static_cast<int>(rng.below(8));
    std::vector<Eigen::VectorXd> nbrs;
    for (int t = 0; t < m; ++t) {
      Eigen::VectorXd v(in);
      for (int k = 0; k < in; ++k) v[k] = rng.uniform(-2.0, 2.0);
      nbrs.push_back(v);
    }
    auto row = gat::attention_row(layer, hi, nbrs);
    REQUIRE(row.size() == m);
    CHECK(row.minCoeff() > 0.0);
    CHECK(row.sum() == doctest::Approx(1.0).epsilon(1e-12));

    const auto& W = layer.heads[0].W;
    const auto& a = layer.heads[0].a;
    Eigen::VectorXd zi = W * hi;
    Eigen::VectorXd e(m);
    for (int t = 0; t < m; ++t) {
      Eigen::VectorXd zj = W * nbrs[static_cast<std::size_t>(t)];
      e[t] = oracle_leaky(layer.leaky_slope, zi.dot(a.head(out)) + zj.dot(a.tail(out)));
    }
    Eigen::VectorXd w = (e.array() - e.maxCoeff()).exp();
    Eigen::VectorXd expect = w / w.sum();
    CHECK((row - expect).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK_THROWS(gat::attention_row(gat::seeded_layer(3, 2, 1, 1), Eigen::VectorXd::Zero(3), {}));
}

TEST_CASE("forward matches the dense masked-softmax oracle") {
  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4 + static_cast<int>(rng.below(5));
    auto g = testsup::random_event_graph(rng, n);
    const int in = static_cast<int>(g.nodes[0].features.size());
    auto layer = gat::seeded_layer(in, 3, 1, 900 + static_cast<std::uint64_t>(trial));
    layer.use_edge_bias = (trial % 2 == 1);
    layer.edge_bias << 0.3, -0.2, 0.0, 0.1;

    auto x = random_features(rng, static_cast<int>(g.nodes.size()), in);
    auto got = gat::forward(layer, g, x);
    auto want = dense_forward_oracle(layer, g, x);
    REQUIRE(got.rows() == want.rows());
    REQUIRE(got.cols() == want.cols());
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("forward is equivariant to node reordering") {
  Rng rng(77);
  auto g = testsup::random_event_graph(rng, 6);
  const int n = static_cast<int>(g.nodes.size());
  const int in = static_cast<int>(g.nodes[0].features.size());
  auto layer = gat::seeded_layer(in, 4, 1, 31);
  auto x = random_features(rng, n, in);

  auto out = gat::forward(layer, g, x);

  auto rev = g;
  std::reverse(rev.nodes.begin(), rev.nodes.end());
  Eigen::MatrixXd xr(n, in);
  for (int i = 0; i < n; ++i) xr.row(i) = x.row(n - 1 - i);
  auto out_rev = gat::forward(layer, rev, xr);
  for (int i = 0; i < n; ++i)
    CHECK((out_rev.row(i) - out.row(n - 1 - i)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("forward stays finite under extreme logits") {
  Rng rng(5150);
  auto g = testsup::random_event_graph(rng, 6);
  const int in = static_cast<int>(g.nodes[0].features.size());
  auto layer = gat::seeded_layer(in, 3, 1, 8);
  layer.heads[0].a *= 500.0;  // drive raw logits to +-1e2..1e3
  auto x = random_features(rng, static_cast<int>(g.nodes.size()), in);
  auto out = gat::forward(layer, g, x);
  CHECK(out.allFinite());
  for (const auto& e : g.edges) {
    if (e.kind != EdgeKind::Attention) continue;
    CHECK(e.weight >= 0.0);
    CHECK(e.weight <= 1.0);
  }
}

TEST_CASE("forward throws when a node has no inputs and self-edges are off") {
  graph::HeteroTemporalGraph g;
  g.nodes.resize(2);
  g.nodes[0].id = 0;
  g.nodes[1].id = 1;
  g.nodes[1].timestamp_ms = 50;
  g.nodes[1].modality = graph::Modality::Audio;
  auto layer = gat::seeded_layer(3, 2, 1, 4);
  layer.include_self = false;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 3);
  bool threw = false;
  try {
    gat::forward(layer, g, x);
  } catch (const std::runtime_error& e) {
    threw = true;
    CHECK(std::string(e.what()).find("empty neighborhood") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("check_layer rejects malformed configurations") {
  Rng rng(9);
  auto g = testsup::random_event_graph(rng, 4);
  const int in = static_cast<int>(g.nodes[0].features.size());
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<int>(g.nodes.size()), in);

  auto slope = gat::seeded_layer(in, 2, 1, 1);
  slope.leaky_slope = 0.0;
  CHECK_THROWS(gat::forward(slope, g, x));
  slope.leaky_slope = 1.0;
  CHECK_THROWS(gat::forward(slope, g, x));

  auto mismatch = gat::seeded_layer(in, 2, 2, 1);
  mismatch.heads[1].a.resize(3);
  CHECK_THROWS(gat::multi_head_forward(mismatch, g, x, gat::HeadMode::Average));

  auto narrow = gat::seeded_layer(in + 1, 2, 1, 1);
  CHECK_THROWS(gat::forward(narrow, g, x));
}

TEST_CASE("multi-head: concat widens, average of identical heads equals forward") {
  Rng rng(88);
  auto g = testsup::random_event_graph(rng, 5);
  const int n = static_cast<int>(g.nodes.size());
  const int in = static_cast<int>(g.nodes[0].features.size());
  auto x = random_features(rng, n, in);

  auto layer = gat::seeded_layer(in, 3, 2, 55);
  auto wide = gat::multi_head_forward(layer, g, x, gat::HeadMode::Concat);
  CHECK(wide.rows() == n);
  CHECK(wide.cols() == 6);
  auto avg = gat::multi_head_forward(layer, g, x, gat::HeadMode::Average);
  CHECK(avg.cols() == 3);

  auto twin = layer;
  twin.heads[1] = twin.heads[0];
  auto avg_twin = gat::multi_head_forward(twin, g, x, gat::HeadMode::Average);
  auto single = gat::forward(twin, g, x);
  CHECK((avg_twin - single).cwiseAbs().maxCoeff() < 1e-12);

  auto cat_twin = gat::multi_head_forward(twin, g, x, gat::HeadMode::Concat);
  CHECK((cat_twin.leftCols(3) - cat_twin.rightCols(3)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("write_back puts head-0 attention onto attention edges") {
  Rng rng(404);
  for (int trial = 0; trial < 5; ++trial) {
    auto g = testsup::random_event_graph(rng, 6);
    const int n = static_cast<int>(g.nodes.size());
    const int in = static_cast<int>(g.nodes[0].features.size());
    auto layer = gat::seeded_layer(in, 3, 1, 60 + static_cast<std::uint64_t>(trial));
    auto x = random_features(rng, n, in);
    gat::forward(layer, g, x);

    // recompute expected alphas densely
    const auto& W = layer.heads[0].W;
    const auto& a = layer.heads[0].a;
    const int out = 3;
    Eigen::MatrixXd z = x * W.transpose();
    for (const auto& e : g.edges) {
      if (e.kind != EdgeKind::Attention) continue;
      const int d = g.index_of(e.dst);
      const int s = g.index_of(e.src);
      std::vector<int> js;
      for (const auto& e2 : g.edges) {
        if (e2.kind != EdgeKind::Attention && e2.kind != EdgeKind::TemporalCausal) continue;
        if (e2.dst == e.dst) {
          const int j = g.index_of(e2.src);
          if (std::find(js.begin(), js.end(), j) == js.end()) js.push_back(j);
        }
      }
      js.push_back(d);
      std::sort(js.begin(), js.end());
      Eigen::VectorXd logits(static_cast<Eigen::Index>(js.size()));
      for (std::size_t t = 0; t < js.size(); ++t)
        logits[static_cast<Eigen::Index>(t)] = oracle_leaky(
            layer.leaky_slope, z.row(d).dot(a.head(out)) + z.row(js[t]).dot(a.tail(out)));
      Eigen::VectorXd w = (logits.array() - logits.maxCoeff()).exp();
      Eigen::VectorXd alpha = w / w.sum();
      const auto it = std::find(js.begin(), js.end(), s);
      REQUIRE(it != js.end());
      CHECK(e.weight ==
            doctest::Approx(alpha[static_cast<Eigen::Index>(it - js.begin())]).epsilon(1e-12));
    }
    CHECK_NOTHROW(graph::validate_graph(g));
  }
}

TEST_CASE("readout: logistic threat score and mission softmax") {
  gat::ReadoutHead zero;
  zero.w_threat = Eigen::VectorXd::Zero(4);
  zero.w_intent = Eigen::VectorXd::Zero(4);
  zero.W_mission = Eigen::MatrixXd::Zero(3, 4);
  zero.b_mission << 0.4, 0.4, 0.1;
  Eigen::MatrixXd feats = Eigen::MatrixXd::Random(3, 4);

  auto r = gat::readout(feats, {}, zero);
  CHECK(r.y1 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.mission_probs.sum() == doctest::Approx(1.0).epsilon(1e-12));
  // exact tie between the first two scores resolves to the first class
  CHECK(r.mission_probs[0] == doctest::Approx(r.mission_probs[1]).epsilon(1e-12));
  CHECK(r.y2 == graph::MissionType::Deployment);
  const double p0 = 1.0 / (2.0 + std::exp(-0.3));
  CHECK(r.y3 == doctest::Approx(p0).epsilon(1e-12));

  gat::ReadoutHead head = gat::seeded_readout(4, 12);
  Eigen::MatrixXd two(2, 4);
  two << 1, 2, 3, 4, 5, 6, 7, 8;
  auto full = gat::readout(two, {}, head);
  Eigen::VectorXd pooled(4);
  pooled << 3, 4, 5, 6;
  CHECK((full.pooled - pooled).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(full.y1 ==
        doctest::Approx(1.0 / (1.0 + std::exp(-(head.w_threat.dot(pooled) + head.b_threat))))
            .epsilon(1e-12));

  auto only1 = gat::readout(two, {1}, head);
  CHECK((only1.pooled - two.row(1).transpose()).cwiseAbs().maxCoeff() < 1e-12);

  // adding a constant to every mission score leaves the distribution alone
  auto shifted = head;
  shifted.b_mission.array() += 3.7;
  auto a = gat::readout(two, {}, head);
  auto b = gat::readout(two, {}, shifted);
  CHECK((a.mission_probs - b.mission_probs).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS(gat::readout(two, {5}, head));
  CHECK_THROWS(gat::readout(two, {-1}, head));
}

TEST_CASE("grad_check: analytic gradients agree with finite differences") {
  Rng rng(321);
  for (int trial = 0; trial < 10; ++trial) {
    auto g = testsup::random_event_graph(rng, 4 + static_cast<int>(rng.below(5)));
    const int n = static_cast<int>(g.nodes.size());
    const int in = static_cast<int>(g.nodes[0].features.size());
    const int heads = 1 + static_cast<int>(rng.below(2));
    auto layer = gat::seeded_layer(in, 3, heads, 7000 + static_cast<std::uint64_t>(trial));
    layer.use_edge_bias = (trial % 2 == 0);
    layer.edge_bias << 0.05, -0.1, 0.0, 0.2;
    auto head = gat::seeded_readout(3, 9000 + static_cast<std::uint64_t>(trial));
    auto x = random_features(rng, n, in);
    const auto mode = (trial % 3 == 0) ? gat::HeadMode::Concat : gat::HeadMode::Average;
    auto h = head;
    if (mode == gat::HeadMode::Concat && heads > 1) h = gat::seeded_readout(3 * heads, 91);
    const double err = gat::grad_check(layer, h, g, x, {}, 0.7, mode);
    CHECK(err <= 1e-4);
  }
}

TEST_CASE("gd_update applies one plain descent step") {
  std::vector<double> params{1.0, 2.0, 3.0};
  std::vector<double> grads{0.5, -1.0, 0.0};
  gat::gd_update(params, grads, 0.2);
  CHECK(params[0] == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(params[1] == doctest::Approx(2.2).epsilon(1e-15));
  CHECK(params[2] == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("train_step: loss shrinks, lr zero is a no-op, huge targets throw") {
  Rng rng(1234);
  auto g = testsup::random_event_graph(rng, 6);
  const int n = static_cast<int>(g.nodes.size());
  const int in = static_cast<int>(g.nodes[0].features.size());
  auto x = random_features(rng, n, in);

  auto layer = gat::seeded_layer(in, 3, 1, 42);
  auto head = gat::seeded_readout(3, 43);
  const double target = 0.9;

  auto first = gat::train_step(layer, head, g, x, {}, target, 0.05);
  double last = first.loss_before;
  for (int k = 0; k < 30; ++k) {
    auto r = gat::train_step(layer, head, g, x, {}, target, 0.05);
    last = r.loss_before;
  }
  CHECK(last < first.loss_before);
  CHECK(first.y1_before > 0.0);
  CHECK(first.y1_before < 1.0);

  auto frozen_layer = layer;
  auto frozen_head = head;
  const auto before = gat::params_json(frozen_layer, frozen_head);
  gat::train_step(frozen_layer, frozen_head, g, x, {}, target, 0.0);
  CHECK(gat::params_json(frozen_layer, frozen_head) == before);

  bool threw = false;
  try {
    gat::train_step(layer, head, g, x, {}, 2000.0, 0.05);
  } catch (const std::runtime_error& e) {
    threw = true;
    CHECK(std::string(e.what()).find("diverged") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("params JSON: exact round trip") {
  auto layer = gat::seeded_layer(5, 3, 2, 77);
  layer.use_edge_bias = true;
  layer.edge_bias << 0.1, 0.2, 0.3, 0.4;
  layer.activation = gat::Activation::ReLU;
  auto head = gat::seeded_readout(3, 78);

  auto text = gat::params_json(layer, head);
  gat::GatLayer l2;
  gat::ReadoutHead h2;
  gat::params_from_json(text, l2, h2);
  REQUIRE(l2.heads.size() == 2);
  CHECK(l2.activation == gat::Activation::ReLU);
  CHECK(l2.use_edge_bias);
  CHECK((l2.edge_bias - layer.edge_bias).cwiseAbs().maxCoeff() == 0.0);
  for (int h = 0; h < 2; ++h) {
    CHECK((l2.heads[h].W - layer.heads[h].W).cwiseAbs().maxCoeff() == 0.0);
    CHECK((l2.heads[h].a - layer.heads[h].a).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK((h2.w_threat - head.w_threat).cwiseAbs().maxCoeff() == 0.0);
  CHECK(h2.b_threat == head.b_threat);
  CHECK((h2.w_intent - head.w_intent).cwiseAbs().maxCoeff() == 0.0);
  CHECK((h2.W_mission - head.W_mission).cwiseAbs().maxCoeff() == 0.0);
  CHECK((h2.b_mission - head.b_mission).cwiseAbs().maxCoeff() == 0.0);
  CHECK(gat::params_json(l2, h2) == text);

  CHECK_THROWS(gat::params_from_json("{}", l2, h2));
}

TEST_CASE("seeded initialization is deterministic and bounded") {
  auto a = gat::seeded_layer(5, 4, 2, 99);
  auto b = gat::seeded_layer(5, 4, 2, 99);
  for (int h = 0; h < 2; ++h) {
    CHECK((a.heads[h].W - b.heads[h].W).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.heads[h].a - b.heads[h].a).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.heads[h].W.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(5.0));
    CHECK(a.heads[h].a.size() == 8);
  }
  auto c = gat::seeded_layer(5, 4, 2, 100);
  CHECK((a.heads[0].W - c.heads[0].W).cwiseAbs().maxCoeff() > 0.0);

  auto r = gat::seeded_readout(6, 5);
  CHECK(r.w_threat.size() == 6);
  CHECK(r.W_mission.rows() == 3);
  CHECK(r.W_mission.cols() == 6);
  CHECK_THROWS(gat::seeded_layer(0, 2, 1, 1));
  CHECK_THROWS(gat::seeded_readout(0, 1));
}
