#include "avgraph/gat.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "avgraph/util/rng.hpp"

namespace avgraph::gat {

using graph::EdgeKind;
using graph::HeteroTemporalGraph;
using json = nlohmann::json;

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::ELU: return "ELU";
    case Activation::ReLU: return "ReLU";
    case Activation::Identity: return "Identity";
  }
  throw std::invalid_argument("bad activation");
}

Activation activation_from_name(const std::string& s) {
  if (s == "ELU") return Activation::ELU;
  if (s == "ReLU") return Activation::ReLU;
  if (s == "Identity") return Activation::Identity;
  throw std::invalid_argument("unknown activation: " + s);
}

namespace {

double act(Activation a, double x) {
  switch (a) {
    case Activation::ELU: return x > 0 ? x : std::exp(x) - 1.0;
    case Activation::ReLU: return x > 0 ? x : 0.0;
    case Activation::Identity: return x;
  }
  return x;
}

double act_grad(Activation a, double x) {
  switch (a) {
    case Activation::ELU: return x > 0 ? 1.0 : std::exp(x);
    case Activation::ReLU: return x > 0 ? 1.0 : 0.0;
    case Activation::Identity: return 1.0;
  }
  return 1.0;
}

double leaky(double slope, double x) { return x > 0 ? x : slope * x; }
double leaky_grad(double slope, double x) { return x > 0 ? 1.0 : slope; }

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct Neighbor {
  int j = 0;              // node position
  unsigned kind_mask = 0; // bit per EdgeKind; 0 for the self-edge
};

// Incoming Attention/TemporalCausal neighbors per node position, plus the
// self-edge when enabled. Sorted by position; a node appears once even when
// linked by both kinds.
std::vector<std::vector<Neighbor>> neighborhoods(const HeteroTemporalGraph& g,
                                                 bool include_self) {
  const int n = static_cast<int>(g.nodes.size());
  std::unordered_map<std::int64_t, int> pos;
  pos.reserve(g.nodes.size());
  for (int i = 0; i < n; ++i) pos[g.nodes[i].id] = i;

  std::vector<std::vector<Neighbor>> nbr(n);
  for (const auto& e : g.edges) {
    if (e.kind != EdgeKind::Attention && e.kind != EdgeKind::TemporalCausal) continue;
    const int s = pos.at(e.src);
    const int d = pos.at(e.dst);
    const unsigned bit = 1u << static_cast<unsigned>(e.kind);
    auto& list = nbr[d];
    auto it = std::find_if(list.begin(), list.end(),
                           [s](const Neighbor& x) { return x.j == s; });
    if (it == list.end()) {
      list.push_back({s, bit});
    } else {
      it->kind_mask |= bit;
    }
  }
  for (int i = 0; i < n; ++i) {
    if (include_self) nbr[i].push_back({i, 0u});
    std::sort(nbr[i].begin(), nbr[i].end(),
              [](const Neighbor& a, const Neighbor& b) { return a.j < b.j; });
    if (nbr[i].empty()) {
      throw std::runtime_error("empty neighborhood at node " +
                               std::to_string(g.nodes[i].id) +
                               ": no incoming edges and self-edge disabled");
    }
  }
  return nbr;
}

double kind_bias(const GatLayer& layer, unsigned mask) {
  if (!layer.use_edge_bias || mask == 0) return 0.0;
  double b = 0.0;
  for (int k = 0; k < 4; ++k) {
    if (mask & (1u << k)) b += layer.edge_bias[k];
  }
  return b;
}

struct HeadCache {
  Eigen::MatrixXd Z;                        // n x out, z_j = W x_j
  std::vector<Eigen::VectorXd> u;           // raw logit input per node
  std::vector<Eigen::VectorXd> alpha;       // softmax weights per node
  Eigen::MatrixXd S;                        // n x out, pre-activation sums
};

struct ForwardCache {
  std::vector<std::vector<Neighbor>> nbr;
  std::vector<HeadCache> heads;
  Eigen::MatrixXd pre;  // n x D pre-activation fed to act (Average: mean of S)
  Eigen::MatrixXd out;  // n x D
};

void check_layer(const GatLayer& layer, const Eigen::MatrixXd& features) {
  if (layer.heads.empty()) throw std::invalid_argument("layer has no heads");
  const auto in = layer.heads[0].W.cols();
  const auto out = layer.heads[0].W.rows();
  if (in == 0 || out == 0) throw std::invalid_argument("empty weight matrix");
  for (const auto& h : layer.heads) {
    if (h.W.rows() != out || h.W.cols() != in)
      throw std::invalid_argument("head weight shape mismatch");
    if (h.a.size() != 2 * out)
      throw std::invalid_argument("attention vector must have 2*out_dim entries");
  }
  if (features.cols() != in)
    throw std::invalid_argument("feature dim does not match layer in_dim");
  if (!(layer.leaky_slope > 0.0 && layer.leaky_slope < 1.0))
    throw std::invalid_argument("leaky slope must lie in (0,1)");
}

ForwardCache forward_impl(const GatLayer& layer, const HeteroTemporalGraph& g,
                          const Eigen::MatrixXd& features, HeadMode mode,
                          bool all_heads) {
  check_layer(layer, features);
  if (static_cast<int>(g.nodes.size()) != features.rows())
    throw std::invalid_argument("feature rows must match node count");

  const int n = static_cast<int>(g.nodes.size());
  const int out = layer.out_dim();
  const int H = all_heads ? static_cast<int>(layer.heads.size()) : 1;

  ForwardCache cache;
  cache.nbr = neighborhoods(g, layer.include_self);
  cache.heads.resize(H);

  for (int h = 0; h < H; ++h) {
    auto& hc = cache.heads[h];
    const auto& W = layer.heads[h].W;
    const auto& a = layer.heads[h].a;
    const Eigen::VectorXd a1 = a.head(out);
    const Eigen::VectorXd a2 = a.tail(out);
    hc.Z = features * W.transpose();
    hc.u.resize(n);
    hc.alpha.resize(n);
    hc.S.setZero(n, out);
    for (int i = 0; i < n; ++i) {
      const auto& nb = cache.nbr[i];
      const int m = static_cast<int>(nb.size());
      const double zi_a1 = hc.Z.row(i).dot(a1);
      Eigen::VectorXd u(m), e(m);
      for (int t = 0; t < m; ++t) {
        u[t] = zi_a1 + hc.Z.row(nb[t].j).dot(a2);
        e[t] = leaky(layer.leaky_slope, u[t]) + kind_bias(layer, nb[t].kind_mask);
      }
      const double mx = e.maxCoeff();
      Eigen::VectorXd w = (e.array() - mx).exp();
      Eigen::VectorXd alpha = w / w.sum();
      for (int t = 0; t < m; ++t) hc.S.row(i) += alpha[t] * hc.Z.row(nb[t].j);
      hc.u[i] = std::move(u);
      hc.alpha[i] = std::move(alpha);
    }
  }

  if (mode == HeadMode::Average || H == 1) {
    cache.pre = cache.heads[0].S;
    for (int h = 1; h < H; ++h) cache.pre += cache.heads[h].S;
    cache.pre /= static_cast<double>(H);
    cache.out = cache.pre.unaryExpr(
        [&](double x) { return act(layer.activation, x); });
  } else {
    cache.pre.resize(n, H * out);
    for (int h = 0; h < H; ++h) cache.pre.middleCols(h * out, out) = cache.heads[h].S;
    cache.out = cache.pre.unaryExpr(
        [&](double x) { return act(layer.activation, x); });
  }
  return cache;
}

// Mean attention across cached heads written onto Attention edge weights.
void write_back(HeteroTemporalGraph& g, const ForwardCache& cache) {
  std::unordered_map<std::int64_t, int> pos;
  for (int i = 0; i < static_cast<int>(g.nodes.size()); ++i) pos[g.nodes[i].id] = i;
  const int H = static_cast<int>(cache.heads.size());
  for (auto& e : g.edges) {
    if (e.kind != EdgeKind::Attention) continue;
    const int s = pos.at(e.src);
    const int d = pos.at(e.dst);
    const auto& nb = cache.nbr[d];
    for (int t = 0; t < static_cast<int>(nb.size()); ++t) {
      if (nb[t].j != s) continue;
      double sum = 0.0;
      for (int h = 0; h < H; ++h) sum += cache.heads[h].alpha[d][t];
      e.weight = sum / H;
      break;
    }
  }
}

std::vector<int> pool_or_all(const Eigen::MatrixXd& features,
                             const std::vector<int>& pool_indices) {
  const int n = static_cast<int>(features.rows());
  if (n == 0) throw std::invalid_argument("no nodes to pool");
  std::vector<int> idx = pool_indices;
  if (idx.empty()) {
    idx.resize(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
  }
  for (int i : idx) {
    if (i < 0 || i >= n) throw std::out_of_range("pool index out of range");
  }
  return idx;
}

void check_readout(const ReadoutHead& head, Eigen::Index dim) {
  if (head.w_threat.size() != dim)
    throw std::invalid_argument("w_threat dim mismatch");
  if (head.W_mission.rows() != 3 || head.W_mission.cols() != dim)
    throw std::invalid_argument("W_mission must be 3 x feature dim");
}

// Flat parameter order shared by finite differences and gd packing:
// per head W then a, edge bias (when enabled), w_threat, b_threat.
std::vector<double*> param_ptrs(GatLayer& layer, ReadoutHead& head) {
  std::vector<double*> p;
  for (auto& h : layer.heads) {
    for (Eigen::Index k = 0; k < h.W.size(); ++k) p.push_back(h.W.data() + k);
    for (Eigen::Index k = 0; k < h.a.size(); ++k) p.push_back(h.a.data() + k);
  }
  if (layer.use_edge_bias) {
    for (int k = 0; k < 4; ++k) p.push_back(layer.edge_bias.data() + k);
  }
  for (Eigen::Index k = 0; k < head.w_threat.size(); ++k)
    p.push_back(head.w_threat.data() + k);
  p.push_back(&head.b_threat);
  return p;
}

std::vector<double> flat_grads(const GatLayer& layer, const Gradients& g) {
  std::vector<double> v;
  for (const auto& h : g.heads) {
    v.insert(v.end(), h.W.data(), h.W.data() + h.W.size());
    v.insert(v.end(), h.a.data(), h.a.data() + h.a.size());
  }
  if (layer.use_edge_bias) {
    v.insert(v.end(), g.edge_bias.data(), g.edge_bias.data() + 4);
  }
  v.insert(v.end(), g.w_threat.data(), g.w_threat.data() + g.w_threat.size());
  v.push_back(g.b_threat);
  return v;
}

double loss_of(const GatLayer& layer, const ReadoutHead& head,
               const HeteroTemporalGraph& g, const Eigen::MatrixXd& features,
               const std::vector<int>& pool_indices, double target, HeadMode mode) {
  ForwardCache cache = forward_impl(layer, g, features, mode, true);
  ReadoutResult r = readout(cache.out, pool_indices, head);
  const double d = r.y1 - target;
  return d * d;
}

}  // namespace

GatLayer seeded_layer(int in_dim, int out_dim, int heads, std::uint64_t seed) {
  if (in_dim <= 0 || out_dim <= 0 || heads <= 0)
    throw std::invalid_argument("layer dims and head count must be positive");
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  GatLayer layer;
  layer.heads.resize(heads);
  for (auto& h : layer.heads) {
    h.W.resize(out_dim, in_dim);
    for (Eigen::Index r = 0; r < h.W.rows(); ++r)
      for (Eigen::Index c = 0; c < h.W.cols(); ++c)
        h.W(r, c) = rng.uniform(-bound, bound);
    h.a.resize(2 * out_dim);
    for (Eigen::Index k = 0; k < h.a.size(); ++k) h.a[k] = rng.uniform(-bound, bound);
  }
  return layer;
}

ReadoutHead seeded_readout(int dim, std::uint64_t seed) {
  if (dim <= 0) throw std::invalid_argument("readout dim must be positive");
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  ReadoutHead head;
  auto fill_vec = [&](Eigen::VectorXd& v) {
    v.resize(dim);
    for (int k = 0; k < dim; ++k) v[k] = rng.uniform(-bound, bound);
  };
  fill_vec(head.w_threat);
  head.b_threat = rng.uniform(-bound, bound);
  fill_vec(head.w_intent);
  head.b_intent = rng.uniform(-bound, bound);
  head.W_mission.resize(3, dim);
  for (Eigen::Index r = 0; r < 3; ++r)
    for (int c = 0; c < dim; ++c) head.W_mission(r, c) = rng.uniform(-bound, bound);
  for (int r = 0; r < 3; ++r) head.b_mission[r] = rng.uniform(-bound, bound);
  return head;
}

Eigen::VectorXd attention_row(const GatLayer& layer, const Eigen::VectorXd& h_i,
                              const std::vector<Eigen::VectorXd>& neighbors) {
  if (layer.heads.empty()) throw std::invalid_argument("layer has no heads");
  if (neighbors.empty()) throw std::invalid_argument("empty neighborhood");
  const auto& W = layer.heads[0].W;
  const auto& a = layer.heads[0].a;
  if (h_i.size() != W.cols()) throw std::invalid_argument("feature dim mismatch");
  const int out = static_cast<int>(W.rows());
  const Eigen::VectorXd zi = W * h_i;
  const double zi_a1 = zi.dot(a.head(out));
  Eigen::VectorXd e(neighbors.size());
  for (size_t t = 0; t < neighbors.size(); ++t) {
    if (neighbors[t].size() != W.cols())
      throw std::invalid_argument("neighbor feature dim mismatch");
    const Eigen::VectorXd zj = W * neighbors[t];
    e[t] = leaky(layer.leaky_slope, zi_a1 + zj.dot(a.tail(out)));
  }
  Eigen::VectorXd w = (e.array() - e.maxCoeff()).exp();
  return w / w.sum();
}

Eigen::MatrixXd forward(const GatLayer& layer, HeteroTemporalGraph& g,
                        const Eigen::MatrixXd& features) {
  ForwardCache cache = forward_impl(layer, g, features, HeadMode::Average, false);
  write_back(g, cache);
  return cache.out;
}

Eigen::MatrixXd multi_head_forward(const GatLayer& layer, HeteroTemporalGraph& g,
                                   const Eigen::MatrixXd& features, HeadMode mode) {
  ForwardCache cache = forward_impl(layer, g, features, mode, true);
  write_back(g, cache);
  return cache.out;
}

ReadoutResult readout(const Eigen::MatrixXd& features,
                      const std::vector<int>& pool_indices, const ReadoutHead& head) {
  check_readout(head, features.cols());
  const std::vector<int> idx = pool_or_all(features, pool_indices);

  ReadoutResult r;
  r.pooled = Eigen::VectorXd::Zero(features.cols());
  for (int i : idx) r.pooled += features.row(i);
  r.pooled /= static_cast<double>(idx.size());

  r.y1 = logistic(head.w_threat.dot(r.pooled) + head.b_threat);

  const Eigen::Vector3d scores = head.W_mission * r.pooled + head.b_mission;
  const Eigen::Vector3d shifted = scores.array() - scores.maxCoeff();
  const Eigen::Vector3d ex = shifted.array().exp();
  r.mission_probs = ex / ex.sum();

  int best = 0;
  for (int k = 1; k < 3; ++k) {
    if (r.mission_probs[k] > r.mission_probs[best]) best = k;
  }
  r.y2 = static_cast<graph::MissionType>(best);
  r.y3 = r.mission_probs[best];
  return r;
}

Gradients backprop(const GatLayer& layer, const ReadoutHead& head,
                   const HeteroTemporalGraph& g, const Eigen::MatrixXd& features,
                   const std::vector<int>& pool_indices, double target, HeadMode mode) {
  ForwardCache cache = forward_impl(layer, g, features, mode, true);
  check_readout(head, cache.out.cols());
  const std::vector<int> idx = pool_or_all(cache.out, pool_indices);

  const int n = static_cast<int>(g.nodes.size());
  const int out = layer.out_dim();
  const int H = static_cast<int>(layer.heads.size());
  const bool average = (mode == HeadMode::Average || H == 1);

  Eigen::VectorXd pooled = Eigen::VectorXd::Zero(cache.out.cols());
  for (int i : idx) pooled += cache.out.row(i);
  pooled /= static_cast<double>(idx.size());

  const double y1 = logistic(head.w_threat.dot(pooled) + head.b_threat);
  const double diff = y1 - target;

  Gradients grad;
  grad.loss = diff * diff;
  grad.y1 = y1;
  grad.heads.resize(H);
  for (int h = 0; h < H; ++h) {
    grad.heads[h].W = Eigen::MatrixXd::Zero(out, layer.in_dim());
    grad.heads[h].a = Eigen::VectorXd::Zero(2 * out);
  }

  const double gscale = 2.0 * diff * y1 * (1.0 - y1);
  grad.w_threat = gscale * pooled;
  grad.b_threat = gscale;

  // d loss / d out rows, nonzero only on pooled nodes.
  Eigen::MatrixXd dout = Eigen::MatrixXd::Zero(n, cache.out.cols());
  const Eigen::RowVectorXd base = (gscale / static_cast<double>(idx.size())) *
                                  head.w_threat.transpose();
  for (int i : idx) dout.row(i) += base;

  // Per-head pre-activation gradients.
  std::vector<Eigen::MatrixXd> dS(H);
  if (average) {
    Eigen::MatrixXd dpre = dout.cwiseProduct(cache.pre.unaryExpr(
        [&](double x) { return act_grad(layer.activation, x); }));
    dpre /= static_cast<double>(H);
    for (int h = 0; h < H; ++h) dS[h] = dpre;
  } else {
    for (int h = 0; h < H; ++h) {
      dS[h] = dout.middleCols(h * out, out).cwiseProduct(
          cache.heads[h].S.unaryExpr(
              [&](double x) { return act_grad(layer.activation, x); }));
    }
  }

  for (int h = 0; h < H; ++h) {
    const auto& hc = cache.heads[h];
    const auto& a = layer.heads[h].a;
    const Eigen::VectorXd a1 = a.head(out);
    const Eigen::VectorXd a2 = a.tail(out);
    Eigen::MatrixXd dZ = Eigen::MatrixXd::Zero(n, out);
    Eigen::VectorXd da1 = Eigen::VectorXd::Zero(out);
    Eigen::VectorXd da2 = Eigen::VectorXd::Zero(out);

    for (int i = 0; i < n; ++i) {
      const auto& nb = cache.nbr[i];
      const int m = static_cast<int>(nb.size());
      const Eigen::RowVectorXd ds = dS[h].row(i);
      if (ds.isZero(0.0)) continue;

      Eigen::VectorXd dalpha(m);
      for (int t = 0; t < m; ++t) {
        dalpha[t] = ds.dot(hc.Z.row(nb[t].j));
        dZ.row(nb[t].j) += hc.alpha[i][t] * ds;
      }
      const double mix = hc.alpha[i].dot(dalpha);
      for (int t = 0; t < m; ++t) {
        const double de = hc.alpha[i][t] * (dalpha[t] - mix);
        if (layer.use_edge_bias) {
          for (int k = 0; k < 4; ++k) {
            if (nb[t].kind_mask & (1u << k)) grad.edge_bias[k] += de;
          }
        }
        const double du = de * leaky_grad(layer.leaky_slope, hc.u[i][t]);
        da1 += du * hc.Z.row(i).transpose();
        da2 += du * hc.Z.row(nb[t].j).transpose();
        dZ.row(i) += du * a1.transpose();
        dZ.row(nb[t].j) += du * a2.transpose();
      }
    }

    grad.heads[h].W = dZ.transpose() * features;
    grad.heads[h].a.head(out) = da1;
    grad.heads[h].a.tail(out) = da2;
  }
  return grad;
}

double grad_check(const GatLayer& layer, const ReadoutHead& head,
                  const HeteroTemporalGraph& g, const Eigen::MatrixXd& features,
                  const std::vector<int>& pool_indices, double target, HeadMode mode) {
  const Gradients analytic = backprop(layer, head, g, features, pool_indices,
                                      target, mode);
  const std::vector<double> ga = flat_grads(layer, analytic);
  for (double v : ga) {
    if (!std::isfinite(v)) throw std::runtime_error("non-finite analytic gradient");
  }

  GatLayer work_layer = layer;
  ReadoutHead work_head = head;
  std::vector<double*> ptrs = param_ptrs(work_layer, work_head);
  if (ptrs.size() != ga.size())
    throw std::logic_error("parameter/gradient packing mismatch");

  const double step = 1e-5;
  double worst = 0.0;
  for (size_t k = 0; k < ptrs.size(); ++k) {
    const double saved = *ptrs[k];
    *ptrs[k] = saved + step;
    const double lp = loss_of(work_layer, work_head, g, features, pool_indices,
                              target, mode);
    *ptrs[k] = saved - step;
    const double lm = loss_of(work_layer, work_head, g, features, pool_indices,
                              target, mode);
    *ptrs[k] = saved;
    const double fd = (lp - lm) / (2.0 * step);
    if (!std::isfinite(fd)) throw std::runtime_error("non-finite fd gradient");
    const double denom = std::max(1e-8, std::abs(ga[k]) + std::abs(fd));
    worst = std::max(worst, std::abs(ga[k] - fd) / denom);
  }
  return worst;
}

void gd_update(std::span<double> params, std::span<const double> grads, double lr) {
  if (params.size() != grads.size())
    throw std::invalid_argument("param/grad size mismatch");
  for (size_t k = 0; k < params.size(); ++k) params[k] -= lr * grads[k];
}

TrainResult train_step(GatLayer& layer, ReadoutHead& head,
                       const HeteroTemporalGraph& g, const Eigen::MatrixXd& features,
                       const std::vector<int>& pool_indices, double target, double lr,
                       HeadMode mode) {
  const Gradients grad = backprop(layer, head, g, features, pool_indices, target,
                                  mode);
  if (!std::isfinite(grad.loss) || grad.loss > 1e6) {
    throw std::runtime_error("training diverged: loss " + std::to_string(grad.loss));
  }
  const std::vector<double> gv = flat_grads(layer, grad);
  for (double v : gv) {
    if (!std::isfinite(v)) throw std::runtime_error("non-finite gradient");
  }
  std::vector<double*> ptrs = param_ptrs(layer, head);
  std::vector<double> packed(ptrs.size());
  for (size_t k = 0; k < ptrs.size(); ++k) packed[k] = *ptrs[k];
  gd_update(packed, gv, lr);
  for (size_t k = 0; k < ptrs.size(); ++k) *ptrs[k] = packed[k];
  return TrainResult{grad.loss, grad.y1};
}

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("bad matrix json");
  const size_t cols = j[0].size();
  Eigen::MatrixXd m(j.size(), cols);
  for (size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw std::invalid_argument("ragged matrix json");
    for (size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
  return a;
}

Eigen::VectorXd vector_from_json(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("bad vector json");
  Eigen::VectorXd v(j.size());
  for (size_t k = 0; k < j.size(); ++k) v[k] = j[k].get<double>();
  return v;
}

}  // namespace

std::string params_json(const GatLayer& layer, const ReadoutHead& head) {
  json j;
  j["config"] = {
      {"heads", layer.heads.size()},
      {"in_dim", layer.in_dim()},
      {"out_dim", layer.out_dim()},
      {"leaky_slope", layer.leaky_slope},
      {"activation", activation_name(layer.activation)},
      {"include_self", layer.include_self},
      {"use_edge_bias", layer.use_edge_bias},
      {"edge_bias", vector_json(layer.edge_bias)},
  };
  json heads = json::array();
  for (const auto& h : layer.heads) {
    heads.push_back({{"W", matrix_json(h.W)}, {"a", vector_json(h.a)}});
  }
  j["heads"] = std::move(heads);
  j["readout"] = {
      {"w_threat", vector_json(head.w_threat)},
      {"b_threat", head.b_threat},
      {"w_intent", vector_json(head.w_intent)},
      {"b_intent", head.b_intent},
      {"W_mission", matrix_json(head.W_mission)},
      {"b_mission", vector_json(head.b_mission)},
  };
  return j.dump(2);
}

void params_from_json(const std::string& text, GatLayer& layer, ReadoutHead& head) {
  const json j = json::parse(text);
  const json& cfg = j.at("config");
  GatLayer out_layer;
  out_layer.leaky_slope = cfg.at("leaky_slope").get<double>();
  out_layer.activation = activation_from_name(cfg.at("activation").get<std::string>());
  out_layer.include_self = cfg.at("include_self").get<bool>();
  out_layer.use_edge_bias = cfg.at("use_edge_bias").get<bool>();
  const Eigen::VectorXd eb = vector_from_json(cfg.at("edge_bias"));
  if (eb.size() != 4) throw std::invalid_argument("edge_bias must have 4 entries");
  out_layer.edge_bias = eb;

  const int in_dim = cfg.at("in_dim").get<int>();
  const int out_dim = cfg.at("out_dim").get<int>();
  for (const auto& h : j.at("heads")) {
    HeadParams hp;
    hp.W = matrix_from_json(h.at("W"));
    hp.a = vector_from_json(h.at("a"));
    if (hp.W.rows() != out_dim || hp.W.cols() != in_dim || hp.a.size() != 2 * out_dim)
      throw std::invalid_argument("head shape does not match config dims");
    out_layer.heads.push_back(std::move(hp));
  }
  if (out_layer.heads.size() != cfg.at("heads").get<size_t>())
    throw std::invalid_argument("head count does not match config");

  const json& r = j.at("readout");
  ReadoutHead out_head;
  out_head.w_threat = vector_from_json(r.at("w_threat"));
  out_head.b_threat = r.at("b_threat").get<double>();
  out_head.w_intent = vector_from_json(r.at("w_intent"));
  out_head.b_intent = r.at("b_intent").get<double>();
  out_head.W_mission = matrix_from_json(r.at("W_mission"));
  const Eigen::VectorXd bm = vector_from_json(r.at("b_mission"));
  if (bm.size() != 3) throw std::invalid_argument("b_mission must have 3 entries");
  out_head.b_mission = bm;
  if (out_head.W_mission.rows() != 3)
    throw std::invalid_argument("W_mission must have 3 rows");

  layer = std::move(out_layer);
  head = std::move(out_head);
}

}  // namespace avgraph::gat
