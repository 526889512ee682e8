#include "avgraph/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

namespace avgraph::spectral {

using json = nlohmann::json;

namespace {

constexpr double kZeroTol = 1e-12;

void check_square(const Eigen::MatrixXd& M, const char* what) {
  if (M.rows() != M.cols() || M.rows() == 0)
    throw std::invalid_argument(std::string(what) + " must be square and nonempty");
}

void check_symmetric(const Eigen::MatrixXd& M, double tol, const char* what) {
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument(std::string(what) + " must be symmetric");
}

}  // namespace

Eigen::MatrixXd normalized_laplacian(const Eigen::MatrixXd& A) {
  check_square(A, "adjacency");
  check_symmetric(A, 1e-9, "adjacency");
  const Eigen::Index n = A.rows();
  if (A.minCoeff() < 0.0)
    throw std::invalid_argument("adjacency weights must be non-negative");
  if (A.diagonal().cwiseAbs().maxCoeff() > kZeroTol)
    throw std::invalid_argument("adjacency diagonal must be zero");

  Eigen::VectorXd deg = A.rowwise().sum();
  Eigen::VectorXd dinv(n);
  for (Eigen::Index i = 0; i < n; ++i)
    dinv[i] = deg[i] > kZeroTol ? 1.0 / std::sqrt(deg[i]) : 0.0;

  Eigen::MatrixXd L = -(dinv.asDiagonal() * A * dinv.asDiagonal());
  L.diagonal().setOnes();  // isolated nodes keep the identity row
  return L;
}

EigenDecomposition eigendecompose(const Eigen::MatrixXd& L) {
  check_square(L, "laplacian");
  check_symmetric(L, 1e-9, "laplacian");

  const Eigen::MatrixXd sym = 0.5 * (L + L.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed to converge");

  EigenDecomposition eig;
  eig.values = solver.eigenvalues();
  eig.vectors = solver.eigenvectors();

  // Deterministic sign: first component above noise is positive.
  for (Eigen::Index c = 0; c < eig.vectors.cols(); ++c) {
    for (Eigen::Index r = 0; r < eig.vectors.rows(); ++r) {
      const double v = eig.vectors(r, c);
      if (std::abs(v) > kZeroTol) {
        if (v < 0) eig.vectors.col(c) = -eig.vectors.col(c);
        break;
      }
    }
  }

  const double residual =
      (sym * eig.vectors - eig.vectors * eig.values.asDiagonal())
          .cwiseAbs()
          .maxCoeff();
  if (residual > 1e-8)
    throw std::runtime_error("eigenpair residual above 1e-8");
  return eig;
}

Eigen::MatrixXd spectral_embedding(const EigenDecomposition& eig, int K) {
  const Eigen::Index n = eig.vectors.rows();
  if (K < 1 || K > n) throw std::invalid_argument("embedding dimension out of range");
  return eig.vectors.leftCols(K);
}

SpectralEmbedding embed_adjacency(const Eigen::MatrixXd& A, int K) {
  EigenDecomposition eig = eigendecompose(normalized_laplacian(A));
  SpectralEmbedding emb;
  emb.K = K;
  emb.Z = spectral_embedding(eig, K);
  emb.eigenvalues = std::move(eig.values);
  emb.eigenvectors = std::move(eig.vectors);
  return emb;
}

Eigen::MatrixXd path_projection(const Eigen::MatrixXd& Z, bool cosine) {
  if (Z.rows() == 0 || Z.cols() == 0)
    throw std::invalid_argument("embedding must be nonempty");
  if (!cosine) return Z * Z.transpose();
  Eigen::MatrixXd N = Z;
  for (Eigen::Index i = 0; i < N.rows(); ++i) {
    const double norm = N.row(i).norm();
    if (norm > kZeroTol) N.row(i) /= norm;
    else N.row(i).setZero();
  }
  return N * N.transpose();
}

double path_discernibility(const Eigen::MatrixXd& Pi, int i, int j) {
  check_square(Pi, "projection");
  const int n = static_cast<int>(Pi.rows());
  if (n < 3) throw std::invalid_argument("discernibility needs at least 3 nodes");
  if (i < 0 || j < 0 || i >= n || j >= n)
    throw std::out_of_range("node index out of range");
  if (i == j) throw std::invalid_argument("discernibility undefined for i == j");

  double denom = 0.0;
  for (int k = 0; k < n; ++k) {
    if (k == i || k == j) continue;
    denom += Pi(i, k) * Pi(k, j);
  }
  const double num = Pi(i, j);
  if (std::abs(denom) < kZeroTol) {
    if (std::abs(num) < kZeroTol) return std::numeric_limits<double>::quiet_NaN();
    return num > 0 ? std::numeric_limits<double>::infinity()
                   : -std::numeric_limits<double>::infinity();
  }
  return num / denom;
}

Eigen::MatrixXd delta_matrix(const Eigen::MatrixXd& Pi) {
  check_square(Pi, "projection");
  const int n = static_cast<int>(Pi.rows());
  Eigen::MatrixXd d(n, n);
  d.setConstant(std::numeric_limits<double>::quiet_NaN());
  if (n < 3) return d;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double v = path_discernibility(Pi, i, j);
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

std::vector<std::pair<int, int>> main_paths(const Eigen::MatrixXd& delta,
                                            double theta) {
  check_square(delta, "delta");
  std::vector<std::pair<int, int>> out;
  const int n = static_cast<int>(delta.rows());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double v = delta(i, j);
      if (!std::isnan(v) && v > theta) out.emplace_back(i, j);
    }
  }
  return out;
}

std::vector<std::pair<int, int>> spectral_constraint_filter(const Eigen::MatrixXd& Z,
                                                            double epsilon) {
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  std::vector<std::pair<int, int>> out;
  const int n = static_cast<int>(Z.rows());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if ((Z.row(i) - Z.row(j)).squaredNorm() < epsilon) out.emplace_back(i, j);
    }
  }
  return out;
}

namespace {

// Pivoting Bron-Kerbosch over <= 64 nodes using bitmask sets.
void bron_kerbosch(std::uint64_t R, std::uint64_t P, std::uint64_t X,
                   const std::vector<std::uint64_t>& adj,
                   std::vector<std::uint64_t>& cliques) {
  if (P == 0 && X == 0) {
    cliques.push_back(R);
    return;
  }
  // Pivot: vertex of P|X with the most neighbors in P, lowest index on ties.
  std::uint64_t px = P | X;
  int pivot = -1, best = -1;
  for (std::uint64_t m = px; m;) {
    const int u = std::countr_zero(m);
    m &= m - 1;
    const int cnt = std::popcount(P & adj[u]);
    if (cnt > best) {
      best = cnt;
      pivot = u;
    }
  }
  std::uint64_t candidates = P & ~adj[pivot];
  while (candidates) {
    const int v = std::countr_zero(candidates);
    candidates &= candidates - 1;
    const std::uint64_t vb = 1ull << v;
    bron_kerbosch(R | vb, P & adj[v], X & adj[v], adj, cliques);
    P &= ~vb;
    X |= vb;
  }
}

}  // namespace

std::vector<std::vector<int>> path_clusters(const Eigen::MatrixXd& delta,
                                            double theta, int max_cluster,
                                            int node_cap) {
  check_square(delta, "delta");
  const int n = static_cast<int>(delta.rows());
  if (n > node_cap || n > 64) {
    throw std::invalid_argument(
        "node count " + std::to_string(n) + " exceeds the clique-enumeration cap " +
        std::to_string(std::min(node_cap, 64)) +
        "; raise theta to shrink the thresholded graph or analyze a subgraph");
  }
  std::vector<std::uint64_t> adj(n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double v = delta(i, j);
      if (!std::isnan(v) && v > theta) {
        adj[i] |= 1ull << j;
        adj[j] |= 1ull << i;
      }
    }
  }
  std::uint64_t all = n == 64 ? ~0ull : (1ull << n) - 1;
  std::vector<std::uint64_t> cliques;
  bron_kerbosch(0, all, 0, adj, cliques);

  std::vector<std::vector<int>> out;
  for (std::uint64_t c : cliques) {
    const int size = std::popcount(c);
    if (size < 2 || size > max_cluster) continue;
    std::vector<int> members;
    for (std::uint64_t m = c; m;) {
      members.push_back(std::countr_zero(m));
      m &= m - 1;
    }
    out.push_back(std::move(members));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<int, int>> minimal_generator_graph(
    const std::vector<int>& cluster, const Eigen::MatrixXd& delta) {
  if (cluster.size() < 2)
    throw std::invalid_argument("generator graph needs at least 2 members");

  struct Cand {
    double d;
    int i, j;
  };
  std::vector<Cand> cands;
  for (size_t a = 0; a < cluster.size(); ++a) {
    for (size_t b = a + 1; b < cluster.size(); ++b) {
      const int i = std::min(cluster[a], cluster[b]);
      const int j = std::max(cluster[a], cluster[b]);
      cands.push_back({delta(i, j), i, j});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.d != b.d) return a.d > b.d;  // +inf sorts first
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });

  std::vector<int> parent(cluster.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<int> sorted(cluster);
  std::sort(sorted.begin(), sorted.end());
  auto slot = [&](int id) {
    return static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), id) -
                            sorted.begin());
  };

  std::vector<std::pair<int, int>> tree;
  for (const Cand& c : cands) {
    const int ri = find(slot(c.i));
    const int rj = find(slot(c.j));
    if (ri == rj) continue;
    parent[ri] = rj;
    tree.emplace_back(c.i, c.j);
    if (tree.size() + 1 == cluster.size()) break;
  }
  std::sort(tree.begin(), tree.end());
  return tree;
}

PathAnalysis analyze_paths(const Eigen::MatrixXd& Z, double theta, double epsilon,
                           bool cosine, int max_cluster) {
  PathAnalysis pa;
  pa.theta = theta;
  pa.epsilon = epsilon;
  pa.Pi = path_projection(Z, cosine);
  pa.delta = delta_matrix(pa.Pi);
  pa.main_paths = main_paths(pa.delta, theta);
  pa.clusters = path_clusters(pa.delta, theta, max_cluster);
  return pa;
}

namespace {

json encode_value(double v) {
  if (std::isnan(v)) return "undef";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace

std::string path_analysis_json(const PathAnalysis& pa) {
  const int n = static_cast<int>(pa.Pi.rows());
  json j;
  j["n"] = n;
  j["theta"] = encode_value(pa.theta);
  j["epsilon"] = encode_value(pa.epsilon);
  json pi = json::array(), dl = json::array();
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      pi.push_back(encode_value(pa.Pi(r, c)));
      dl.push_back(encode_value(pa.delta(r, c)));
    }
  }
  j["pi"] = std::move(pi);
  j["delta"] = std::move(dl);
  json mp = json::array();
  for (auto [a, b] : pa.main_paths) mp.push_back({a, b});
  j["main_paths"] = std::move(mp);
  json cl = json::array();
  for (const auto& c : pa.clusters) cl.push_back(c);
  j["clusters"] = std::move(cl);
  return j.dump(2);
}

}  // namespace avgraph::spectral
