#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace avgraph::spectral {

// L = I - D^{-1/2} A D^{-1/2}; rows of isolated nodes become identity rows,
// which keeps the spectrum inside [0,2]. A must be symmetric, non-negative,
// zero-diagonal.
Eigen::MatrixXd normalized_laplacian(const Eigen::MatrixXd& A);

struct EigenDecomposition {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // orthonormal columns; first nonzero entry positive
};

Eigen::MatrixXd spectral_embedding(const EigenDecomposition& eig, int K);

struct SpectralEmbedding {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  int K = 0;
  Eigen::MatrixXd Z;  // n x K, row i = first K eigenvector entries at i
};

EigenDecomposition eigendecompose(const Eigen::MatrixXd& L);

SpectralEmbedding embed_adjacency(const Eigen::MatrixXd& A, int K);

// Gram matrix Z Z^T; the cosine variant normalizes rows first (zero rows
// project to zero).
Eigen::MatrixXd path_projection(const Eigen::MatrixXd& Z, bool cosine = false);

// delta(i,j) = Pi_ij / sum_{k != i,j} Pi_ik Pi_kj. Degenerate denominator
// (|.| < 1e-12) maps to +inf / -inf by the numerator sign, NaN when the
// numerator is zero too.
double path_discernibility(const Eigen::MatrixXd& Pi, int i, int j);

// Full pairwise delta; diagonal entries are NaN (self-pairs are undefined).
Eigen::MatrixXd delta_matrix(const Eigen::MatrixXd& Pi);

// Unordered pairs (i < j) with delta > theta; +inf qualifies against any
// finite theta, NaN never does.
std::vector<std::pair<int, int>> main_paths(const Eigen::MatrixXd& delta,
                                            double theta);

// Unordered pairs with ||Z_i - Z_j||^2 strictly below epsilon.
std::vector<std::pair<int, int>> spectral_constraint_filter(const Eigen::MatrixXd& Z,
                                                            double epsilon);

// Maximal cliques (size >= 2, at most max_cluster members) of the delta > theta
// graph via pivoting Bron-Kerbosch; output sorted lexicographically by member
// ids. Node counts above node_cap are refused.
std::vector<std::vector<int>> path_clusters(const Eigen::MatrixXd& delta,
                                            double theta, int max_cluster = 64,
                                            int node_cap = 64);

// Maximum-delta spanning tree over the cluster members (Kruskal; ties broken
// by ascending pair ids).
std::vector<std::pair<int, int>> minimal_generator_graph(
    const std::vector<int>& cluster, const Eigen::MatrixXd& delta);

struct PathAnalysis {
  Eigen::MatrixXd Pi;
  Eigen::MatrixXd delta;  // +-inf / NaN sentinels possible
  double theta = 1.0;
  double epsilon = 0.5;
  std::vector<std::pair<int, int>> main_paths;
  std::vector<std::vector<int>> clusters;
};

PathAnalysis analyze_paths(const Eigen::MatrixXd& Z, double theta = 1.0,
                           double epsilon = 0.5, bool cosine = false,
                           int max_cluster = 64);

// Dense row-major arrays; non-finite entries encode as "inf", "-inf", "undef".
std::string path_analysis_json(const PathAnalysis& pa);

}  // namespace avgraph::spectral
