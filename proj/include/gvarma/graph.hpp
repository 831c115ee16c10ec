#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Sparse>

#include "gvarma/common.hpp"

namespace gvarma {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct Edge {
  int i = 0;
  int j = 0;
  double weight = 1.0;
};

/// Weighted undirected graph. Edges are stored once with i < j; the dense
/// adjacency is symmetric with a zero diagonal.
class Graph {
 public:
  Graph() = default;

  /// Validates and canonicalizes the edge list (orders endpoints, rejects
  /// self loops, duplicates, and non-positive or non-finite weights).
  static Graph from_edges(int n_nodes, std::vector<Edge> edges);

  int size() const { return n_nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Matrix& adjacency() const { return adjacency_; }
  Vector degrees() const { return adjacency_.rowwise().sum(); }

 private:
  int n_nodes_ = 0;
  std::vector<Edge> edges_;
  Matrix adjacency_;
};

/// Symmetrized k-nearest-neighbour graph over the rows of `coords` with
/// weights exp(-dist / mean_pairwise_dist).
Graph build_knn_graph(const Matrix& coords, int k);

enum class Normalization { combinatorial, unit_spectral_norm };

/// L = D - W, optionally scaled so that its largest eigenvalue is 1.
Matrix laplacian(const Graph& graph, Normalization normalization = Normalization::combinatorial);

struct SpectralBasis {
  Matrix eigenvectors;  // columns, orthonormal
  Vector eigenvalues;   // ascending
  Matrix laplacian;
  Normalization normalization = Normalization::combinatorial;

  int size() const { return static_cast<int>(eigenvalues.size()); }
};

/// Full symmetric eigendecomposition with a deterministic sign convention:
/// the first entry of each eigenvector above 1e-12 in magnitude is positive.
SpectralBasis eigendecompose(const Matrix& L, Normalization normalization = Normalization::combinatorial);

/// Convenience: laplacian() followed by eigendecompose().
SpectralBasis spectral_basis(const Graph& graph, Normalization normalization = Normalization::combinatorial);

Vector gft(const SpectralBasis& basis, const Vector& x);
Vector igft(const SpectralBasis& basis, const Vector& x_hat);

/// U diag(h(lambda)) U^T x.
Vector apply_graph_filter(const SpectralBasis& basis, const std::function<double(double)>& response,
                          const Vector& x);

SparseMatrix to_sparse(const Matrix& dense, double drop_tolerance = 0.0);

/// sum_l coeffs[l] L^l x by Horner's rule with sparse mat-vecs.
Vector polynomial_apply(const SparseMatrix& L, std::span<const double> coeffs, const Vector& x);

/// Matrix version: applies the polynomial to every column of X.
Matrix polynomial_apply(const SparseMatrix& L, std::span<const double> coeffs, const Matrix& X);

}  // namespace gvarma
