#include "gvarma/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <utility>

namespace gvarma {

Graph Graph::from_edges(int n_nodes, std::vector<Edge> edges) {
  require(n_nodes > 0, "graph must have at least one node");
  Graph g;
  g.n_nodes_ = n_nodes;
  g.adjacency_ = Matrix::Zero(n_nodes, n_nodes);
  std::set<std::pair<int, int>> seen;
  for (auto& e : edges) {
    if (e.i > e.j) std::swap(e.i, e.j);
    require(e.i >= 0 && e.j < n_nodes, "edge endpoint out of range");
    require(e.i != e.j, "self loops are not allowed");
    require(std::isfinite(e.weight) && e.weight > 0.0, "edge weights must be finite and positive");
    require(seen.emplace(e.i, e.j).second, "duplicate edge");
    g.adjacency_(e.i, e.j) = e.weight;
    g.adjacency_(e.j, e.i) = e.weight;
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return std::pair(a.i, a.j) < std::pair(b.i, b.j); });
  g.edges_ = std::move(edges);
  return g;
}

Graph build_knn_graph(const Matrix& coords, int k) {
  const int n = static_cast<int>(coords.rows());
  require(n >= 2, "k-NN graph needs at least two points");
  require(k >= 1 && n >= k + 1, "k-NN graph needs at least k+1 points");
  require(coords.allFinite(), "coordinates must be finite");

  Matrix dist(n, n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    dist(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      const double d = (coords.row(i) - coords.row(j)).norm();
      dist(i, j) = dist(j, i) = d;
      total += d;
    }
  }
  const double mean_dist = total / (0.5 * n * (n - 1));

  std::set<std::pair<int, int>> links;
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), 0);
    // nearest first, ties broken by node index
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return dist(i, a) < dist(i, b); });
    int taken = 0;
    for (int j : order) {
      if (j == i) continue;
      links.emplace(std::min(i, j), std::max(i, j));
      if (++taken == k) break;
    }
  }

  std::vector<Edge> edges;
  edges.reserve(links.size());
  for (const auto& [i, j] : links) {
    const double w = mean_dist > 0.0 ? std::exp(-dist(i, j) / mean_dist) : 1.0;
    edges.push_back({i, j, w});
  }
  return Graph::from_edges(n, std::move(edges));
}

Matrix laplacian(const Graph& graph, Normalization normalization) {
  const Matrix& W = graph.adjacency();
  Matrix L = -W;
  L.diagonal() = W.rowwise().sum();
  if (normalization == Normalization::unit_spectral_norm) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(L, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalError("eigen-solver failed to converge");
    const double top = solver.eigenvalues().maxCoeff();
    if (top > 0.0) L /= top;
  }
  return L;
}

namespace {

void fix_sign(Eigen::Ref<Vector> v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) < 0.0) v = -v;
      return;
    }
  }
}

}  // namespace

SpectralBasis eigendecompose(const Matrix& L, Normalization normalization) {
  require(L.rows() == L.cols() && L.rows() > 0, "Laplacian must be square and non-empty");
  require(L.allFinite(), "Laplacian has non-finite entries");
  const double scale = std::max(L.norm(), 1e-300);
  require((L - L.transpose()).norm() <= 1e-10 * scale, "Laplacian must be symmetric");

  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (L + L.transpose()));
  if (solver.info() != Eigen::Success) throw NumericalError("eigen-solver failed to converge");

  const Eigen::Index n = L.rows();
  Matrix U = solver.eigenvectors();
  Vector lambda = solver.eigenvalues();
  for (Eigen::Index c = 0; c < n; ++c) fix_sign(U.col(c));

  // Within numerically repeated eigenvalues order the (sign-fixed) vectors
  // lexicographically so that repeated runs produce the same basis.
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  const double tie = 1e-10 * std::max(1.0, std::abs(lambda(n - 1)));
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (std::abs(lambda(a) - lambda(b)) > tie) return lambda(a) < lambda(b);
    for (Eigen::Index r = 0; r < n; ++r) {
      if (U(r, a) != U(r, b)) return U(r, a) > U(r, b);
    }
    return false;
  });

  SpectralBasis basis;
  basis.eigenvectors.resize(n, n);
  basis.eigenvalues.resize(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    basis.eigenvectors.col(c) = U.col(idx[c]);
    basis.eigenvalues(c) = lambda(idx[c]);
  }
  basis.laplacian = L;
  basis.normalization = normalization;
  return basis;
}

SpectralBasis spectral_basis(const Graph& graph, Normalization normalization) {
  SpectralBasis basis = eigendecompose(laplacian(graph, normalization), normalization);
  // Laplacian spectra are nonnegative; clamp round-off below zero.
  for (Eigen::Index n = 0; n < basis.eigenvalues.size(); ++n) {
    if (basis.eigenvalues(n) < 0.0 && basis.eigenvalues(n) > -1e-10) basis.eigenvalues(n) = 0.0;
  }
  return basis;
}

Vector gft(const SpectralBasis& basis, const Vector& x) {
  require(x.size() == basis.size(), "signal length does not match the graph");
  return basis.eigenvectors.transpose() * x;
}

Vector igft(const SpectralBasis& basis, const Vector& x_hat) {
  require(x_hat.size() == basis.size(), "spectrum length does not match the graph");
  return basis.eigenvectors * x_hat;
}

Vector apply_graph_filter(const SpectralBasis& basis, const std::function<double(double)>& response,
                          const Vector& x) {
  require(x.size() == basis.size(), "signal length does not match the graph");
  Vector h = basis.eigenvalues.unaryExpr(response);
  if (!h.allFinite()) throw InvalidInput("filter response is not finite on the graph spectrum");
  return basis.eigenvectors * h.cwiseProduct(basis.eigenvectors.transpose() * x);
}

SparseMatrix to_sparse(const Matrix& dense, double drop_tolerance) {
  return dense.sparseView(1.0, drop_tolerance);
}

Vector polynomial_apply(const SparseMatrix& L, std::span<const double> coeffs, const Vector& x) {
  require(L.rows() == x.size(), "polynomial filter dimension mismatch");
  if (coeffs.empty()) return Vector::Zero(x.size());
  Vector acc = coeffs.back() * x;
  for (auto c = coeffs.rbegin() + 1; c != coeffs.rend(); ++c) {
    acc = L * acc;
    acc += *c * x;
  }
  return acc;
}

Matrix polynomial_apply(const SparseMatrix& L, std::span<const double> coeffs, const Matrix& X) {
  require(L.rows() == X.rows(), "polynomial filter dimension mismatch");
  if (coeffs.empty()) return Matrix::Zero(X.rows(), X.cols());
  Matrix acc = coeffs.back() * X;
  for (auto c = coeffs.rbegin() + 1; c != coeffs.rend(); ++c) {
    acc = L * acc;
    acc += *c * X;
  }
  return acc;
}

}  // namespace gvarma
