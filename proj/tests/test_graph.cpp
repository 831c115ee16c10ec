#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "gvarma/graph.hpp"
#include "support.hpp"

using namespace gvarma;
using namespace testing_support;

namespace {

// Cyclic Jacobi rotations; slow but independent of Eigen's solver.
std::pair<Vector, Matrix> jacobi_eigen(Matrix A) {
  const Eigen::Index n = A.rows();
  Matrix V = Matrix::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) off += A(i, j) * A(i, j);
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(A(p, q)) < 1e-300) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = V(k, p), vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return A(a, a) < A(b, b); });
  Vector d(n);
  Matrix U(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    d(k) = A(idx[k], idx[k]);
    U.col(k) = V.col(idx[k]);
  }
  return {d, U};
}

}  // namespace

TEST_CASE("edge list validation") {
  CHECK_THROWS_AS(Graph::from_edges(3, {{0, 0, 1.0}}), InvalidInput);
  CHECK_THROWS_AS(Graph::from_edges(3, {{0, 1, 1.0}, {1, 0, 2.0}}), InvalidInput);
  CHECK_THROWS_AS(Graph::from_edges(3, {{0, 1, 0.0}}), InvalidInput);
  CHECK_THROWS_AS(Graph::from_edges(3, {{0, 1, -1.0}}), InvalidInput);
  CHECK_THROWS_AS(Graph::from_edges(3, {{0, 3, 1.0}}), InvalidInput);
  CHECK_THROWS_AS(Graph::from_edges(0, {}), InvalidInput);
  const Graph g = Graph::from_edges(3, {{2, 1, 2.0}, {0, 1, 1.0}});
  REQUIRE(g.edges().size() == 2);
  CHECK(g.edges()[0].i == 0);
  CHECK(g.edges()[1].i == 1);
  CHECK(g.edges()[1].j == 2);
  CHECK(g.adjacency()(2, 1) == 2.0);
}

TEST_CASE("path graph Laplacian and spectrum") {
  const Matrix L = laplacian(path(3));
  Matrix expected(3, 3);
  expected << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  CHECK((L - expected).norm() == 0.0);
  const SpectralBasis b = spectral_basis(path(3));
  CHECK(b.eigenvalues(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(b.eigenvalues(1) == doctest::Approx(1.0));
  CHECK(b.eigenvalues(2) == doctest::Approx(3.0));
}

TEST_CASE("eigendecomposition matches a Jacobi oracle") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Graph g = random_connected(7, seed);
    const SpectralBasis b = spectral_basis(g);
    const auto [d, V] = jacobi_eigen(laplacian(g));
    CHECK((b.eigenvalues - d).cwiseAbs().maxCoeff() < 1e-10);
    // random weights give simple eigenvalues; compare vectors up to sign
    for (int k = 0; k < 7; ++k) CHECK(std::abs(std::abs(b.eigenvectors.col(k).dot(V.col(k))) - 1.0) < 1e-9);
    const Matrix& U = b.eigenvectors;
    CHECK((U.transpose() * U - Matrix::Identity(7, 7)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((U * b.eigenvalues.asDiagonal() * U.transpose() - b.laplacian).cwiseAbs().maxCoeff() < 1e-10);
    for (int k = 0; k < 7; ++k) {
      int first = 0;
      while (std::abs(U(first, k)) <= 1e-12) ++first;
      CHECK(U(first, k) > 0.0);
    }
  }
}

TEST_CASE("eigendecomposition is reproducible and handles repeated eigenvalues") {
  const Graph g = ring(8);  // ring spectra are doubly degenerate
  const SpectralBasis a = spectral_basis(g);
  const SpectralBasis b = spectral_basis(g);
  CHECK((a.eigenvectors - b.eigenvectors).norm() == 0.0);
  CHECK((a.eigenvectors.transpose() * a.eigenvectors - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(a.eigenvalues(0) >= 0.0);
}

TEST_CASE("unit spectral norm normalization") {
  const SpectralBasis b = spectral_basis(random_connected(6, 3), Normalization::unit_spectral_norm);
  CHECK(b.eigenvalues.maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(b.normalization == Normalization::unit_spectral_norm);
}

TEST_CASE("asymmetric Laplacian rejected") {
  Matrix L = laplacian(path(3));
  L(0, 1) += 1e-3;
  CHECK_THROWS_AS(eigendecompose(L), InvalidInput);
}

TEST_CASE("k-NN graph matches brute force") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = 12, k = 3;
    Matrix C(n, 2);
    for (int i = 0; i < n; ++i) C.row(i) << u(rng), u(rng);
    const Graph g = build_knn_graph(C, k);

    double total = 0.0;
    int pairs = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j, ++pairs) total += (C.row(i) - C.row(j)).norm();
    const double mean = total / pairs;
    std::map<std::pair<int, int>, double> expected;
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<double, int>> cand;
      for (int j = 0; j < n; ++j)
        if (j != i) cand.push_back({(C.row(i) - C.row(j)).norm(), j});
      std::sort(cand.begin(), cand.end());
      for (int r = 0; r < k; ++r) {
        const int j = cand[r].second;
        expected[{std::min(i, j), std::max(i, j)}] = std::exp(-cand[r].first / mean);
      }
    }
    REQUIRE(g.edges().size() == expected.size());
    for (const Edge& e : g.edges()) {
      auto it = expected.find({e.i, e.j});
      REQUIRE(it != expected.end());
      CHECK(e.weight == doctest::Approx(it->second).epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS(build_knn_graph(Matrix::Zero(3, 2), 3), InvalidInput);
  // coincident points: every weight is 1
  const Graph same = build_knn_graph(Matrix::Zero(4, 2), 2);
  for (const Edge& e : same.edges()) CHECK(e.weight == 1.0);
}

TEST_CASE("GFT and graph filtering") {
  const SpectralBasis b = spectral_basis(random_connected(6, 11));
  const Vector x = gaussian(6, 1, 4).col(0);
  CHECK((igft(b, gft(b, x)) - x).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((apply_graph_filter(b, [](double) { return 1.0; }, x) - x).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((apply_graph_filter(b, [](double l) { return l; }, x) - b.laplacian * x).cwiseAbs().maxCoeff() < 1e-10);
  CHECK_THROWS_AS(apply_graph_filter(b, [](double) { return std::nan(""); }, x), InvalidInput);
  CHECK_THROWS_AS(gft(b, Vector::Zero(5)), InvalidInput);
}

TEST_CASE("sparse polynomial evaluation matches dense powers") {
  const Graph g = random_connected(9, 5);
  const Matrix L = laplacian(g);
  const std::vector<double> c{0.3, -1.2, 0.5, 0.07};
  const Matrix X = gaussian(9, 4, 8);
  Matrix dense = Matrix::Zero(9, 4);
  Matrix power = Matrix::Identity(9, 9);
  for (double coef : c) {
    dense += coef * power * X;
    power = power * L;
  }
  CHECK((polynomial_apply(to_sparse(L), c, X) - dense).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((polynomial_apply(to_sparse(L), c, Vector(X.col(0))) - dense.col(0)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(polynomial_apply(to_sparse(L), std::vector<double>{}, X).norm() == 0.0);
}
