#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gvarma/stationarity.hpp"
#include "support.hpp"

using namespace gvarma;
using namespace testing_support;

namespace {

double window(double d, double sigma) { return std::exp(-(d * d) / (sigma * sigma)); }

// Direct double sum over both axes with per-row normalization.
Matrix smooth_oracle(const Matrix& P, const Vector& lam, const Vector& om, double sg, double st) {
  const Eigen::Index N = P.rows(), T = P.cols();
  Matrix out = Matrix::Zero(N, T);
  for (Eigen::Index n = 0; n < N; ++n) {
    double zg = 0.0;
    for (Eigen::Index m = 0; m < N; ++m) zg += window(lam(n) - lam(m), sg);
    for (Eigen::Index t = 0; t < T; ++t) {
      double zt = 0.0;
      for (Eigen::Index s = 0; s < T; ++s) {
        const double d = std::abs(om(t) - om(s));
        zt += window(std::min(d, 2 * std::numbers::pi - d), st);
      }
      double acc = 0.0;
      for (Eigen::Index m = 0; m < N; ++m)
        for (Eigen::Index s = 0; s < T; ++s) {
          const double d = std::abs(om(t) - om(s));
          acc += window(lam(n) - lam(m), sg) * window(std::min(d, 2 * std::numbers::pi - d), st) * P(m, s);
        }
      out(n, t) = acc / (zg * zt);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("smoothing matches the direct double sum") {
  const SpectralBasis b = spectral_basis(random_connected(5, 1));
  const TemporalBasis tb(9);
  const Matrix P = gaussian(5, 9, 2).cwiseAbs2();
  const Matrix got = smooth_jpsd(P, b.eigenvalues, tb.frequencies(), {0.7, 0.5});
  CHECK((got - smooth_oracle(P, b.eigenvalues, tb.frequencies(), 0.7, 0.5)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((got.array() >= 0.0).all());
  CHECK((smooth_jpsd(P, b.eigenvalues, tb.frequencies(), {0.0, 0.0}) - P).norm() == 0.0);
  CHECK_THROWS_AS(smooth_jpsd(P, b.eigenvalues, tb.frequencies(), {-1.0, 0.0}), InvalidInput);
}

TEST_CASE("temporal smoothing conserves total power") {
  const SpectralBasis b = spectral_basis(path(4));
  const TemporalBasis tb(12);
  const Matrix P = gaussian(4, 12, 5).cwiseAbs2();
  const Matrix S = smooth_jpsd(P, b.eigenvalues, tb.frequencies(), {0.0, 0.8});
  CHECK(S.sum() == doctest::Approx(P.sum()).epsilon(1e-12));
  for (int n = 0; n < 4; ++n) CHECK(S.row(n).sum() == doctest::Approx(P.row(n).sum()).epsilon(1e-12));
}

TEST_CASE("synthesized JWSS process has the requested JPSD") {
  const SpectralBasis b = spectral_basis(random_connected(4, 6));
  const TemporalBasis tb(6);
  Matrix P(4, 6);
  for (int n = 0; n < 4; ++n)
    for (int t = 0; t < 6; ++t) P(n, t) = (1.0 + n) / (1.3 - std::cos(tb.frequencies()(t)));
  std::vector<Matrix> draws;
  for (std::uint64_t s = 0; s < 4000; ++s) draws.push_back(synth_jwss(b, tb, P, s));
  const Jpsd est = estimate_jpsd(b, tb, draws);
  CHECK(((est - P).cwiseAbs().array() / P.array()).maxCoeff() < 0.15);
  CHECK(((est - P).cwiseAbs().array() / P.array()).mean() < 0.05);

  // sample covariance of vec(X) is diagonal in the joint basis
  Matrix cov = Matrix::Zero(24, 24);
  for (const Matrix& X : draws) {
    const Eigen::Map<const Vector> v(X.data(), 24);
    cov += v * v.transpose();
  }
  cov /= static_cast<double>(draws.size());
  CHECK(diagonalization_score(b, tb, cov) > 0.95);
  CHECK(diagonalization_score(b, tb, Matrix::Identity(24, 24)) == doctest::Approx(1.0));
  const Matrix G = gaussian(24, 24, 99);
  CHECK(diagonalization_score(b, tb, G * G.transpose() / 24.0) < 0.9);
}

TEST_CASE("rank-one JPSD yields a constant signal along one eigenvector") {
  const SpectralBasis b = spectral_basis(random_connected(5, 2));
  const TemporalBasis tb(8);
  Matrix P = Matrix::Zero(5, 8);
  P(2, 0) = 3.0;
  const Matrix X = synth_jwss(b, tb, P, 11);
  const Vector u = b.eigenvectors.col(2);
  for (int t = 0; t < 8; ++t) {
    CHECK((X.col(t) - X.col(0)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((X.col(t) - u * u.dot(X.col(t))).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK_THROWS_AS(synth_jwss(b, tb, Matrix::Constant(5, 8, -1.0), 1), InvalidInput);
}

TEST_CASE("graph stationarity score") {
  const SpectralBasis b = spectral_basis(random_connected(5, 4));
  const Matrix& U = b.eigenvectors;
  const Matrix gwss = U * Vector::LinSpaced(5, 1.0, 2.0).asDiagonal() * U.transpose();
  CHECK(graph_diagonalization_score(b, gwss) == doctest::Approx(1.0).epsilon(1e-12));
  const Matrix G = gaussian(5, 5, 3);
  CHECK(graph_diagonalization_score(b, G * G.transpose()) < 0.95);
}

TEST_CASE("non-causal model JPSD and synthesis") {
  const SpectralBasis b = spectral_basis(path(3));
  const TemporalBasis tb(4);
  const CMatrix a = CMatrix::Constant(3, 4, Complex(2.0, 0.0));
  const CMatrix one = CMatrix::Ones(3, 4);
  CHECK((noncausal_jpsd(a, one).array() - 0.25).abs().maxCoeff() < 1e-15);
  std::vector<Matrix> draws;
  for (std::uint64_t s = 0; s < 4000; ++s) draws.push_back(synth_noncausal(b, tb, a, one, s));
  const Jpsd est = estimate_jpsd(b, tb, draws);
  CHECK((est.array() - 0.25).abs().maxCoeff() < 0.03);
  CHECK_THROWS_AS(noncausal_jpsd(CMatrix::Zero(3, 4), one), NumericalError);
  CHECK_THROWS_AS(synth_noncausal(b, tb, CMatrix::Zero(3, 4), one, 1), NumericalError);
}

TEST_CASE("JPSD estimate of one realization is the periodogram") {
  const SpectralBasis b = spectral_basis(path(3));
  const TemporalBasis tb(5);
  const Matrix X = gaussian(3, 5, 1);
  CHECK((estimate_jpsd(b, tb, {X}) - jft(b, tb, X).cwiseAbs2()).norm() == 0.0);
  CHECK_THROWS_AS(estimate_jpsd(b, tb, {}), InvalidInput);
}
