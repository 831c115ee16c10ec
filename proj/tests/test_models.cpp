#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gvarma/experiments.hpp"
#include "gvarma/models.hpp"
#include "support.hpp"

using namespace gvarma;
using namespace testing_support;

namespace {

// Dense graph filters A_p = U diag(a_p) U^T.
std::vector<Matrix> dense(const SpectralBasis& b, const std::vector<Vector>& spectra) {
  std::vector<Matrix> out;
  for (const Vector& s : spectra) out.push_back(b.eigenvectors * s.asDiagonal() * b.eigenvectors.transpose());
  return out;
}

Matrix dense_run(const std::vector<Matrix>& A, const std::vector<Matrix>& B, const Matrix& E) {
  Matrix X = Matrix::Zero(E.rows(), E.cols());
  for (Eigen::Index t = 0; t < E.cols(); ++t) {
    Vector v = E.col(t);
    for (size_t p = 1; p <= A.size() && static_cast<Eigen::Index>(p) <= t; ++p) v -= A[p - 1] * X.col(t - p);
    for (size_t q = 1; q <= B.size() && static_cast<Eigen::Index>(q) <= t; ++q) v += B[q - 1] * E.col(t - q);
    X.col(t) = v;
  }
  return X;
}

Matrix dense_predict(const std::vector<Matrix>& A, const std::vector<Matrix>& B, const Matrix& H, int k) {
  const Eigen::Index N = H.rows(), T = H.cols();
  Matrix E = Matrix::Zero(N, T);
  for (Eigen::Index t = 0; t < T; ++t) {
    Vector v = H.col(t);
    for (size_t p = 1; p <= A.size() && static_cast<Eigen::Index>(p) <= t; ++p) v += A[p - 1] * H.col(t - p);
    for (size_t q = 1; q <= B.size() && static_cast<Eigen::Index>(q) <= t; ++q) v -= B[q - 1] * E.col(t - q);
    E.col(t) = v;
  }
  Matrix ext(N, T + k);
  ext.leftCols(T) = H;
  for (int j = 0; j < k; ++j) {
    const Eigen::Index t = T + j;
    Vector v = Vector::Zero(N);
    for (size_t p = 1; p <= A.size(); ++p) v -= A[p - 1] * ext.col(t - p);
    for (size_t q = j + 1; q <= B.size(); ++q) v += B[q - 1] * E.col(t - q);
    ext.col(t) = v;
  }
  return ext.rightCols(k);
}

SpectralBasis single_node() { return spectral_basis(Graph::from_edges(1, {})); }

}  // namespace

TEST_CASE("G-VARMA filter matches the dense vertex recursion") {
  const SpectralBasis b = spectral_basis(random_connected(6, 3), Normalization::unit_spectral_norm);
  const GVarmaModel m = random_gvarma(b, 2, 2, 0.8, 7);
  const Matrix E = gaussian(6, 40, 8);
  const Matrix X = gvarma_filter(m, b, E);
  CHECK((X - dense_run(dense(b, m.ar), dense(b, m.ma), E)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("GP-VAR filter matches its dense lag matrices and its G-VARMA form") {
  const SpectralBasis b = spectral_basis(random_connected(7, 4), Normalization::unit_spectral_norm);
  const GpVarModel m = random_gpvar(b, 2, 3, 0.85, 5);
  const Matrix E = gaussian(7, 30, 9);
  std::vector<Matrix> A{m.lag_matrix(1), m.lag_matrix(2)};
  const Matrix X = gpvar_filter(m, E);
  CHECK((X - dense_run(A, {}, E)).cwiseAbs().maxCoeff() < 1e-10);
  const GVarmaModel g = to_gvarma(m, b);
  CHECK((gvarma_filter(g, b, E) - X).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(gpvar_spectral_radius(m, b) == doctest::Approx(0.85).epsilon(1e-9));
  // identity innovation covariance: both simulators see the same draws
  CHECK((gpvar_simulate(m, 50, 3) - gvarma_simulate(g, b, 50, 3)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("predictions match the dense oracle") {
  const SpectralBasis b = spectral_basis(random_connected(5, 11), Normalization::unit_spectral_norm);
  const GVarmaModel m = random_gvarma(b, 2, 1, 0.75, 12);
  const Matrix H = gvarma_simulate(m, b, 25, 13);
  const Forecast f = gvarma_predict(m, b, H, 4);
  CHECK((f.predictions - dense_predict(dense(b, m.ar), dense(b, m.ma), H, 4)).cwiseAbs().maxCoeff() < 1e-10);

  const GpVarModel g = random_gpvar(b, 3, 2, 0.8, 14);
  const Matrix Hg = gpvar_simulate(g, 20, 15);
  std::vector<Matrix> A{g.lag_matrix(1), g.lag_matrix(2), g.lag_matrix(3)};
  CHECK((gpvar_predict(g, Hg, 5).predictions - dense_predict(A, {}, Hg, 5)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("scalar AR(1) forecasts and error growth") {
  const SpectralBasis b = single_node();
  GVarmaModel m;
  m.ar = {Vector::Constant(1, -0.5)};
  m.innovation_spectrum = Vector::Ones(1);
  const Forecast f = gvarma_predict(m, b, Matrix::Constant(1, 3, 4.0), 2);
  CHECK(f.predictions(0, 0) == doctest::Approx(2.0));
  CHECK(f.predictions(0, 1) == doctest::Approx(1.0));
  CHECK(f.step_mse(0) == doctest::Approx(1.0));
  CHECK(f.step_mse(1) == doctest::Approx(1.25));

  GpVarModel g;
  g.psi = {{-0.5}};
  g.laplacian = Matrix::Zero(1, 1);
  g.innovation_cov = Matrix::Identity(1, 1);
  const Forecast fg = gpvar_predict(g, Matrix::Constant(1, 1, 4.0), 2);
  CHECK(fg.predictions(0, 0) == doctest::Approx(2.0));
  CHECK(fg.predictions(0, 1) == doctest::Approx(1.0));
  CHECK(fg.step_mse(1) == doctest::Approx(1.25));
  CHECK(theoretical_one_step_mse(g) == doctest::Approx(1.0));
}

TEST_CASE("predicted error matches the empirical forecast error") {
  const SpectralBasis b = spectral_basis(random_connected(4, 21), Normalization::unit_spectral_norm);
  const GVarmaModel m = random_gvarma(b, 2, 1, 0.8, 22);
  const Matrix X = gvarma_simulate(m, b, 20000, 23);
  const auto rolling = gvarma_rolling_forecast(m, b, X, 4);
  const Forecast f = gvarma_predict(m, b, X.leftCols(10), 4);
  for (int h = 1; h <= 4; ++h) {
    const Eigen::Index skip = 50;
    const double emp = (X - rolling[h - 1]).rightCols(X.cols() - skip).squaredNorm() / double(X.cols() - skip);
    CHECK(emp == doctest::Approx(f.step_mse(h - 1)).epsilon(0.05));
    if (h > 1) CHECK(f.step_mse(h - 1) >= f.step_mse(h - 2));
  }
  CHECK(f.step_mse(0) == doctest::Approx(theoretical_one_step_mse(m)).epsilon(1e-12));
}

TEST_CASE("rolling forecasts agree with single-origin predictions") {
  const SpectralBasis b = spectral_basis(random_connected(5, 31), Normalization::unit_spectral_norm);
  const GVarmaModel m = random_gvarma(b, 2, 2, 0.7, 32);
  const Matrix X = gvarma_simulate(m, b, 30, 33);
  const auto roll = gvarma_rolling_forecast(m, b, X, 3);
  const GpVarModel g = random_gpvar(b, 2, 1, 0.7, 34);
  const Matrix Y = gpvar_simulate(g, 30, 35);
  const auto groll = gpvar_rolling_forecast(g, Y, 3);
  for (int h = 1; h <= 3; ++h) {
    for (int t = 5; t < 30; t += 6) {
      const Matrix hist = X.leftCols(t - h + 1);
      CHECK((roll[h - 1].col(t) - gvarma_predict(m, b, hist, h).predictions.col(h - 1)).cwiseAbs().maxCoeff() <
            1e-10);
      CHECK((groll[h - 1].col(t) - gpvar_predict(g, Y.leftCols(t - h + 1), h).predictions.col(h - 1))
                .cwiseAbs()
                .maxCoeff() < 1e-10);
    }
    for (int t = 0; t < h - 1; ++t) CHECK(roll[h - 1].col(t).isZero(0.0));
  }
}

TEST_CASE("companion spectral radius and stability checks") {
  Vector a(2);
  a << -1.5, 0.56;  // roots 0.7 and 0.8
  CHECK(ar_spectral_radius(a) == doctest::Approx(0.8));
  CHECK(ar_spectral_radius(Vector()) == 0.0);
  const SpectralBasis b = single_node();
  GVarmaModel m;
  m.ar = {Vector::Constant(1, -1.0)};
  m.innovation_spectrum = Vector::Ones(1);
  CHECK_THROWS_AS(gvarma_simulate(m, b, 10, 1), InvalidInput);
  m.innovation_spectrum = Vector::Constant(1, -1.0);
  CHECK_THROWS_AS(m.validate(), InvalidInput);
  CHECK_THROWS_AS(gvarma_predict(random_gvarma(b, 1, 0, 0.5, 1), b, Matrix::Zero(1, 2), 0), InvalidInput);
}

TEST_CASE("simulation is reproducible and seeded") {
  const SpectralBasis b = spectral_basis(ring(6), Normalization::unit_spectral_norm);
  const GVarmaModel m = random_gvarma(b, 1, 1, 0.6, 2);
  CHECK((gvarma_simulate(m, b, 40, 9) - gvarma_simulate(m, b, 40, 9)).norm() == 0.0);
  CHECK((gvarma_simulate(m, b, 40, 9) - gvarma_simulate(m, b, 40, 10)).norm() > 0.0);
  const Matrix Z = standard_normal(6, 540, 9);
  CHECK((gvarma_simulate(m, b, 40, 9) - gvarma_filter(m, b, gvarma_innovations(m, b, Z)).rightCols(40)).norm() ==
        0.0);
}

TEST_CASE("psd square root") {
  const Matrix G = gaussian(4, 4, 1);
  const Matrix S = G * G.transpose();
  const Matrix R = psd_sqrt(S);
  CHECK((R * R - S).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((R - R.transpose()).norm() < 1e-12);
}
