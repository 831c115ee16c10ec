#include "gvarma/models.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

namespace gvarma {

void GVarmaModel::validate() const {
  const Eigen::Index n = innovation_spectrum.size();
  require(n > 0, "G-VARMA model has no nodes");
  for (const auto& s : ar) require(s.size() == n, "AR spectrum length mismatch");
  for (const auto& s : ma) require(s.size() == n, "MA spectrum length mismatch");
  require(innovation_spectrum.allFinite() && (innovation_spectrum.array() >= 0.0).all(),
          "innovation spectrum must be finite and nonnegative");
}

Vector GVarmaModel::ar_at(int n) const {
  Vector a(ar_order());
  for (int p = 0; p < ar_order(); ++p) a(p) = ar[p](n);
  return a;
}

Vector GVarmaModel::ma_at(int n) const {
  Vector b(ma_order());
  for (int q = 0; q < ma_order(); ++q) b(q) = ma[q](n);
  return b;
}

std::vector<int> GpVarModel::orders() const {
  std::vector<int> out;
  for (const auto& row : psi) out.push_back(static_cast<int>(row.size()) - 1);
  return out;
}

void GpVarModel::validate() const {
  require(laplacian.rows() > 0 && laplacian.rows() == laplacian.cols(),
          "GP-VAR model needs a square Laplacian");
  require(innovation_cov.rows() == laplacian.rows() && innovation_cov.cols() == laplacian.cols(),
          "innovation covariance dimension mismatch");
  for (std::size_t p = 0; p < psi.size(); ++p) {
    require(!psi[p].empty(), "every lag needs at least the l = 0 coefficient");
    if (restricted) {
      require(static_cast<int>(psi[p].size()) - 1 <= static_cast<int>(p) + 1,
              "restricted GP-VAR requires L_p <= p");
    }
  }
}

Matrix GpVarModel::lag_matrix(int p) const {
  const Eigen::Index n = laplacian.rows();
  Matrix acc = Matrix::Zero(n, n);
  Matrix power = Matrix::Identity(n, n);
  for (double c : psi[p - 1]) {
    acc += c * power;
    power = power * laplacian;
  }
  return acc;
}

Vector GpVarModel::lag_spectrum(int p, const Vector& eigenvalues) const {
  Vector out(eigenvalues.size());
  for (Eigen::Index n = 0; n < eigenvalues.size(); ++n) {
    double acc = 0.0, power = 1.0;
    for (double c : psi[p - 1]) {
      acc += c * power;
      power *= eigenvalues(n);
    }
    out(n) = acc;
  }
  return out;
}

GVarmaModel to_gvarma(const GpVarModel& model, const SpectralBasis& basis) {
  model.validate();
  require(model.size() == basis.size(), "model and basis sizes differ");
  GVarmaModel out;
  for (int p = 1; p <= model.ar_order(); ++p) out.ar.push_back(model.lag_spectrum(p, basis.eigenvalues));
  out.innovation_spectrum =
      (basis.eigenvectors.transpose() * model.innovation_cov * basis.eigenvectors).diagonal();
  out.innovation_spectrum = out.innovation_spectrum.cwiseMax(0.0);
  return out;
}

double ar_spectral_radius(const Vector& a) {
  const Eigen::Index P = a.size();
  if (P == 0) return 0.0;
  if (P == 1) return std::abs(a(0));
  Matrix C = Matrix::Zero(P, P);
  C.row(0) = -a.transpose();
  C.bottomLeftCorner(P - 1, P - 1).setIdentity();
  Eigen::EigenSolver<Matrix> solver(C, false);
  if (solver.info() != Eigen::Success) throw NumericalError("companion eigen-solver failed");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double gvarma_spectral_radius(const GVarmaModel& model) {
  double rho = 0.0;
  for (int n = 0; n < model.size(); ++n) rho = std::max(rho, ar_spectral_radius(model.ar_at(n)));
  return rho;
}

double gpvar_spectral_radius(const GpVarModel& model, const SpectralBasis& basis) {
  return gvarma_spectral_radius(to_gvarma(model, basis));
}

Matrix psd_sqrt(const Matrix& covariance) {
  require(covariance.rows() == covariance.cols(), "covariance must be square");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (covariance + covariance.transpose()));
  if (solver.info() != Eigen::Success) throw NumericalError("covariance eigen-solver failed");
  const Vector root = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * root.asDiagonal() * solver.eigenvectors().transpose();
}

Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix Z(rows, cols);
  for (Eigen::Index t = 0; t < cols; ++t)
    for (Eigen::Index n = 0; n < rows; ++n) Z(n, t) = normal(rng);
  return Z;
}

Matrix gvarma_innovations(const GVarmaModel& model, const SpectralBasis& basis,
                          const Matrix& standard_draws) {
  require(standard_draws.rows() == basis.size(), "draw dimension does not match the graph");
  const Matrix& U = basis.eigenvectors;
  const Vector root = model.innovation_spectrum.cwiseSqrt();
  return U * (root.asDiagonal() * (U.transpose() * standard_draws));
}

Matrix gpvar_innovations(const GpVarModel& model, const Matrix& standard_draws) {
  require(standard_draws.rows() == model.size(), "draw dimension does not match the graph");
  return psd_sqrt(model.innovation_cov) * standard_draws;
}

namespace {

// One scalar ARMA recursion x_t = -sum a_p x_{t-p} + e_t + sum b_q e_{t-q}.
Vector scalar_filter(const Vector& a, const Vector& b, const Vector& e) {
  const Eigen::Index T = e.size();
  Vector x(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    double v = e(t);
    for (Eigen::Index p = 1; p <= a.size() && p <= t; ++p) v -= a(p - 1) * x(t - p);
    for (Eigen::Index q = 1; q <= b.size() && q <= t; ++q) v += b(q - 1) * e(t - q);
    x(t) = v;
  }
  return x;
}

// Innovations e_t = x_t - x~_t of the one-step predictor, zero before t = 0.
Vector scalar_innovations(const Vector& a, const Vector& b, const Eigen::Ref<const Vector>& x) {
  const Eigen::Index T = x.size();
  Vector e(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    double pred = 0.0;
    for (Eigen::Index p = 1; p <= a.size() && p <= t; ++p) pred -= a(p - 1) * x(t - p);
    for (Eigen::Index q = 1; q <= b.size() && q <= t; ++q) pred += b(q - 1) * e(t - q);
    e(t) = x(t) - pred;
  }
  return e;
}

// h-step prediction path from origin o (last observed index, may be < 0).
// Returns the predictions for o+1..o+h.
Vector scalar_path(const Vector& a, const Vector& b, const Eigen::Ref<const Vector>& x, const Vector& e,
                   Eigen::Index origin, int h) {
  Vector path(h);
  for (int j = 1; j <= h; ++j) {
    double v = 0.0;
    for (Eigen::Index p = 1; p <= a.size(); ++p) {
      const Eigen::Index s = origin + j - p;
      if (s < 0) continue;
      v -= a(p - 1) * (s <= origin ? x(s) : path(s - origin - 1));
    }
    for (Eigen::Index q = j; q <= b.size(); ++q) {
      const Eigen::Index s = origin + j - q;
      if (s >= 0) v += b(q - 1) * e(s);
    }
    path(j - 1) = v;
  }
  return path;
}

// psi-weights h_0..h_{k-1} of the scalar ARMA impulse response.
Vector impulse_response(const Vector& a, const Vector& b, int k) {
  Vector h = Vector::Zero(k);
  for (int j = 0; j < k; ++j) {
    double v = j == 0 ? 1.0 : 0.0;
    if (j >= 1 && j <= b.size()) v += b(j - 1);
    for (Eigen::Index p = 1; p <= a.size() && p <= j; ++p) v -= a(p - 1) * h(j - p);
    h(j) = v;
  }
  return h;
}

void require_stable(double rho) {
  if (!(rho < 1.0 - kStationarityMargin)) {
    throw InvalidInput("model AR part is not stable (companion spectral radius " +
                       std::to_string(rho) + ")");
  }
}

}  // namespace

Matrix gvarma_filter(const GVarmaModel& model, const SpectralBasis& basis, const Matrix& innovations) {
  model.validate();
  require(model.size() == basis.size(), "model and basis sizes differ");
  require(innovations.rows() == basis.size(), "innovation dimension does not match the graph");
  const Matrix& U = basis.eigenvectors;
  const Matrix E_hat = U.transpose() * innovations;
  Matrix X_hat(E_hat.rows(), E_hat.cols());
  for (int n = 0; n < model.size(); ++n) {
    X_hat.row(n) = scalar_filter(model.ar_at(n), model.ma_at(n), E_hat.row(n).transpose()).transpose();
  }
  return U * X_hat;
}

Matrix gpvar_filter(const GpVarModel& model, const Matrix& innovations) {
  model.validate();
  require(innovations.rows() == model.size(), "innovation dimension does not match the graph");
  const SparseMatrix L = to_sparse(model.laplacian);
  const Eigen::Index T = innovations.cols();
  Matrix X(innovations.rows(), T);
  for (Eigen::Index t = 0; t < T; ++t) {
    Vector v = innovations.col(t);
    for (int p = 1; p <= model.ar_order() && p <= t; ++p) {
      v -= polynomial_apply(L, model.psi[p - 1], Vector(X.col(t - p)));
    }
    X.col(t) = v;
  }
  return X;
}

Matrix gvarma_simulate(const GVarmaModel& model, const SpectralBasis& basis, int T,
                       std::uint64_t seed, int burn_in) {
  require(T >= 1 && burn_in >= 0, "simulation length must be positive");
  model.validate();
  require_stable(gvarma_spectral_radius(model));
  const Matrix Z = standard_normal(basis.size(), T + burn_in, seed);
  const Matrix X = gvarma_filter(model, basis, gvarma_innovations(model, basis, Z));
  return X.rightCols(T);
}

Matrix gpvar_simulate(const GpVarModel& model, int T, std::uint64_t seed, int burn_in) {
  require(T >= 1 && burn_in >= 0, "simulation length must be positive");
  model.validate();
  require_stable(gpvar_spectral_radius(model, eigendecompose(model.laplacian)));
  const Matrix Z = standard_normal(model.size(), T + burn_in, seed);
  const Matrix X = gpvar_filter(model, gpvar_innovations(model, Z));
  return X.rightCols(T);
}

Forecast gvarma_predict(const GVarmaModel& model, const SpectralBasis& basis, const Matrix& history,
                        int k) {
  model.validate();
  require(k >= 1, "forecast horizon must be positive");
  require(history.rows() == basis.size() && model.size() == basis.size(),
          "history does not match the graph");
  require(history.cols() >= std::max(model.ar_order(), model.ma_order()),
          "history is shorter than the model order");
  const Matrix& U = basis.eigenvectors;
  const Matrix X_hat = U.transpose() * history;
  const Eigen::Index origin = history.cols() - 1;

  Forecast f;
  f.horizon = k;
  Matrix pred_hat(model.size(), k);
  f.step_mse = Vector::Zero(k);
  for (int n = 0; n < model.size(); ++n) {
    const Vector a = model.ar_at(n), b = model.ma_at(n);
    const Vector x = X_hat.row(n).transpose();
    const Vector e = scalar_innovations(a, b, x);
    pred_hat.row(n) = scalar_path(a, b, x, e, origin, k).transpose();
    const Vector h = impulse_response(a, b, k);
    double cumulative = 0.0;
    for (int j = 0; j < k; ++j) {
      cumulative += h(j) * h(j);
      f.step_mse(j) += model.innovation_spectrum(n) * cumulative;
    }
  }
  f.predictions = U * pred_hat;
  return f;
}

Forecast gpvar_predict(const GpVarModel& model, const Matrix& history, int k) {
  model.validate();
  require(k >= 1, "forecast horizon must be positive");
  require(history.rows() == model.size(), "history does not match the graph");
  require(history.cols() >= model.ar_order(), "history is shorter than the model order");
  const SparseMatrix L = to_sparse(model.laplacian);
  const int P = model.ar_order();
  const Eigen::Index origin = history.cols() - 1;

  Forecast f;
  f.horizon = k;
  f.predictions = Matrix::Zero(model.size(), k);
  for (int j = 1; j <= k; ++j) {
    Vector v = Vector::Zero(model.size());
    for (int p = 1; p <= P; ++p) {
      const Eigen::Index s = origin + j - p;
      if (s < 0) continue;
      const Vector src = s <= origin ? Vector(history.col(s)) : Vector(f.predictions.col(s - origin - 1));
      v -= polynomial_apply(L, model.psi[p - 1], src);
    }
    f.predictions.col(j - 1) = v;
  }

  // H_0 = I, H_j = -sum_p Psi_p H_{j-p}; MSE_k = sum_{i<k} tr(H_i Sigma H_i^T)
  std::vector<Matrix> lag;
  for (int p = 1; p <= P; ++p) lag.push_back(model.lag_matrix(p));
  std::vector<Matrix> H;
  f.step_mse.resize(k);
  double cumulative = 0.0;
  for (int j = 0; j < k; ++j) {
    Matrix Hj = Matrix::Zero(model.size(), model.size());
    if (j == 0) Hj.setIdentity();
    for (int p = 1; p <= P && p <= j; ++p) Hj -= lag[p - 1] * H[j - p];
    cumulative += (Hj * model.innovation_cov * Hj.transpose()).trace();
    f.step_mse(j) = cumulative;
    H.push_back(std::move(Hj));
  }
  return f;
}

std::vector<Matrix> scalar_arma_rolling_forecast(const std::vector<Vector>& ar,
                                                 const std::vector<Vector>& ma,
                                                 const Matrix& series, int horizon) {
  require(horizon >= 1, "forecast horizon must be positive");
  require(static_cast<Eigen::Index>(ar.size()) == series.rows() &&
              static_cast<Eigen::Index>(ma.size()) == series.rows(),
          "one coefficient set per series is required");
  const Eigen::Index T = series.cols();
  std::vector<Matrix> out(horizon, Matrix::Zero(series.rows(), T));
  for (Eigen::Index n = 0; n < series.rows(); ++n) {
    if (ar[n].isZero(0.0) && ma[n].isZero(0.0)) continue;  // predictions stay zero
    const Vector x = series.row(n).transpose();
    const Vector e = scalar_innovations(ar[n], ma[n], x);
    for (Eigen::Index t = 0; t < T; ++t) {
      // one path per origin serves every horizon landing at or after t
      const Eigen::Index origin = t - 1;
      const int steps = static_cast<int>(std::min<Eigen::Index>(horizon, T - t));
      const Vector path = scalar_path(ar[n], ma[n], x, e, origin, steps);
      for (int j = 1; j <= steps; ++j) out[j - 1](n, origin + j) = path(j - 1);
    }
  }
  // h-step predictions of the first h-1 samples come from negative origins.
  for (int h = 2; h <= horizon; ++h) {
    for (Eigen::Index t = 0; t < std::min<Eigen::Index>(h - 1, T); ++t) out[h - 1].col(t).setZero();
  }
  return out;
}

std::vector<Matrix> gvarma_rolling_forecast(const GVarmaModel& model, const SpectralBasis& basis,
                                            const Matrix& X, int horizon) {
  model.validate();
  require(X.rows() == basis.size() && model.size() == basis.size(), "series does not match the graph");
  // frequencies without dynamics predict zero; leave them out of both rotations
  std::vector<int> active;
  std::vector<Vector> ar, ma;
  for (int n = 0; n < model.size(); ++n) {
    Vector a = model.ar_at(n), b = model.ma_at(n);
    if (a.isZero(0.0) && b.isZero(0.0)) continue;
    active.push_back(n);
    ar.push_back(std::move(a));
    ma.push_back(std::move(b));
  }
  const Matrix U = basis.eigenvectors(Eigen::all, active);
  auto preds = scalar_arma_rolling_forecast(ar, ma, U.transpose() * X, horizon);
  for (auto& m : preds) m = U * m;
  return preds;
}

std::vector<Matrix> gpvar_rolling_forecast(const GpVarModel& model, const Matrix& X, int horizon) {
  model.validate();
  require(horizon >= 1, "forecast horizon must be positive");
  require(X.rows() == model.size(), "series does not match the graph");
  const SparseMatrix L = to_sparse(model.laplacian);
  const Eigen::Index N = X.rows(), T = X.cols();
  std::vector<Matrix> preds;
  for (int h = 1; h <= horizon; ++h) {
    Matrix acc = Matrix::Zero(N, T);
    for (int p = 1; p <= model.ar_order(); ++p) {
      if (p >= T) continue;
      // column t of the source holds x_{t-p} if observed, else the
      // (h-p)-step prediction of it from the same origin
      Matrix src = Matrix::Zero(N, T);
      const Matrix& from = p >= h ? X : preds[h - p - 1];
      src.rightCols(T - p) = from.leftCols(T - p);
      acc -= polynomial_apply(L, model.psi[p - 1], src);
    }
    // origins before the series start see zeros only
    acc.leftCols(std::min<Eigen::Index>(h - 1, T)).setZero();
    preds.push_back(std::move(acc));
  }
  return preds;
}

double theoretical_one_step_mse(const GVarmaModel& model) { return model.innovation_spectrum.sum(); }

double theoretical_one_step_mse(const GpVarModel& model) { return model.innovation_cov.trace(); }

}  // namespace gvarma
