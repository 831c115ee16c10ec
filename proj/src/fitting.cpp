#include "gvarma/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "gvarma/time_vertex.hpp"

namespace gvarma {

std::vector<FrequencySeries> decouple(const SpectralBasis& basis, const Matrix& X) {
  require(X.rows() == basis.size(), "signal rows do not match the graph");
  const Matrix X_hat = basis.eigenvectors.transpose() * X;
  std::vector<FrequencySeries> out(basis.size());
  for (int n = 0; n < basis.size(); ++n) out[n] = {n, X_hat.row(n).transpose()};
  return out;
}

Vector arma_residuals(const Vector& series, const Vector& a, const Vector& b) {
  const Eigen::Index T = series.size();
  const Eigen::Index start = std::max(a.size(), b.size());
  Vector e = Vector::Zero(T);
  for (Eigen::Index t = start; t < T; ++t) {
    double v = series(t);
    for (Eigen::Index p = 1; p <= a.size(); ++p) v += a(p - 1) * series(t - p);
    for (Eigen::Index q = 1; q <= b.size(); ++q) v -= b(q - 1) * e(t - q);
    e(t) = v;
  }
  return e;
}

bool reflect_roots(Vector& coeffs) {
  const Eigen::Index P = coeffs.size();
  if (P == 0) return false;
  // Roots w of w^P + c_1 w^{P-1} + ... + c_P are the reciprocals of the roots
  // of the lag polynomial; |w| >= 1 means a lag root in the closed unit disk.
  Eigen::VectorXcd roots(P);
  if (P == 1) {
    roots(0) = -coeffs(0);
  } else {
    Matrix C = Matrix::Zero(P, P);
    C.row(0) = -coeffs.transpose();
    C.bottomLeftCorner(P - 1, P - 1).setIdentity();
    Eigen::EigenSolver<Matrix> solver(C, false);
    if (solver.info() != Eigen::Success) throw NumericalError("root finding failed");
    roots = solver.eigenvalues();
  }
  constexpr double kMinLagModulus = 1.0 + 1e-3;
  bool moved = false;
  for (Eigen::Index i = 0; i < P; ++i) {
    const double modulus = std::abs(roots(i));
    if (modulus >= 1.0) {
      roots(i) = std::polar(1.0 / std::max(modulus, kMinLagModulus), std::arg(roots(i)));
      moved = true;
    }
  }
  if (!moved) return false;
  // expand prod (w - w_i)
  Eigen::VectorXcd poly = Eigen::VectorXcd::Zero(P + 1);
  poly(0) = 1.0;
  for (Eigen::Index i = 0; i < P; ++i) {
    for (Eigen::Index k = i + 1; k >= 1; --k) poly(k) -= roots(i) * poly(k - 1);
  }
  for (Eigen::Index k = 0; k < P; ++k) coeffs(k) = poly(k + 1).real();
  return true;
}

namespace {

// Ridge least squares: argmin ||y - Z theta||^2 + gamma ||theta||^2.
Vector ridge_solve(const Matrix& Z, const Vector& y, double gamma) {
  Matrix G = Z.transpose() * Z;
  G.diagonal().array() += gamma;
  Eigen::LDLT<Matrix> ldlt(G);
  Vector theta = ldlt.solve(Z.transpose() * y);
  if (ldlt.info() != Eigen::Success || !theta.allFinite()) {
    theta = Z.completeOrthogonalDecomposition().solve(y);
  }
  return theta;
}

double objective(const Vector& e, const Vector& theta, double gamma) {
  return e.squaredNorm() + gamma * theta.squaredNorm();
}

struct Split {
  Vector a, b;
};

Split split(const Vector& theta, Eigen::Index P) {
  return {theta.head(P), theta.tail(theta.size() - P)};
}

double residual_variance(const Vector& e, Eigen::Index start) {
  const Eigen::Index n = e.size() - start;
  return n > 0 ? e.tail(n).squaredNorm() / static_cast<double>(n) : 0.0;
}

// Long AR followed by a regression on lagged data and lagged long-AR residuals.
Vector hannan_rissanen(const Vector& x, int P, int Q, double gamma) {
  const Eigen::Index T = x.size();
  const int m = std::max<int>(std::max(P, Q) + 1, std::min<Eigen::Index>(20, T / 4));
  const Eigen::Index rows_ar = T - m;
  Matrix Z(rows_ar, m);
  for (Eigen::Index r = 0; r < rows_ar; ++r)
    for (int p = 1; p <= m; ++p) Z(r, p - 1) = x(m + r - p);
  const Vector phi = ridge_solve(Z, x.tail(rows_ar), 0.0);
  Vector e_long = Vector::Zero(T);
  e_long.tail(rows_ar) = x.tail(rows_ar) - Z * phi;

  const int start = m + std::max(P, Q);
  const Eigen::Index rows = T - start;
  Matrix D(rows, P + Q);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::Index t = start + r;
    for (int p = 1; p <= P; ++p) D(r, p - 1) = -x(t - p);
    for (int q = 1; q <= Q; ++q) D(r, P + q - 1) = e_long(t - q);
  }
  return ridge_solve(D, x.tail(rows), gamma);
}

// Jacobian of the conditional residuals with respect to (a, b).
Matrix residual_jacobian(const Vector& x, const Vector& e, const Vector& b, int P, int Q) {
  const Eigen::Index T = x.size();
  const Eigen::Index start = std::max(P, Q);
  Matrix J = Matrix::Zero(T, P + Q);
  for (Eigen::Index t = start; t < T; ++t) {
    for (int p = 1; p <= P; ++p) J(t, p - 1) = x(t - p);
    for (int q = 1; q <= Q; ++q) J(t, P + q - 1) = -e(t - q);
    for (int q = 1; q <= Q; ++q) J.row(t) -= b(q - 1) * J.row(t - q);
  }
  return J;
}

}  // namespace

ArmaFit fit_arma_univariate(const Vector& series, int P, int Q, const ArmaOptions& options) {
  require(P >= 0 && Q >= 0, "ARMA orders must be nonnegative");
  require(options.gamma >= 0.0, "regularization weight must be nonnegative");
  require(series.allFinite(), "series has non-finite entries");
  const Eigen::Index T = series.size();
  require(T > 2 * (P + Q) + 1, "series too short for the requested ARMA order");

  ArmaFit fit;
  fit.a = Vector::Zero(P);
  fit.b = Vector::Zero(Q);
  if (series.squaredNorm() == 0.0) {
    fit.variance = 0.0;
    return fit;
  }
  const Eigen::Index start = std::max(P, Q);

  if (Q == 0) {
    if (P > 0) {
      const Eigen::Index rows = T - P;
      Matrix Z(rows, P);
      for (Eigen::Index r = 0; r < rows; ++r)
        for (int p = 1; p <= P; ++p) Z(r, p - 1) = -series(P + r - p);
      fit.a = ridge_solve(Z, series.tail(rows), options.gamma);
      fit.reflected = reflect_roots(fit.a);
    }
    fit.iterations = 1;
    fit.variance = residual_variance(arma_residuals(series, fit.a, fit.b), start);
    return fit;
  }

  Vector theta = hannan_rissanen(series, P, Q, options.gamma);
  auto constrain = [&](Vector& th) {
    auto [a, b] = split(th, P);
    const bool moved_a = reflect_roots(a);
    const bool moved_b = reflect_roots(b);
    th << a, b;
    return moved_a || moved_b;
  };
  fit.reflected = constrain(theta);

  auto residuals = [&](const Vector& th) {
    const auto [a, b] = split(th, P);
    return arma_residuals(series, a, b);
  };
  Vector e = residuals(theta);
  double f = objective(e, theta, options.gamma);
  fit.converged = false;
  for (int it = 1; it <= options.max_iterations; ++it) {
    fit.iterations = it;
    const Vector b = theta.tail(Q);
    const Matrix J = residual_jacobian(series, e, b, P, Q);
    Matrix H = J.transpose() * J;
    H.diagonal().array() += options.gamma;
    const Vector g = J.transpose() * e + options.gamma * theta;
    Vector step = H.ldlt().solve(-g);
    if (!step.allFinite()) step = H.completeOrthogonalDecomposition().solve(-g);

    bool improved = false;
    double alpha = 1.0;
    for (int halving = 0; halving < 30; ++halving, alpha *= 0.5) {
      Vector candidate = theta + alpha * step;
      const bool moved = constrain(candidate);
      const Vector e_new = residuals(candidate);
      const double f_new = objective(e_new, candidate, options.gamma);
      if (std::isfinite(f_new) && f_new < f) {
        const double rel = (f - f_new) / std::max(f, 1e-300);
        theta = candidate;
        e = e_new;
        f = f_new;
        fit.reflected = fit.reflected || moved;
        improved = true;
        if (rel < options.tolerance) fit.converged = true;
        break;
      }
    }
    if (!improved) fit.converged = true;  // no descent direction left
    if (fit.converged) break;
  }
  auto [a, b] = split(theta, P);
  fit.a = a;
  fit.b = b;
  fit.variance = residual_variance(e, start);
  return fit;
}

Matrix reshape_to_smoothed_jpsd(const SpectralBasis& basis, const Matrix& X,
                                const SmoothingConfig& config) {
  if (!config.enabled()) return X;
  const TemporalBasis tbasis(static_cast<int>(X.cols()));
  const CMatrix spectrum = jft(basis, tbasis, X);
  const Matrix power = spectrum.cwiseAbs2();
  const Matrix smoothed = smooth_jpsd(power, basis.eigenvalues, tbasis.frequencies(), config);
  const double floor = 1e-300;
  CMatrix reshaped(spectrum.rows(), spectrum.cols());
  for (Eigen::Index t = 0; t < spectrum.cols(); ++t) {
    for (Eigen::Index n = 0; n < spectrum.rows(); ++n) {
      reshaped(n, t) = power(n, t) > floor
                           ? spectrum(n, t) * std::sqrt(smoothed(n, t) / power(n, t))
                           : Complex(std::sqrt(smoothed(n, t)), 0.0);
    }
  }
  return ijft(basis, tbasis, reshaped);
}

namespace {

void check_fit_input(const SpectralBasis& basis, const Matrix& X, const FitConfig& config) {
  require(X.rows() == basis.size(), "signal rows do not match the graph");
  require(config.P >= 0 && config.Q >= 0, "model orders must be nonnegative");
  require(config.gamma >= 0.0, "regularization weight must be nonnegative");
  require(X.allFinite(), "signal has non-finite entries");
  const int order = std::max(config.P, config.Q);
  require(X.cols() >= 4 * order + 4, "series too short for the requested model order");
}

FitReport fit_frequencies(const SpectralBasis& basis, const Matrix& X, const FitConfig& config,
                          const std::vector<int>& selected, GVarmaModel& model) {
  const int N = basis.size();
  model.ar.assign(config.P, Vector::Zero(N));
  model.ma.assign(config.Q, Vector::Zero(N));
  model.innovation_spectrum = Vector::Zero(N);

  const Matrix shaped = reshape_to_smoothed_jpsd(basis, X, config.smoothing);
  // only the selected graph frequencies are projected
  const Matrix X_hat = basis.eigenvectors(Eigen::all, selected).transpose() * shaped;
  ArmaOptions options;
  options.gamma = config.gamma;
  options.max_iterations = config.max_gn_iterations;
  options.tolerance = config.gn_tolerance;

  FitReport report;
  report.selected = selected;
  for (std::size_t k = 0; k < selected.size(); ++k) {
    const int n = selected[k];
    const ArmaFit fit = fit_arma_univariate(X_hat.row(static_cast<Eigen::Index>(k)).transpose(), config.P, config.Q,
                                            options);
    for (int p = 0; p < config.P; ++p) model.ar[p](n) = fit.a(p);
    for (int q = 0; q < config.Q; ++q) model.ma[q](n) = fit.b(q);
    model.innovation_spectrum(n) = fit.variance;
    report.frequencies.push_back({n, fit.converged, fit.reflected, fit.iterations, fit.variance});
    if (!fit.converged) {
      report.warnings.push_back("frequency " + std::to_string(n) + ": Gauss-Newton did not converge");
    }
    if (fit.reflected) {
      report.warnings.push_back("frequency " + std::to_string(n) + ": roots reflected into the stable region");
    }
  }
  return report;
}

}  // namespace

GVarmaFit fit_gvarma(const SpectralBasis& basis, const Matrix& X, const FitConfig& config) {
  check_fit_input(basis, X, config);
  std::vector<int> all(basis.size());
  std::iota(all.begin(), all.end(), 0);
  GVarmaFit out;
  out.report = fit_frequencies(basis, X, config, all, out.model);
  return out;
}

LowRankPlan select_low_rank_from_spectrum(const SpectralBasis& basis, const Vector& spectrum, int K) {
  const int N = basis.size();
  require(spectrum.size() == N, "spectrum length does not match the graph");
  require(K >= 1 && K <= N, "rank K must lie in [1, N]");
  std::vector<int> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return spectrum(a) > spectrum(b); });
  LowRankPlan plan;
  plan.K = K;
  plan.selected.assign(order.begin(), order.begin() + K);
  std::sort(plan.selected.begin(), plan.selected.end());
  plan.partial_basis.resize(N, K);
  for (int k = 0; k < K; ++k) plan.partial_basis.col(k) = basis.eigenvectors.col(plan.selected[k]);
  for (int i = K; i < N; ++i) plan.approximation_error += spectrum(order[i]);
  return plan;
}

LowRankPlan select_low_rank(const SpectralBasis& basis, const Matrix& covariance, int K) {
  require(covariance.rows() == basis.size() && covariance.cols() == basis.size(),
          "covariance dimension does not match the graph");
  const Vector d = (basis.eigenvectors.transpose() * covariance * basis.eigenvectors).diagonal();
  return select_low_rank_from_spectrum(basis, d, K);
}

double low_rank_error(const Matrix& covariance, const Matrix& rotation, const std::vector<int>& subset) {
  const Eigen::Index N = covariance.rows();
  require(rotation.rows() == N && rotation.cols() == N, "rotation dimension mismatch");
  Vector keep = Vector::Zero(N);
  for (int i : subset) {
    require(i >= 0 && i < N, "subset index out of range");
    keep(i) = 1.0;
  }
  const Matrix A = Matrix::Identity(N, N) - rotation * keep.asDiagonal() * rotation.transpose();
  return (A * covariance * A.transpose()).trace();
}

LowRankFit fit_gvarma_low_rank(const SpectralBasis& basis, const Matrix& X, const FitConfig& config,
                               int K) {
  check_fit_input(basis, X, config);
  const Matrix X_hat = basis.eigenvectors.transpose() * X;
  const Vector power = X_hat.rowwise().squaredNorm() / static_cast<double>(X.cols());
  LowRankFit out;
  out.plan = select_low_rank_from_spectrum(basis, power, K);
  out.report = fit_frequencies(basis, X, config, out.plan.selected, out.model);
  return out;
}

Autocorrelation estimate_autocorrelation(const Matrix& X, int max_lag) {
  const Eigen::Index T = X.cols();
  require(max_lag >= 0 && max_lag < T, "max_lag must be in [0, T)");
  Autocorrelation out;
  for (int i = 0; i <= max_lag; ++i) {
    const Eigen::Index count = T - i;
    Matrix R = X.rightCols(count) * X.leftCols(count).transpose() / static_cast<double>(count);
    if (i == 0) R = 0.5 * (R + R.transpose()).eval();
    out.lags.push_back(std::move(R));
  }
  return out;
}

namespace {

struct CoefficientIndex {
  std::vector<std::pair<int, int>> slots;  // (p, l)
};

CoefficientIndex index_coefficients(const std::vector<int>& orders, bool restricted) {
  CoefficientIndex idx;
  for (std::size_t p = 1; p <= orders.size(); ++p) {
    require(orders[p - 1] >= 0, "polynomial orders must be nonnegative");
    if (restricted) require(orders[p - 1] <= static_cast<int>(p), "restricted GP-VAR requires L_p <= p");
    for (int l = 0; l <= orders[p - 1]; ++l) idx.slots.emplace_back(static_cast<int>(p), l);
  }
  return idx;
}

std::vector<Matrix> laplacian_powers(const Matrix& L, int max_power) {
  std::vector<Matrix> powers{Matrix::Identity(L.rows(), L.cols())};
  for (int m = 1; m <= max_power; ++m) powers.push_back(powers.back() * L);
  return powers;
}

std::vector<std::vector<double>> unpack(const CoefficientIndex& idx, const std::vector<int>& orders,
                                        const Vector& psi) {
  std::vector<std::vector<double>> out(orders.size());
  for (std::size_t p = 0; p < orders.size(); ++p) out[p].assign(orders[p] + 1, 0.0);
  for (std::size_t s = 0; s < idx.slots.size(); ++s) {
    const auto [p, l] = idx.slots[s];
    out[p - 1][l] = psi(static_cast<Eigen::Index>(s));
  }
  return out;
}

void check_gpvar_input(const Matrix& L, const Autocorrelation& autocorr, const std::vector<int>& orders) {
  require(L.rows() == L.cols() && L.rows() > 0, "Laplacian must be square");
  require(!autocorr.lags.empty() && autocorr.lags[0].rows() == L.rows(),
          "autocorrelation dimension does not match the Laplacian");
  require(autocorr.max_lag() >= static_cast<int>(orders.size()),
          "autocorrelation must hold lags 0..P");
}

GpVarModel make_gpvar(const Matrix& L, const Autocorrelation& autocorr,
                      std::vector<std::vector<double>> psi, bool restricted) {
  GpVarModel model;
  model.laplacian = L;
  model.restricted = restricted;
  model.innovation_cov = gpvar_residual_covariance(L, autocorr, psi);
  model.psi = std::move(psi);
  return model;
}

}  // namespace

Matrix gpvar_residual_covariance(const Matrix& L, const Autocorrelation& autocorr,
                                 const std::vector<std::vector<double>>& psi) {
  const int P = static_cast<int>(psi.size());
  require(autocorr.max_lag() >= P, "autocorrelation must hold lags 0..P");
  GpVarModel tmp;
  tmp.laplacian = L;
  tmp.psi = psi;
  std::vector<Matrix> lag;
  for (int p = 1; p <= P; ++p) lag.push_back(tmp.lag_matrix(p));
  Matrix S = autocorr.at(0);
  for (int p = 1; p <= P; ++p) {
    S += lag[p - 1] * autocorr.at(p).transpose() + autocorr.at(p) * lag[p - 1].transpose();
    for (int p2 = 1; p2 <= P; ++p2) S += lag[p - 1] * autocorr.at(p2 - p) * lag[p2 - 1].transpose();
  }
  return 0.5 * (S + S.transpose());
}

GpVarFit fit_gpvar_mse(const Matrix& L, const Autocorrelation& autocorr, const std::vector<int>& orders,
                       bool restricted) {
  check_gpvar_input(L, autocorr, orders);
  const CoefficientIndex idx = index_coefficients(orders, restricted);
  const auto dim = static_cast<Eigen::Index>(idx.slots.size());
  const int max_order = orders.empty() ? 0 : *std::max_element(orders.begin(), orders.end());
  const std::vector<Matrix> powers = laplacian_powers(L, 2 * max_order);

  // trace(L^m R(i)) = sum of the elementwise product since L^m is symmetric;
  // the same value holds for R(-i) = R(i)^T.
  auto trace_lr = [&](int m, int i) { return powers[m].cwiseProduct(autocorr.at(std::abs(i))).sum(); };

  Matrix G(dim, dim);
  Vector c(dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const auto [p, l] = idx.slots[r];
    c(r) = trace_lr(l, p);
    for (Eigen::Index s = 0; s < dim; ++s) {
      const auto [p2, l2] = idx.slots[s];
      G(r, s) = trace_lr(l + l2, p2 - p);
    }
  }
  G = (0.5 * (G + G.transpose())).eval();

  GpVarFit out;
  Vector psi = Vector::Zero(dim);
  if (dim > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(G, Eigen::EigenvaluesOnly);
    const double top = eig.eigenvalues().cwiseAbs().maxCoeff();
    const double bottom = eig.eigenvalues().minCoeff();
    if (!(bottom > 1e-12 * top)) {
      out.ill_conditioned = true;
      G.diagonal().array() += 1e-8 * std::max(G.trace(), 1e-300) / static_cast<double>(dim);
    }
    psi = G.ldlt().solve(-c);
  }
  out.model = make_gpvar(L, autocorr, unpack(idx, orders, psi), restricted);
  out.objective = out.model.innovation_cov.trace();
  return out;
}

GpVarFit fit_gpvar_yule_walker(const Matrix& L, const Autocorrelation& autocorr,
                               const std::vector<int>& orders, bool restricted) {
  check_gpvar_input(L, autocorr, orders);
  const CoefficientIndex idx = index_coefficients(orders, restricted);
  const auto dim = static_cast<Eigen::Index>(idx.slots.size());
  const int P = static_cast<int>(orders.size());
  const Eigen::Index N = L.rows();
  const int max_order = orders.empty() ? 0 : *std::max_element(orders.begin(), orders.end());
  const std::vector<Matrix> powers = laplacian_powers(L, max_order);

  GpVarFit out;
  Vector psi = Vector::Zero(dim);
  if (dim > 0) {
    Matrix A(P * N * N, dim);
    Vector rhs(P * N * N);
    for (int i = 1; i <= P; ++i) {
      const Eigen::Index offset = (i - 1) * N * N;
      rhs.segment(offset, N * N) = -Eigen::Map<const Vector>(autocorr.at(i).data(), N * N);
      for (Eigen::Index s = 0; s < dim; ++s) {
        const auto [p, l] = idx.slots[s];
        const Matrix block = powers[l] * autocorr.at(i - p);
        A.block(offset, s, N * N, 1) = Eigen::Map<const Vector>(block.data(), N * N);
      }
    }
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A);
    cod.setThreshold(1e-12);
    if (cod.rank() < dim) out.ill_conditioned = true;
    psi = cod.solve(rhs);
  }
  out.model = make_gpvar(L, autocorr, unpack(idx, orders, psi), restricted);
  out.objective = out.model.innovation_cov.trace();
  return out;
}

}  // namespace gvarma
