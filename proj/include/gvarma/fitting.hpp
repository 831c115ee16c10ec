#pragma once

#include <string>
#include <vector>

#include "gvarma/common.hpp"
#include "gvarma/graph.hpp"
#include "gvarma/models.hpp"
#include "gvarma/stationarity.hpp"

namespace gvarma {

/// Time series of one graph-frequency coefficient.
struct FrequencySeries {
  int index = 0;
  Vector series;
};

/// Rows of U_G^T X, one per graph frequency.
std::vector<FrequencySeries> decouple(const SpectralBasis& basis, const Matrix& X);

/// Result of a univariate ARMA fit in the convention
///   x_t + sum_p a_p x_{t-p} = e_t + sum_q b_q e_{t-q}.
struct ArmaFit {
  Vector a;
  Vector b;
  double variance = 0.0;
  bool converged = true;
  int iterations = 0;
  bool reflected = false;  // a root was moved to restore stationarity/invertibility
};

struct ArmaOptions {
  double gamma = 0.0;  // l2 penalty on the stacked (a, b) coefficients
  int max_iterations = 50;
  double tolerance = 1e-9;  // relative objective change
};

/// Conditional least-squares ARMA(P, Q) fit. Q = 0 is solved in closed form;
/// Q > 0 starts from a Hannan-Rissanen regression and refines it with damped
/// Gauss-Newton steps. Roots of the AR or MA polynomial on or inside the
/// unit circle (in the lag variable) are reflected outside.
ArmaFit fit_arma_univariate(const Vector& series, int P, int Q, const ArmaOptions& options = {});

/// Sum of squared conditional residuals for given coefficients; residuals are
/// taken for t >= max(P, Q) with earlier innovations set to zero.
Vector arma_residuals(const Vector& series, const Vector& a, const Vector& b);

/// Moves every root of 1 + c_1 z + ... + c_P z^P with |z| <= 1 to modulus
/// max(1/|z|, 1 + 1e-3), keeping the argument. Returns true if any moved.
bool reflect_roots(Vector& coeffs);

struct FitConfig {
  int P = 1;
  int Q = 0;
  double gamma = 0.0;
  SmoothingConfig smoothing;
  int max_gn_iterations = 50;
  double gn_tolerance = 1e-9;
};

struct FrequencyReport {
  int index = 0;
  bool converged = true;
  bool reflected = false;
  int iterations = 0;
  double residual_variance = 0.0;
};

struct FitReport {
  std::vector<FrequencyReport> frequencies;
  std::vector<int> selected;
  std::vector<std::string> warnings;
};

struct GVarmaFit {
  GVarmaModel model;
  FitReport report;
};

/// Replaces the JPSD of X by its smoothed version while keeping the phases:
/// X~ = ijft(jft(X) * sqrt(P~ / P)). Identity when smoothing is disabled.
Matrix reshape_to_smoothed_jpsd(const SpectralBasis& basis, const Matrix& X,
                                const SmoothingConfig& config);

/// Fits one univariate ARMA per graph frequency.
GVarmaFit fit_gvarma(const SpectralBasis& basis, const Matrix& X, const FitConfig& config);

/// Indices of the K largest diagonal entries of U^T Sigma U.
struct LowRankPlan {
  int K = 0;
  std::vector<int> selected;  // ascending
  Matrix partial_basis;       // N x K
  double approximation_error = 0.0;  // sum of the discarded diagonal entries
};

LowRankPlan select_low_rank_from_spectrum(const SpectralBasis& basis, const Vector& spectrum, int K);
LowRankPlan select_low_rank(const SpectralBasis& basis, const Matrix& covariance, int K);

/// Expected squared Frobenius error of the {U, S} rank-K approximation of a
/// process with covariance Sigma: trace((I - U D_S U^T) Sigma (I - U D_S U^T)).
double low_rank_error(const Matrix& covariance, const Matrix& rotation, const std::vector<int>& subset);

struct LowRankFit {
  GVarmaModel model;
  LowRankPlan plan;
  FitReport report;
};

/// Fits only the K graph frequencies with the largest sample power; the
/// others get zero dynamics and zero innovation power.
LowRankFit fit_gvarma_low_rank(const SpectralBasis& basis, const Matrix& X, const FitConfig& config,
                               int K);

/// Sample autocorrelations R(i) = (T-i)^{-1} sum_t x_{t+i} x_t^T, i = 0..max_lag.
struct Autocorrelation {
  std::vector<Matrix> lags;

  int max_lag() const { return static_cast<int>(lags.size()) - 1; }
  /// R(i) for negative i via R(-i) = R(i)^T.
  Matrix at(int i) const { return i >= 0 ? lags[i] : Matrix(lags[-i].transpose()); }
};

Autocorrelation estimate_autocorrelation(const Matrix& X, int max_lag);

struct GpVarFit {
  GpVarModel model;
  double objective = 0.0;  // predicted one-step MSE (trace of the residual covariance)
  bool ill_conditioned = false;
};

/// Minimizes the one-step prediction MSE trace objective over psi; a quadratic
/// solved through its normal equations.
GpVarFit fit_gpvar_mse(const Matrix& L, const Autocorrelation& autocorr, const std::vector<int>& orders,
                       bool restricted = false);

/// Least-squares solve of R(i) + sum_p Psi_p R(i-p) = 0 for i = 1..P.
GpVarFit fit_gpvar_yule_walker(const Matrix& L, const Autocorrelation& autocorr,
                               const std::vector<int>& orders, bool restricted = false);

/// Residual covariance Sigma_e = E[(x_t + sum Psi_p x_{t-p})(...)^T] implied by
/// the autocorrelation for the given coefficients.
Matrix gpvar_residual_covariance(const Matrix& L, const Autocorrelation& autocorr,
                                 const std::vector<std::vector<double>>& psi);

}  // namespace gvarma
