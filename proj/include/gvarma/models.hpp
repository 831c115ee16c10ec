#pragma once

#include <cstdint>
#include <vector>

#include "gvarma/common.hpp"
#include "gvarma/graph.hpp"

namespace gvarma {

/// Graph-VARMA model
///   x_t = -sum_p a_p(L) x_{t-p} + eps_t + sum_{q>=1} b_q(L) eps_{t-q}
/// with every graph filter stored as its spectrum on the eigenvalues of L.
/// The innovation covariance is diagonal in the GFT basis and stored as its
/// spectrum, Sigma = U diag(innovation_spectrum) U^T.
struct GVarmaModel {
  std::vector<Vector> ar;  // a_p(lambda_n), p = 1..P
  std::vector<Vector> ma;  // b_q(lambda_n), q = 1..Q (b_0 = 1 implicit)
  Vector innovation_spectrum;

  int size() const { return static_cast<int>(innovation_spectrum.size()); }
  int ar_order() const { return static_cast<int>(ar.size()); }
  int ma_order() const { return static_cast<int>(ma.size()); }
  /// Checks that every spectrum has the same length and the innovation
  /// spectrum is nonnegative.
  void validate() const;
  /// a-coefficients (length P) of the scalar recursion at frequency n.
  Vector ar_at(int n) const;
  Vector ma_at(int n) const;
};

/// Graph-polynomial VAR model x_t = -sum_p sum_l psi[p-1][l] L^l x_{t-p} + eps_t.
struct GpVarModel {
  std::vector<std::vector<double>> psi;  // psi[p-1][l], l = 0..L_p
  bool restricted = false;               // enforce L_p <= p
  Matrix laplacian;
  Matrix innovation_cov;

  int size() const { return static_cast<int>(laplacian.rows()); }
  int ar_order() const { return static_cast<int>(psi.size()); }
  std::vector<int> orders() const;
  void validate() const;
  /// Dense Psi_p = sum_l psi[p-1][l] L^l.
  Matrix lag_matrix(int p) const;
  /// a_p(lambda) = sum_l psi[p-1][l] lambda^l on the given eigenvalues.
  Vector lag_spectrum(int p, const Vector& eigenvalues) const;
};

/// G-VARMA model with the same dynamics as the GP-VAR model; the innovation
/// spectrum is diag(U^T Sigma U).
GVarmaModel to_gvarma(const GpVarModel& model, const SpectralBasis& basis);

struct Forecast {
  int horizon = 0;
  Matrix predictions;  // N x horizon
  Vector step_mse;     // predicted MSE of each step
};

/// Largest modulus among the roots of z^P + a_1 z^{P-1} + ... + a_P, i.e. the
/// spectral radius of the companion matrix of x_t = -sum a_p x_{t-p}.
double ar_spectral_radius(const Vector& a);

/// Largest per-frequency companion spectral radius of the AR part.
double gvarma_spectral_radius(const GVarmaModel& model);
double gpvar_spectral_radius(const GpVarModel& model, const SpectralBasis& basis);

inline constexpr double kStationarityMargin = 1e-6;

/// Symmetric square root of a PSD matrix (negative eigenvalues clipped).
Matrix psd_sqrt(const Matrix& covariance);

/// N x T standard normal draws, column-major order, from a seeded mt19937_64.
Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);

/// Vertex-domain innovations for the model: U diag(sqrt(s)) U^T z_t.
Matrix gvarma_innovations(const GVarmaModel& model, const SpectralBasis& basis,
                          const Matrix& standard_draws);
Matrix gpvar_innovations(const GpVarModel& model, const Matrix& standard_draws);

/// Runs the G-VARMA recursion in the GFT domain from zero initial conditions
/// with the given vertex-domain innovations.
Matrix gvarma_filter(const GVarmaModel& model, const SpectralBasis& basis, const Matrix& innovations);

/// Runs the GP-VAR recursion in the vertex domain with sparse Laplacian
/// polynomials.
Matrix gpvar_filter(const GpVarModel& model, const Matrix& innovations);

/// Gaussian simulation. Throws InvalidInput when the AR part is not stable.
Matrix gvarma_simulate(const GVarmaModel& model, const SpectralBasis& basis, int T,
                       std::uint64_t seed, int burn_in = 500);
Matrix gpvar_simulate(const GpVarModel& model, int T, std::uint64_t seed, int burn_in = 500);

/// k-step forecast from the end of `history` (N x T_h).
Forecast gvarma_predict(const GVarmaModel& model, const SpectralBasis& basis, const Matrix& history,
                        int k);
Forecast gpvar_predict(const GpVarModel& model, const Matrix& history, int k);

/// Rolling forecasts over a whole series. Entry h-1 is an N x T matrix whose
/// column t is the h-step prediction of x_t from x_0..x_{t-h}; values before
/// the series start are taken as zero.
std::vector<Matrix> gvarma_rolling_forecast(const GVarmaModel& model, const SpectralBasis& basis,
                                            const Matrix& X, int horizon);
std::vector<Matrix> gpvar_rolling_forecast(const GpVarModel& model, const Matrix& X, int horizon);

/// Same rolling forecasts for independent scalar ARMA recursions, one per row
/// of `series` (which may be GFT coefficients or raw node series).
std::vector<Matrix> scalar_arma_rolling_forecast(const std::vector<Vector>& ar,
                                                 const std::vector<Vector>& ma,
                                                 const Matrix& series, int horizon);

/// MSE of the optimal one-step predictor: trace of the innovation covariance.
double theoretical_one_step_mse(const GVarmaModel& model);
double theoretical_one_step_mse(const GpVarModel& model);

}  // namespace gvarma
