#pragma once

#include <optional>
#include <vector>

#include "gvarma/common.hpp"
#include "gvarma/graph.hpp"

namespace gvarma {

/// Orthonormal temporal Fourier basis of length T. Column t of the basis
/// holds exp(j w_t tau) / sqrt(T) with w_t = 2 pi t / T (0-based t), so the
/// forward transform X conj(U_T) is the unitary DFT along time and a delay
/// of p samples multiplies coefficient t by exp(-j w_t p).
class TemporalBasis {
 public:
  explicit TemporalBasis(int length);

  int size() const { return length_; }
  const Vector& frequencies() const { return frequencies_; }
  /// Dense T x T unitary matrix; built on demand (small T only).
  CMatrix dft_matrix() const;

 private:
  int length_ = 0;
  Vector frequencies_;
};

/// Joint time-vertex Fourier transform: U_G^T X conj(U_T).
CMatrix jft(const SpectralBasis& basis, const TemporalBasis& tbasis, const Matrix& X);
CMatrix jft(const SpectralBasis& basis, const TemporalBasis& tbasis, const CMatrix& X);

/// Inverse transform returning the complex reconstruction untouched.
CMatrix ijft_complex(const SpectralBasis& basis, const TemporalBasis& tbasis, const CMatrix& X_hat);

/// Inverse transform for spectra of real signals. Throws NumericalError when
/// the imaginary residue exceeds 1e-9 * max(1, |real part|_inf).
Matrix ijft(const SpectralBasis& basis, const TemporalBasis& tbasis, const CMatrix& X_hat);

/// N x T matrix of h(lambda_n, e^{j w_t}).
using JointResponse = CMatrix;

Matrix apply_joint_filter(const SpectralBasis& basis, const TemporalBasis& tbasis,
                          const JointResponse& response, const Matrix& X);

/// Coefficients of the time-vertex ARMA recursion
///   y_t + sum_{p,l} psi[p-1][l] L^l y_{t-p} = sum_{q,k} phi[q][k] L^k x_{t-q}.
struct TvArmaCoeffs {
  std::vector<std::vector<Complex>> psi;  // psi[p-1][l], p = 1..P, l = 0..L_p
  std::vector<std::vector<Complex>> phi;  // phi[q][k],   q = 0..Q, k = 0..K_q

  int ar_order() const { return static_cast<int>(psi.size()); }
  int ma_order() const { return static_cast<int>(phi.size()) - 1; }
  bool is_real() const;
};

/// Frequency response of the recursion on the joint (lambda_n, w_t) grid.
/// Throws NumericalError where the denominator modulus drops below 1e-8.
JointResponse tv_arma_response(const TvArmaCoeffs& coeffs, const SpectralBasis& basis,
                               const TemporalBasis& tbasis);

struct StabilityReport {
  bool stable = false;
  double margin = 0.0;
};

inline constexpr int kStabilityGridSize = 4096;
inline constexpr double kStabilityThreshold = 1e-6;

/// Screens |1 + sum psi lambda_n^l e^{-j w p}| over every eigenvalue and a
/// 4096-point grid on [0, 2 pi). Stable iff the minimum exceeds 1e-6.
StabilityReport check_stability(const TvArmaCoeffs& coeffs, const Vector& eigenvalues);

/// Pre-history for the recursion: column c of `inputs` is x_{-c-1}, column c
/// of `outputs` is y_{-c-1}. Missing columns are zero.
struct TvArmaInit {
  Matrix inputs;
  Matrix outputs;
};

struct TvArmaRun {
  Matrix output;
  StabilityReport stability;
};

/// Runs the recursion in the vertex domain with Horner-evaluated sparse
/// Laplacian polynomials. Complex coefficients are rejected. Instability is
/// reported, not thrown.
TvArmaRun tv_arma_run(const TvArmaCoeffs& coeffs, const SpectralBasis& basis, const Matrix& X,
                      const std::optional<TvArmaInit>& init = std::nullopt);

}  // namespace gvarma
