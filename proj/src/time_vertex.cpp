#include "gvarma/time_vertex.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <unsupported/Eigen/FFT>

namespace gvarma {

TemporalBasis::TemporalBasis(int length) : length_(length) {
  require(length >= 1, "temporal basis length must be positive");
  frequencies_.resize(length);
  for (int t = 0; t < length; ++t) frequencies_(t) = 2.0 * std::numbers::pi * t / length;
}

CMatrix TemporalBasis::dft_matrix() const {
  CMatrix U(length_, length_);
  const double scale = 1.0 / std::sqrt(static_cast<double>(length_));
  for (int tau = 0; tau < length_; ++tau) {
    for (int t = 0; t < length_; ++t) {
      // exp(j w_t tau) with the phase reduced modulo T for accuracy
      const double phase = 2.0 * std::numbers::pi * ((static_cast<long>(t) * tau) % length_) / length_;
      U(tau, t) = std::polar(scale, phase);
    }
  }
  return U;
}

namespace {

// Unitary DFT (forward when `inverse` is false) applied to every row.
CMatrix rowwise_dft(const CMatrix& X, bool inverse) {
  const Eigen::Index T = X.cols();
  CMatrix out(X.rows(), T);
  if (T == 1) return X;
  Eigen::FFT<double> fft;
  std::vector<Complex> in(T), buf(T);
  const double sqrtT = std::sqrt(static_cast<double>(T));
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    for (Eigen::Index t = 0; t < T; ++t) in[t] = X(r, t);
    if (inverse) {
      fft.inv(buf, in);  // includes 1/T
      for (Eigen::Index t = 0; t < T; ++t) out(r, t) = buf[t] * sqrtT;
    } else {
      fft.fwd(buf, in);
      for (Eigen::Index t = 0; t < T; ++t) out(r, t) = buf[t] / sqrtT;
    }
  }
  return out;
}

void check_shape(const SpectralBasis& basis, const TemporalBasis& tbasis, Eigen::Index rows,
                 Eigen::Index cols) {
  require(rows == basis.size() && cols == tbasis.size(),
          "signal shape does not match the joint basis");
}

}  // namespace

CMatrix jft(const SpectralBasis& basis, const TemporalBasis& tbasis, const CMatrix& X) {
  check_shape(basis, tbasis, X.rows(), X.cols());
  const CMatrix graph_part = basis.eigenvectors.transpose().cast<Complex>() * X;
  return rowwise_dft(graph_part, false);
}

CMatrix jft(const SpectralBasis& basis, const TemporalBasis& tbasis, const Matrix& X) {
  return jft(basis, tbasis, CMatrix(X.cast<Complex>()));
}

CMatrix ijft_complex(const SpectralBasis& basis, const TemporalBasis& tbasis, const CMatrix& X_hat) {
  check_shape(basis, tbasis, X_hat.rows(), X_hat.cols());
  return basis.eigenvectors.cast<Complex>() * rowwise_dft(X_hat, true);
}

Matrix ijft(const SpectralBasis& basis, const TemporalBasis& tbasis, const CMatrix& X_hat) {
  const CMatrix Y = ijft_complex(basis, tbasis, X_hat);
  Matrix re = Y.real();
  const double residue = Y.imag().cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, re.cwiseAbs().maxCoeff());
  if (residue > 1e-9 * scale) {
    throw NumericalError("inverse joint transform is not real (imaginary residue " +
                         std::to_string(residue) + ")");
  }
  return re;
}

Matrix apply_joint_filter(const SpectralBasis& basis, const TemporalBasis& tbasis,
                          const JointResponse& response, const Matrix& X) {
  check_shape(basis, tbasis, response.rows(), response.cols());
  const CMatrix spectrum = jft(basis, tbasis, X);
  return ijft(basis, tbasis, CMatrix(response.cwiseProduct(spectrum)));
}

bool TvArmaCoeffs::is_real() const {
  for (const auto& row : psi)
    for (const auto& c : row)
      if (c.imag() != 0.0) return false;
  for (const auto& row : phi)
    for (const auto& c : row)
      if (c.imag() != 0.0) return false;
  return true;
}

namespace {

// sum_p sum_l c[p-1][l] lambda^l z^p for z = e^{-jw}; `first_lag` is 1 for
// the AR side and 0 for the MA side.
Complex lag_polynomial(const std::vector<std::vector<Complex>>& c, int first_lag, double lambda,
                       double omega) {
  Complex acc = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    Complex graph = 0.0;
    double power = 1.0;
    for (const Complex& coeff : c[i]) {
      graph += coeff * power;
      power *= lambda;
    }
    const double lag = static_cast<double>(i) + first_lag;
    acc += graph * std::polar(1.0, -omega * lag);
  }
  return acc;
}

}  // namespace

JointResponse tv_arma_response(const TvArmaCoeffs& coeffs, const SpectralBasis& basis,
                               const TemporalBasis& tbasis) {
  const int N = basis.size();
  const int T = tbasis.size();
  JointResponse h(N, T);
  for (int n = 0; n < N; ++n) {
    const double lambda = basis.eigenvalues(n);
    for (int t = 0; t < T; ++t) {
      const double omega = tbasis.frequencies()(t);
      const Complex den = 1.0 + lag_polynomial(coeffs.psi, 1, lambda, omega);
      if (std::abs(den) < 1e-8) {
        throw NumericalError("unstable coefficients: response denominator vanishes");
      }
      h(n, t) = lag_polynomial(coeffs.phi, 0, lambda, omega) / den;
    }
  }
  return h;
}

StabilityReport check_stability(const TvArmaCoeffs& coeffs, const Vector& eigenvalues) {
  double margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index n = 0; n < eigenvalues.size(); ++n) {
    for (int g = 0; g < kStabilityGridSize; ++g) {
      const double omega = 2.0 * std::numbers::pi * g / kStabilityGridSize;
      margin = std::min(margin, std::abs(1.0 + lag_polynomial(coeffs.psi, 1, eigenvalues(n), omega)));
    }
  }
  if (eigenvalues.size() == 0) margin = 1.0;
  return {margin > kStabilityThreshold, margin};
}

namespace {

std::vector<double> real_parts(const std::vector<Complex>& c) {
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
  return out;
}

}  // namespace

TvArmaRun tv_arma_run(const TvArmaCoeffs& coeffs, const SpectralBasis& basis, const Matrix& X,
                      const std::optional<TvArmaInit>& init) {
  require(coeffs.is_real(), "time-domain recursion requires real coefficients");
  require(X.rows() == basis.size(), "signal rows do not match the graph");
  require(X.allFinite(), "signal has non-finite entries");
  const Eigen::Index N = X.rows();
  const Eigen::Index T = X.cols();
  const int P = coeffs.ar_order();
  const int Q = coeffs.ma_order();

  const SparseMatrix L = to_sparse(basis.laplacian);
  std::vector<std::vector<double>> psi, phi;
  for (const auto& row : coeffs.psi) psi.push_back(real_parts(row));
  for (const auto& row : coeffs.phi) phi.push_back(real_parts(row));

  auto input_at = [&](Eigen::Index t) -> Vector {
    if (t >= 0) return X.col(t);
    const Eigen::Index back = -t - 1;
    if (init && back < init->inputs.cols()) return init->inputs.col(back);
    return Vector::Zero(N);
  };

  TvArmaRun run;
  run.output = Matrix::Zero(N, T);
  auto output_at = [&](Eigen::Index t) -> Vector {
    if (t >= 0) return run.output.col(t);
    const Eigen::Index back = -t - 1;
    if (init && back < init->outputs.cols()) return init->outputs.col(back);
    return Vector::Zero(N);
  };

  for (Eigen::Index t = 0; t < T; ++t) {
    Vector y = Vector::Zero(N);
    for (int q = 0; q <= Q; ++q) y += polynomial_apply(L, phi[q], input_at(t - q));
    for (int p = 1; p <= P; ++p) y -= polynomial_apply(L, psi[p - 1], output_at(t - p));
    run.output.col(t) = y;
  }
  run.stability = check_stability(coeffs, basis.eigenvalues);
  return run;
}

}  // namespace gvarma
