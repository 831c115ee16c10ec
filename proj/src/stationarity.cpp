#include "gvarma/stationarity.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace gvarma {

namespace {

Jpsd tree_sum(const std::vector<Jpsd>& parts, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return parts[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  return tree_sum(parts, lo, mid) + tree_sum(parts, mid, hi);
}

Matrix white_noise(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix E(rows, cols);
  for (Eigen::Index t = 0; t < cols; ++t)
    for (Eigen::Index n = 0; n < rows; ++n) E(n, t) = normal(rng);
  return E;
}

}  // namespace

Jpsd estimate_jpsd(const SpectralBasis& basis, const TemporalBasis& tbasis,
                   const std::vector<Matrix>& realizations) {
  require(!realizations.empty(), "JPSD estimation needs at least one realization");
  std::vector<Jpsd> powers;
  powers.reserve(realizations.size());
  for (const Matrix& X : realizations) {
    require(X.rows() == basis.size() && X.cols() == tbasis.size(),
            "realization shape does not match the joint basis");
    powers.push_back(jft(basis, tbasis, X).cwiseAbs2());
  }
  return tree_sum(powers, 0, powers.size()) / static_cast<double>(powers.size());
}

Matrix smoothing_weights(const Vector& grid, double sigma, bool circular) {
  require(sigma >= 0.0, "smoothing width must be nonnegative");
  const Eigen::Index n = grid.size();
  if (sigma == 0.0) return Matrix::Identity(n, n);
  Matrix W(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double d = std::abs(grid(i) - grid(j));
      if (circular) d = std::min(d, 2.0 * std::numbers::pi - d);
      // g(d)^2 with g a Gaussian of width sigma
      W(i, j) = std::exp(-d * d / (sigma * sigma));
    }
    W.row(i) /= W.row(i).sum();
  }
  return W;
}

Jpsd smooth_jpsd(const Jpsd& jpsd, const Vector& eigenvalues, const Vector& frequencies,
                 const SmoothingConfig& config) {
  require(jpsd.rows() == eigenvalues.size() && jpsd.cols() == frequencies.size(),
          "JPSD shape does not match the frequency grids");
  require(config.sigma_g >= 0.0 && config.sigma_t >= 0.0, "smoothing widths must be nonnegative");
  if (!config.enabled()) return jpsd;
  const Matrix Wg = smoothing_weights(eigenvalues, config.sigma_g, false);
  const Matrix Wt = smoothing_weights(frequencies, config.sigma_t, true);
  return Wg * jpsd * Wt.transpose();
}

Matrix synth_jwss(const SpectralBasis& basis, const TemporalBasis& tbasis, const Jpsd& jpsd,
                  std::uint64_t seed) {
  const int N = basis.size();
  const int T = tbasis.size();
  require(jpsd.rows() == N && jpsd.cols() == T, "JPSD shape does not match the joint basis");
  require((jpsd.array() >= 0.0).all() && jpsd.allFinite(), "JPSD must be finite and nonnegative");
  Matrix amplitude(N, T);
  for (int t = 0; t < T; ++t) {
    const int mirror = (T - t) % T;
    amplitude.col(t) = (0.5 * (jpsd.col(t) + jpsd.col(mirror))).cwiseSqrt();
  }
  const Matrix E = white_noise(N, T, seed);
  return apply_joint_filter(basis, tbasis, amplitude.cast<Complex>(), E);
}

Jpsd noncausal_jpsd(const JointResponse& a_response, const JointResponse& b_response) {
  require(a_response.rows() == b_response.rows() && a_response.cols() == b_response.cols(),
          "response shapes differ");
  const Matrix a2 = a_response.cwiseAbs2();
  if ((a2.array() <= 1e-16).any()) throw NumericalError("non-causal model matrix is near singular");
  return b_response.cwiseAbs2().cwiseQuotient(a2);
}

Matrix synth_noncausal(const SpectralBasis& basis, const TemporalBasis& tbasis,
                       const JointResponse& a_response, const JointResponse& b_response,
                       std::uint64_t seed) {
  require(a_response.rows() == basis.size() && a_response.cols() == tbasis.size(),
          "response shape does not match the joint basis");
  require(b_response.rows() == a_response.rows() && b_response.cols() == a_response.cols(),
          "response shapes differ");
  if ((a_response.cwiseAbs().array() <= 1e-8).any())
    throw NumericalError("non-causal model matrix is near singular");
  const Matrix E = white_noise(basis.size(), tbasis.size(), seed);
  const CMatrix spectrum = jft(basis, tbasis, E);
  return ijft(basis, tbasis, CMatrix(b_response.cwiseProduct(spectrum).cwiseQuotient(a_response)));
}

CMatrix joint_basis_matrix(const SpectralBasis& basis, const TemporalBasis& tbasis) {
  const CMatrix UT = tbasis.dft_matrix();
  const Matrix& UG = basis.eigenvectors;
  const Eigen::Index N = UG.rows();
  const Eigen::Index T = UT.rows();
  CMatrix UJ(N * T, N * T);
  for (Eigen::Index a = 0; a < T; ++a)
    for (Eigen::Index b = 0; b < T; ++b) UJ.block(a * N, b * N, N, N) = UT(a, b) * UG.cast<Complex>();
  return UJ;
}

double diagonalization_score(const SpectralBasis& basis, const TemporalBasis& tbasis,
                             const Matrix& sample_covariance) {
  const Eigen::Index NT = static_cast<Eigen::Index>(basis.size()) * tbasis.size();
  require(sample_covariance.rows() == NT && sample_covariance.cols() == NT,
          "covariance dimension does not match the joint basis");
  const CMatrix UJ = joint_basis_matrix(basis, tbasis);
  const CMatrix M = UJ.adjoint() * sample_covariance.cast<Complex>() * UJ;
  const double total = M.norm();
  if (total == 0.0) return 1.0;
  return M.diagonal().norm() / total;
}

double graph_diagonalization_score(const SpectralBasis& basis, const Matrix& covariance) {
  require(covariance.rows() == basis.size() && covariance.cols() == basis.size(),
          "covariance dimension does not match the graph");
  const Matrix M = basis.eigenvectors.transpose() * covariance * basis.eigenvectors;
  const double total = M.norm();
  if (total == 0.0) return 1.0;
  return M.diagonal().norm() / total;
}

}  // namespace gvarma
