#pragma once

#include <cstdint>
#include <vector>

#include "gvarma/common.hpp"
#include "gvarma/graph.hpp"
#include "gvarma/time_vertex.hpp"

namespace gvarma {

/// Joint power spectral density: N x T nonnegative matrix indexed by
/// (graph frequency, temporal frequency).
using Jpsd = Matrix;

/// Gaussian window widths for spectral smoothing. Zero disables an axis.
struct SmoothingConfig {
  double sigma_g = 0.0;  // graph-frequency width, units of lambda
  double sigma_t = 0.0;  // temporal-frequency width, radians

  bool enabled() const { return sigma_g > 0.0 || sigma_t > 0.0; }
};

/// Entrywise mean of |jft(X)|^2 over the realizations. The reduction is a
/// fixed pairwise tree so the result does not depend on scheduling.
Jpsd estimate_jpsd(const SpectralBasis& basis, const TemporalBasis& tbasis,
                   const std::vector<Matrix>& realizations);

/// Row-normalized weight matrix of a squared zero-mean Gaussian window over
/// the given grid. `circular` measures distance on the unit circle.
Matrix smoothing_weights(const Vector& grid, double sigma, bool circular);

/// Convolves the JPSD with squared Gaussian windows along both axes.
Jpsd smooth_jpsd(const Jpsd& jpsd, const Vector& eigenvalues, const Vector& frequencies,
                 const SmoothingConfig& config);

/// One JWSS realization: unit-variance white noise filtered with sqrt(JPSD).
/// The JPSD is symmetrized along w (p(n,t) and p(n,-t) averaged) so the
/// output is real.
Matrix synth_jwss(const SpectralBasis& basis, const TemporalBasis& tbasis, const Jpsd& jpsd,
                  std::uint64_t seed);

/// |b|^2 / |a|^2 entrywise; throws NumericalError where |a| <= 1e-8.
Jpsd noncausal_jpsd(const JointResponse& a_response, const JointResponse& b_response);

/// Draw from the non-causal model a(L_J) x = b(L_J) e with white e.
Matrix synth_noncausal(const SpectralBasis& basis, const TemporalBasis& tbasis,
                       const JointResponse& a_response, const JointResponse& b_response,
                       std::uint64_t seed);

/// Dense N*T x N*T joint basis U_T (x) U_G, vec index k = N*t + n.
CMatrix joint_basis_matrix(const SpectralBasis& basis, const TemporalBasis& tbasis);

/// ||diag(M)||_2 / ||M||_F with M = U_J^H Sigma U_J; 1 iff Sigma is JWSS.
double diagonalization_score(const SpectralBasis& basis, const TemporalBasis& tbasis,
                             const Matrix& sample_covariance);

/// Same score for a single graph signal covariance (GWSS check).
double graph_diagonalization_score(const SpectralBasis& basis, const Matrix& covariance);

}  // namespace gvarma
