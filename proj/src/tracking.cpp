#include "gvarma/tracking.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace gvarma {

namespace {

StateSpace companion(const std::vector<Matrix>& lags, const Matrix& noise) {
  const int N = static_cast<int>(noise.rows());
  const int P = std::max<int>(1, static_cast<int>(lags.size()));
  StateSpace ss;
  ss.nodes = N;
  ss.order = P;
  ss.A = Matrix::Zero(N * P, N * P);
  for (std::size_t p = 0; p < lags.size(); ++p) ss.A.block(0, p * N, N, N) = -lags[p];
  if (P > 1) ss.A.bottomLeftCorner(N * (P - 1), N * (P - 1)).setIdentity();
  ss.noise = Matrix::Zero(N * P, N * P);
  ss.noise.topLeftCorner(N, N) = noise;
  return ss;
}

Matrix symmetrize(const Matrix& M) { return 0.5 * (M + M.transpose()); }

Matrix clip_psd(const Matrix& M) {
  Matrix S = symmetrize(M);
  const double scale = std::max(1.0, S.diagonal().cwiseAbs().maxCoeff());
  Matrix shifted = S;
  shifted.diagonal().array() += 1e-14 * scale;
  if (Eigen::LLT<Matrix>(shifted).info() == Eigen::Success) return S;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
  const Vector d = eig.eigenvalues().cwiseMax(0.0);
  return symmetrize(eig.eigenvectors() * d.asDiagonal() * eig.eigenvectors().transpose());
}

}  // namespace

StateSpace build_state_space(const GVarmaModel& model, const SpectralBasis& basis) {
  model.validate();
  require(model.size() == basis.size(), "model size does not match the graph");
  require(model.ma_order() == 0, "tracking supports only models without MA terms (Q = 0)");
  const Matrix& U = basis.eigenvectors;
  std::vector<Matrix> lags;
  for (int p = 0; p < model.ar_order(); ++p) lags.push_back(U * model.ar[p].asDiagonal() * U.transpose());
  const Matrix noise = symmetrize(U * model.innovation_spectrum.asDiagonal() * U.transpose());
  return companion(lags, noise);
}

StateSpace build_state_space(const GpVarModel& model) {
  model.validate();
  std::vector<Matrix> lags;
  for (int p = 1; p <= model.ar_order(); ++p) lags.push_back(model.lag_matrix(p));
  return companion(lags, symmetrize(model.innovation_cov));
}

KalmanStep kalman_step(const TrackerState& state, const StateSpace& ss, const ObservationSet& observed,
                       const ObservationModel& om) {
  const Eigen::Index dim = ss.A.rows();
  require(state.mean.size() == dim && state.cov.rows() == dim && state.cov.cols() == dim,
          "tracker state does not match the state space");
  require(om.noise_variance >= 0.0, "observation noise variance must be nonnegative");

  KalmanStep out;
  Vector mean = ss.A * state.mean;
  Matrix cov = symmetrize(ss.A * state.cov * ss.A.transpose() + ss.noise);

  if (!observed.empty()) {
    const auto m = static_cast<Eigen::Index>(observed.size());
    std::vector<int> rows(m);
    Vector y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      require(observed[i].node >= 0 && observed[i].node < ss.nodes, "observed node index out of range");
      rows[i] = observed[i].node;
      y(i) = observed[i].value;
    }
    // C selects state rows; C cov C^T and cov C^T are gathered directly.
    Matrix cov_ct(dim, m);
    for (Eigen::Index i = 0; i < m; ++i) cov_ct.col(i) = cov.col(rows[i]);
    Matrix H(m, m);
    for (Eigen::Index i = 0; i < m; ++i) H.row(i) = cov_ct.row(rows[i]);
    H = symmetrize(H);
    H.diagonal().array() += om.noise_variance;

    Eigen::SelfAdjointEigenSolver<Matrix> eig(H, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > 1e12) {
      throw NumericalError("innovation covariance is ill-conditioned; increase the observation noise variance");
    }
    const Eigen::LDLT<Matrix> ldlt(H);
    const Matrix gain = ldlt.solve(cov_ct.transpose()).transpose();  // cov C^T H^{-1}

    Vector innovation = y;
    for (Eigen::Index i = 0; i < m; ++i) innovation(i) -= mean(rows[i]);
    mean += gain * innovation;

    // Joseph form: (I - KC) cov (I - KC)^T + sigma^2 K K^T
    Matrix IKC = Matrix::Identity(dim, dim);
    for (Eigen::Index i = 0; i < m; ++i) IKC.col(rows[i]) -= gain.col(i);
    cov = IKC * cov * IKC.transpose() + om.noise_variance * gain * gain.transpose();
  }
  out.state.cov = clip_psd(cov);
  out.state.mean = std::move(mean);
  out.estimate = out.state.mean.head(ss.nodes);
  return out;
}

Matrix stationary_covariance(const StateSpace& ss) {
  const Eigen::Index dim = ss.A.rows();
  if (dim > 0) {
    const double radius = Eigen::EigenSolver<Matrix>(ss.A, false).eigenvalues().cwiseAbs().maxCoeff();
    require(radius < 1.0, "state transition is not stable; no stationary covariance");
  }
  Matrix S = ss.noise;
  Matrix Ak = ss.A;
  for (int it = 0; it < 64; ++it) {
    const Matrix next = S + Ak * S * Ak.transpose();
    const double change = (next - S).norm();
    S = symmetrize(next);
    if (change <= 1e-10 * std::max(1.0, S.norm())) return S;
    Ak = Ak * Ak;
  }
  throw NumericalError("Lyapunov iteration did not converge");
}

TrackResult track(const StateSpace& ss, const std::vector<ObservationSet>& schedule,
                  const ObservationModel& om, const std::optional<Matrix>& history) {
  const Eigen::Index dim = ss.A.rows();
  TrackerState state;
  state.mean = Vector::Zero(dim);
  if (history) {
    require(history->rows() == ss.nodes, "history rows do not match the graph");
    state.cov = Matrix::Zero(dim, dim);
    for (int p = 0; p < ss.order && p < history->cols(); ++p) {
      state.mean.segment(p * ss.nodes, ss.nodes) = history->col(history->cols() - 1 - p);
    }
  } else {
    state.cov = stationary_covariance(ss);
  }
  const auto T = static_cast<Eigen::Index>(schedule.size());
  TrackResult out;
  out.estimates.resize(ss.nodes, T);
  out.error_trace.resize(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    KalmanStep step = kalman_step(state, ss, schedule[t], om);
    out.estimates.col(t) = step.estimate;
    out.error_trace(t) = step.state.cov.topLeftCorner(ss.nodes, ss.nodes).trace();
    state = std::move(step.state);
  }
  return out;
}

}  // namespace gvarma
