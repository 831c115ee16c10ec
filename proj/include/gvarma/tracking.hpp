#pragma once

#include <optional>
#include <vector>

#include "gvarma/common.hpp"
#include "gvarma/graph.hpp"
#include "gvarma/models.hpp"

namespace gvarma {

/// Companion realization s_t = A s_{t-1} + w_t of a VAR(P) graph process,
/// with s_t = [x_t; x_{t-1}; ...; x_{t-P+1}] and Cov(w_t) = noise.
struct StateSpace {
  Matrix A;
  Matrix noise;
  int nodes = 0;
  int order = 0;
};

/// Q > 0 is rejected. P = 0 is realized as a one-block state with A = 0.
StateSpace build_state_space(const GVarmaModel& model, const SpectralBasis& basis);
StateSpace build_state_space(const GpVarModel& model);

struct ObservationModel {
  double noise_variance = 0.0;
};

struct Observation {
  int node = 0;
  double value = 0.0;
};
using ObservationSet = std::vector<Observation>;

struct TrackerState {
  Vector mean;
  Matrix cov;
};

struct KalmanStep {
  TrackerState state;
  Vector estimate;  // top block of the filtered mean
};

/// One predict/update cycle. An empty observation set only predicts.
/// Throws NumericalError when the innovation covariance has condition number
/// above 1e12 (raise the observation noise variance).
KalmanStep kalman_step(const TrackerState& state, const StateSpace& ss, const ObservationSet& observed,
                       const ObservationModel& om);

/// Solution of S = A S A^T + noise by doubling iterations to 1e-10 relative.
/// Throws InvalidInput if A has spectral radius >= 1.
Matrix stationary_covariance(const StateSpace& ss);

struct TrackResult {
  Matrix estimates;    // N x T
  Vector error_trace;  // trace of the filtered covariance of x_t
};

/// Runs kalman_step over the schedule. Without `history` the state starts at
/// zero mean with the stationary covariance; with it (N x P, last column the
/// most recent sample) the state starts there with zero uncertainty.
TrackResult track(const StateSpace& ss, const std::vector<ObservationSet>& schedule,
                  const ObservationModel& om, const std::optional<Matrix>& history = std::nullopt);

}  // namespace gvarma
