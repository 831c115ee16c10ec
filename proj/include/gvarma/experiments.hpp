#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gvarma/common.hpp"
#include "gvarma/fitting.hpp"
#include "gvarma/graph.hpp"
#include "gvarma/models.hpp"

namespace gvarma {

/// sqrt(sum ||estimate - truth||^2 / sum ||truth||^2) over all columns.
double rnmse(const Matrix& truth, const Matrix& estimate);

struct SplitSpec {
  double train = 0.35;
  double valid = 0.15;
  double test = 0.50;
  void validate() const;
};

/// Half-open column range [begin, end).
struct Range {
  Eigen::Index begin = 0;
  Eigen::Index end = 0;
  Eigen::Index size() const { return end - begin; }
};

struct SplitRanges {
  Range train, valid, test;
};

/// Contiguous split: train gets floor(T * train), valid floor(T * valid),
/// test the remainder. Every part must hold at least `min_part` columns.
SplitRanges split(Eigen::Index T, const SplitSpec& spec, int min_part = 1);

/// Parses "0.35,0.15,0.5".
SplitSpec parse_split(const std::string& text);

/// Erdos-Renyi G(n, m) graph with unit weights.
Graph random_graph(int n, int edges, std::uint64_t seed);

/// n points uniform in the unit square, one row each.
Matrix random_coordinates(int n, int dim, std::uint64_t seed);

/// Random stable GP-VAR with every lag polynomial of order L. Coefficients are
/// drawn uniformly and rescaled so the largest companion root has modulus
/// `radius`.
GpVarModel random_gpvar(const SpectralBasis& basis, int P, int L, double radius, std::uint64_t seed,
                        bool restricted = false);

/// Random stable, invertible G-VARMA with smooth spectra (low-order
/// polynomials of lambda) and innovation spectrum in [0.5, 1.5].
GVarmaModel random_gvarma(const SpectralBasis& basis, int P, int Q, double radius, std::uint64_t seed);

struct SiConfig {
  double infection_rate = 1e-3;
  int population = 60;
  int recovery_days = 12;
  int T = 122;
  std::vector<int> initial_nodes{0};
  int initial_infected = 1;  // per initial node
  std::uint64_t seed = 0;
  void validate() const;
};

/// Stochastic susceptible-infected-susceptible day loop. Column t holds the
/// infected fraction of every node at the start of day t.
Matrix simulate_si(const Graph& graph, const SiConfig& config);

enum class Family { gvarma, gpvar, rgpvar, arma };

std::string to_string(Family family);
Family parse_family(const std::string& text);

struct ModelConfig {
  Family family = Family::gvarma;
  int P = 1;
  int Q = 0;
  int L = 0;  // polynomial order for gpvar / rgpvar
  double gamma = 0.0;
  double sigma_g = 0.0;
  int low_rank = 0;  // 0 keeps every graph frequency
  std::string label() const;
};

/// A fitted model plus the per-node in-sample mean it was fitted around.
struct Forecaster {
  ModelConfig config;
  Vector mean;
  GVarmaModel gvarma;
  GpVarModel gpvar;
  std::vector<Vector> node_ar, node_ma;
  FitReport report;
};

Forecaster fit_forecaster(const SpectralBasis& basis, const Matrix& X, const ModelConfig& config);

/// Rolling forecasts in the units of X (mean removed before and re-added
/// after), in the layout of gvarma_rolling_forecast.
std::vector<Matrix> rolling_forecast(const Forecaster& f, const SpectralBasis& basis, const Matrix& X,
                                     int horizon);

/// rNMSE of the h-step forecasts over `range`, both sides centered by `mean`.
double forecast_rnmse(const Matrix& X, const Matrix& forecast, const Vector& mean, Range range);

struct GridCell {
  ModelConfig config;
  double valid_score = 0.0;
  bool ok = false;
  std::string error;
};

struct GridResult {
  ModelConfig best;
  double best_valid = 0.0;
  std::vector<double> test_scores;  // steps 1..H after refitting on train + valid
  double test_score = 0.0;          // mean of test_scores
  std::vector<GridCell> table;
};

struct GridOptions {
  SplitSpec split;
  int horizon = 5;
  /// Scores within this relative margin of the best count as ties, which go
  /// to the smaller P + Q, then smaller L, then smaller gamma.
  double tie_tolerance = 0.005;
};

GridResult grid_search(const SpectralBasis& basis, const Matrix& X, const std::vector<ModelConfig>& grid,
                       const GridOptions& options);

/// Cartesian product of the per-parameter grids in a fixed order.
std::vector<ModelConfig> expand_grid(Family family, const std::vector<int>& P, const std::vector<int>& Q,
                                     const std::vector<int>& L, const std::vector<double>& gamma,
                                     const std::vector<double>& sigma_g);

struct ScoreRow {
  std::string method;
  int step = 0;
  double rnmse = 0.0;
};

/// Fits every config on train + valid and scores steps 1..H on test. Step 0
/// is the in-sample one-step score on the fitting data.
std::vector<ScoreRow> evaluate_forecasters(const SpectralBasis& basis, const Matrix& X,
                                           const std::vector<ModelConfig>& configs, const SplitSpec& spec,
                                           int horizon);

struct LowRankRow {
  double ignore_fraction = 0.0;
  int K = 0;
  double fit_seconds = 0.0;
  double predict_seconds = 0.0;
  double rnmse = 0.0;  // mean over steps 1..H on test
};

/// Smallest K whose top-K share of the sample GFT power reaches 1 - f.
int rank_for_ignore_fraction(const Vector& power, double f);

/// For every ignore fraction, fits a G-VARMA on the K strongest graph
/// frequencies of train + valid and scores it on test. Timings are the
/// median of `repeats` runs.
std::vector<LowRankRow> low_rank_sweep(const SpectralBasis& basis, const Matrix& X, const ModelConfig& config,
                                       const SplitSpec& spec, int horizon,
                                       const std::vector<double>& ignore_fractions, int repeats = 3);

}  // namespace gvarma
