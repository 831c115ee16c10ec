#include "gvarma/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "gvarma/io.hpp"

namespace gvarma {

double rnmse(const Matrix& truth, const Matrix& estimate) {
  require(truth.rows() == estimate.rows() && truth.cols() == estimate.cols(),
          "truth and estimate shapes differ");
  const double denom = truth.squaredNorm();
  require(denom > 0.0, "rNMSE is undefined for an all-zero truth");
  return std::sqrt((estimate - truth).squaredNorm() / denom);
}

void SplitSpec::validate() const {
  require(train > 0.0 && valid > 0.0 && test > 0.0, "split fractions must all be positive");
  require(std::abs(train + valid + test - 1.0) <= 1e-9, "split fractions must sum to 1");
}

SplitRanges split(Eigen::Index T, const SplitSpec& spec, int min_part) {
  spec.validate();
  const auto n_train = static_cast<Eigen::Index>(std::floor(static_cast<double>(T) * spec.train + 1e-9));
  const auto n_valid = static_cast<Eigen::Index>(std::floor(static_cast<double>(T) * spec.valid + 1e-9));
  SplitRanges r;
  r.train = {0, n_train};
  r.valid = {n_train, n_train + n_valid};
  r.test = {n_train + n_valid, T};
  require(r.train.size() >= min_part && r.valid.size() >= min_part && r.test.size() >= min_part,
          "series too short for the requested split");
  return r;
}

SplitSpec parse_split(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(parse_number(item));
  require(parts.size() == 3, "split must have three comma-separated fractions");
  SplitSpec spec{parts[0], parts[1], parts[2]};
  spec.validate();
  return spec;
}

Graph random_graph(int n, int edges, std::uint64_t seed) {
  require(n >= 2, "random graph needs at least two nodes");
  const long long max_edges = static_cast<long long>(n) * (n - 1) / 2;
  require(edges >= 0 && edges <= max_edges, "edge count out of range");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> node(0, n - 1);
  std::set<std::pair<int, int>> chosen;
  std::vector<Edge> list;
  while (static_cast<int>(list.size()) < edges) {
    int i = node(rng), j = node(rng);
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    if (chosen.insert({i, j}).second) list.push_back({i, j, 1.0});
  }
  return Graph::from_edges(n, std::move(list));
}

Matrix random_coordinates(int n, int dim, std::uint64_t seed) {
  require(n >= 1 && dim >= 1, "coordinate shape must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix C(n, dim);
  for (int i = 0; i < n; ++i)
    for (int d = 0; d < dim; ++d) C(i, d) = unit(rng);
  return C;
}

namespace {

double lambda_scale(const SpectralBasis& basis) {
  const double top = basis.eigenvalues.size() > 0 ? basis.eigenvalues.maxCoeff() : 0.0;
  return top > 0.0 ? top : 1.0;
}

// Largest companion root over all frequencies for per-frequency polynomials.
double max_root(const std::vector<Vector>& coeffs) {
  if (coeffs.empty()) return 0.0;
  double rho = 0.0;
  for (Eigen::Index n = 0; n < coeffs[0].size(); ++n) {
    Vector a(coeffs.size());
    for (std::size_t p = 0; p < coeffs.size(); ++p) a(p) = coeffs[p](n);
    rho = std::max(rho, ar_spectral_radius(a));
  }
  return rho;
}

// Scaling lag-p coefficients by c^p scales every root by c.
void scale_roots(std::vector<Vector>& coeffs, double target) {
  const double rho = max_root(coeffs);
  if (rho == 0.0) return;
  const double c = target / rho;
  for (std::size_t p = 0; p < coeffs.size(); ++p) coeffs[p] *= std::pow(c, static_cast<double>(p + 1));
}

}  // namespace

GpVarModel random_gpvar(const SpectralBasis& basis, int P, int L, double radius, std::uint64_t seed,
                        bool restricted) {
  require(P >= 0 && L >= 0, "model orders must be nonnegative");
  require(radius > 0.0 && radius < 1.0, "target radius must lie in (0, 1)");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const double scale = lambda_scale(basis);
  GpVarModel model;
  model.laplacian = basis.laplacian;
  model.restricted = restricted;
  model.innovation_cov = Matrix::Identity(basis.size(), basis.size());
  for (int p = 1; p <= P; ++p) {
    const int order = restricted ? std::min(L, p) : L;
    std::vector<double> row(order + 1);
    for (int l = 0; l <= order; ++l) row[l] = coef(rng) / std::pow(scale, l);
    model.psi.push_back(std::move(row));
  }
  std::vector<Vector> spectra;
  for (int p = 1; p <= P; ++p) spectra.push_back(model.lag_spectrum(p, basis.eigenvalues));
  const double rho = max_root(spectra);
  if (rho > 0.0) {
    const double c = radius / rho;
    for (int p = 1; p <= P; ++p)
      for (double& v : model.psi[p - 1]) v *= std::pow(c, static_cast<double>(p));
  }
  return model;
}

GVarmaModel random_gvarma(const SpectralBasis& basis, int P, int Q, double radius, std::uint64_t seed) {
  require(P >= 0 && Q >= 0, "model orders must be nonnegative");
  require(radius > 0.0 && radius < 1.0, "target radius must lie in (0, 1)");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Vector x = basis.eigenvalues / lambda_scale(basis);
  auto smooth_spectrum = [&] {
    const double c0 = coef(rng), c1 = coef(rng), c2 = coef(rng);
    return Vector((c0 + c1 * x.array() + c2 * x.array().square()).matrix());
  };
  GVarmaModel model;
  for (int p = 0; p < P; ++p) model.ar.push_back(smooth_spectrum());
  for (int q = 0; q < Q; ++q) model.ma.push_back(smooth_spectrum());
  scale_roots(model.ar, radius);
  scale_roots(model.ma, 0.7);
  model.innovation_spectrum.resize(basis.size());
  for (int n = 0; n < basis.size(); ++n) model.innovation_spectrum(n) = 0.5 + unit(rng);
  return model;
}

void SiConfig::validate() const {
  require(infection_rate >= 0.0 && infection_rate <= 1.0, "infection rate must lie in [0, 1]");
  require(population >= 1, "population must be at least 1");
  require(recovery_days >= 1, "recovery_days must be at least 1");
  require(T >= 1, "horizon must be positive");
  require(initial_infected >= 0 && initial_infected <= population, "initial infected count out of range");
}

Matrix simulate_si(const Graph& graph, const SiConfig& config) {
  config.validate();
  const int N = graph.size();
  for (int node : config.initial_nodes) require(node >= 0 && node < N, "initial node out of range");
  const Matrix& W = graph.adjacency();
  std::mt19937_64 rng(config.seed);

  // cohorts[d][n]: infected at node n who recover d days from now
  std::vector<std::vector<int>> cohorts(config.recovery_days, std::vector<int>(N, 0));
  std::vector<int> infected(N, 0);
  for (int node : config.initial_nodes) {
    const int add = std::min(config.initial_infected, config.population - infected[node]);
    infected[node] += add;
    cohorts[config.recovery_days - 1][node] += add;
  }

  Matrix out(N, config.T);
  int head = 0;  // cohorts[(head + d) % R] recovers in d + 1 days
  const int R = config.recovery_days;
  std::vector<double> log_escape(N);
  for (int t = 0; t < config.T; ++t) {
    for (int n = 0; n < N; ++n) out(n, t) = static_cast<double>(infected[n]) / config.population;

    // probability that a susceptible at n escapes every infected contact
    for (int i = 0; i < N; ++i) {
      double acc = infected[i] * std::log1p(-std::min(config.infection_rate, 1.0 - 1e-16));
      for (int j = 0; j < N; ++j) {
        if (j == i || W(i, j) == 0.0 || infected[j] == 0) continue;
        const double p = std::min(config.infection_rate * W(i, j), 1.0 - 1e-16);
        acc += infected[j] * std::log1p(-p);
      }
      log_escape[i] = acc;
    }
    std::vector<int> fresh(N, 0);
    for (int i = 0; i < N; ++i) {
      const int susceptible = config.population - infected[i];
      const double p = -std::expm1(log_escape[i]);
      if (susceptible > 0 && p > 0.0) fresh[i] = std::binomial_distribution<int>(susceptible, p)(rng);
    }
    // recover today's cohort, then enroll the new infections
    std::vector<int>& recovering = cohorts[head];
    for (int n = 0; n < N; ++n) {
      infected[n] -= recovering[n];
      recovering[n] = fresh[n];
      infected[n] += fresh[n];
    }
    head = (head + 1) % R;
  }
  return out;
}

std::string to_string(Family family) {
  switch (family) {
    case Family::gvarma: return "gvarma";
    case Family::gpvar: return "gpvar";
    case Family::rgpvar: return "rgpvar";
    case Family::arma: return "arma";
  }
  return "unknown";
}

Family parse_family(const std::string& text) {
  if (text == "gvarma") return Family::gvarma;
  if (text == "gpvar") return Family::gpvar;
  if (text == "rgpvar") return Family::rgpvar;
  if (text == "arma") return Family::arma;
  throw InvalidInput("unknown model family '" + text + "'");
}

std::string ModelConfig::label() const {
  std::string s = to_string(family) + " P=" + std::to_string(P);
  if (family == Family::gvarma || family == Family::arma) s += " Q=" + std::to_string(Q);
  if (family == Family::gpvar || family == Family::rgpvar) s += " L=" + std::to_string(L);
  if (gamma != 0.0) s += " gamma=" + format_number(gamma);
  if (sigma_g != 0.0) s += " sigma_g=" + format_number(sigma_g);
  if (low_rank > 0) s += " K=" + std::to_string(low_rank);
  return s;
}

namespace {

bool is_gp(Family f) { return f == Family::gpvar || f == Family::rgpvar; }

int max_order(const ModelConfig& c) { return std::max(c.P, c.Q); }

}  // namespace

Forecaster fit_forecaster(const SpectralBasis& basis, const Matrix& X, const ModelConfig& config) {
  require(X.rows() == basis.size(), "signal rows do not match the graph");
  require(config.P >= 0 && config.Q >= 0 && config.L >= 0, "model orders must be nonnegative");
  Forecaster f;
  f.config = config;
  f.mean = X.rowwise().mean();
  const Matrix Xc = X.colwise() - f.mean;
  const SmoothingConfig smoothing{config.sigma_g, 0.0};

  switch (config.family) {
    case Family::gvarma: {
      FitConfig fc;
      fc.P = config.P;
      fc.Q = config.Q;
      fc.gamma = config.gamma;
      fc.smoothing = smoothing;
      if (config.low_rank > 0 && config.low_rank < basis.size()) {
        LowRankFit fit = fit_gvarma_low_rank(basis, Xc, fc, config.low_rank);
        f.gvarma = std::move(fit.model);
        f.report = std::move(fit.report);
      } else {
        GVarmaFit fit = fit_gvarma(basis, Xc, fc);
        f.gvarma = std::move(fit.model);
        f.report = std::move(fit.report);
      }
      break;
    }
    case Family::gpvar:
    case Family::rgpvar: {
      require(config.Q == 0, "GP-VAR models have no MA part");
      require(X.cols() > 2 * config.P + 1, "series too short for the requested model order");
      const bool restricted = config.family == Family::rgpvar;
      std::vector<int> orders;
      for (int p = 1; p <= config.P; ++p) orders.push_back(restricted ? std::min(config.L, p) : config.L);
      const Matrix shaped = reshape_to_smoothed_jpsd(basis, Xc, smoothing);
      const GpVarFit fit = fit_gpvar_mse(basis.laplacian, estimate_autocorrelation(shaped, config.P), orders,
                                         restricted);
      f.gpvar = fit.model;
      if (fit.ill_conditioned) f.report.warnings.push_back("GP-VAR normal equations ill-conditioned; ridge applied");
      break;
    }
    case Family::arma: {
      ArmaOptions options;
      options.gamma = config.gamma;
      for (Eigen::Index n = 0; n < Xc.rows(); ++n) {
        const ArmaFit fit = fit_arma_univariate(Xc.row(n).transpose(), config.P, config.Q, options);
        f.node_ar.push_back(fit.a);
        f.node_ma.push_back(fit.b);
        f.report.frequencies.push_back(
            {static_cast<int>(n), fit.converged, fit.reflected, fit.iterations, fit.variance});
      }
      break;
    }
  }
  return f;
}

std::vector<Matrix> rolling_forecast(const Forecaster& f, const SpectralBasis& basis, const Matrix& X,
                                     int horizon) {
  require(X.rows() == f.mean.size(), "signal rows do not match the model");
  const Matrix Xc = X.colwise() - f.mean;
  std::vector<Matrix> preds;
  switch (f.config.family) {
    case Family::gvarma: preds = gvarma_rolling_forecast(f.gvarma, basis, Xc, horizon); break;
    case Family::gpvar:
    case Family::rgpvar: preds = gpvar_rolling_forecast(f.gpvar, Xc, horizon); break;
    case Family::arma: preds = scalar_arma_rolling_forecast(f.node_ar, f.node_ma, Xc, horizon); break;
  }
  for (Matrix& m : preds) m.colwise() += f.mean;
  return preds;
}

double forecast_rnmse(const Matrix& X, const Matrix& forecast, const Vector& mean, Range range) {
  require(range.begin >= 0 && range.end <= X.cols() && range.size() > 0, "evaluation range out of bounds");
  const Matrix truth = X.middleCols(range.begin, range.size()).colwise() - mean;
  const Matrix estimate = forecast.middleCols(range.begin, range.size()).colwise() - mean;
  return rnmse(truth, estimate);
}

namespace {

double mean_score(const Matrix& X, const std::vector<Matrix>& preds, const Vector& mean, Range range) {
  double acc = 0.0;
  for (const Matrix& p : preds) acc += forecast_rnmse(X, p, mean, range);
  return acc / static_cast<double>(preds.size());
}

}  // namespace

GridResult grid_search(const SpectralBasis& basis, const Matrix& X, const std::vector<ModelConfig>& grid,
                       const GridOptions& options) {
  require(!grid.empty(), "grid is empty");
  require(options.horizon >= 1, "horizon must be positive");
  int order = 0;
  for (const auto& c : grid) order = std::max(order, max_order(c));
  const SplitRanges ranges = split(X.cols(), options.split, order + 1);

  GridResult result;
  const Matrix train = X.leftCols(ranges.train.end);
  const Matrix seen = X.leftCols(ranges.valid.end);
  for (const ModelConfig& config : grid) {
    GridCell cell;
    cell.config = config;
    try {
      const Forecaster f = fit_forecaster(basis, train, config);
      cell.valid_score = mean_score(seen, rolling_forecast(f, basis, seen, options.horizon), f.mean, ranges.valid);
      cell.ok = std::isfinite(cell.valid_score);
      if (!cell.ok) cell.error = "non-finite validation score";
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    result.table.push_back(std::move(cell));
  }

  double best = std::numeric_limits<double>::infinity();
  for (const auto& cell : result.table)
    if (cell.ok) best = std::min(best, cell.valid_score);
  if (!std::isfinite(best)) {
    std::string msg = "every grid configuration failed:";
    for (const auto& cell : result.table) msg += "\n  " + cell.config.label() + ": " + cell.error;
    throw NumericalError(msg);
  }
  const GridCell* chosen = nullptr;
  auto simpler = [](const ModelConfig& a, const ModelConfig& b) {
    if (a.P + a.Q != b.P + b.Q) return a.P + a.Q < b.P + b.Q;
    if (a.L != b.L) return a.L < b.L;
    return a.gamma < b.gamma;
  };
  for (const auto& cell : result.table) {
    if (!cell.ok || cell.valid_score > best * (1.0 + options.tie_tolerance)) continue;
    if (chosen == nullptr || simpler(cell.config, chosen->config)) chosen = &cell;
  }
  result.best = chosen->config;
  result.best_valid = chosen->valid_score;

  const Forecaster f = fit_forecaster(basis, seen, result.best);
  const auto preds = rolling_forecast(f, basis, X, options.horizon);
  for (const Matrix& p : preds) result.test_scores.push_back(forecast_rnmse(X, p, f.mean, ranges.test));
  result.test_score = std::accumulate(result.test_scores.begin(), result.test_scores.end(), 0.0) /
                      static_cast<double>(result.test_scores.size());
  return result;
}

std::vector<ModelConfig> expand_grid(Family family, const std::vector<int>& P, const std::vector<int>& Q,
                                     const std::vector<int>& L, const std::vector<double>& gamma,
                                     const std::vector<double>& sigma_g) {
  const std::vector<int> zero{0};
  const std::vector<double> none{0.0};
  const auto& qs = is_gp(family) || Q.empty() ? zero : Q;
  const auto& ls = is_gp(family) && !L.empty() ? L : zero;
  const auto& gs = gamma.empty() ? none : gamma;
  const auto& ss = sigma_g.empty() ? none : sigma_g;
  std::vector<ModelConfig> out;
  for (int p : P)
    for (int q : qs)
      for (int l : ls)
        for (double g : gs)
          for (double s : ss) {
            ModelConfig c;
            c.family = family;
            c.P = p;
            c.Q = q;
            c.L = l;
            c.gamma = g;
            c.sigma_g = s;
            out.push_back(c);
          }
  return out;
}

std::vector<ScoreRow> evaluate_forecasters(const SpectralBasis& basis, const Matrix& X,
                                           const std::vector<ModelConfig>& configs, const SplitSpec& spec,
                                           int horizon) {
  require(horizon >= 1, "horizon must be positive");
  int order = 0;
  for (const auto& c : configs) order = std::max(order, max_order(c));
  const SplitRanges ranges = split(X.cols(), spec, order + 1);
  const Matrix seen = X.leftCols(ranges.valid.end);
  std::vector<ScoreRow> rows;
  for (const ModelConfig& config : configs) {
    const Forecaster f = fit_forecaster(basis, seen, config);
    const auto preds = rolling_forecast(f, basis, X, horizon);
    const std::string method = config.label();
    rows.push_back({method, 0, forecast_rnmse(X, preds[0], f.mean, Range{max_order(config), ranges.valid.end})});
    for (int h = 1; h <= horizon; ++h) {
      rows.push_back({method, h, forecast_rnmse(X, preds[h - 1], f.mean, ranges.test)});
    }
  }
  return rows;
}

int rank_for_ignore_fraction(const Vector& power, double f) {
  require(power.size() > 0, "power spectrum is empty");
  require(f >= 0.0 && f < 1.0, "ignore fraction must lie in [0, 1)");
  std::vector<double> sorted(power.data(), power.data() + power.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const double total = std::accumulate(sorted.begin(), sorted.end(), 0.0);
  const double needed = (1.0 - f) * total * (1.0 - 1e-12);
  double acc = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    acc += sorted[k];
    if (acc >= needed) return static_cast<int>(k + 1);
  }
  return static_cast<int>(sorted.size());
}

std::vector<LowRankRow> low_rank_sweep(const SpectralBasis& basis, const Matrix& X, const ModelConfig& config,
                                       const SplitSpec& spec, int horizon,
                                       const std::vector<double>& ignore_fractions, int repeats) {
  require(config.family == Family::gvarma, "the low-rank sweep applies to G-VARMA models");
  require(repeats >= 1, "repeats must be positive");
  const SplitRanges ranges = split(X.cols(), spec, max_order(config) + 1);
  const Matrix seen = X.leftCols(ranges.valid.end);
  const Matrix centered = seen.colwise() - seen.rowwise().mean();
  const Vector power =
      (basis.eigenvectors.transpose() * centered).rowwise().squaredNorm() / static_cast<double>(seen.cols());

  using Clock = std::chrono::steady_clock;
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  std::vector<LowRankRow> rows;
  for (double f : ignore_fractions) {
    LowRankRow row;
    row.ignore_fraction = f;
    row.K = rank_for_ignore_fraction(power, f);
    ModelConfig c = config;
    c.low_rank = row.K;
    std::vector<double> fit_times, predict_times;
    Forecaster fitted;
    std::vector<Matrix> preds;
    for (int r = 0; r < repeats; ++r) {
      auto t0 = Clock::now();
      fitted = fit_forecaster(basis, seen, c);
      auto t1 = Clock::now();
      preds = rolling_forecast(fitted, basis, X, horizon);
      auto t2 = Clock::now();
      fit_times.push_back(std::chrono::duration<double>(t1 - t0).count());
      predict_times.push_back(std::chrono::duration<double>(t2 - t1).count());
    }
    row.fit_seconds = median(fit_times);
    row.predict_seconds = median(predict_times);
    row.rnmse = mean_score(X, preds, fitted.mean, ranges.test);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace gvarma
