// Command-line front end: data generation, fitting, prediction, tracking and
// evaluation over CSV / JSON files.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gvarma/experiments.hpp"
#include "gvarma/fitting.hpp"
#include "gvarma/io.hpp"
#include "gvarma/models.hpp"
#include "gvarma/stationarity.hpp"
#include "gvarma/tracking.hpp"

namespace {

using namespace gvarma;
using nlohmann::json;

struct Common {
  std::string graph;
  std::string normalization = "unit_spectral_norm";
  std::string out = "-";
  std::uint64_t seed = 0;
};

void add_graph(CLI::App* cmd, Common& c) {
  cmd->add_option("--graph", c.graph, "graph CSV (i,j,weight)")->required();
  cmd->add_option("--normalization", c.normalization, "combinatorial or unit_spectral_norm")
      ->capture_default_str();
}

void add_out(CLI::App* cmd, Common& c) {
  cmd->add_option("--out", c.out, "output path, - for stdout")->capture_default_str();
}

void add_seed(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "random seed")->capture_default_str();
}

SpectralBasis load_basis(const std::string& path, Normalization normalization) {
  return spectral_basis(parse_graph_csv(read_text(path)), normalization);
}

struct BoundModel {
  LoadedModel model;
  SpectralBasis basis;
};

BoundModel load_model(const std::string& graph_path, const std::string& model_path) {
  const json doc = [&] {
    try {
      return json::parse(read_text(model_path));
    } catch (const json::parse_error& e) {
      throw InvalidInput(std::string("model file is not valid JSON: ") + e.what());
    }
  }();
  BoundModel b;
  b.model = model_from_json(doc);
  b.basis = load_basis(graph_path, b.model.normalization);
  bind_model(b.model, doc, b.basis);
  return b;
}

Matrix load_signal(const std::string& path, int N) {
  const Matrix X = parse_signal_csv(read_text(path));
  require(X.rows() == N, "signal has " + std::to_string(X.rows()) + " rows but the graph has " +
                             std::to_string(N) + " nodes");
  return X;
}

template <typename T>
std::vector<T> parse_list(const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if constexpr (std::is_same_v<T, int>) {
      out.push_back(parse_int(item));
    } else {
      out.push_back(parse_number(item));
    }
  }
  return out;
}

void write_json(const std::string& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

// ---------------------------------------------------------------- graph

void setup_graph(CLI::App& app) {
  auto* graph = app.add_subcommand("graph", "build a graph CSV");
  graph->require_subcommand(1);

  auto* knn = graph->add_subcommand("knn", "k-nearest-neighbour graph with exponential weights");
  static Common knn_c;
  static int knn_nodes = 32, knn_k = 4, knn_dim = 2;
  static std::string knn_coords;
  knn->add_option("--coords", knn_coords, "coordinates CSV (node,x,y[,z]); random points if absent");
  knn->add_option("--nodes", knn_nodes, "number of random points")->capture_default_str();
  knn->add_option("--k", knn_k, "neighbours per node")->capture_default_str();
  knn->add_option("--dim", knn_dim, "dimension of random points")->capture_default_str();
  add_seed(knn, knn_c);
  add_out(knn, knn_c);
  knn->callback([] {
    const Matrix coords = knn_coords.empty() ? random_coordinates(knn_nodes, knn_dim, knn_c.seed)
                                             : parse_coordinates_csv(read_text(knn_coords));
    write_text(knn_c.out, graph_to_csv(build_knn_graph(coords, knn_k)));
  });

  auto* rnd = graph->add_subcommand("random", "uniform random graph with unit weights");
  static Common rnd_c;
  static int rnd_nodes = 100, rnd_edges = 1782;
  rnd->add_option("--nodes", rnd_nodes, "number of nodes")->capture_default_str();
  rnd->add_option("--edges", rnd_edges, "number of undirected edges")->capture_default_str();
  add_seed(rnd, rnd_c);
  add_out(rnd, rnd_c);
  rnd->callback([] { write_text(rnd_c.out, graph_to_csv(random_graph(rnd_nodes, rnd_edges, rnd_c.seed))); });
}

// ------------------------------------------------------------- simulate

struct SimOptions {
  Common c;
  int T = 744;
  int burn_in = 500;
  int P = 2, Q = 0, L = 2;
  double radius = 0.8;
  bool restricted = false;
  std::string model, model_out, jpsd;
  double rate = 1e-3;
  int population = 60, recovery = 12, initial_count = 1;
  std::string initial = "0";
};

void setup_simulate(CLI::App& app) {
  auto* sim = app.add_subcommand("simulate", "generate a time-vertex signal");
  sim->require_subcommand(1);
  static SimOptions jw, gp, gv, si;

  auto* jwss = sim->add_subcommand("jwss", "jointly stationary process with a given JPSD");
  add_graph(jwss, jw.c);
  add_seed(jwss, jw.c);
  add_out(jwss, jw.c);
  jwss->add_option("--T", jw.T, "number of time samples")->capture_default_str();
  jwss->add_option("--jpsd", jw.jpsd, "JPSD CSV; a low-pass default if absent");
  jwss->callback([] {
    const SpectralBasis basis = load_basis(jw.c.graph, parse_normalization(jw.c.normalization));
    const TemporalBasis tbasis(jw.T);
    Jpsd p(basis.size(), jw.T);
    if (jw.jpsd.empty()) {
      const double top = std::max(basis.eigenvalues.maxCoeff(), 1e-12);
      for (int n = 0; n < basis.size(); ++n)
        for (int t = 0; t < jw.T; ++t)
          p(n, t) = std::exp(-3.0 * basis.eigenvalues(n) / top) / (1.25 - std::cos(tbasis.frequencies()(t)));
    } else {
      p = parse_jpsd_csv(read_text(jw.jpsd), basis.size(), jw.T);
    }
    write_text(jw.c.out, signal_to_csv(synth_jwss(basis, tbasis, p, jw.c.seed)));
  });

  auto* gpvar = sim->add_subcommand("gpvar", "GP-VAR process from a model file or a random stable model");
  add_graph(gpvar, gp.c);
  add_seed(gpvar, gp.c);
  add_out(gpvar, gp.c);
  gpvar->add_option("--T", gp.T, "number of time samples")->capture_default_str();
  gpvar->add_option("--burn-in", gp.burn_in, "discarded warm-up samples")->capture_default_str();
  gpvar->add_option("--model", gp.model, "GP-VAR model JSON");
  gpvar->add_option("--P", gp.P, "order of a random model")->capture_default_str();
  gpvar->add_option("--L", gp.L, "polynomial order of a random model")->capture_default_str();
  gpvar->add_option("--radius", gp.radius, "largest companion root of a random model")->capture_default_str();
  gpvar->add_flag("--restricted", gp.restricted, "random model with L_p <= p");
  gpvar->add_option("--model-out", gp.model_out, "write the generating model here");
  gpvar->callback([] {
    GpVarModel model;
    SpectralBasis basis;
    Vector mean;
    if (!gp.model.empty()) {
      BoundModel b = load_model(gp.c.graph, gp.model);
      require(b.model.type == "gpvar", "model file is not a GP-VAR model");
      model = b.model.gpvar;
      basis = std::move(b.basis);
      mean = b.model.mean;
    } else {
      basis = load_basis(gp.c.graph, parse_normalization(gp.c.normalization));
      model = random_gpvar(basis, gp.P, gp.L, gp.radius, gp.c.seed ^ 0x9e3779b97f4a7c15ULL, gp.restricted);
      mean = Vector::Zero(basis.size());
    }
    if (!gp.model_out.empty()) write_json(gp.model_out, model_to_json(model, basis, mean));
    Matrix X = gpvar_simulate(model, gp.T, gp.c.seed, gp.burn_in);
    X.colwise() += mean;
    write_text(gp.c.out, signal_to_csv(X));
  });

  auto* gvarma = sim->add_subcommand("gvarma", "G-VARMA process from a model file or a random stable model");
  add_graph(gvarma, gv.c);
  add_seed(gvarma, gv.c);
  add_out(gvarma, gv.c);
  gvarma->add_option("--T", gv.T, "number of time samples")->capture_default_str();
  gvarma->add_option("--burn-in", gv.burn_in, "discarded warm-up samples")->capture_default_str();
  gvarma->add_option("--model", gv.model, "G-VARMA model JSON");
  gvarma->add_option("--P", gv.P, "AR order of a random model")->capture_default_str();
  gvarma->add_option("--Q", gv.Q, "MA order of a random model")->capture_default_str();
  gvarma->add_option("--radius", gv.radius, "largest companion root of a random model")->capture_default_str();
  gvarma->add_option("--model-out", gv.model_out, "write the generating model here");
  gvarma->callback([] {
    GVarmaModel model;
    SpectralBasis basis;
    Vector mean;
    if (!gv.model.empty()) {
      BoundModel b = load_model(gv.c.graph, gv.model);
      require(b.model.type == "gvarma", "model file is not a G-VARMA model");
      model = b.model.gvarma;
      basis = std::move(b.basis);
      mean = b.model.mean;
    } else {
      basis = load_basis(gv.c.graph, parse_normalization(gv.c.normalization));
      model = random_gvarma(basis, gv.P, gv.Q, gv.radius, gv.c.seed ^ 0x9e3779b97f4a7c15ULL);
      mean = Vector::Zero(basis.size());
    }
    if (!gv.model_out.empty()) write_json(gv.model_out, model_to_json(model, basis, mean));
    Matrix X = gvarma_simulate(model, basis, gv.T, gv.c.seed, gv.burn_in);
    X.colwise() += mean;
    write_text(gv.c.out, signal_to_csv(X));
  });

  auto* sis = sim->add_subcommand("si", "stochastic epidemic; output is the infected fraction per node");
  sis->add_option("--graph", si.c.graph, "graph CSV (i,j,weight)")->required();
  add_seed(sis, si.c);
  add_out(sis, si.c);
  si.T = 122;
  sis->add_option("--T", si.T, "number of days")->capture_default_str();
  sis->add_option("--rate", si.rate, "infection probability per contact per day")->capture_default_str();
  sis->add_option("--population", si.population, "individuals per node")->capture_default_str();
  sis->add_option("--recovery", si.recovery, "days until an infected individual is susceptible again")
      ->capture_default_str();
  sis->add_option("--initial", si.initial, "comma-separated initially infected nodes")->capture_default_str();
  sis->add_option("--initial-count", si.initial_count, "infected individuals per initial node")
      ->capture_default_str();
  sis->callback([] {
    SiConfig cfg;
    cfg.infection_rate = si.rate;
    cfg.population = si.population;
    cfg.recovery_days = si.recovery;
    cfg.T = si.T;
    cfg.initial_nodes = parse_list<int>(si.initial);
    cfg.initial_infected = si.initial_count;
    cfg.seed = si.c.seed;
    write_text(si.c.out, signal_to_csv(simulate_si(parse_graph_csv(read_text(si.c.graph)), cfg)));
  });
}

// ------------------------------------------------------------------ fit

struct FitOptions {
  Common c;
  std::string signal, report, method = "mse";
  int P = 1, Q = 0, L = 2, low_rank = 0;
  double gamma = 0.0, sigma_g = 0.0, sigma_t = 0.0;
  bool restricted = false;
};

void setup_fit(CLI::App& app) {
  auto* fit = app.add_subcommand("fit", "fit a model to a signal; the per-node mean is removed first");
  fit->require_subcommand(1);
  static FitOptions gv, gp;

  auto* gvarma = fit->add_subcommand("gvarma", "per-graph-frequency ARMA fit");
  add_graph(gvarma, gv.c);
  add_out(gvarma, gv.c);
  gvarma->add_option("--signal", gv.signal, "signal CSV")->required();
  gvarma->add_option("--P", gv.P, "AR order")->capture_default_str();
  gvarma->add_option("--Q", gv.Q, "MA order")->capture_default_str();
  gvarma->add_option("--gamma", gv.gamma, "l2 regularization weight")->capture_default_str();
  gvarma->add_option("--sigma-g", gv.sigma_g, "JPSD smoothing width along graph frequency")->capture_default_str();
  gvarma->add_option("--sigma-t", gv.sigma_t, "JPSD smoothing width along temporal frequency")
      ->capture_default_str();
  gvarma->add_option("--low-rank", gv.low_rank, "fit only the K strongest graph frequencies (0 = all)")
      ->capture_default_str();
  gvarma->add_option("--report", gv.report, "fit report JSON");
  gvarma->callback([] {
    const SpectralBasis basis = load_basis(gv.c.graph, parse_normalization(gv.c.normalization));
    const Matrix X = load_signal(gv.signal, basis.size());
    const Vector mean = X.rowwise().mean();
    const Matrix Xc = X.colwise() - mean;
    FitConfig cfg;
    cfg.P = gv.P;
    cfg.Q = gv.Q;
    cfg.gamma = gv.gamma;
    cfg.smoothing = {gv.sigma_g, gv.sigma_t};
    GVarmaModel model;
    FitReport report;
    if (gv.low_rank > 0 && gv.low_rank < basis.size()) {
      LowRankFit f = fit_gvarma_low_rank(basis, Xc, cfg, gv.low_rank);
      model = std::move(f.model);
      report = std::move(f.report);
    } else {
      require(gv.low_rank >= 0 && gv.low_rank <= basis.size(), "--low-rank must lie in [0, N]");
      GVarmaFit f = fit_gvarma(basis, Xc, cfg);
      model = std::move(f.model);
      report = std::move(f.report);
    }
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    if (!gv.report.empty()) write_json(gv.report, fit_report_to_json(report));
    write_json(gv.c.out, model_to_json(model, basis, mean));
  });

  auto* gpvar = fit->add_subcommand("gpvar", "graph-polynomial VAR fit");
  add_graph(gpvar, gp.c);
  add_out(gpvar, gp.c);
  gpvar->add_option("--signal", gp.signal, "signal CSV")->required();
  gpvar->add_option("--P", gp.P, "AR order")->capture_default_str();
  gpvar->add_option("--L", gp.L, "polynomial order of every lag")->capture_default_str();
  gpvar->add_flag("--restricted", gp.restricted, "cap the lag-p polynomial order at p");
  gpvar->add_option("--method", gp.method, "mse or yule-walker")->capture_default_str();
  gpvar->add_option("--sigma-g", gp.sigma_g, "JPSD smoothing width along graph frequency")->capture_default_str();
  gpvar->add_option("--report", gp.report, "fit report JSON");
  gpvar->callback([] {
    const SpectralBasis basis = load_basis(gp.c.graph, parse_normalization(gp.c.normalization));
    const Matrix X = load_signal(gp.signal, basis.size());
    require(gp.P >= 0 && gp.L >= 0, "orders must be nonnegative");
    require(X.cols() > 2 * gp.P + 1, "series too short for the requested model order");
    const Vector mean = X.rowwise().mean();
    const Matrix Xc = reshape_to_smoothed_jpsd(basis, X.colwise() - mean, {gp.sigma_g, 0.0});
    std::vector<int> orders;
    for (int p = 1; p <= gp.P; ++p) orders.push_back(gp.restricted ? std::min(gp.L, p) : gp.L);
    const Autocorrelation R = estimate_autocorrelation(Xc, gp.P);
    GpVarFit f;
    if (gp.method == "mse") {
      f = fit_gpvar_mse(basis.laplacian, R, orders, gp.restricted);
    } else if (gp.method == "yule-walker") {
      f = fit_gpvar_yule_walker(basis.laplacian, R, orders, gp.restricted);
    } else {
      throw InvalidInput("unknown --method '" + gp.method + "'");
    }
    if (f.ill_conditioned) std::cerr << "warning: ill-conditioned normal equations; regularized solve used\n";
    if (!gp.report.empty()) {
      write_json(gp.report, json{{"objective", f.objective}, {"ill_conditioned", f.ill_conditioned}});
    }
    write_json(gp.c.out, model_to_json(f.model, basis, mean));
  });
}

// -------------------------------------------------------------- predict

void setup_predict(CLI::App& app) {
  auto* cmd = app.add_subcommand("predict", "forecast the next k samples after the end of a signal");
  static Common c;
  static std::string model, signal, mse_out;
  static int horizon = 5;
  cmd->add_option("--graph", c.graph, "graph CSV")->required();
  cmd->add_option("--model", model, "model JSON")->required();
  cmd->add_option("--signal", signal, "history CSV")->required();
  cmd->add_option("--horizon", horizon, "forecast steps")->capture_default_str();
  cmd->add_option("--mse-out", mse_out, "CSV of the predicted MSE per step");
  add_out(cmd, c);
  cmd->callback([] {
    const BoundModel b = load_model(c.graph, model);
    const Matrix X = load_signal(signal, b.basis.size());
    const Matrix Xc = X.colwise() - b.model.mean;
    Forecast f = b.model.type == "gvarma" ? gvarma_predict(b.model.gvarma, b.basis, Xc, horizon)
                                          : gpvar_predict(b.model.gpvar, Xc, horizon);
    f.predictions.colwise() += b.model.mean;
    write_text(c.out, signal_to_csv(f.predictions, "h"));
    if (!mse_out.empty()) {
      std::string s = "step,mse\n";
      for (int k = 0; k < f.step_mse.size(); ++k) s += std::to_string(k + 1) + "," + format_number(f.step_mse(k)) + "\n";
      write_text(mse_out, s);
    }
  });
}

// ---------------------------------------------------------------- track

void setup_track(CLI::App& app) {
  auto* cmd = app.add_subcommand("track", "Kalman tracking from partial node observations (Q = 0 models)");
  static Common c;
  static std::string model, signal, observations, trace_out;
  static double fraction = 0.75;
  static double noise = -1.0;
  static int T = 0;
  cmd->add_option("--graph", c.graph, "graph CSV")->required();
  cmd->add_option("--model", model, "model JSON")->required();
  cmd->add_option("--observations", observations, "observation CSV (t,node,value)");
  cmd->add_option("--signal", signal, "full signal CSV to sample observations from and score against");
  cmd->add_option("--sample-fraction", fraction, "share of nodes observed per step when sampling")
      ->capture_default_str();
  cmd->add_option("--noise-variance", noise, "observation noise variance (default 1e-6 x signal power)");
  cmd->add_option("--T", T, "number of steps when only observations are given");
  cmd->add_option("--trace-out", trace_out, "CSV of the error covariance trace per step");
  add_seed(cmd, c);
  add_out(cmd, c);
  cmd->callback([] {
    const BoundModel b = load_model(c.graph, model);
    const int N = b.basis.size();
    const StateSpace ss =
        b.model.type == "gvarma" ? build_state_space(b.model.gvarma, b.basis) : build_state_space(b.model.gpvar);
    std::vector<ObservationSet> schedule;
    Matrix truth;
    if (!signal.empty()) truth = load_signal(signal, N);
    if (!observations.empty()) {
      int steps = T > 0 ? T : (truth.size() > 0 ? static_cast<int>(truth.cols()) : 0);
      if (steps == 0) {
        // infer the length from the largest time index
        const std::string text = read_text(observations);
        steps = 1;
        std::stringstream ss_text(text);
        std::string line;
        std::getline(ss_text, line);
        while (std::getline(ss_text, line)) {
          if (line.empty() || line[0] == '#') continue;
          steps = std::max(steps, parse_int(line.substr(0, line.find(','))) + 1);
        }
      }
      schedule = parse_observations_csv(read_text(observations), steps);
    } else {
      require(truth.size() > 0, "either --observations or --signal is required");
      require(fraction > 0.0 && fraction <= 1.0, "--sample-fraction must lie in (0, 1]");
      const int m = std::max(1, static_cast<int>(std::lround(fraction * N)));
      std::mt19937_64 rng(c.seed);
      std::vector<int> nodes(N);
      for (Eigen::Index t = 0; t < truth.cols(); ++t) {
        for (int n = 0; n < N; ++n) nodes[n] = n;
        std::shuffle(nodes.begin(), nodes.end(), rng);
        ObservationSet obs;
        for (int i = 0; i < m; ++i) obs.push_back({nodes[i], truth(nodes[i], t)});
        std::sort(obs.begin(), obs.end(), [](const Observation& a, const Observation& b2) { return a.node < b2.node; });
        schedule.push_back(std::move(obs));
      }
    }
    for (auto& obs : schedule)
      for (auto& o : obs) {
        require(o.node >= 0 && o.node < N, "observed node index out of range");
        o.value -= b.model.mean(o.node);
      }
    ObservationModel om;
    if (noise >= 0.0) {
      om.noise_variance = noise;
    } else {
      double power = 0.0;
      std::size_t count = 0;
      for (const auto& obs : schedule)
        for (const auto& o : obs) {
          power += o.value * o.value;
          ++count;
        }
      om.noise_variance = 1e-6 * (count > 0 ? power / count : 1.0);
      if (om.noise_variance == 0.0) om.noise_variance = 1e-12;
    }
    TrackResult r = track(ss, schedule, om);
    r.estimates.colwise() += b.model.mean;
    write_text(c.out, signal_to_csv(r.estimates));
    if (!trace_out.empty()) {
      std::string s = "t,error_trace\n";
      for (Eigen::Index t = 0; t < r.error_trace.size(); ++t)
        s += std::to_string(t) + "," + format_number(r.error_trace(t)) + "\n";
      write_text(trace_out, s);
    }
    if (truth.size() > 0 && truth.cols() == r.estimates.cols()) {
      std::cerr << "tracking rnmse " << format_number(rnmse(truth.colwise() - b.model.mean,
                                                            r.estimates.colwise() - b.model.mean))
                << "\n";
    }
  });
}

// ----------------------------------------------------------------- eval

void setup_eval(CLI::App& app) {
  auto* cmd = app.add_subcommand("eval", "rNMSE versus prediction step on the test split");
  static Common c;
  static std::string signal, model, split_text = "0.35,0.15,0.5", methods = "gvarma,gpvar,rgpvar,arma";
  static std::string sweep;
  static int horizon = 5, P = 1, Q = 0, L = 2, repeats = 3;
  static double gamma = 0.0, sigma_g = 0.0;
  add_graph(cmd, c);
  add_out(cmd, c);
  cmd->add_option("--signal", signal, "signal CSV")->required();
  cmd->add_option("--model", model, "score this fitted model instead of fitting --methods");
  cmd->add_option("--methods", methods, "comma-separated families to fit")->capture_default_str();
  cmd->add_option("--split", split_text, "train,valid,test fractions")->capture_default_str();
  cmd->add_option("--horizon", horizon, "prediction steps")->capture_default_str();
  cmd->add_option("--P", P, "AR order")->capture_default_str();
  cmd->add_option("--Q", Q, "MA order (gvarma, arma)")->capture_default_str();
  cmd->add_option("--L", L, "polynomial order (gpvar, rgpvar)")->capture_default_str();
  cmd->add_option("--gamma", gamma, "l2 regularization weight")->capture_default_str();
  cmd->add_option("--sigma-g", sigma_g, "JPSD smoothing width along graph frequency")->capture_default_str();
  cmd->add_option("--low-rank-sweep", sweep, "comma-separated ignored power fractions; emits the sweep table");
  cmd->add_option("--repeats", repeats, "timing repeats per sweep point")->capture_default_str();
  cmd->callback([] {
    const SplitSpec spec = parse_split(split_text);
    require(horizon >= 1, "--horizon must be positive");
    if (!model.empty()) {
      const BoundModel b = load_model(c.graph, model);
      const Matrix X = load_signal(signal, b.basis.size());
      const Matrix Xc = X.colwise() - b.model.mean;
      const int order = b.model.type == "gvarma" ? std::max(b.model.gvarma.ar_order(), b.model.gvarma.ma_order())
                                                 : b.model.gpvar.ar_order();
      const SplitRanges r = split(X.cols(), spec, order + 1);
      const auto preds = b.model.type == "gvarma" ? gvarma_rolling_forecast(b.model.gvarma, b.basis, Xc, horizon)
                                                  : gpvar_rolling_forecast(b.model.gpvar, Xc, horizon);
      const Vector zero = Vector::Zero(X.rows());
      std::vector<ScoreRow> rows;
      rows.push_back({"model", 0, forecast_rnmse(Xc, preds[0], zero, Range{order, r.valid.end})});
      for (int h = 1; h <= horizon; ++h) rows.push_back({"model", h, forecast_rnmse(Xc, preds[h - 1], zero, r.test)});
      write_text(c.out, scores_to_csv(rows));
      return;
    }
    const SpectralBasis basis = load_basis(c.graph, parse_normalization(c.normalization));
    const Matrix X = load_signal(signal, basis.size());
    ModelConfig base;
    base.P = P;
    base.Q = Q;
    base.L = L;
    base.gamma = gamma;
    base.sigma_g = sigma_g;
    if (!sweep.empty()) {
      base.family = Family::gvarma;
      const auto rows = low_rank_sweep(basis, X, base, spec, horizon, parse_list<double>(sweep), repeats);
      std::string s = "ignore_fraction,K,fit_seconds,predict_seconds,rnmse\n";
      for (const auto& r : rows) {
        s += format_number(r.ignore_fraction) + "," + std::to_string(r.K) + "," + format_number(r.fit_seconds) +
             "," + format_number(r.predict_seconds) + "," + format_number(r.rnmse) + "\n";
      }
      write_text(c.out, s);
      return;
    }
    std::vector<ModelConfig> configs;
    std::stringstream ss(methods);
    std::string item;
    while (std::getline(ss, item, ',')) {
      ModelConfig m = base;
      m.family = parse_family(item);
      if (m.family == Family::gpvar || m.family == Family::rgpvar) m.Q = 0;
      configs.push_back(m);
    }
    write_text(c.out, scores_to_csv(evaluate_forecasters(basis, X, configs, spec, horizon)));
  });
}

// ----------------------------------------------------------- gridsearch

void setup_gridsearch(CLI::App& app) {
  auto* cmd = app.add_subcommand("gridsearch", "cross-validated order / regularization selection");
  static Common c;
  static std::string signal, family = "gvarma", split_text = "0.35,0.15,0.5", summary;
  static std::string p_grid = "1,2,3", q_grid = "0", l_grid = "0,1,2", gamma_grid = "0", sigma_grid = "0";
  static int horizon = 5;
  static double tie = 0.005;
  add_graph(cmd, c);
  add_out(cmd, c);
  cmd->add_option("--signal", signal, "signal CSV")->required();
  cmd->add_option("--family", family, "gvarma, gpvar, rgpvar or arma")->capture_default_str();
  cmd->add_option("--split", split_text, "train,valid,test fractions")->capture_default_str();
  cmd->add_option("--horizon", horizon, "steps averaged in the validation score")->capture_default_str();
  cmd->add_option("--P-grid", p_grid, "AR orders")->capture_default_str();
  cmd->add_option("--Q-grid", q_grid, "MA orders")->capture_default_str();
  cmd->add_option("--L-grid", l_grid, "polynomial orders")->capture_default_str();
  cmd->add_option("--gamma-grid", gamma_grid, "regularization weights")->capture_default_str();
  cmd->add_option("--sigma-g-grid", sigma_grid, "smoothing widths")->capture_default_str();
  cmd->add_option("--tie-tolerance", tie, "relative validation margin treated as a tie")->capture_default_str();
  cmd->add_option("--summary", summary, "JSON with the selected configuration and test scores");
  cmd->callback([] {
    const SpectralBasis basis = load_basis(c.graph, parse_normalization(c.normalization));
    const Matrix X = load_signal(signal, basis.size());
    GridOptions options;
    options.split = parse_split(split_text);
    options.horizon = horizon;
    options.tie_tolerance = tie;
    const auto grid = expand_grid(parse_family(family), parse_list<int>(p_grid), parse_list<int>(q_grid),
                                  parse_list<int>(l_grid), parse_list<double>(gamma_grid),
                                  parse_list<double>(sigma_grid));
    const GridResult r = grid_search(basis, X, grid, options);
    std::string s = "method,P,Q,L,gamma,sigma_g,valid_rnmse,status\n";
    for (const auto& cell : r.table) {
      const auto& m = cell.config;
      s += m.label() + "," + std::to_string(m.P) + "," + std::to_string(m.Q) + "," + std::to_string(m.L) + "," +
           format_number(m.gamma) + "," + format_number(m.sigma_g) + "," +
           (cell.ok ? format_number(cell.valid_score) : std::string("")) + "," + (cell.ok ? "ok" : "failed") + "\n";
    }
    write_text(c.out, s);
    json doc{{"selected", r.best.label()},
             {"P", r.best.P},
             {"Q", r.best.Q},
             {"L", r.best.L},
             {"gamma", r.best.gamma},
             {"sigma_g", r.best.sigma_g},
             {"valid_rnmse", r.best_valid},
             {"test_rnmse_by_step", r.test_scores},
             {"test_rnmse", r.test_score},
             {"tie_rule", "within tie-tolerance of the best: smaller P+Q, then L, then gamma"}};
    if (!summary.empty()) {
      write_json(summary, doc);
    } else {
      std::cerr << doc.dump() << "\n";
    }
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forecasting and tracking of time series on graphs"};
  app.require_subcommand(1);
  setup_graph(app);
  setup_simulate(app);
  setup_fit(app);
  setup_predict(app);
  setup_track(app);
  setup_eval(app);
  setup_gridsearch(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const gvarma::InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const gvarma::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
