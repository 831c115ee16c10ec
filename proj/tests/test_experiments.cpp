#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gvarma/experiments.hpp"
#include "support.hpp"

using namespace gvarma;
using namespace testing_support;

TEST_CASE("rnmse") {
  Matrix truth(1, 2), est(1, 2);
  truth << 3.0, 4.0;
  est << 3.0, 0.0;
  CHECK(rnmse(truth, est) == doctest::Approx(0.8));
  CHECK(rnmse(truth, truth) == 0.0);
  CHECK(rnmse(truth, Matrix::Zero(1, 2)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(rnmse(Matrix::Zero(1, 2), est), InvalidInput);
  CHECK_THROWS_AS(rnmse(truth, Matrix::Zero(2, 2)), InvalidInput);
}

TEST_CASE("contiguous splits") {
  const SplitRanges a = split(100, SplitSpec{});
  CHECK(a.train.size() == 35);
  CHECK(a.valid.size() == 15);
  CHECK(a.test.size() == 50);
  CHECK(a.valid.begin == 35);
  CHECK(a.test.end == 100);
  const SplitRanges b = split(20, {0.5, 0.2, 0.3});
  CHECK(b.train.size() == 10);
  CHECK(b.valid.size() == 4);
  CHECK(b.test.size() == 6);
  CHECK_THROWS_AS(split(100, {1.0, 0.0, 0.0}), InvalidInput);
  CHECK_THROWS_AS(split(100, {0.5, 0.2, 0.2}), InvalidInput);
  CHECK_THROWS_AS(split(10, SplitSpec{}, 3), InvalidInput);
  const SplitSpec p = parse_split("0.6,0.2,0.2");
  CHECK(p.train == 0.6);
  CHECK_THROWS_AS(parse_split("0.6,0.4"), InvalidInput);
  CHECK_THROWS_AS(parse_split("0.6,x,0.2"), InvalidInput);
}

TEST_CASE("SI simulation without transmission only recovers") {
  SiConfig cfg;
  cfg.infection_rate = 0.0;
  cfg.T = 20;
  const Matrix X = simulate_si(path(3), cfg);
  for (int t = 0; t < 20; ++t) {
    CHECK(X(0, t) == doctest::Approx(t < 12 ? 1.0 / 60.0 : 0.0));
    CHECK(X(1, t) == 0.0);
  }
}

TEST_CASE("SI simulation with certain transmission spreads one hop per day") {
  SiConfig cfg;
  cfg.infection_rate = 1.0;
  cfg.T = 4;
  cfg.recovery_days = 30;
  const Matrix X = simulate_si(path(4), cfg);
  CHECK(X(0, 0) == doctest::Approx(1.0 / 60.0));
  CHECK(X(1, 0) == 0.0);
  CHECK(X(0, 1) == 1.0);
  CHECK(X(1, 1) == 1.0);
  CHECK(X(2, 1) == 0.0);
  CHECK(X(2, 2) == 1.0);
  CHECK(X(3, 3) == 1.0);
}

TEST_CASE("SI simulation is seeded and bounded") {
  const Graph g = random_graph(30, 80, 3);
  SiConfig cfg;
  cfg.infection_rate = 0.02;
  cfg.initial_nodes = {0, 5};
  cfg.initial_infected = 3;
  cfg.seed = 9;
  const Matrix X = simulate_si(g, cfg);
  CHECK(X.rows() == 30);
  CHECK(X.cols() == 122);
  CHECK((X - simulate_si(g, cfg)).norm() == 0.0);
  CHECK((X.array() >= 0.0).all());
  CHECK((X.array() <= 1.0).all());
  CHECK(((X * 60.0).array() - (X * 60.0).array().round()).abs().maxCoeff() < 1e-9);
  CHECK(X.sum() > X.col(0).sum());
  SiConfig bad = cfg;
  bad.initial_nodes = {30};
  CHECK_THROWS_AS(simulate_si(g, bad), InvalidInput);
  bad = cfg;
  bad.recovery_days = 0;
  CHECK_THROWS_AS(simulate_si(g, bad), InvalidInput);
}

TEST_CASE("random generators") {
  const Graph g = random_graph(20, 45, 1);
  CHECK(g.edges().size() == 45);
  CHECK(random_graph(20, 45, 1).adjacency() == g.adjacency());
  CHECK_THROWS_AS(random_graph(4, 7, 1), InvalidInput);
  const Matrix c = random_coordinates(10, 2, 4);
  CHECK(c.rows() == 10);
  CHECK((c.array() >= 0.0).all());
  CHECK((c.array() <= 1.0).all());

  const SpectralBasis b = spectral_basis(g, Normalization::unit_spectral_norm);
  const GpVarModel gp = random_gpvar(b, 3, 2, 0.9, 5);
  CHECK(gpvar_spectral_radius(gp, b) == doctest::Approx(0.9).epsilon(1e-9));
  const GpVarModel rgp = random_gpvar(b, 3, 2, 0.9, 5, true);
  CHECK(rgp.orders() == std::vector<int>{1, 2, 2});
  const GVarmaModel gv = random_gvarma(b, 2, 2, 0.8, 6);
  CHECK(gvarma_spectral_radius(gv) == doctest::Approx(0.8).epsilon(1e-9));
  for (int n = 0; n < b.size(); ++n) CHECK(ar_spectral_radius(gv.ma_at(n)) < 1.0);
  CHECK(gv.innovation_spectrum.minCoeff() >= 0.5);
  CHECK(gv.innovation_spectrum.maxCoeff() <= 1.5);
}

TEST_CASE("model labels and grids") {
  ModelConfig c;
  c.P = 2;
  CHECK(c.label() == "gvarma P=2 Q=0");
  c.family = Family::rgpvar;
  c.L = 1;
  c.gamma = 0.5;
  CHECK(c.label() == "rgpvar P=2 L=1 gamma=0.5");
  CHECK(parse_family("arma") == Family::arma);
  CHECK_THROWS_AS(parse_family("var"), InvalidInput);
  CHECK(expand_grid(Family::gvarma, {1, 2}, {0, 1}, {}, {0.0, 1.0}, {}).size() == 8);
  const auto gp = expand_grid(Family::gpvar, {1, 2}, {0, 1}, {0, 1, 2}, {}, {});
  CHECK(gp.size() == 6);
  for (const auto& m : gp) CHECK(m.Q == 0);
}

TEST_CASE("rank for an ignored power fraction") {
  Vector p(4);
  p << 2.0, 4.0, 1.0, 3.0;
  CHECK(rank_for_ignore_fraction(p, 0.0) == 4);
  CHECK(rank_for_ignore_fraction(p, 0.1) == 3);
  CHECK(rank_for_ignore_fraction(p, 0.3) == 2);
  CHECK(rank_for_ignore_fraction(p, 0.65) == 1);
  CHECK_THROWS_AS(rank_for_ignore_fraction(p, 1.0), InvalidInput);
}

namespace {

struct Fixture {
  SpectralBasis basis = spectral_basis(random_connected(8, 40), Normalization::unit_spectral_norm);
  Matrix X = gvarma_simulate(random_gvarma(basis, 2, 1, 0.85, 41), basis, 300, 42);
};

}  // namespace

TEST_CASE("grid search") {
  const Fixture fx;
  GridOptions opt;
  opt.horizon = 3;
  const auto single = expand_grid(Family::gvarma, {2}, {1}, {}, {}, {});
  const GridResult one = grid_search(fx.basis, fx.X, single, opt);
  CHECK(one.best.P == 2);
  CHECK(one.best.Q == 1);
  CHECK(one.test_scores.size() == 3);
  CHECK(one.table.size() == 1);

  const auto wide = expand_grid(Family::gvarma, {1, 2, 3}, {0, 1}, {}, {0.0, 10.0}, {});
  const GridResult many = grid_search(fx.basis, fx.X, wide, opt);
  CHECK(many.best_valid <= one.best_valid * (1.0 + opt.tie_tolerance) + 1e-15);
  const GridResult again = grid_search(fx.basis, fx.X, wide, opt);
  CHECK(again.best.label() == many.best.label());
  CHECK(again.test_score == many.test_score);

  GridOptions loose = opt;
  loose.tie_tolerance = 1e9;
  const GridResult simplest = grid_search(fx.basis, fx.X, wide, loose);
  CHECK(simplest.best.P + simplest.best.Q == 1);
  CHECK(simplest.best.gamma == 0.0);

  // a configuration that cannot be fitted is recorded, not fatal
  auto mixed = single;
  ModelConfig broken;
  broken.family = Family::gpvar;
  broken.P = 1;
  broken.Q = 2;
  mixed.push_back(broken);
  const GridResult partial = grid_search(fx.basis, fx.X, mixed, opt);
  CHECK_FALSE(partial.table[1].ok);
  CHECK_FALSE(partial.table[1].error.empty());
  CHECK_THROWS_AS(grid_search(fx.basis, fx.X, {broken}, opt), NumericalError);
}

TEST_CASE("evaluation is invariant to a constant offset") {
  const Fixture fx;
  const auto cfgs = std::vector<ModelConfig>{{Family::gvarma, 2, 1}, {Family::gpvar, 2, 0, 1}, {Family::arma, 1, 0}};
  const auto rows = evaluate_forecasters(fx.basis, fx.X, cfgs, SplitSpec{}, 4);
  CHECK(rows.size() == 15);
  CHECK(rows[0].step == 0);
  CHECK(rows[4].step == 4);
  CHECK(rows[0].method == "gvarma P=2 Q=1");
  const Matrix shifted = fx.X.array() + 100.0;
  const auto moved = evaluate_forecasters(fx.basis, shifted, cfgs, SplitSpec{}, 4);
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(moved[i].rnmse == doctest::Approx(rows[i].rnmse).epsilon(1e-6));
    CHECK(rows[i].rnmse > 0.0);
    CHECK(rows[i].rnmse < 1.5);
  }
  // a fitted forecaster reproduces the data mean in its forecasts
  const Forecaster f = fit_forecaster(fx.basis, shifted, cfgs[0]);
  CHECK((f.mean.array() - 100.0).abs().maxCoeff() < 1.0);
  const auto preds = rolling_forecast(f, fx.basis, shifted, 1);
  CHECK(std::abs(preds[0].mean() - 100.0) < 1.0);
}

TEST_CASE("low-rank sweep") {
  const Fixture fx;
  ModelConfig c;
  c.P = 1;
  const auto rows = low_rank_sweep(fx.basis, fx.X, c, SplitSpec{}, 2, {0.0, 0.2, 0.5}, 1);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].K == 8);
  CHECK(rows[1].K <= rows[0].K);
  CHECK(rows[2].K <= rows[1].K);
  for (const auto& r : rows) {
    CHECK(r.fit_seconds >= 0.0);
    CHECK(r.rnmse > 0.0);
  }
  ModelConfig gp = c;
  gp.family = Family::gpvar;
  CHECK_THROWS_AS(low_rank_sweep(fx.basis, fx.X, gp, SplitSpec{}, 2, {0.0}), InvalidInput);
}
