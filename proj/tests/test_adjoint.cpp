#include "alphactl/adjoint.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace alphactl;
using testutil::kPi;

namespace {

DiffusionSpec linear_noise(const Band& band, double gain, const SpectralField& anchor) {
  DiffusionSpec g;
  g.family = DiffusionFamily::linear;
  g.gain = gain;
  g.anchors = {anchor};
  return g;
}

double weighted_mean(const std::vector<SpectralField>& f, const Ensemble& e, int i) {
  double s = 0;
  for (std::size_t p = 0; p < f.size(); ++p) s += e.weights[p] * f[p][i];
  return s;
}

}  // namespace

TEST_CASE("zero cost gives a zero adjoint") {
  const Band band{2, 0.1};
  const auto cfg = SolverConfig::make(band, 0.05, 0.5, 4);
  std::mt19937_64 rng(60);
  const auto g = linear_noise(band, 0.5, testutil::random_field(band, rng));
  const auto ens = Ensemble::from_tree(ScenarioTree(4, cfg.dt, 1));
  const auto U = ControlProcess::open_loop(band, 4, testutil::random_field(band, rng, 0.3));
  const auto base = integrate_all(testutil::random_field(band, rng, 0.3), U, ens, g, cfg);
  CostSpec c;
  c.tracking_weight = 0.0;
  c.lambda = 0.4;  // control-only terms never reach the adjoint
  const auto adj = solve_backward(base, U, ens, c, g, cfg, {});
  for (const auto& level : adj.p)
    for (const auto& f : level) CHECK(testutil::max_abs(f.coeffs()) == 0.0);
  for (const auto& level : adj.q)
    for (const auto& path : level)
      for (const auto& f : path) CHECK(testutil::max_abs(f.coeffs()) == 0.0);
}

TEST_CASE("without noise the martingale part vanishes") {
  const Band band{2, 0.1};
  const auto cfg = SolverConfig::make(band, 0.05, 0.5, 4);
  std::mt19937_64 rng(61);
  const auto ens = Ensemble::from_tree(ScenarioTree(4, cfg.dt, 1));
  const auto U = ControlProcess::open_loop(band, 4, testutil::random_field(band, rng, 0.3));
  const auto none = DiffusionSpec::none(band, 1);
  const auto base = integrate_all(testutil::random_field(band, rng, 0.3), U, ens, none, cfg);
  CostSpec c;
  c.terminal = TerminalKind::v;
  const auto adj = solve_backward(base, U, ens, c, none, cfg, {});
  for (const auto& level : adj.q)
    for (const auto& path : level) CHECK(testutil::max_abs(path[0].coeffs()) < 1e-13);
  // every scenario follows the same path, so p does not branch either
  for (const auto& level : adj.p) CHECK(testutil::max_abs((level.front() - level.back()).coeffs()) < 1e-14);
}

TEST_CASE("deterministic single mode reproduces the scalar backward recursion") {
  const Band band{1, 0.2};
  const auto cfg = SolverConfig::make(band, 0.1, 1.0, 10);
  const double lam = 2 * kPi * kPi, S = 1 + 0.2 * lam, M = S + cfg.dt * 0.1 * lam;
  const auto ens = Ensemble::monte_carlo(1, 1, cfg.K, cfg.dt, 1);
  const auto U = ControlProcess::open_loop(band, cfg.K, SpectralField::mode(band, {1, 1}, 0.5));
  const auto none = DiffusionSpec::none(band, 1);
  const auto base = integrate_all(SpectralField::mode(band, {1, 1}, 0.3), U, ens, none, cfg);
  CostSpec c;
  c.tracking_weight = 0.7;
  c.terminal = TerminalKind::l2;
  AdjointOptions opt;
  opt.backend = Backend::regression;
  const auto adj = solve_backward(base, U, ens, c, none, cfg, opt);

  std::vector<double> y(cfg.K + 1);
  for (int k = 0; k <= cfg.K; ++k) y[k] = base[0].states[k][0];
  double l = y[cfg.K], p = 0;
  CHECK(adj.p[cfg.K][0][0] == doctest::Approx(l / S));
  for (int k = cfg.K - 1; k >= 0; --k) {
    p = l / M;
    CHECK(adj.p[k][0][0] == doctest::Approx(p).epsilon(1e-13));
    l = cfg.dt * 2 * 0.7 * y[k] + S * p;
  }

  // p_k dt is the sensitivity of J to u_k; the scalar cost is differentiated by hand
  auto J = [&](int kk, double du) {
    double yy = 0.3, s = 0;
    for (int k = 0; k < cfg.K; ++k) {
      s += cfg.dt * 0.7 * yy * yy;
      yy = (S * yy + cfg.dt * (0.5 + (k == kk ? du : 0.0))) / M;
    }
    return s + 0.5 * yy * yy;
  };
  for (int k : {0, 4, 9}) {
    const double fd = (J(k, 1e-5) - J(k, -1e-5)) / 2e-5;
    CHECK(cfg.dt * adj.p[k][0][0] == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("two-step tree adjoint matches a hand enumeration of four scenarios") {
  const Band band{1, 0.1};
  const auto cfg = SolverConfig::make(band, 0.2, 0.5, 2);
  const double dt = cfg.dt, lam = 2 * kPi * kPi, S = 1 + 0.1 * lam, M = S + dt * 0.2 * lam;
  const double gain = 0.8, y0 = 0.6, u = 0.25;
  const auto g = linear_noise(band, gain, SpectralField::mode(band, {1, 1}));
  const ScenarioTree tree(2, dt, 1);
  const auto ens = Ensemble::from_tree(tree);
  const auto U = ControlProcess::open_loop(band, 2, SpectralField::mode(band, {1, 1}, u));
  const auto base = integrate_all(SpectralField::mode(band, {1, 1}, y0), U, ens, g, cfg);
  CostSpec c;
  c.tracking_weight = 0.0;
  c.terminal = TerminalKind::l2;
  const auto adj = solve_backward(base, U, ens, c, g, cfg, {});

  const double h = std::sqrt(dt);
  double Ep0 = 0;
  for (int a = 0; a < 2; ++a) {
    const double w0 = a == 0 ? h : -h;
    const double y1 = (S * y0 + dt * u + gain * y0 * w0) / M;
    double p1 = 0, q1 = 0;
    for (int b = 0; b < 2; ++b) {
      const double w1 = b == 0 ? h : -h;
      const double y2 = (S * y1 + dt * u + gain * y1 * w1) / M;
      // derivatives of y2 with respect to u_1 and u_0
      p1 += 0.5 * y2 / M;
      q1 += 0.5 * y2 * w1 / (S * dt);
      Ep0 += 0.25 * y2 * (dt / M) * (S + gain * w1) / M / dt;
    }
    for (std::size_t s = 0; s < ens.size(); ++s) {
      if (ens.paths[s].increments(0, 0) * w0 < 0) continue;
      CHECK(adj.p[1][s][0] == doctest::Approx(p1).epsilon(1e-13));
      CHECK(adj.q[1][s][0][0] == doctest::Approx(q1).epsilon(1e-12));
    }
  }
  CHECK(adj.p[0][0][0] == doctest::Approx(Ep0).epsilon(1e-13));
  CHECK(adj.p[0][3][0] == adj.p[0][0][0]);
}

TEST_CASE("regression is exact when the features resolve the tree nodes") {
  const Band band{1, 0.1};
  const auto cfg = SolverConfig::make(band, 0.1, 0.5, 2);
  const auto g = linear_noise(band, 0.6, SpectralField::mode(band, {1, 1}));
  const auto ens = Ensemble::from_tree(ScenarioTree(2, cfg.dt, 1));
  const auto U = ControlProcess::open_loop(band, 2, SpectralField::mode(band, {1, 1}, 0.2));
  const auto base = integrate_all(SpectralField::mode(band, {1, 1}, 0.5), U, ens, g, cfg);
  CostSpec c;
  c.terminal = TerminalKind::v;
  const auto exact = solve_backward(base, U, ens, c, g, cfg, {});
  for (const double ridge : {0.0, 1e-12}) {
    AdjointOptions opt;
    opt.backend = Backend::regression;
    opt.regression.ridge = ridge;
    const auto reg = solve_backward(base, U, ens, c, g, cfg, opt);
    for (int k = 0; k <= 2; ++k)
      for (std::size_t s = 0; s < ens.size(); ++s)
        CHECK(reg.p[k][s][0] == doctest::Approx(exact.p[k][s][0]).epsilon(1e-8));
  }
}

TEST_CASE("adjoint is linear in homogeneous costs") {
  const Band band{2, 0.1};
  const auto cfg = SolverConfig::make(band, 0.05, 0.5, 3);
  std::mt19937_64 rng(62);
  const auto g = linear_noise(band, 0.4, testutil::random_field(band, rng));
  const auto ens = Ensemble::from_tree(ScenarioTree(3, cfg.dt, 1));
  const auto U = ControlProcess::open_loop(band, 3, testutil::random_field(band, rng, 0.3));
  const auto base = integrate_all(testutil::random_field(band, rng, 0.3), U, ens, g, cfg);
  CostSpec a, b;
  a.tracking_weight = 1.0;
  b.tracking_weight = 2.5;
  const auto pa = solve_backward(base, U, ens, a, g, cfg, {});
  const auto pb = solve_backward(base, U, ens, b, g, cfg, {});
  for (int k = 0; k <= 3; ++k)
    for (std::size_t s = 0; s < ens.size(); ++s)
      CHECK(testutil::max_abs((pb.p[k][s] - 2.5 * pa.p[k][s]).coeffs()) < 1e-13);
}

TEST_CASE("terminal conditions are the gradients of h") {
  const Band band{3, 0.2};
  std::mt19937_64 rng(63);
  const auto y = testutil::random_field(band, rng), v = testutil::random_field(band, rng);
  const auto yd = testutil::random_field(band, rng);
  CostSpec none;
  CHECK(testutil::max_abs(terminal_condition(y, none).coeffs()) == 0.0);
  CostSpec l2;
  l2.terminal = TerminalKind::l2;
  CHECK(testutil::max_abs((terminal_condition(y, l2) - y).coeffs()) == 0.0);
  CostSpec vv;
  vv.terminal = TerminalKind::v;
  vv.targets.assign(5, yd);
  CHECK(testutil::max_abs((terminal_condition(y, vv) - (y - yd)).coeffs()) < 1e-15);
  const double eps = 1e-6;
  for (const CostSpec* c : {&l2, &vv}) {
    const double fd = (c->terminal_value(y + eps * v) - c->terminal_value(y - (eps * v))) / (2 * eps);
    const NormKind pairing = c->terminal == TerminalKind::v ? NormKind::V : NormKind::L2;
    CHECK(inner(terminal_condition(y, *c), v, pairing) == doctest::Approx(fd).epsilon(1e-8));
    CHECK(c->terminal_gradient_l2(y).coeffs().dot(v.coeffs()) == doctest::Approx(fd).epsilon(1e-8));
  }
}

TEST_CASE("duality is exact on a tree for the nonlinear drift") {
  const Band band{3, 0.1};
  const auto cfg = SolverConfig::make(band, 0.05, 0.5, 3);
  std::mt19937_64 rng(64);
  const auto g = linear_noise(band, 0.5, testutil::random_field(band, rng));
  const auto ens = Ensemble::from_tree(ScenarioTree(3, cfg.dt, 1));
  const auto U = ControlProcess::open_loop(band, 3, testutil::random_field(band, rng, 0.3));
  const auto Psi = ControlProcess::open_loop(band, 3, testutil::random_field(band, rng, 0.3));
  const auto base = integrate_all(testutil::random_field(band, rng, 0.3), U, ens, g, cfg);
  CostSpec c;
  c.terminal = TerminalKind::v;
  const auto adj = solve_backward(base, U, ens, c, g, cfg, {});
  const auto z = integrate_tangents(base, Psi, g, cfg);
  const auto d = duality_gap(base, z, adj, c, ens, cfg);
  CHECK(d.relative_gap < 1e-12);
  CHECK(std::abs(d.lhs) > 1e-6);
  CHECK(d.se_combined == 0.0);
  CHECK(weighted_mean(adj.p[3], ens, 0) != 0.0);
  CHECK(adj.estimate_series.size() == 4);
}

TEST_CASE("regression duality holds within the statistical error") {
  const Band band{2, 0.1};
  const auto cfg = SolverConfig::make(band, 0.05, 0.5, 8);
  std::mt19937_64 rng(65);
  const auto g = linear_noise(band, 0.5, testutil::random_field(band, rng));
  const auto ens = Ensemble::monte_carlo(3, 3000, cfg.K, cfg.dt, 1);
  const auto U = ControlProcess::open_loop(band, cfg.K, testutil::random_field(band, rng, 0.3));
  const auto Psi = ControlProcess::open_loop(band, cfg.K, testutil::random_field(band, rng, 0.3));
  const auto base = integrate_all(testutil::random_field(band, rng, 0.3), U, ens, g, cfg);
  CostSpec c;
  c.terminal = TerminalKind::l2;
  AdjointOptions opt;
  opt.backend = Backend::regression;
  double cond = 0;
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(ens.size(), 1);
  const Eigen::MatrixXd ones = conditional_expectation(X, 3, base, ens, opt, &cond);
  CHECK((ones.array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK(cond >= 1.0);
  const auto adj = solve_backward(base, U, ens, c, g, cfg, opt);
  const auto d = duality_gap(base, integrate_tangents(base, Psi, g, cfg), adj, c, ens, cfg);
  CHECK(d.gap < 3 * d.se_combined);
}

TEST_CASE("misaligned inputs are rejected") {
  const Band band{2, 0.1};
  const auto cfg = SolverConfig::make(band, 0.05, 0.5, 3);
  const auto none = DiffusionSpec::none(band, 1);
  const auto mc = Ensemble::monte_carlo(1, 4, 3, cfg.dt, 1);
  const auto U = ControlProcess::open_loop(band, 3);
  const auto base = integrate_all(SpectralField::mode(band, {1, 1}), U, mc, none, cfg);
  CostSpec c;
  CHECK_THROWS_AS(solve_backward(base, U, mc, c, none, cfg, {}), std::invalid_argument);
  AdjointOptions opt;
  opt.backend = Backend::regression;
  const auto other = Ensemble::monte_carlo(1, 5, 3, cfg.dt, 1);
  CHECK_THROWS_AS(solve_backward(base, U, other, c, none, cfg, opt), std::invalid_argument);
  opt.regression.ridge = -1;
  CHECK_THROWS_AS(solve_backward(base, U, mc, c, none, cfg, opt), std::invalid_argument);
  CHECK_THROWS(backend_from_string("lsq"));
  CHECK(feature_map_from_string("state_quadratic") == FeatureMap::state_quadratic);
}
