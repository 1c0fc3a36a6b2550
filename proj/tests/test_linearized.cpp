#include "alphactl/linearized.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace alphactl;
using testutil::kPi;

namespace {

struct Setup {
  Band band{3, 0.1};
  SolverConfig cfg = SolverConfig::make(band, 0.05, 0.5, 16);
  DiffusionSpec noise;
  Ensemble ens = Ensemble::monte_carlo(8, 6, 16, cfg.dt, 1);
  SpectralField Y0;
  ControlProcess U;

  explicit Setup(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    noise.family = DiffusionFamily::linear;
    noise.gain = 0.5;
    noise.anchors = {testutil::random_field(band, rng)};
    Y0 = testutil::random_field(band, rng, 0.2);
    U = ControlProcess::open_loop(band, cfg.K, testutil::random_field(band, rng, 0.2));
  }

  ControlProcess random_control(std::mt19937_64& rng) const {
    auto P = ControlProcess::open_loop(band, cfg.K);
    for (int k = 0; k < cfg.K; ++k) P.node(k, 0) = testutil::random_field(band, rng, 0.3);
    return P;
  }
};

}  // namespace

TEST_CASE("zero forcing gives the zero tangent") {
  Setup s(50);
  const auto base = integrate_all(s.Y0, s.U, s.ens, s.noise, s.cfg);
  const auto z = integrate_tangents(base, ControlProcess::open_loop(s.band, s.cfg.K), s.noise, s.cfg);
  for (const auto& t : z) {
    CHECK(t.base != nullptr);
    for (const auto& st : t.states) CHECK(testutil::max_abs(st.coeffs()) == 0.0);
  }
}

TEST_CASE("tangent about rest is the Stokes recursion") {
  const Band band{3, 0.1};
  const auto cfg = SolverConfig::make(band, 0.05, 1.0, 50);
  const PairingWorkspace ws(band, cfg.Q);
  const auto none = DiffusionSpec::none(band, 1);
  const auto base = integrate(SpectralField(band), ControlProcess::open_loop(band, cfg.K).for_path(0),
                              sample_path(1, cfg.K, cfg.dt, 1), none, cfg, ws);
  const double psi = 0.4;
  const std::vector<SpectralField> forcing(cfg.K, SpectralField::mode(band, {2, 1}, psi));
  const auto z = integrate_tangent(base, forcing, none, cfg, ws);
  const double lam = 5 * kPi * kPi, S = 1 + 0.1 * lam, A = 0.05 * lam;
  const int i = band.index({2, 1});
  double c = 0;
  for (int k = 1; k <= cfg.K; ++k) {
    c = (S * c + cfg.dt * psi) / (S + cfg.dt * A);
    CHECK(z.states[k][i] == doctest::Approx(c).epsilon(1e-13));
  }
  const double exact = psi / A * (1 - std::exp(-A * 1.0 / S));
  CHECK(z.states[cfg.K][i] == doctest::Approx(exact).epsilon(0.05));
  CHECK(std::abs(z.states[cfg.K][i] - exact) <= 2 * cfg.dt * exact);
}

TEST_CASE("tangent is linear in the forcing") {
  Setup s(51);
  std::mt19937_64 rng(52);
  const auto base = integrate_all(s.Y0, s.U, s.ens, s.noise, s.cfg);
  const auto P1 = s.random_control(rng), P2 = s.random_control(rng);
  const auto z1 = integrate_tangents(base, P1, s.noise, s.cfg);
  const auto z2 = integrate_tangents(base, P2, s.noise, s.cfg);
  const auto z12 = integrate_tangents(base, 2.0 * P1 + (-3.0) * P2, s.noise, s.cfg);
  const auto zs = integrate_tangents(base, 7.0 * P1, s.noise, s.cfg);
  for (std::size_t p = 0; p < base.size(); ++p)
    for (int k = 0; k <= s.cfg.K; ++k) {
      const Eigen::VectorXd want = 2 * z1[p].states[k].coeffs() - 3 * z2[p].states[k].coeffs();
      CHECK((z12[p].states[k].coeffs() - want).cwiseAbs().maxCoeff() < 1e-11);
      CHECK((zs[p].states[k].coeffs() - 7 * z1[p].states[k].coeffs()).cwiseAbs().maxCoeff() < 1e-11);
    }
}

TEST_CASE("tangent response stays bounded relative to the forcing") {
  Setup s(53);
  std::mt19937_64 rng(54);
  const auto base = integrate_all(s.Y0, s.U, s.ens, s.noise, s.cfg);
  for (int t = 0; t < 5; ++t) {
    const auto P = s.random_control(rng);
    const auto z = integrate_tangents(base, P, s.noise, s.cfg);
    double sup = 0;
    for (const auto& st : z[0].states) sup = std::max(sup, norm(st, NormKind::W));
    const double ratio = sup / control_norm(P, s.cfg.dt);
    CHECK(ratio > 0.0);
    CHECK(ratio < 10.0);
  }
}

TEST_CASE("gateaux remainder vanishes on the linear single-mode system") {
  const Band band{1, 0.1};
  const auto cfg = SolverConfig::make(band, 0.05, 1.0, 32);
  DiffusionSpec g;
  g.family = DiffusionFamily::linear;
  g.gain = 0.7;
  g.anchors = {SpectralField::mode(band, {1, 1})};
  const auto ens = Ensemble::monte_carlo(3, 8, cfg.K, cfg.dt, 1);
  const auto U = ControlProcess::open_loop(band, cfg.K, SpectralField::mode(band, {1, 1}, 0.3));
  const auto Psi = ControlProcess::open_loop(band, cfg.K, SpectralField::mode(band, {1, 1}, -0.2));
  const auto r = gateaux_check(U, Psi, SpectralField::mode(band, {1, 1}, 0.5), ens, {1e-1, 1e-2, 1e-3}, g, cfg);
  for (double m : r.max_remainder) CHECK(m <= 1e-11);
}

TEST_CASE("gateaux remainder is first order and needs common noise") {
  const Band band{4, 0.1};
  const auto cfg = SolverConfig::make(band, 0.05, 0.5, 32);
  std::mt19937_64 rng(55);
  DiffusionSpec g;
  g.family = DiffusionFamily::linear;
  g.gain = 0.5;
  g.anchors = {testutil::random_field(band, rng)};
  const auto ens = Ensemble::monte_carlo(100, 8, cfg.K, cfg.dt, 1);
  const auto Y0 = testutil::random_field(band, rng, 0.1);
  const auto U = ControlProcess::open_loop(band, cfg.K, testutil::random_field(band, rng, 0.2));
  const auto Psi = ControlProcess::open_loop(band, cfg.K, testutil::random_field(band, rng, 0.5));
  const std::vector<double> rhos{1e-1, 1e-2, 1e-3};
  const auto r = gateaux_check(U, Psi, Y0, ens, rhos, g, cfg);
  CHECK(r.observed_order >= 0.9);
  CHECK(r.mean_remainder[0] > r.mean_remainder[1]);
  CHECK(r.mean_remainder[1] > r.mean_remainder[2]);

  const auto other = Ensemble::monte_carlo(999, 8, cfg.K, cfg.dt, 1);
  const auto bad = gateaux_check(U, Psi, Y0, ens, rhos, g, cfg, {}, &other);
  CHECK(bad.observed_order < 0.9);

  const auto zero = gateaux_check(U, U.zeros_like(), Y0, ens, rhos, g, cfg);
  for (double m : zero.max_remainder) CHECK(m == 0.0);
}

TEST_CASE("helpers and preconditions") {
  CHECK(log_log_slope({1, 10, 100}, {3, 0.3, 0.03}) == doctest::Approx(-1.0));
  CHECK(log_log_slope({1e-1, 1e-2}, {1e-2, 1e-4}) == doctest::Approx(2.0));
  Setup s(56);
  const auto base = integrate_all(s.Y0, s.U, s.ens, s.noise, s.cfg);
  for (double x : xi_weights(base[0], 0.0, s.cfg.dt)) CHECK(x == 1.0);
  const auto xi = xi_weights(base[0], 1.0, s.cfg.dt);
  CHECK(xi.size() == static_cast<std::size_t>(s.cfg.K + 1));
  CHECK(xi[0] == 1.0);
  CHECK(xi[1] == doctest::Approx(std::exp(-s.cfg.dt * norm(s.Y0, NormKind::Wtilde))));

  auto mid = s.cfg;
  mid.scheme = Scheme::midpoint;
  CHECK_THROWS_AS(require_differentiable(mid), std::invalid_argument);
  const PairingWorkspace ws(s.band, s.cfg.Q);
  const std::vector<SpectralField> short_forcing(3, SpectralField(s.band));
  CHECK_THROWS_AS(integrate_tangent(base[0], short_forcing, s.noise, s.cfg, ws), std::invalid_argument);
}
