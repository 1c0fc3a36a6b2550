#include "alphactl/cli/verify.hpp"

#include "alphactl/csv.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace alphactl::cli {

bool VerifyReport::all_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const CheckRow& r) { return r.pass; });
}

std::string VerifyReport::csv() const {
  std::string out = "suite,check,value,threshold,pass\n";
  for (const auto& r : rows)
    out += r.suite + "," + r.check + "," + format_double(r.value) + "," + format_double(r.threshold) + "," +
           (r.pass ? "1" : "0") + "\n";
  return out;
}

std::vector<std::string> VerifyReport::failures() const {
  std::vector<std::string> f;
  for (const auto& r : rows)
    if (!r.pass) f.push_back(r.suite + "/" + r.check);
  return f;
}

namespace {

void below(VerifyReport& r, const char* suite, const char* check, double value, double threshold) {
  r.rows.push_back({suite, check, value, threshold, std::isfinite(value) && value < threshold});
}

SpectralField random_field(const Band& band, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  SpectralField f(band);
  for (int i = 0; i < f.size(); ++i) f[i] = normal(rng);
  return f;
}

}  // namespace

void verify_identities(const Scenario& s, VerifyReport& r) {
  const Band band = s.problem.config.band;
  const int Q = s.problem.config.Q;
  const PairingWorkspace ws(band, Q);
  std::mt19937_64 rng(s.config.verify.seed);

  double anti = 0, energy = 0, bb2 = 0, curl = 0, sig = 0;
  for (int t = 0; t < s.config.verify.triples; ++t) {
    const SpectralField u = random_field(band, rng), v = random_field(band, rng), w = random_field(band, rng);
    anti = std::max(anti, std::abs(ws.trilinear_b(u, v, w) + ws.trilinear_b(u, w, v)));
    const double scale = norm(u, NormKind::V) * norm(u, NormKind::Wtilde);
    energy = std::max(energy, std::abs(ws.state_nonlinearity(u).dot(u.coeffs())) / scale);
    bb2 = std::max(bb2, (ws.adjoint_transport(u, v) - ws.adjoint_transport_expanded(u, v)).lpNorm<Eigen::Infinity>());
    curl = std::max(curl, ws.curl_cross_identity_check(u, v));
    sig = std::max(sig, (sigma_inverse(sigma_apply(w)) - w).coeffs().lpNorm<Eigen::Infinity>());
  }
  below(r, "identities", "b_antisymmetry", anti, 1e-10);
  below(r, "identities", "energy_neutrality", energy, 1e-10);
  below(r, "identities", "bb2_vs_adj_for2", bb2, 1e-8);
  below(r, "identities", "curl_product", curl, 1e-9);
  below(r, "identities", "sigma_roundtrip", sig, 1e-13);

  // Leray idempotence on a field with a gradient part and an off-band part
  const SpectralGrid& grid = ws.grid();
  const SpectralField v0 = random_field(band, rng);
  PhysicalField f = to_physical(v0, grid);
  const double pi = std::acos(-1.0);
  for (int a = 0; a < Q; ++a)
    for (int b = 0; b < Q; ++b) {
      const double x = grid.node(a), y = grid.node(b);
      f.u(a, b) += -pi * std::sin(pi * x) * std::cos(2 * pi * y) + x * y * y;
      f.v(a, b) += -2 * pi * std::cos(pi * x) * std::sin(2 * pi * y) + std::sin(3 * x);
    }
  const SpectralField p1 = leray_project(f, grid);
  const SpectralField p2 = leray_project(to_physical(p1, grid), grid);
  below(r, "identities", "leray_idempotence", (p2 - p1).coeffs().lpNorm<Eigen::Infinity>(), 1e-10);
  const SpectralField back = to_spectral(to_physical(v0, grid), grid);
  below(r, "identities", "transform_roundtrip", (back - v0).coeffs().lpNorm<Eigen::Infinity>(), 1e-12);
  double trace = 0.0;
  for (int i = 0; i < band.size(); ++i)
    trace = std::max(trace, boundary_diagnostics(SpectralField::mode(band, band.wave(i))).max());
  below(r, "identities", "boundary_traces", trace, 1e-12);
}

void verify_gradient(const Scenario& s, VerifyReport& r) {
  const auto& pb = s.problem;
  const auto g = gateaux_check(s.U0, s.Psi, pb.Y0, pb.ensemble, s.config.verify.rhos, pb.noise, pb.config, pb.policy);
  const double worst = *std::max_element(g.mean_remainder.begin(), g.mean_remainder.end());
  // a remainder at roundoff level has no measurable order
  const bool linear = worst <= 1e-11;
  r.rows.push_back({"gradient", "gateaux_order", g.observed_order, s.config.verify.gateaux_order,
                    linear || g.observed_order >= s.config.verify.gateaux_order});
  r.rows.push_back({"gradient", "gateaux_remainder_max", worst, 0.0, true});

  const double tol = s.config.verify.triangle_tol > 0.0 ? s.config.verify.triangle_tol
                     : pb.ensemble.is_tree()            ? 1e-6
                                                        : 0.05;
  const auto t = gradient_triangle(pb, s.U0, s.Psi, s.config.verify.fd_eps);
  below(r, "gradient", "triangle_adjoint_fd", t.gap_adjoint_fd, tol);
  below(r, "gradient", "triangle_adjoint_linearized", t.gap_adjoint_linearized, tol);
  below(r, "gradient", "triangle_linearized_fd", t.gap_linearized_fd, tol);
}

void verify_duality(const Scenario& s, VerifyReport& r) {
  const auto& pb = s.problem;
  const auto base = integrate_all(pb.Y0, s.U0, pb.ensemble, pb.noise, pb.config, pb.policy);
  const auto z = integrate_tangents(base, s.Psi, pb.noise, pb.config, pb.policy);
  const auto adj = solve_backward(base, s.U0, pb.ensemble, pb.cost, pb.noise, pb.config, pb.adjoint, pb.policy);
  const auto d = duality_gap(base, z, adj, pb.cost, pb.ensemble, pb.config);
  if (pb.adjoint.backend == Backend::tree_exact) {
    // with the tree the identity is exact, so the gap is compared relatively
    r.rows.push_back({"duality", "duality_gap_relative", d.relative_gap, s.config.verify.duality_tol,
                      d.relative_gap < s.config.verify.duality_tol || d.gap < 1e-300});
  } else {
    const double thr = s.config.verify.duality_se * d.se_combined;
    r.rows.push_back({"duality", "duality_gap_se", d.gap, thr, d.gap < thr});
  }
  r.rows.push_back({"duality", "lhs", d.lhs, 0.0, true});
  r.rows.push_back({"duality", "rhs", d.rhs, 0.0, true});
}

void verify_conditions(const Scenario& s, VerifyReport& r) {
  const auto& c = s.config;
  const auto in =
      ConditionInputs::from_band(s.problem.config.band, c.nu, c.T, c.diagnostics.epsilon, c.diagnostics.L,
                                 c.diagnostics.C_max);
  const auto rep = condition_diagnostics(in);
  r.conditions_text = rep.to_text();
  // diagnostic only: the verdicts are reported, never failed
  r.rows.push_back({"conditions", "A", rep.A, c.diagnostics.C_max, true});
  r.rows.push_back({"conditions", "B", rep.B, c.diagnostics.C_max, true});
}

VerifyReport run_verify(const Scenario& scenario, const std::string& suite) {
  VerifyReport r;
  const bool all = suite == "all";
  if (!all && suite != "identities" && suite != "gradient" && suite != "duality" && suite != "conditions")
    throw ConfigError("--suite", "expected identities, gradient, duality, conditions or all");
  if (all || suite == "identities") verify_identities(scenario, r);
  if (all || suite == "gradient") verify_gradient(scenario, r);
  if (all || suite == "duality") verify_duality(scenario, r);
  if (all || suite == "conditions") verify_conditions(scenario, r);
  return r;
}

}  // namespace alphactl::cli
