#include "alphactl/conditions.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace alphactl {

ConditionInputs ConditionInputs::from_band(const Band& band, double nu, double T, double epsilon, double L,
                                           double C_max) {
  const BandConstants bc = band_constants(band);
  ConditionInputs in;
  in.nu = nu;
  in.alpha = band.alpha;
  in.T = T;
  in.epsilon = epsilon;
  in.L = L;
  in.C_max = C_max;
  in.C_star = bc.C_star;
  in.K_star = bc.K_star;
  in.C_starstar = bc.C_starstar;
  return in;
}

namespace {
double half_inverse(double x) { return x > 0.0 ? 1.0 / (2.0 * x) : std::numeric_limits<double>::infinity(); }
}  // namespace

ConditionReport condition_diagnostics(const ConditionInputs& in) {
  if (!(in.alpha > 0.0)) throw std::invalid_argument("condition diagnostics need alpha > 0");
  if (!(in.T >= 0.0) || !(in.L >= 0.0) || !(in.nu >= 0.0)) throw std::invalid_argument("T, L and nu must be >= 0");
  ConditionReport r;
  r.inputs = in;
  const double growth = std::exp(in.epsilon * in.T);
  r.tau = in.T * growth;
  r.gamma1 = in.C_star * in.nu * r.tau / in.alpha;
  r.gamma1bar = in.K_star * r.tau / (4.0 * in.alpha);
  r.gamma2 = in.C_starstar * in.nu / in.alpha;
  r.theta1 = 4.0 * in.L * r.tau * r.tau * (1.0 + r.gamma1 * r.gamma1);
  r.theta2 = 2.0 * in.L * growth * (1.0 + 2.0 * r.gamma1bar * r.gamma1bar);
  r.A = half_inverse(r.theta1);
  r.B = r.gamma2 * r.gamma2 * half_inverse(r.theta2);
  if (r.gamma2 == 0.0) r.B = 0.0;
  r.g1_holds = r.A >= in.C_max;
  r.g2_holds = r.B >= in.C_max;

  std::string tags;
  auto add = [&](const char* t) {
    if (!tags.empty()) tags += ",";
    tags += t;
  };
  if (in.L <= 1e-2) add("weak_noise");
  if (r.tau <= 1.0) add("short_horizon");
  if (r.gamma2 >= 1.0) add("high_viscosity");
  r.regime = tags.empty() ? "none" : tags;
  return r;
}

std::string ConditionReport::to_text() const {
  std::string out;
  char buf[96];
  auto put = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s=%.17g\n", key, v);
    out += buf;
  };
  put("nu", inputs.nu);
  put("alpha", inputs.alpha);
  put("T", inputs.T);
  put("epsilon", inputs.epsilon);
  put("L", inputs.L);
  put("C_max", inputs.C_max);
  put("C_star", inputs.C_star);
  put("K_star", inputs.K_star);
  put("C_starstar", inputs.C_starstar);
  put("tau", tau);
  put("gamma1", gamma1);
  put("gamma1bar", gamma1bar);
  put("gamma2", gamma2);
  put("theta1", theta1);
  put("theta2", theta2);
  put("A", A);
  put("B", B);
  out += std::string("g1_holds=") + (g1_holds ? "true" : "false") + "\n";
  out += std::string("g2_holds=") + (g2_holds ? "true" : "false") + "\n";
  out += "regime=" + regime + "\n";
  return out;
}

}  // namespace alphactl
