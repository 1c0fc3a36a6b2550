#include "alphactl/cost.hpp"

#include <cmath>
#include <stdexcept>

namespace alphactl {

std::string to_string(TerminalKind k) {
  switch (k) {
    case TerminalKind::none: return "none";
    case TerminalKind::l2: return "l2";
    case TerminalKind::v: return "v";
  }
  return "none";
}

TerminalKind terminal_kind_from_string(const std::string& s) {
  if (s == "none") return TerminalKind::none;
  if (s == "l2") return TerminalKind::l2;
  if (s == "v") return TerminalKind::v;
  throw std::invalid_argument("unknown terminal cost '" + s + "' (expected none, l2 or v)");
}

void CostSpec::validate(const Band& band, int K) const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("cost lambda must be non-negative");
  if (!(tracking_weight >= 0.0) || !std::isfinite(tracking_weight))
    throw std::invalid_argument("tracking weight must be non-negative");
  if (targets.empty()) return;
  if (static_cast<int>(targets.size()) != K + 1) throw std::invalid_argument("cost needs K + 1 target fields");
  for (const auto& t : targets)
    if (!(t.band() == band) || !t.all_finite()) throw std::invalid_argument("target field is not on the band");
}

SpectralField CostSpec::target(int k, const Band& band) const {
  if (targets.empty()) return SpectralField(band);
  return targets.at(k);
}

double CostSpec::running(int k, const SpectralField& u, const SpectralField& y) const {
  double v = 0.5 * lambda * norm_squared(u, NormKind::L2);
  if (tracking_weight != 0.0) v += tracking_weight * norm_squared(y - target(k, y.band()), NormKind::L2);
  return v;
}

SpectralField CostSpec::grad_y(int k, const SpectralField& y) const {
  if (tracking_weight == 0.0) return SpectralField(y.band());
  return (2.0 * tracking_weight) * (y - target(k, y.band()));
}

SpectralField CostSpec::grad_u(const SpectralField& u) const { return lambda * u; }

namespace {
int last(const CostSpec& c) { return static_cast<int>(c.targets.size()) - 1; }
}  // namespace

double CostSpec::terminal_value(const SpectralField& y) const {
  if (terminal == TerminalKind::none) return 0.0;
  const SpectralField d = y - target(last(*this), y.band());
  return 0.5 * norm_squared(d, terminal == TerminalKind::l2 ? NormKind::L2 : NormKind::V);
}

SpectralField CostSpec::terminal_condition(const SpectralField& y) const {
  if (terminal == TerminalKind::none) return SpectralField(y.band());
  return y - target(last(*this), y.band());
}

SpectralField CostSpec::terminal_gradient_l2(const SpectralField& y) const {
  switch (terminal) {
    case TerminalKind::none: return SpectralField(y.band());
    case TerminalKind::l2: return y - target(last(*this), y.band());
    case TerminalKind::v: return sigma_apply(y - target(last(*this), y.band()));
  }
  return SpectralField(y.band());
}

double CostSpec::growth_ratio(int k, const SpectralField& u, const SpectralField& y) const {
  const double g = norm(grad_u(u), NormKind::L2) + norm(grad_y(k, y), NormKind::L2);
  return g / (1.0 + norm(u, NormKind::V) + norm(y, NormKind::Wtilde));
}

double path_cost(const CostSpec& cost, const std::vector<SpectralField>& states,
                 const std::vector<SpectralField>& controls, double dt) {
  const int K = static_cast<int>(states.size()) - 1;
  if (static_cast<int>(controls.size()) < K) throw std::invalid_argument("control shorter than the trajectory");
  double s = 0.0;
  for (int k = 0; k < K; ++k) s += dt * cost.running(k, controls[k], states[k]);
  return s + cost.terminal_value(states[K]);
}

}  // namespace alphactl
