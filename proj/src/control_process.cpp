#include "alphactl/control_process.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace alphactl {

ControlProcess ControlProcess::open_loop(const Band& band, int steps, const SpectralField& value) {
  if (steps < 1) throw std::invalid_argument("control needs at least one step");
  if (!(value.band() == band)) throw std::invalid_argument("control value does not match the band");
  ControlProcess u;
  u.kind_ = Kind::open_loop;
  u.band_ = band;
  u.steps_ = steps;
  u.values_.assign(steps, std::vector<SpectralField>{value});
  return u;
}

ControlProcess ControlProcess::open_loop(const Band& band, int steps) {
  return open_loop(band, steps, SpectralField(band));
}

ControlProcess ControlProcess::tree_adapted(const Band& band, const ScenarioTree& tree) {
  return tree_adapted(band, tree, open_loop(band, tree.steps()));
}

ControlProcess ControlProcess::tree_adapted(const Band& band, const ScenarioTree& tree, const ControlProcess& open) {
  if (open.kind() != Kind::open_loop || open.steps() != tree.steps())
    throw std::invalid_argument("tree-adapted control must start from an open-loop control on the same grid");
  ControlProcess u;
  u.kind_ = Kind::tree_adapted;
  u.band_ = band;
  u.steps_ = tree.steps();
  u.tree_dims_ = tree.dims();
  u.values_.resize(u.steps_);
  for (int k = 0; k < u.steps_; ++k) u.values_[k].assign(tree.nodes(k), open.node(k, 0));
  return u;
}

std::size_t ControlProcess::node_of(int k, std::size_t path) const {
  if (kind_ == Kind::open_loop) return 0;
  return path >> (tree_dims_ * (steps_ - k));
}

std::vector<SpectralField> ControlProcess::for_path(std::size_t path) const {
  std::vector<SpectralField> out;
  out.reserve(steps_);
  for (int k = 0; k < steps_; ++k) out.push_back(at(k, path));
  return out;
}

ControlProcess ControlProcess::zeros_like() const {
  ControlProcess z = *this;
  for (auto& level : z.values_)
    for (auto& f : level) f.coeffs().setZero();
  return z;
}

bool ControlProcess::same_shape(const ControlProcess& o) const {
  if (kind_ != o.kind_ || steps_ != o.steps_ || !(band_ == o.band_)) return false;
  for (int k = 0; k < steps_; ++k)
    if (nodes(k) != o.nodes(k)) return false;
  return true;
}

ControlProcess& ControlProcess::axpy(double s, const ControlProcess& o) {
  if (!same_shape(o)) throw std::invalid_argument("control processes have different shapes");
  for (int k = 0; k < steps_; ++k)
    for (std::size_t n = 0; n < nodes(k); ++n) values_[k][n].coeffs() += s * o.values_[k][n].coeffs();
  return *this;
}

ControlProcess& ControlProcess::operator+=(const ControlProcess& o) { return axpy(1.0, o); }
ControlProcess& ControlProcess::operator-=(const ControlProcess& o) { return axpy(-1.0, o); }

ControlProcess& ControlProcess::operator*=(double s) {
  for (auto& level : values_)
    for (auto& f : level) f *= s;
  return *this;
}

std::size_t ControlProcess::scenario_count() const {
  if (kind_ == Kind::open_loop) return 1;
  return std::size_t{1} << (tree_dims_ * steps_);
}

ControlProcess operator+(ControlProcess a, const ControlProcess& b) { return a += b; }
ControlProcess operator-(ControlProcess a, const ControlProcess& b) { return a -= b; }
ControlProcess operator*(double s, ControlProcess a) { return a *= s; }

double control_inner(const ControlProcess& a, const ControlProcess& b, double dt) {
  if (!a.same_shape(b)) throw std::invalid_argument("control processes have different shapes");
  double s = 0.0;
  for (int k = 0; k < a.steps(); ++k) {
    double level = 0.0;
    for (std::size_t n = 0; n < a.nodes(k); ++n) level += a.node(k, n).coeffs().dot(b.node(k, n).coeffs());
    s += dt * a.node_probability(k) * level;
  }
  return s;
}

double control_norm(const ControlProcess& a, double dt) { return std::sqrt(control_inner(a, a, dt)); }

double scenario_energy(const ControlProcess& u, std::size_t scenario, double dt) {
  double s = 0.0;
  for (int k = 0; k < u.steps(); ++k) s += dt * norm_squared(u.at(k, scenario), NormKind::V);
  return s;
}

double max_scenario_energy(const ControlProcess& u, double dt) {
  double worst = 0.0;
  for (std::size_t p = 0; p < u.scenario_count(); ++p) worst = std::max(worst, scenario_energy(u, p, dt));
  return worst;
}

}  // namespace alphactl
