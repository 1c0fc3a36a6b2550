#pragma once

#include "alphactl/noise.hpp"
#include "alphactl/spectral.hpp"

#include <vector>

namespace alphactl {

/// Piecewise-constant control on the time grid. Open-loop controls carry one
/// field per step; tree-adapted controls carry one field per scenario-tree
/// node, so U_k depends only on the first k increments.
class ControlProcess {
 public:
  enum class Kind { open_loop, tree_adapted };

  ControlProcess() = default;
  static ControlProcess open_loop(const Band& band, int steps, const SpectralField& value);
  static ControlProcess open_loop(const Band& band, int steps);
  static ControlProcess tree_adapted(const Band& band, const ScenarioTree& tree);
  static ControlProcess tree_adapted(const Band& band, const ScenarioTree& tree, const ControlProcess& open);

  Kind kind() const { return kind_; }
  const Band& band() const { return band_; }
  int steps() const { return steps_; }
  std::size_t nodes(int k) const { return values_[k].size(); }

  /// Node index used by scenario `path` at step k.
  std::size_t node_of(int k, std::size_t path) const;
  const SpectralField& at(int k, std::size_t path) const { return values_[k][node_of(k, path)]; }
  const SpectralField& node(int k, std::size_t n) const { return values_[k][n]; }
  SpectralField& node(int k, std::size_t n) { return values_[k][n]; }
  /// Probability mass of node n at step k.
  double node_probability(int k) const { return 1.0 / static_cast<double>(nodes(k)); }

  /// Controls seen along one scenario.
  std::vector<SpectralField> for_path(std::size_t path) const;

  /// Same shape, all zero.
  ControlProcess zeros_like() const;
  bool same_shape(const ControlProcess& o) const;

  ControlProcess& operator+=(const ControlProcess& o);
  ControlProcess& operator-=(const ControlProcess& o);
  ControlProcess& operator*=(double s);
  /// this += s * o
  ControlProcess& axpy(double s, const ControlProcess& o);

  /// Number of scenarios that must be visited to check pathwise bounds.
  std::size_t scenario_count() const;

 private:
  Kind kind_ = Kind::open_loop;
  Band band_;
  int steps_ = 0;
  int tree_dims_ = 0;
  std::vector<std::vector<SpectralField>> values_;
};

ControlProcess operator+(ControlProcess a, const ControlProcess& b);
ControlProcess operator-(ControlProcess a, const ControlProcess& b);
ControlProcess operator*(double s, ControlProcess a);

/// E sum_k dt (a_k, b_k)_2 over the node probabilities.
double control_inner(const ControlProcess& a, const ControlProcess& b, double dt);
double control_norm(const ControlProcess& a, double dt);

/// sum_k dt ||U_k||_V^2 along one scenario.
double scenario_energy(const ControlProcess& u, std::size_t scenario, double dt);
/// max over scenarios of scenario_energy.
double max_scenario_energy(const ControlProcess& u, double dt);

}  // namespace alphactl
