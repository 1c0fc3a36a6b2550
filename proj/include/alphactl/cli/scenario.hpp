#pragma once

// JSON scenario files. Every section and key is optional except where noted;
// unknown keys are rejected so that typos do not silently fall back to
// defaults.

#include "alphactl/control.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace alphactl::cli {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ModeEntry {
  int j = 1;
  int k = 1;
  double c = 0.0;
};

struct ScenarioConfig {
  // band
  int N = 2;
  int Q = 0;  // 0 = 3N + 1
  // physics
  double nu = 0.05;
  double alpha = 0.1;
  // time
  double T = 1.0;
  int K = 64;
  std::string scheme = "semi_implicit";

  std::vector<ModeEntry> initial;

  struct Noise {
    std::string family = "additive";
    int m = 1;
    double gain = 0.0;
    double saturation_level = 1.0;
    std::vector<std::vector<ModeEntry>> anchors;  // empty = all coefficients 1
    std::string sampling = "monte_carlo";         // or "tree"
    std::size_t paths = 64;
    std::uint64_t seed = 1;
  } noise;

  struct Cost {
    double tracking_weight = 1.0;
    double lambda = 0.0;
    std::string terminal = "none";
    std::string target = "zero";  // zero | modes | planted
    std::vector<ModeEntry> target_modes;
    std::vector<ModeEntry> planted_control;
  } cost;

  struct Control {
    std::string parametrization = "open_loop";
    double M = 1.0;
    std::vector<ModeEntry> initial;
  } control;

  std::vector<ModeEntry> tangent_forcing;  // empty = all coefficients 0.1

  OptimizerOptions optimizer;

  struct Adjoint {
    std::string backend = "auto";  // auto picks tree_exact on trees
    double ridge = 1e-10;
    std::string features = "state_linear";
  } adjoint;

  struct Diagnostics {
    double C_max = 1.0;
    double epsilon = 1.0;
    double L = 0.01;
    double xi_C0 = 1.0;
    int moment = 4;
  } diagnostics;

  struct Verify {
    int triples = 50;
    std::uint64_t seed = 12345;
    std::vector<double> rhos{1e-1, 1e-2, 1e-3};
    double gateaux_order = 0.9;
    double fd_eps = 1e-4;
    double triangle_tol = 0.0;  // 0 = 1e-6 on trees, 0.05 otherwise
    double duality_tol = 1e-10;
    double duality_se = 3.0;
  } verify;

  std::size_t max_output_paths = 4;
  int workers = 0;
};

ScenarioConfig parse_scenario_text(const std::string& text);
ScenarioConfig load_scenario(const std::string& path);
/// Canonical JSON echo of the resolved configuration.
std::string resolved_json(const ScenarioConfig& cfg);

struct Scenario {
  ScenarioConfig config;
  ControlProblem problem;
  ControlProcess U0;
  ControlProcess Psi;
};

/// Builds and validates every object. Throws ConfigError naming the field.
Scenario build_scenario(const ScenarioConfig& cfg, const ExecPolicy& policy);

}  // namespace alphactl::cli
