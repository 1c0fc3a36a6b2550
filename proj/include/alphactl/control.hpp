#pragma once

// Cost evaluation, adjoint gradient, admissible set and projected descent.
//
// J(U) = E [ sum_k dt L(t_k, U_k, Y_k) + h(Y_K) ] on a fixed path set, so J is
// a deterministic function of U during descent. The admissible set is
// { U : sum_k dt ||U_k||_V^2 <= M on every scenario }.

#include "alphactl/adjoint.hpp"
#include "alphactl/conditions.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace alphactl {

struct ControlProblem {
  SolverConfig config;
  SpectralField Y0;
  DiffusionSpec noise;
  CostSpec cost;
  Ensemble ensemble;
  double M = 1.0;
  AdjointOptions adjoint;
  ExecPolicy policy;

  void validate() const;
};

/// Throws std::invalid_argument naming the bound when U is outside the ball.
void require_admissible(const ControlProcess& U, double M, double dt);

struct CostEstimate {
  double J = 0.0;
  double stderr_ = 0.0;
};

CostEstimate evaluate_cost(const ControlProblem& problem, const ControlProcess& U, bool enforce_admissible = true);
/// Cost of already integrated trajectories.
CostEstimate evaluate_cost(const ControlProblem& problem, const ControlProcess& U,
                           const std::vector<Trajectory>& base);

struct GradientResult {
  ControlProcess gradient;  // L2 representative: dJ(U) Psi = control_inner(gradient, Psi)
  std::vector<Trajectory> base;
  AdjointSolution adjoint;
  CostEstimate cost;
};

/// g_k = E[grad_u L(t_k, U_k, Y_k) + p_k | class of U]: the plain scenario
/// average for open-loop controls, the node average for tree-adapted ones.
GradientResult gradient_adjoint(const ControlProblem& problem, const ControlProcess& U);

/// Projects an ensemble process (one field per path and step) onto the
/// shape of `like`.
ControlProcess average_to_shape(const std::vector<std::vector<SpectralField>>& per_path, const ControlProcess& like,
                                const Ensemble& ensemble);

/// E sum_k dt [(grad_u L_k, Psi_k) + (grad_y L_k, Z_k)] + E (grad h(Y_K), Z_K).
double directional_linearized(const ControlProblem& problem, const ControlProcess& U, const ControlProcess& Psi,
                              const std::vector<Trajectory>& base);
/// [J(U + eps Psi) - J(U - eps Psi)] / (2 eps).
double directional_fd(const ControlProblem& problem, const ControlProcess& U, const ControlProcess& Psi, double eps);

struct GradientTriangle {
  double adjoint = 0.0;
  double linearized = 0.0;
  double finite_difference = 0.0;
  double gap_adjoint_fd = 0.0;  // relative
  double gap_adjoint_linearized = 0.0;
  double gap_linearized_fd = 0.0;
  double max_gap() const;
};

GradientTriangle gradient_triangle(const ControlProblem& problem, const ControlProcess& U, const ControlProcess& Psi,
                                   double eps = 1e-4);

/// Radial retraction onto the ball. Open-loop controls are scaled by
/// sqrt(M / E) when their energy E exceeds M. A tree-adapted control is
/// scaled by the same rule using its largest scenario energy, which keeps
/// node values consistent across the scenarios sharing them.
ControlProcess project_admissible(const ControlProcess& U, double M, double dt);

/// Riesz representative of a gradient in the L2(0,T;V) inner product used
/// by the admissible set: sigma^{-1} applied node-wise.
ControlProcess v_gradient(const ControlProcess& g);

struct OptimizerOptions {
  int iters = 50;
  double step0 = 1.0;
  double armijo_c = 1e-4;
  double shrink = 0.5;
  double grow = 2.0;
  double max_step = 1e6;
  int max_backtracks = 40;
  double tol = 1e-10;
};

struct HistoryEntry {
  int iter = 0;
  double J = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
  bool constraint_active = false;
};

struct OptimizeResult {
  ControlProcess U;
  std::vector<HistoryEntry> history;
  bool converged = false;
  bool armijo_failure = false;
  double residual = 0.0;  // ||U - P(U - grad_V J)||_{L2(V)}
  int iterations = 0;
};

/// Projected gradient descent in the L2(0,T;V) geometry of the admissible
/// set with Armijo backtracking.
OptimizeResult optimize(const ControlProblem& problem, const ControlProcess& U0, const OptimizerOptions& options);

struct OptimalityResidual {
  double value = 0.0;          // min over directions of E sum dt (g, Psi - U)
  std::size_t worst = 0;       // index of the minimising direction
};

OptimalityResidual optimality_residual(const ControlProcess& U, const ControlProcess& g,
                                       const std::vector<ControlProcess>& directions, double dt);

/// `count` random admissible processes shaped like U followed by P(U - grad_V).
std::vector<ControlProcess> default_directions(const ControlProcess& U, const ControlProcess& g, double M, double dt,
                                               std::size_t count, std::uint64_t seed);

/// E exp{C sum_k dt ||Y_k||_Wtilde^2} over the trajectories (weighted).
double exponential_moment(const std::vector<Trajectory>& trajectories, const std::vector<double>& weights, double C,
                          double dt);

}  // namespace alphactl
