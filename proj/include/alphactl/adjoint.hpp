#pragma once

// Backward sweep for the adjoint pair (p, q).
//
// The sweep is the exact transpose of the tangent scheme. With
// M = S + dt A, r = M^{-1} lam_{k+1} and E_k the conditional expectation
// given the first k increments:
//
//   p_k     = E_k[r]
//   qq_k^l  = E_k[r dW^l_k] / dt
//   lam_k   = dt grad_y L_k + (S - dt J_k^T) p_k + dt sum_l dG_l^T qq_k^l
//
// starting from lam_K = L2 gradient of h. The reported q is
// S^{-1} E_k[lam_{k+1} dW^l_k] / dt and p_K = S^{-1} lam_K, so p(T) is the
// V gradient of h. For any forcing psi the tangent then satisfies
//
//   E (lam_K, z_K) + dt sum_k E (grad_y L_k, z_k) = dt sum_k E (psi_k, p_k)
//
// exactly when E_k is exact.

#include "alphactl/cost.hpp"
#include "alphactl/linearized.hpp"

#include <string>
#include <vector>

namespace alphactl {

enum class Backend { tree_exact, regression };

std::string to_string(Backend b);
Backend backend_from_string(const std::string& s);

enum class FeatureMap { state_linear, state_quadratic };

std::string to_string(FeatureMap f);
FeatureMap feature_map_from_string(const std::string& s);

struct RegressionOptions {
  FeatureMap features = FeatureMap::state_linear;  // constant plus the Y_k coefficients
  double ridge = 1e-10;
};

struct AdjointOptions {
  Backend backend = Backend::tree_exact;
  RegressionOptions regression;
};

/// Estimates E[X | F_k] row-wise. X has one row per path.
Eigen::MatrixXd conditional_expectation(const Eigen::MatrixXd& X, int k, const std::vector<Trajectory>& base,
                                        const Ensemble& ensemble, const AdjointOptions& options,
                                        double* condition = nullptr);

struct AdjointSolution {
  Backend backend = Backend::tree_exact;
  std::vector<double> times;
  std::vector<std::vector<SpectralField>> p;               // [k][path], k = 0..K
  std::vector<std::vector<std::vector<SpectralField>>> q;  // [k][path][l], k = 0..K-1
  /// Weighted estimate E ||sigma(p_k)||_2^2 + 4 nu ||D p_k||_2^2, k = 0..K.
  std::vector<double> estimate_series;
  /// Condition number of the scaled regression design per step (1 on trees).
  std::vector<double> regression_condition;
  /// L2 gradient of h at Y_K per path.
  std::vector<SpectralField> terminal_l2;

  int steps() const { return static_cast<int>(p.size()) - 1; }
};

SpectralField terminal_condition(const SpectralField& Y_T, const CostSpec& cost);

AdjointSolution solve_backward(const std::vector<Trajectory>& base, const ControlProcess& U, const Ensemble& ensemble,
                               const CostSpec& cost, const DiffusionSpec& noise, const SolverConfig& config,
                               const AdjointOptions& options, const ExecPolicy& policy = {});

struct DualityReport {
  double lhs = 0.0;  // E (lam_K, z_K) + dt sum E (grad_y L_k, z_k)
  double rhs = 0.0;  // dt sum E (psi_k, p_k)
  double gap = 0.0;
  double relative_gap = 0.0;
  double se_lhs = 0.0;
  double se_rhs = 0.0;
  double se_combined = 0.0;  // sqrt(se_lhs^2 + se_rhs^2)
};

DualityReport duality_gap(const std::vector<Trajectory>& base, const std::vector<TangentTrajectory>& tangents,
                          const AdjointSolution& adj, const CostSpec& cost,
                          const Ensemble& ensemble, const SolverConfig& config);

}  // namespace alphactl
