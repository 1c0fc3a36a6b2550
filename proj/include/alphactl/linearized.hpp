#pragma once

// Tangent equation along a stored base trajectory. The scheme is the exact
// derivative of the semi-implicit forward step with respect to (Y, U):
//
//   (S + dt A) z_{k+1} = S z_k - dt J(y_k) z_k + dt psi_k + sum_l dG_l(y_k) z_k dW^l_k
//
// with J(y) z = linearized_terms(y, z) and z_0 = 0. Because the same matrices
// appear transposed in the backward sweep, the discrete duality is exact.

#include "alphactl/forward.hpp"

#include <vector>

namespace alphactl {

struct TangentTrajectory {
  std::vector<double> times;
  std::vector<SpectralField> states;
  const Trajectory* base = nullptr;
  std::vector<SpectralField> forcing;

  int steps() const { return static_cast<int>(states.size()) - 1; }
};

/// Throws std::invalid_argument unless the solver uses the semi-implicit
/// scheme (the only one whose derivative is implemented).
void require_differentiable(const SolverConfig& config);

SpectralField tangent_step(const SpectralField& Z, const SpectralField& Y, const SpectralField& Psi,
                           const Eigen::VectorXd& dW, double t, const DiffusionSpec& noise,
                           const SolverConfig& config, const PairingWorkspace& ws);

TangentTrajectory integrate_tangent(const Trajectory& base, std::span<const SpectralField> forcing,
                                    const DiffusionSpec& noise, const SolverConfig& config,
                                    const PairingWorkspace& ws);

/// One tangent per base trajectory; forcing Psi is evaluated along each path.
std::vector<TangentTrajectory> integrate_tangents(const std::vector<Trajectory>& base, const ControlProcess& Psi,
                                                  const DiffusionSpec& noise, const SolverConfig& config,
                                                  const ExecPolicy& policy = {});

struct GateauxReport {
  std::vector<double> rhos;
  /// remainder[r][p] = sup_k ||(Y_rho - Y)_k / rho - Z_k||_V on path p.
  std::vector<std::vector<double>> remainder;
  std::vector<double> mean_remainder;  // weighted over paths
  std::vector<double> max_remainder;
  /// Least-squares slope of log(mean remainder) against log(rho).
  double observed_order = 0.0;
};

/// Compares finite control perturbations with the tangent. The perturbed
/// runs use `perturbed_noise` when it is given (the check is expected to
/// fail then) and the base ensemble otherwise.
GateauxReport gateaux_check(const ControlProcess& U, const ControlProcess& Psi, const SpectralField& Y0,
                            const Ensemble& ensemble, const std::vector<double>& rhos, const DiffusionSpec& noise,
                            const SolverConfig& config, const ExecPolicy& policy = {},
                            const Ensemble* perturbed_noise = nullptr);

/// xi_k = exp(-c sum_{j<k} dt ||Y_j||_kind), k = 0..K.
std::vector<double> xi_weights(const Trajectory& base, double c, double dt, NormKind kind = NormKind::Wtilde);

/// Least-squares slope of log(y) against log(x) over positive pairs.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace alphactl
