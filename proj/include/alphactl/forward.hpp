#pragma once

// Galerkin time integration of the stochastic second-grade fluid
//
//   d sigma(Y) = (nu Delta Y - curl sigma(Y) x Y + U) dt + G(t, Y) dW.
//
// In coefficients (orthonormal basis, S = diag(1 + alpha lambda),
// A = diag(nu lambda)) the semi-implicit Euler-Maruyama step is
//
//   (S + dt A) y_{k+1} = S y_k - dt N(y_k) + dt u_k + sum_l g^l(y_k) dW^l_k
//
// with N the state nonlinearity. The midpoint scheme treats the whole drift
// at (y_k + y_{k+1}) / 2 by fixed-point sub-iteration and conserves the V
// energy exactly when nu = 0 and G = 0.

#include "alphactl/control_process.hpp"
#include "alphactl/noise.hpp"
#include "alphactl/nonlinear.hpp"
#include "alphactl/parallel.hpp"
#include "alphactl/spectral.hpp"

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace alphactl {

enum class Scheme { semi_implicit, midpoint };

struct SolverConfig {
  Band band;
  int Q = 0;
  double nu = 0.01;
  double dt = 1.0 / 64;
  int K = 64;
  Scheme scheme = Scheme::semi_implicit;
  int midpoint_max_iters = 200;
  double midpoint_tol = 1e-15;

  double T() const { return dt * K; }
  double time(int k) const { return dt * k; }
  /// dt nu lambda_max / (1 + alpha lambda_max). The implicit viscous solve is
  /// stable for any value; the transport term is explicit and the scheme is
  /// documented as accurate for budgets below 1.
  double stability_budget() const;
  void validate() const;
  /// Default Q = 3N + 1.
  static SolverConfig make(const Band& band, double nu, double T, int K);
};

class NumericalAbort : public std::runtime_error {
 public:
  NumericalAbort(int step, const std::string& what) : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> states;
  WienerPath path;
  std::string control_ref;

  int steps() const { return static_cast<int>(states.size()) - 1; }
};

/// One step from t_k. `dW` holds the m increments of step k.
SpectralField step(const SpectralField& Y, const SpectralField& U, const Eigen::VectorXd& dW, double t,
                   const DiffusionSpec& noise, const SolverConfig& config, const PairingWorkspace& ws);

/// Throws NumericalAbort naming the first step that produced a non-finite
/// coefficient.
Trajectory integrate(const SpectralField& Y0, std::span<const SpectralField> control, const WienerPath& path,
                     const DiffusionSpec& noise, const SolverConfig& config, const PairingWorkspace& ws,
                     const std::string& control_ref = "U");

struct AbortRecord {
  std::size_t path;
  int step;
  std::string message;
};

struct Estimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

struct EnsembleStats {
  Estimate sup_V2;          // E sup_t ||Y||_V^2
  Estimate sup_curl2;       // E sup_t ||curl sigma(Y)||_2^2
  Estimate sup_Vp;          // E sup_t ||Y||_V^p
  Estimate dissipation;     // 4 nu E sum dt ||DY||_2^2
  int moment = 4;
  std::size_t completed = 0;
};

struct EnsembleResult {
  std::vector<Trajectory> trajectories;  // aborted paths keep an empty state list
  std::vector<AbortRecord> aborts;
  EnsembleStats stats;

  bool complete() const { return aborts.empty(); }
};

/// Weighted mean and standard error of per-path values, reduced in path
/// order. Tree ensembles hold exact expectations, so their error is 0.
Estimate weighted_estimate(std::span<const double> values, std::span<const double> weights, bool exact);

/// Integrates every path of the ensemble. Paths that abort are reported in
/// the census and excluded from the statistics.
EnsembleResult run_ensemble(const SpectralField& Y0, const ControlProcess& control, const Ensemble& ensemble,
                            const DiffusionSpec& noise, const SolverConfig& config, const ExecPolicy& policy = {},
                            int moment = 4);

/// Throws the first abort of an incomplete ensemble.
std::vector<Trajectory> integrate_all(const SpectralField& Y0, const ControlProcess& control,
                                      const Ensemble& ensemble, const DiffusionSpec& noise,
                                      const SolverConfig& config, const ExecPolicy& policy = {});

struct StabilityReport {
  double state_difference = 0.0;    // E sup_k xi0_k ||Y1_k - Y2_k||_W^2
  double control_difference = 0.0;  // E sum_k dt xi0_k ||U1_k - U2_k||_2^2
  double ratio = 0.0;
};

/// Common-noise comparison of two controls with the weight
/// xi0_k = exp(-C0 sum_{j<k} dt (||Y1_j||_H3 + ||Y2_j||_H3 + 1)).
StabilityReport stability_experiment(const ControlProcess& U1, const ControlProcess& U2, const SpectralField& Y0,
                                     const Ensemble& ensemble, const DiffusionSpec& noise,
                                     const SolverConfig& config, double C0, const ExecPolicy& policy = {});

}  // namespace alphactl
