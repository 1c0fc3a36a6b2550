#include "alphactl/linearized.hpp"

#include <algorithm>
#include <cmath>

namespace alphactl {

void require_differentiable(const SolverConfig& config) {
  if (config.scheme != Scheme::semi_implicit)
    throw std::invalid_argument("tangent and adjoint solvers require the semi-implicit scheme");
}

SpectralField tangent_step(const SpectralField& Z, const SpectralField& Y, const SpectralField& Psi,
                           const Eigen::VectorXd& dW, double t, const DiffusionSpec& noise,
                           const SolverConfig& config, const PairingWorkspace& ws) {
  if (!(Z.band() == config.band) || !(Y.band() == config.band) || !(Psi.band() == config.band))
    throw std::invalid_argument("tangent inputs must live on the solver band");
  const double dt = config.dt;
  const Eigen::VectorXd D = sigma_weights(config.band);
  const Eigen::VectorXd A = config.nu * laplacian_eigenvalues(config.band);
  Eigen::VectorXd rhs = D.cwiseProduct(Z.coeffs()) - dt * ws.linearized_terms(Y, Z) + dt * Psi.coeffs();
  if (dW.size() > 0 && !noise.is_zero()) {
    if (dW.size() != noise.dims()) throw std::invalid_argument("increment dimension does not match the diffusion");
    const auto dg = eval_dG(noise, t, Y, Z);
    for (int l = 0; l < noise.dims(); ++l) rhs += dW[l] * dg.value[l].coeffs();
  }
  return SpectralField(config.band, rhs.cwiseQuotient(D + dt * A));
}

TangentTrajectory integrate_tangent(const Trajectory& base, std::span<const SpectralField> forcing,
                                    const DiffusionSpec& noise, const SolverConfig& config,
                                    const PairingWorkspace& ws) {
  require_differentiable(config);
  if (base.steps() != config.K || base.path.steps() != config.K)
    throw std::invalid_argument("base trajectory does not match the tangent time grid");
  if (static_cast<int>(forcing.size()) < config.K) throw std::invalid_argument("forcing shorter than the time grid");

  TangentTrajectory tr;
  tr.base = &base;
  tr.times = base.times;
  tr.forcing.assign(forcing.begin(), forcing.begin() + config.K);
  tr.states.reserve(config.K + 1);
  tr.states.emplace_back(config.band);
  for (int k = 0; k < config.K; ++k) {
    const Eigen::VectorXd dW = base.path.increments.row(k).transpose();
    SpectralField next = tangent_step(tr.states.back(), base.states[k], forcing[k], dW, config.time(k), noise,
                                      config, ws);
    if (!next.all_finite()) throw NumericalAbort(k, "non-finite tangent produced at step " + std::to_string(k));
    tr.states.push_back(std::move(next));
  }
  return tr;
}

std::vector<TangentTrajectory> integrate_tangents(const std::vector<Trajectory>& base, const ControlProcess& Psi,
                                                  const DiffusionSpec& noise, const SolverConfig& config,
                                                  const ExecPolicy& policy) {
  if (Psi.steps() != config.K) throw std::invalid_argument("forcing does not match the time grid");
  const int workers = resolve_workers(policy);
  std::vector<PairingWorkspace> ws;
  for (int w = 0; w < workers; ++w) ws.emplace_back(config.band, config.Q);
  std::vector<TangentTrajectory> out(base.size());
  for_each_index(policy, base.size(), [&](std::size_t p, int worker) {
    out[p] = integrate_tangent(base[p], Psi.for_path(p), noise, config, ws[worker]);
  });
  return out;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return 0.0;
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

GateauxReport gateaux_check(const ControlProcess& U, const ControlProcess& Psi, const SpectralField& Y0,
                            const Ensemble& ensemble, const std::vector<double>& rhos, const DiffusionSpec& noise,
                            const SolverConfig& config, const ExecPolicy& policy,
                            const Ensemble* perturbed_noise) {
  require_differentiable(config);
  for (std::size_t r = 1; r < rhos.size(); ++r)
    if (!(rhos[r] < rhos[r - 1])) throw std::invalid_argument("rho list must be decreasing");
  for (double rho : rhos)
    if (!(rho > 0.0)) throw std::invalid_argument("rho values must be positive");

  const auto base = integrate_all(Y0, U, ensemble, noise, config, policy);
  const auto tangents = integrate_tangents(base, Psi, noise, config, policy);
  const Ensemble& noisy = perturbed_noise ? *perturbed_noise : ensemble;

  GateauxReport rep;
  rep.rhos = rhos;
  for (double rho : rhos) {
    ControlProcess Ur = U;
    Ur.axpy(rho, Psi);
    const auto pert = integrate_all(Y0, Ur, noisy, noise, config, policy);
    std::vector<double> rem(base.size());
    for (std::size_t p = 0; p < base.size(); ++p) {
      double sup = 0.0;
      for (int k = 0; k <= config.K; ++k) {
        SpectralField d = pert[p].states[k] - base[p].states[k];
        d *= 1.0 / rho;
        d -= tangents[p].states[k];
        sup = std::max(sup, norm(d, NormKind::V));
      }
      rem[p] = sup;
    }
    rep.mean_remainder.push_back(weighted_estimate(rem, ensemble.weights, true).mean);
    rep.max_remainder.push_back(*std::max_element(rem.begin(), rem.end()));
    rep.remainder.push_back(std::move(rem));
  }
  rep.observed_order = log_log_slope(rep.rhos, rep.mean_remainder);
  return rep;
}

std::vector<double> xi_weights(const Trajectory& base, double c, double dt, NormKind kind) {
  std::vector<double> xi;
  xi.reserve(base.states.size());
  double integral = 0.0;
  for (std::size_t k = 0; k < base.states.size(); ++k) {
    xi.push_back(std::exp(-c * integral));
    integral += dt * norm(base.states[k], kind);
  }
  return xi;
}

}  // namespace alphactl
