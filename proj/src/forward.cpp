#include "alphactl/forward.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace alphactl {

double SolverConfig::stability_budget() const {
  const double lmax = band.lambda(band.size() - 1);
  return dt * nu * lmax / (1.0 + band.alpha * lmax);
}

void SolverConfig::validate() const {
  band.validate();
  if (Q < 3 * band.N + 1) throw std::invalid_argument("Q must be at least 3N + 1");
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw std::invalid_argument("nu must be finite and non-negative");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (K < 1) throw std::invalid_argument("K must be at least 1");
  if (scheme == Scheme::midpoint && midpoint_max_iters < 1)
    throw std::invalid_argument("midpoint_max_iters must be at least 1");
}

SolverConfig SolverConfig::make(const Band& band, double nu, double T, int K) {
  if (K < 1) throw std::invalid_argument("K must be at least 1");
  SolverConfig c;
  c.band = band;
  c.Q = 3 * band.N + 1;
  c.nu = nu;
  c.K = K;
  c.dt = T / K;
  return c;
}

namespace {

Eigen::VectorXd noise_forcing(const DiffusionSpec& noise, double t, const SpectralField& Y, const Eigen::VectorXd& dW) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(Y.size());
  if (dW.size() == 0 || noise.is_zero()) return f;
  if (dW.size() != noise.dims()) throw std::invalid_argument("increment dimension does not match the diffusion");
  const auto g = eval_G(noise, t, Y);
  for (int l = 0; l < noise.dims(); ++l) f += dW[l] * g[l].coeffs();
  return f;
}

}  // namespace

SpectralField step(const SpectralField& Y, const SpectralField& U, const Eigen::VectorXd& dW, double t,
                   const DiffusionSpec& noise, const SolverConfig& config, const PairingWorkspace& ws) {
  if (!(Y.band() == config.band) || !(U.band() == config.band))
    throw std::invalid_argument("state and control must live on the solver band");
  const double dt = config.dt;
  const Eigen::VectorXd D = sigma_weights(config.band);
  const Eigen::VectorXd A = config.nu * laplacian_eigenvalues(config.band);
  // explicit part shared by both schemes
  const Eigen::VectorXd forcing = dt * U.coeffs() + noise_forcing(noise, t, Y, dW);

  if (config.scheme == Scheme::semi_implicit) {
    Eigen::VectorXd rhs = D.cwiseProduct(Y.coeffs()) - dt * ws.state_nonlinearity(Y) + forcing;
    return SpectralField(config.band, rhs.cwiseQuotient(D + dt * A));
  }

  const Eigen::VectorXd lhs = D + 0.5 * dt * A;
  const Eigen::VectorXd base = (D - 0.5 * dt * A).cwiseProduct(Y.coeffs()) + forcing;
  SpectralField next = Y;
  SpectralField mid(config.band);
  for (int it = 0; it < config.midpoint_max_iters; ++it) {
    mid.coeffs() = 0.5 * (Y.coeffs() + next.coeffs());
    Eigen::VectorXd trial = (base - dt * ws.state_nonlinearity(mid)).cwiseQuotient(lhs);
    const double change = (trial - next.coeffs()).lpNorm<Eigen::Infinity>();
    next.coeffs() = std::move(trial);
    if (!next.all_finite()) break;
    if (change <= config.midpoint_tol * (1.0 + next.coeffs().lpNorm<Eigen::Infinity>())) break;
  }
  return next;
}

Trajectory integrate(const SpectralField& Y0, std::span<const SpectralField> control, const WienerPath& path,
                     const DiffusionSpec& noise, const SolverConfig& config, const PairingWorkspace& ws,
                     const std::string& control_ref) {
  if (static_cast<int>(control.size()) < config.K) throw std::invalid_argument("control shorter than the time grid");
  if (path.steps() != config.K) throw std::invalid_argument("Wiener path does not match the time grid");
  if (!(Y0.band() == config.band)) throw std::invalid_argument("initial state is not on the solver band");
  if (!Y0.all_finite()) throw NumericalAbort(0, "non-finite initial state");

  Trajectory tr;
  tr.path = path;
  tr.control_ref = control_ref;
  tr.times.reserve(config.K + 1);
  tr.states.reserve(config.K + 1);
  tr.times.push_back(0.0);
  tr.states.push_back(Y0);
  for (int k = 0; k < config.K; ++k) {
    const Eigen::VectorXd dW = path.increments.row(k).transpose();
    SpectralField next = step(tr.states.back(), control[k], dW, config.time(k), noise, config, ws);
    if (!next.all_finite()) throw NumericalAbort(k, "non-finite state produced at step " + std::to_string(k));
    tr.states.push_back(std::move(next));
    tr.times.push_back(config.time(k + 1));
  }
  return tr;
}

Estimate weighted_estimate(std::span<const double> values, std::span<const double> weights, bool exact) {
  if (values.size() != weights.size()) throw std::invalid_argument("values and weights differ in length");
  const std::size_t n = values.size();
  if (n == 0) return {};
  std::vector<double> wv(n);
  for (std::size_t i = 0; i < n; ++i) wv[i] = weights[i] * values[i];
  const double W = pairwise_sum(weights);
  Estimate e;
  e.mean = pairwise_sum(wv) / W;
  if (exact || n < 2) return e;
  for (std::size_t i = 0; i < n; ++i) wv[i] = weights[i] * (values[i] - e.mean) * (values[i] - e.mean);
  const double var = pairwise_sum(wv) / W * static_cast<double>(n) / static_cast<double>(n - 1);
  e.stderr_ = std::sqrt(var / static_cast<double>(n));
  return e;
}

namespace {

void require_compatible(const ControlProcess& control, const Ensemble& ensemble, const SolverConfig& config) {
  if (ensemble.steps != config.K || control.steps() != config.K)
    throw std::invalid_argument("ensemble, control and solver disagree on the number of steps");
  if (std::abs(ensemble.dt - config.dt) > 1e-14 * config.dt)
    throw std::invalid_argument("ensemble and solver disagree on dt");
  if (!(control.band() == config.band)) throw std::invalid_argument("control is not on the solver band");
  if (control.kind() == ControlProcess::Kind::tree_adapted) {
    if (!ensemble.is_tree()) throw std::invalid_argument("tree-adapted control needs a scenario-tree ensemble");
    if (control.scenario_count() != ensemble.size())
      throw std::invalid_argument("tree-adapted control does not match the scenario tree");
  }
}

std::vector<PairingWorkspace> make_workspaces(const SolverConfig& config, const ExecPolicy& policy) {
  const int workers = resolve_workers(policy);
  std::vector<PairingWorkspace> ws;
  ws.reserve(workers);
  for (int w = 0; w < workers; ++w) ws.emplace_back(config.band, config.Q);
  return ws;
}

}  // namespace

EnsembleResult run_ensemble(const SpectralField& Y0, const ControlProcess& control, const Ensemble& ensemble,
                            const DiffusionSpec& noise, const SolverConfig& config, const ExecPolicy& policy,
                            int moment) {
  config.validate();
  require_compatible(control, ensemble, config);
  const std::size_t n = ensemble.size();
  auto ws = make_workspaces(config, policy);

  EnsembleResult out;
  out.trajectories.resize(n);
  std::vector<std::optional<AbortRecord>> failed(n);
  for_each_index(policy, n, [&](std::size_t p, int worker) {
    const auto u = control.for_path(p);
    try {
      out.trajectories[p] = integrate(Y0, u, ensemble.paths[p], noise, config, ws[worker]);
    } catch (const NumericalAbort& e) {
      failed[p] = AbortRecord{p, e.step(), e.what()};
      out.trajectories[p].path = ensemble.paths[p];
    }
  });

  std::vector<double> v2, c2, vp, diss, w;
  for (std::size_t p = 0; p < n; ++p) {
    if (failed[p]) {
      out.aborts.push_back(*failed[p]);
      continue;
    }
    const auto& tr = out.trajectories[p];
    double sv = 0.0, sc = 0.0, d = 0.0;
    for (std::size_t k = 0; k < tr.states.size(); ++k) {
      sv = std::max(sv, norm_squared(tr.states[k], NormKind::V));
      sc = std::max(sc, curl_sigma_norm_squared(tr.states[k]));
      if (k > 0) d += config.dt * strain_norm_squared(tr.states[k]);
    }
    v2.push_back(sv);
    c2.push_back(sc);
    vp.push_back(std::pow(sv, 0.5 * moment));
    diss.push_back(4.0 * config.nu * d);
    w.push_back(ensemble.weights[p]);
  }
  const bool exact = ensemble.is_tree() && out.aborts.empty();
  out.stats.sup_V2 = weighted_estimate(v2, w, exact);
  out.stats.sup_curl2 = weighted_estimate(c2, w, exact);
  out.stats.sup_Vp = weighted_estimate(vp, w, exact);
  out.stats.dissipation = weighted_estimate(diss, w, exact);
  out.stats.moment = moment;
  out.stats.completed = v2.size();
  return out;
}

std::vector<Trajectory> integrate_all(const SpectralField& Y0, const ControlProcess& control,
                                      const Ensemble& ensemble, const DiffusionSpec& noise,
                                      const SolverConfig& config, const ExecPolicy& policy) {
  config.validate();
  require_compatible(control, ensemble, config);
  const std::size_t n = ensemble.size();
  auto ws = make_workspaces(config, policy);
  std::vector<Trajectory> out(n);
  for_each_index(policy, n, [&](std::size_t p, int worker) {
    out[p] = integrate(Y0, control.for_path(p), ensemble.paths[p], noise, config, ws[worker]);
  });
  return out;
}

StabilityReport stability_experiment(const ControlProcess& U1, const ControlProcess& U2, const SpectralField& Y0,
                                     const Ensemble& ensemble, const DiffusionSpec& noise,
                                     const SolverConfig& config, double C0, const ExecPolicy& policy) {
  const auto a = integrate_all(Y0, U1, ensemble, noise, config, policy);
  const auto b = integrate_all(Y0, U2, ensemble, noise, config, policy);
  const std::size_t n = ensemble.size();
  std::vector<double> state(n), ctrl(n);
  for (std::size_t p = 0; p < n; ++p) {
    double integral = 0.0, sup = 0.0, sum = 0.0;
    for (int k = 0; k <= config.K; ++k) {
      const double xi = std::exp(-C0 * integral);
      sup = std::max(sup, xi * norm_squared(a[p].states[k] - b[p].states[k], NormKind::W));
      if (k == config.K) break;
      sum += config.dt * xi * norm_squared(U1.at(k, p) - U2.at(k, p), NormKind::L2);
      integral += config.dt * (norm(a[p].states[k], NormKind::H3) + norm(b[p].states[k], NormKind::H3) + 1.0);
    }
    state[p] = sup;
    ctrl[p] = sum;
  }
  StabilityReport r;
  r.state_difference = weighted_estimate(state, ensemble.weights, true).mean;
  r.control_difference = weighted_estimate(ctrl, ensemble.weights, true).mean;
  r.ratio = r.control_difference > 0.0 ? r.state_difference / r.control_difference : 0.0;
  return r;
}

}  // namespace alphactl
