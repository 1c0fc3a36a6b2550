#include "alphactl/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace alphactl {

void ControlProblem::validate() const {
  config.validate();
  if (!(Y0.band() == config.band) || !Y0.all_finite()) throw std::invalid_argument("initial state is not on the band");
  noise.validate(config.band);
  cost.validate(config.band, config.K);
  if (!(M > 0.0) || !std::isfinite(M)) throw std::invalid_argument("control bound M must be positive");
  if (ensemble.steps != config.K || ensemble.size() == 0)
    throw std::invalid_argument("ensemble does not match the time grid");
  if (noise.dims() != ensemble.dims) throw std::invalid_argument("diffusion and ensemble disagree on m");
  if (adjoint.backend == Backend::tree_exact && !ensemble.is_tree())
    throw std::invalid_argument("tree-exact backend needs a scenario-tree ensemble");
}

void require_admissible(const ControlProcess& U, double M, double dt) {
  const double e = max_scenario_energy(U, dt);
  if (e > M * (1.0 + 1e-12))
    throw std::invalid_argument("control violates the bound sum_k dt ||U_k||_V^2 <= M (energy " +
                                std::to_string(e) + ", M " + std::to_string(M) + ")");
}

CostEstimate evaluate_cost(const ControlProblem& problem, const ControlProcess& U,
                           const std::vector<Trajectory>& base) {
  const std::size_t n = base.size();
  std::vector<double> v(n);
  for (std::size_t p = 0; p < n; ++p) v[p] = path_cost(problem.cost, base[p].states, U.for_path(p), problem.config.dt);
  const Estimate e = weighted_estimate(v, problem.ensemble.weights, problem.ensemble.is_tree());
  return {e.mean, e.stderr_};
}

CostEstimate evaluate_cost(const ControlProblem& problem, const ControlProcess& U, bool enforce_admissible) {
  if (enforce_admissible) require_admissible(U, problem.M, problem.config.dt);
  const auto base = integrate_all(problem.Y0, U, problem.ensemble, problem.noise, problem.config, problem.policy);
  return evaluate_cost(problem, U, base);
}

ControlProcess average_to_shape(const std::vector<std::vector<SpectralField>>& per_path, const ControlProcess& like,
                                const Ensemble& ensemble) {
  ControlProcess out = like.zeros_like();
  const std::size_t n = per_path.size();
  if (n != ensemble.size()) throw std::invalid_argument("per-path data and ensemble are misaligned");
  for (int k = 0; k < like.steps(); ++k) {
    std::vector<double> mass(like.nodes(k), 0.0);
    for (std::size_t p = 0; p < n; ++p) {
      const std::size_t node = like.node_of(k, p);
      out.node(k, node).coeffs() += ensemble.weights[p] * per_path[p][k].coeffs();
      mass[node] += ensemble.weights[p];
    }
    for (std::size_t node = 0; node < like.nodes(k); ++node) out.node(k, node) *= 1.0 / mass[node];
  }
  return out;
}

GradientResult gradient_adjoint(const ControlProblem& problem, const ControlProcess& U) {
  GradientResult r;
  r.base = integrate_all(problem.Y0, U, problem.ensemble, problem.noise, problem.config, problem.policy);
  r.cost = evaluate_cost(problem, U, r.base);
  r.adjoint = solve_backward(r.base, U, problem.ensemble, problem.cost, problem.noise, problem.config,
                             problem.adjoint, problem.policy);
  const std::size_t n = r.base.size();
  std::vector<std::vector<SpectralField>> g(n);
  for (std::size_t p = 0; p < n; ++p) {
    g[p].reserve(U.steps());
    for (int k = 0; k < U.steps(); ++k) g[p].push_back(problem.cost.grad_u(U.at(k, p)) + r.adjoint.p[k][p]);
  }
  r.gradient = average_to_shape(g, U, problem.ensemble);
  return r;
}

double directional_linearized(const ControlProblem& problem, const ControlProcess& U, const ControlProcess& Psi,
                              const std::vector<Trajectory>& base) {
  const auto z = integrate_tangents(base, Psi, problem.noise, problem.config, problem.policy);
  const double dt = problem.config.dt;
  const int K = problem.config.K;
  std::vector<double> v(base.size());
  for (std::size_t p = 0; p < base.size(); ++p) {
    double s = problem.cost.terminal_gradient_l2(base[p].states[K]).coeffs().dot(z[p].states[K].coeffs());
    for (int k = 0; k < K; ++k) {
      s += dt * problem.cost.grad_u(U.at(k, p)).coeffs().dot(Psi.at(k, p).coeffs());
      s += dt * problem.cost.grad_y(k, base[p].states[k]).coeffs().dot(z[p].states[k].coeffs());
    }
    v[p] = s;
  }
  return weighted_estimate(v, problem.ensemble.weights, true).mean;
}

double directional_fd(const ControlProblem& problem, const ControlProcess& U, const ControlProcess& Psi, double eps) {
  ControlProcess up = U, dn = U;
  up.axpy(eps, Psi);
  dn.axpy(-eps, Psi);
  return (evaluate_cost(problem, up, false).J - evaluate_cost(problem, dn, false).J) / (2.0 * eps);
}

namespace {
double relative_gap(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s > 0.0 ? std::abs(a - b) / s : 0.0;
}
}  // namespace

double GradientTriangle::max_gap() const {
  return std::max({gap_adjoint_fd, gap_adjoint_linearized, gap_linearized_fd});
}

GradientTriangle gradient_triangle(const ControlProblem& problem, const ControlProcess& U, const ControlProcess& Psi,
                                   double eps) {
  const auto gr = gradient_adjoint(problem, U);
  GradientTriangle t;
  t.adjoint = control_inner(gr.gradient, Psi, problem.config.dt);
  t.linearized = directional_linearized(problem, U, Psi, gr.base);
  t.finite_difference = directional_fd(problem, U, Psi, eps);
  t.gap_adjoint_fd = relative_gap(t.adjoint, t.finite_difference);
  t.gap_adjoint_linearized = relative_gap(t.adjoint, t.linearized);
  t.gap_linearized_fd = relative_gap(t.linearized, t.finite_difference);
  return t;
}

ControlProcess project_admissible(const ControlProcess& U, double M, double dt) {
  const double e = max_scenario_energy(U, dt);
  if (e <= M) return U;
  ControlProcess out = U;
  out *= std::sqrt(M / e);
  return out;
}

ControlProcess v_gradient(const ControlProcess& g) {
  ControlProcess out = g;
  for (int k = 0; k < out.steps(); ++k)
    for (std::size_t n = 0; n < out.nodes(k); ++n) out.node(k, n) = sigma_inverse(out.node(k, n));
  return out;
}

namespace {

double control_norm_V(const ControlProcess& a, double dt) {
  double s = 0.0;
  for (int k = 0; k < a.steps(); ++k) {
    double level = 0.0;
    for (std::size_t n = 0; n < a.nodes(k); ++n) level += norm_squared(a.node(k, n), NormKind::V);
    s += dt * a.node_probability(k) * level;
  }
  return std::sqrt(s);
}

bool on_sphere(const ControlProcess& U, double M, double dt) {
  return max_scenario_energy(U, dt) >= M * (1.0 - 1e-12);
}

}  // namespace

OptimizeResult optimize(const ControlProblem& problem, const ControlProcess& U0, const OptimizerOptions& options) {
  problem.validate();
  const double dt = problem.config.dt;
  require_admissible(U0, problem.M, dt);
  if (options.iters < 0 || !(options.step0 > 0.0) || !(options.shrink > 0.0 && options.shrink < 1.0))
    throw std::invalid_argument("invalid optimizer options");

  OptimizeResult res;
  res.U = U0;
  GradientResult gr = gradient_adjoint(problem, res.U);
  double J = gr.cost.J;
  double eta = options.step0;
  double last_step = 0.0;
  for (int it = 0;; ++it) {
    const ControlProcess gV = v_gradient(gr.gradient);
    ControlProcess probe = res.U;
    probe.axpy(-1.0, gV);
    res.residual = control_norm_V(res.U - project_admissible(probe, problem.M, dt), dt);
    res.history.push_back({it, J, control_norm(gr.gradient, dt), last_step, on_sphere(res.U, problem.M, dt)});
    res.iterations = it;
    if (res.residual <= options.tol) {
      res.converged = true;
      break;
    }
    if (it >= options.iters) break;

    bool accepted = false;
    ControlProcess trial;
    CostEstimate Jt;
    for (int b = 0; b <= options.max_backtracks; ++b) {
      trial = res.U;
      trial.axpy(-eta, gV);
      trial = project_admissible(trial, problem.M, dt);
      Jt = evaluate_cost(problem, trial, false);
      const double decrease = control_inner(gr.gradient, trial - res.U, dt);
      if (Jt.J <= J + options.armijo_c * decrease) {
        accepted = true;
        break;
      }
      eta *= options.shrink;
    }
    if (!accepted) {
      res.armijo_failure = true;
      break;
    }
    res.U = std::move(trial);
    last_step = eta;
    eta = std::min(eta * options.grow, options.max_step);
    gr = gradient_adjoint(problem, res.U);
    J = gr.cost.J;
  }
  return res;
}

OptimalityResidual optimality_residual(const ControlProcess& U, const ControlProcess& g,
                                       const std::vector<ControlProcess>& directions, double dt) {
  OptimalityResidual r;
  r.value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < directions.size(); ++i) {
    const double v = control_inner(g, directions[i] - U, dt);
    if (v < r.value) {
      r.value = v;
      r.worst = i;
    }
  }
  return r;
}

std::vector<ControlProcess> default_directions(const ControlProcess& U, const ControlProcess& g, double M, double dt,
                                               std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  std::vector<ControlProcess> out;
  out.reserve(count + 1);
  for (std::size_t i = 0; i < count; ++i) {
    ControlProcess d = U.zeros_like();
    for (int k = 0; k < d.steps(); ++k)
      for (std::size_t n = 0; n < d.nodes(k); ++n)
        for (int c = 0; c < d.node(k, n).size(); ++c) d.node(k, n)[c] = normal(rng);
    const double e = max_scenario_energy(d, dt);
    const double radius = uniform(rng);
    if (e > 0.0) d *= std::sqrt(M * radius / e);
    out.push_back(std::move(d));
  }
  ControlProcess probe = U;
  probe.axpy(-1.0, v_gradient(g));
  out.push_back(project_admissible(probe, M, dt));
  return out;
}

double exponential_moment(const std::vector<Trajectory>& trajectories, const std::vector<double>& weights, double C,
                          double dt) {
  std::vector<double> v(trajectories.size());
  for (std::size_t p = 0; p < trajectories.size(); ++p) {
    double s = 0.0;
    const auto& st = trajectories[p].states;
    for (std::size_t k = 0; k + 1 < st.size(); ++k) s += dt * norm_squared(st[k], NormKind::Wtilde);
    v[p] = std::exp(C * s);
  }
  return weighted_estimate(v, weights, true).mean;
}

}  // namespace alphactl
