#include "alphactl/adjoint.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace alphactl {

std::string to_string(Backend b) { return b == Backend::tree_exact ? "tree_exact" : "regression"; }

Backend backend_from_string(const std::string& s) {
  if (s == "tree_exact" || s == "tree") return Backend::tree_exact;
  if (s == "regression") return Backend::regression;
  throw std::invalid_argument("unknown adjoint backend '" + s + "' (expected tree_exact or regression)");
}

std::string to_string(FeatureMap f) { return f == FeatureMap::state_linear ? "state_linear" : "state_quadratic"; }

FeatureMap feature_map_from_string(const std::string& s) {
  if (s == "state_linear") return FeatureMap::state_linear;
  if (s == "state_quadratic") return FeatureMap::state_quadratic;
  throw std::invalid_argument("unknown feature map '" + s + "' (expected state_linear or state_quadratic)");
}

namespace {

Eigen::MatrixXd tree_average(const Eigen::MatrixXd& X, int k, const Ensemble& ensemble) {
  if (!ensemble.is_tree() || ensemble.size() != ensemble.tree->size())
    throw std::invalid_argument("tree-exact conditional expectation needs the full scenario tree");
  const std::size_t bs = ensemble.tree->block_size(k);
  Eigen::MatrixXd out(X.rows(), X.cols());
  for (std::size_t start = 0; start < ensemble.size(); start += bs) {
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(X.cols());
    double w = 0.0;
    for (std::size_t p = start; p < start + bs; ++p) {
      acc += ensemble.weights[p] * X.row(static_cast<Eigen::Index>(p));
      w += ensemble.weights[p];
    }
    acc /= w;
    for (std::size_t p = start; p < start + bs; ++p) out.row(static_cast<Eigen::Index>(p)) = acc;
  }
  return out;
}

Eigen::MatrixXd features(const std::vector<Trajectory>& base, int k, FeatureMap map) {
  const int n = static_cast<int>(base.size());
  const int d = base.front().states[k].size();
  const int cols = map == FeatureMap::state_linear ? d : d + d * (d + 1) / 2;
  Eigen::MatrixXd F(n, cols);
  for (int p = 0; p < n; ++p) {
    const Eigen::VectorXd& y = base[p].states[k].coeffs();
    F.row(p).head(d) = y.transpose();
    if (map == FeatureMap::state_quadratic) {
      int c = d;
      for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) F(p, c++) = y[i] * y[j];
    }
  }
  return F;
}

Eigen::MatrixXd regression_average(const Eigen::MatrixXd& X, int k, const std::vector<Trajectory>& base,
                                   const Ensemble& ensemble, const RegressionOptions& opt, double* condition) {
  if (!(opt.ridge >= 0.0)) throw std::invalid_argument("regression ridge must be non-negative");
  const Eigen::Index n = X.rows();
  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(ensemble.weights.data(), n);
  w /= w.sum();
  const Eigen::MatrixXd F = features(base, k, opt.features);
  if (!F.allFinite())
    throw std::runtime_error("regression design singular for feature map '" + to_string(opt.features) +
                             "': non-finite features at step " + std::to_string(k));

  const Eigen::RowVectorXd meanX = w.transpose() * X;
  const Eigen::RowVectorXd meanF = w.transpose() * F;
  Eigen::MatrixXd Fc = F.rowwise() - meanF;
  std::vector<Eigen::Index> keep;
  Eigen::VectorXd scale(F.cols());
  for (Eigen::Index j = 0; j < F.cols(); ++j) {
    const double sd = std::sqrt(w.dot(Fc.col(j).cwiseAbs2()));
    scale[j] = sd;
    if (sd > 1e-13 * (1.0 + std::abs(meanF[j]))) keep.push_back(j);
  }
  Eigen::MatrixXd out = X;
  out.rowwise() = meanX;
  if (condition) *condition = 1.0;
  if (keep.empty()) return out;

  const Eigen::Index c = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd Fs(n, c);
  for (Eigen::Index j = 0; j < c; ++j) Fs.col(j) = Fc.col(keep[j]) / scale[keep[j]];
  const Eigen::VectorXd sw = w.cwiseSqrt();
  Eigen::MatrixXd A(n + (opt.ridge > 0.0 ? c : 0), c);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(A.rows(), X.cols());
  A.topRows(n) = sw.asDiagonal() * Fs;
  B.topRows(n) = sw.asDiagonal() * (X.rowwise() - meanX);
  if (opt.ridge > 0.0) A.bottomRows(c) = std::sqrt(opt.ridge) * Eigen::MatrixXd::Identity(c, c);

  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-12);
  if (svd.rank() == 0)
    throw std::runtime_error("regression design singular for feature map '" + to_string(opt.features) +
                             "' at step " + std::to_string(k));
  if (condition) *condition = svd.singularValues()[0] / svd.singularValues()[svd.rank() - 1];
  const Eigen::MatrixXd beta = svd.solve(B);
  out += Fs * beta;
  return out;
}

}  // namespace

Eigen::MatrixXd conditional_expectation(const Eigen::MatrixXd& X, int k, const std::vector<Trajectory>& base,
                                        const Ensemble& ensemble, const AdjointOptions& options, double* condition) {
  if (static_cast<std::size_t>(X.rows()) != ensemble.size() || base.size() != ensemble.size())
    throw std::invalid_argument("conditional expectation: ensemble and data are misaligned");
  if (options.backend == Backend::tree_exact) {
    if (condition) *condition = 1.0;
    return tree_average(X, k, ensemble);
  }
  return regression_average(X, k, base, ensemble, options.regression, condition);
}

SpectralField terminal_condition(const SpectralField& Y_T, const CostSpec& cost) {
  return cost.terminal_condition(Y_T);
}

AdjointSolution solve_backward(const std::vector<Trajectory>& base, const ControlProcess& U, const Ensemble& ensemble,
                               const CostSpec& cost, const DiffusionSpec& noise, const SolverConfig& config,
                               const AdjointOptions& options, const ExecPolicy& policy) {
  require_differentiable(config);
  const std::size_t n = ensemble.size();
  if (base.size() != n) throw std::invalid_argument("base trajectories and ensemble are misaligned");
  for (const auto& tr : base)
    if (tr.steps() != config.K) throw std::invalid_argument("base trajectories do not share the time grid");
  if (options.backend == Backend::tree_exact && !ensemble.is_tree())
    throw std::invalid_argument("tree-exact backend needs a scenario-tree ensemble");
  if (U.steps() != config.K) throw std::invalid_argument("control does not match the time grid");
  if (!noise.is_zero() && noise.dims() != ensemble.dims)
    throw std::invalid_argument("diffusion and ensemble disagree on the Wiener dimension");

  const Band& band = config.band;
  const int K = config.K, d = band.size(), m = ensemble.dims;
  const double dt = config.dt;
  const Eigen::VectorXd D = sigma_weights(band);
  const Eigen::VectorXd Minv = (D + dt * config.nu * laplacian_eigenvalues(band)).cwiseInverse();
  const Eigen::VectorXd Dinv = D.cwiseInverse();

  const int workers = resolve_workers(policy);
  std::vector<PairingWorkspace> ws;
  for (int w = 0; w < workers; ++w) ws.emplace_back(band, config.Q);

  AdjointSolution sol;
  sol.backend = options.backend;
  sol.times = base.front().times;
  sol.p.assign(K + 1, std::vector<SpectralField>(n));
  sol.q.assign(K, std::vector<std::vector<SpectralField>>(n));
  sol.regression_condition.assign(K, 1.0);
  sol.terminal_l2.resize(n);

  Eigen::MatrixXd lam(n, d);
  for (std::size_t p = 0; p < n; ++p) {
    sol.terminal_l2[p] = cost.terminal_gradient_l2(base[p].states[K]);
    lam.row(static_cast<Eigen::Index>(p)) = sol.terminal_l2[p].coeffs().transpose();
    sol.p[K][p] = SpectralField(band, Dinv.cwiseProduct(sol.terminal_l2[p].coeffs()));
  }

  for (int k = K - 1; k >= 0; --k) {
    // columns: r | r dW^1..m | lam dW^1..m
    Eigen::MatrixXd X(n, d * (1 + 2 * m));
    for (std::size_t p = 0; p < n; ++p) {
      const auto row = static_cast<Eigen::Index>(p);
      const Eigen::RowVectorXd r = lam.row(row).cwiseProduct(Minv.transpose());
      X.row(row).head(d) = r;
      for (int l = 0; l < m; ++l) {
        const double dw = base[p].path.increments(k, l);
        X.row(row).segment(d * (1 + l), d) = dw * r;
        X.row(row).segment(d * (1 + m + l), d) = dw * lam.row(row);
      }
    }
    const Eigen::MatrixXd E = conditional_expectation(X, k, base, ensemble, options, &sol.regression_condition[k]);

    const double t = config.time(k);
    for_each_index(policy, n, [&](std::size_t p, int worker) {
      const auto row = static_cast<Eigen::Index>(p);
      const SpectralField& Y = base[p].states[k];
      SpectralField pk(band, E.row(row).head(d).transpose());
      std::vector<SpectralField> qq(m), qrep(m);
      for (int l = 0; l < m; ++l) {
        qq[l] = SpectralField(band, E.row(row).segment(d * (1 + l), d).transpose() / dt);
        qrep[l] = SpectralField(band, Dinv.cwiseProduct(E.row(row).segment(d * (1 + m + l), d).transpose()) / dt);
      }
      Eigen::VectorXd next = dt * cost.grad_y(k, Y).coeffs() + D.cwiseProduct(pk.coeffs()) -
                             dt * ws[worker].linearized_transpose(Y, pk);
      if (!noise.is_zero()) next += dt * eval_dG_adjoint(noise, t, Y, qq).coeffs();
      lam.row(row) = next.transpose();
      sol.p[k][p] = std::move(pk);
      sol.q[k][p] = std::move(qrep);
    });
    if (!lam.allFinite()) throw NumericalAbort(k, "non-finite adjoint produced at step " + std::to_string(k));
  }

  const Eigen::VectorXd strain_w = 0.5 * laplacian_eigenvalues(band);
  sol.estimate_series.resize(K + 1);
  for (int k = 0; k <= K; ++k) {
    std::vector<double> v(n);
    for (std::size_t p = 0; p < n; ++p) {
      const Eigen::VectorXd& c = sol.p[k][p].coeffs();
      v[p] = D.cwiseProduct(c).squaredNorm() + 4.0 * config.nu * strain_w.dot(c.cwiseAbs2());
    }
    sol.estimate_series[k] = weighted_estimate(v, ensemble.weights, true).mean;
  }
  return sol;
}

DualityReport duality_gap(const std::vector<Trajectory>& base, const std::vector<TangentTrajectory>& tangents,
                          const AdjointSolution& adj, const CostSpec& cost, const Ensemble& ensemble,
                          const SolverConfig& config) {
  const std::size_t n = ensemble.size();
  if (base.size() != n || tangents.size() != n || adj.p.empty() || adj.p.front().size() != n)
    throw std::invalid_argument("duality: ensembles are misaligned");
  const int K = config.K;
  if (adj.steps() != K) throw std::invalid_argument("duality: adjoint does not match the time grid");
  std::vector<double> lhs(n), rhs(n);
  for (std::size_t p = 0; p < n; ++p) {
    const auto& z = tangents[p];
    if (z.steps() != K || z.base != &base[p]) throw std::invalid_argument("duality: tangent is not on this base");
    double l = adj.terminal_l2[p].coeffs().dot(z.states[K].coeffs());
    double r = 0.0;
    for (int k = 0; k < K; ++k) {
      l += config.dt * cost.grad_y(k, base[p].states[k]).coeffs().dot(z.states[k].coeffs());
      r += config.dt * z.forcing[k].coeffs().dot(adj.p[k][p].coeffs());
    }
    lhs[p] = l;
    rhs[p] = r;
  }
  const bool exact = ensemble.is_tree();
  const Estimate L = weighted_estimate(lhs, ensemble.weights, exact);
  const Estimate R = weighted_estimate(rhs, ensemble.weights, exact);
  DualityReport rep;
  rep.lhs = L.mean;
  rep.rhs = R.mean;
  rep.gap = std::abs(L.mean - R.mean);
  const double scale = std::max(std::abs(L.mean), std::abs(R.mean));
  rep.relative_gap = scale > 0.0 ? rep.gap / scale : rep.gap;
  rep.se_lhs = L.stderr_;
  rep.se_rhs = R.stderr_;
  rep.se_combined = std::hypot(L.stderr_, R.stderr_);
  return rep;
}

}  // namespace alphactl
