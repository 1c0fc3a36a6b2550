#include "alphactl/noise.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace alphactl {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_grid(int steps, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("time step dt must be positive");
  if (steps < 1) throw std::invalid_argument("number of time steps must be >= 1");
}

void check_tree(int steps, int m) {
  if (m < 1) throw std::invalid_argument("noise dimension m must be >= 1");
  if (static_cast<long>(m) * steps > kMaxTreeExponent) {
    throw std::invalid_argument("scenario tree too large: m*K = " + std::to_string(static_cast<long>(m) * steps) +
                                " exceeds " + std::to_string(kMaxTreeExponent));
  }
}

// Mode-wise S_l y = gain * a^l .* y.
Eigen::VectorXd mix(const DiffusionSpec& spec, int l, const Eigen::VectorXd& y) {
  return spec.gain * spec.anchors[l].coeffs().cwiseProduct(y);
}

struct LinearTuple {
  std::vector<SpectralField> s;
  double norm2 = 0.0;  // sum_l ||s_l||_V^2
};

LinearTuple linear_tuple(const DiffusionSpec& spec, const SpectralField& y) {
  LinearTuple t;
  for (int l = 0; l < spec.dims(); ++l) t.s.emplace_back(y.band(), mix(spec, l, y.coeffs()));
  t.norm2 = tuple_norm_squared(t.s);
  return t;
}

void require_band(const DiffusionSpec& spec, const SpectralField& y) {
  for (const auto& a : spec.anchors)
    if (!(a.band() == y.band())) throw std::invalid_argument("diffusion anchors and state live on different bands");
}

}  // namespace

WienerPath sample_path(std::uint64_t seed, int steps, double dt, int m, bool tree_mode) {
  check_grid(steps, dt);
  if (m < 1) throw std::invalid_argument("noise dimension m must be >= 1");
  if (tree_mode) check_tree(steps, m);
  WienerPath path;
  path.seed = seed;
  path.dt = dt;
  path.tree_mode = tree_mode;
  path.increments.resize(steps, m);
  std::mt19937_64 rng(seed);
  const double sdt = std::sqrt(dt);
  if (tree_mode) {
    std::bernoulli_distribution coin(0.5);
    for (int k = 0; k < steps; ++k)
      for (int l = 0; l < m; ++l) path.increments(k, l) = coin(rng) ? sdt : -sdt;
  } else {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int k = 0; k < steps; ++k)
      for (int l = 0; l < m; ++l) path.increments(k, l) = sdt * normal(rng);
  }
  return path;
}

ScenarioTree::ScenarioTree(int steps, double dt, int m) : steps_(steps), dt_(dt), m_(m) {
  check_grid(steps, dt);
  check_tree(steps, m);
}

WienerPath ScenarioTree::scenario(std::size_t index) const {
  if (index >= size()) throw std::out_of_range("scenario index outside the tree");
  WienerPath path;
  path.seed = index;
  path.dt = dt_;
  path.tree_mode = true;
  path.increments.resize(steps_, m_);
  const double sdt = std::sqrt(dt_);
  for (int k = 0; k < steps_; ++k) {
    const std::size_t digit = (index / block_size(k + 1)) % static_cast<std::size_t>(branching());
    for (int l = 0; l < m_; ++l) path.increments(k, l) = ((digit >> l) & 1U) ? -sdt : sdt;
  }
  return path;
}

Ensemble Ensemble::from_tree(const ScenarioTree& tree) {
  Ensemble e;
  e.steps = tree.steps();
  e.dims = tree.dims();
  e.dt = tree.dt();
  e.tree = tree;
  e.paths.reserve(tree.size());
  for (std::size_t i = 0; i < tree.size(); ++i) e.paths.push_back(tree.scenario(i));
  e.weights.assign(tree.size(), tree.probability());
  return e;
}

Ensemble Ensemble::monte_carlo(std::uint64_t seed, std::size_t count, int steps, double dt, int m) {
  if (count < 1) throw std::invalid_argument("Monte Carlo ensemble needs at least one path");
  Ensemble e;
  e.steps = steps;
  e.dims = m;
  e.dt = dt;
  e.paths.reserve(count);
  for (std::size_t p = 0; p < count; ++p) e.paths.push_back(sample_path(splitmix64(seed + 0x632be59bd9b4e019ULL * p), steps, dt, m));
  e.weights.assign(count, 1.0 / static_cast<double>(count));
  return e;
}

std::vector<std::uint64_t> Ensemble::seeds() const {
  std::vector<std::uint64_t> s;
  s.reserve(paths.size());
  for (const auto& p : paths) s.push_back(p.seed);
  return s;
}

std::string to_string(DiffusionFamily f) {
  switch (f) {
    case DiffusionFamily::additive: return "additive";
    case DiffusionFamily::linear: return "linear";
    case DiffusionFamily::saturated_linear: return "saturated-linear";
  }
  return "?";
}

DiffusionFamily diffusion_family_from_string(const std::string& s) {
  if (s == "additive") return DiffusionFamily::additive;
  if (s == "linear") return DiffusionFamily::linear;
  if (s == "saturated-linear" || s == "saturated_linear") return DiffusionFamily::saturated_linear;
  throw std::invalid_argument("unknown diffusion family '" + s + "'");
}

bool DiffusionSpec::is_zero() const {
  if (gain == 0.0) return true;
  for (const auto& a : anchors)
    if (a.coeffs().cwiseAbs().maxCoeff() > 0.0) return false;
  return true;
}

void DiffusionSpec::validate(const Band& band) const {
  if (anchors.empty()) throw std::invalid_argument("diffusion needs m >= 1 anchor fields");
  for (const auto& a : anchors)
    if (!(a.band() == band)) throw std::invalid_argument("diffusion anchor does not match the band");
  if (!std::isfinite(gain)) throw std::invalid_argument("diffusion gain must be finite");
  if (family == DiffusionFamily::saturated_linear && !(saturation_level > 0.0))
    throw std::invalid_argument("saturation level L must be positive");
}

DiffusionSpec DiffusionSpec::none(const Band& band, int m) {
  DiffusionSpec s;
  s.family = DiffusionFamily::additive;
  s.anchors.assign(m, SpectralField(band));
  s.gain = 0.0;
  return s;
}

double tuple_norm_squared(const std::vector<SpectralField>& g) {
  double s = 0.0;
  for (const auto& f : g) s += norm_squared(f, NormKind::V);
  return s;
}

std::vector<SpectralField> eval_G(const DiffusionSpec& spec, double /*t*/, const SpectralField& y) {
  require_band(spec, y);
  std::vector<SpectralField> g;
  switch (spec.family) {
    case DiffusionFamily::additive:
      for (const auto& a : spec.anchors) g.push_back(spec.gain * a);
      return g;
    case DiffusionFamily::linear:
      return linear_tuple(spec, y).s;
    case DiffusionFamily::saturated_linear: {
      LinearTuple t = linear_tuple(spec, y);
      if (t.norm2 > spec.saturation_level) {
        const double r = std::sqrt(spec.saturation_level / t.norm2);
        for (auto& f : t.s) f *= r;
      }
      return t.s;
    }
  }
  return g;
}

DiffusionDerivative eval_dG(const DiffusionSpec& spec, double /*t*/, const SpectralField& y, const SpectralField& v) {
  require_band(spec, y);
  DiffusionDerivative d;
  const int m = spec.dims();
  switch (spec.family) {
    case DiffusionFamily::additive:
      d.value.assign(m, SpectralField(y.band()));
      return d;
    case DiffusionFamily::linear:
      for (int l = 0; l < m; ++l) d.value.emplace_back(y.band(), mix(spec, l, v.coeffs()));
      return d;
    case DiffusionFamily::saturated_linear: {
      const LinearTuple t = linear_tuple(spec, y);
      const double L = spec.saturation_level;
      for (int l = 0; l < m; ++l) d.value.emplace_back(y.band(), mix(spec, l, v.coeffs()));
      if (std::abs(t.norm2 - L) <= 1e-12 * L) d.one_sided = true;
      if (t.norm2 <= L) return d;
      const double r = std::sqrt(L / t.norm2);
      double c = 0.0;
      for (int l = 0; l < m; ++l) c += inner(t.s[l], d.value[l], NormKind::V);
      c /= t.norm2;
      for (int l = 0; l < m; ++l) d.value[l] = r * (d.value[l] - c * t.s[l]);
      return d;
    }
  }
  return d;
}

SpectralField eval_dG_adjoint(const DiffusionSpec& spec, double /*t*/, const SpectralField& y,
                              const std::vector<SpectralField>& q) {
  require_band(spec, y);
  const int m = spec.dims();
  if (static_cast<int>(q.size()) != m) throw std::invalid_argument("adjoint diffusion input needs m fields");
  SpectralField out(y.band());
  if (spec.family == DiffusionFamily::additive) return out;
  for (int l = 0; l < m; ++l) out.coeffs() += mix(spec, l, q[l].coeffs());
  if (spec.family == DiffusionFamily::linear) return out;

  const LinearTuple t = linear_tuple(spec, y);
  const double L = spec.saturation_level;
  if (t.norm2 <= L) return out;
  const double r = std::sqrt(L / t.norm2);
  double qs = 0.0;
  for (int l = 0; l < m; ++l) qs += q[l].coeffs().dot(t.s[l].coeffs());
  const Eigen::VectorXd sig = sigma_weights(y.band());
  Eigen::VectorXd back = Eigen::VectorXd::Zero(y.size());
  for (int l = 0; l < m; ++l) back += mix(spec, l, t.s[l].coeffs().cwiseProduct(sig));
  out.coeffs() = r * (out.coeffs() - (qs / t.norm2) * back);
  return out;
}

double lipschitz_constant(const DiffusionSpec& spec) {
  if (spec.family == DiffusionFamily::additive || spec.anchors.empty()) return 0.0;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(spec.anchors.front().size());
  for (const auto& a : spec.anchors) acc += a.coeffs().cwiseAbs2();
  return std::abs(spec.gain) * std::sqrt(acc.maxCoeff());
}

}  // namespace alphactl
