#pragma once

#include "alphactl/spectral.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace alphactl {

/// Wiener increments of one sample path: row k holds dW_k (m components).
struct WienerPath {
  Eigen::MatrixXd increments;
  std::uint64_t seed = 0;
  double dt = 0.0;
  bool tree_mode = false;

  int steps() const { return static_cast<int>(increments.rows()); }
  int dims() const { return static_cast<int>(increments.cols()); }
};

/// Largest m * steps accepted for exhaustive scenario enumeration.
inline constexpr int kMaxTreeExponent = 22;

/// Reproducible path from `seed`. Gaussian increments of variance dt, or
/// Rademacher +-sqrt(dt) increments when tree_mode is set.
/// Throws std::invalid_argument for dt <= 0 or steps < 1, and for tree_mode
/// with m * steps > 22.
WienerPath sample_path(std::uint64_t seed, int steps, double dt, int m, bool tree_mode = false);

/// Exhaustive enumeration of Rademacher paths. Scenario index digits
/// (base 2^m, most significant first) encode the increments, so all
/// scenarios sharing the first k increments form one contiguous block of
/// length block_size(k).
class ScenarioTree {
 public:
  ScenarioTree(int steps, double dt, int m);

  int steps() const { return steps_; }
  int dims() const { return m_; }
  double dt() const { return dt_; }
  int branching() const { return 1 << m_; }
  std::size_t size() const { return std::size_t{1} << (m_ * steps_); }
  double probability() const { return 1.0 / static_cast<double>(size()); }
  /// Scenarios per node at level k (nodes at level k are indexed by the
  /// first k increments).
  std::size_t block_size(int level) const { return std::size_t{1} << (m_ * (steps_ - level)); }
  std::size_t nodes(int level) const { return std::size_t{1} << (m_ * level); }
  std::size_t node_of(std::size_t scenario, int level) const { return scenario / block_size(level); }

  /// Generated on demand; the full set is never materialised here.
  WienerPath scenario(std::size_t index) const;

 private:
  int steps_;
  double dt_;
  int m_;
};

/// A weighted set of paths sharing one time grid; produced either by
/// enumerating a ScenarioTree or by Monte Carlo sampling.
struct Ensemble {
  int steps = 0;
  int dims = 0;
  double dt = 0.0;
  std::vector<WienerPath> paths;
  std::vector<double> weights;
  std::optional<ScenarioTree> tree;

  std::size_t size() const { return paths.size(); }
  bool is_tree() const { return tree.has_value(); }

  static Ensemble from_tree(const ScenarioTree& tree);
  static Ensemble monte_carlo(std::uint64_t seed, std::size_t count, int steps, double dt, int m);
  std::vector<std::uint64_t> seeds() const;
};

enum class DiffusionFamily { additive, linear, saturated_linear };

/// G(t, y) dW = sum_l g^l(t, y) dW^l.
///
///   additive          g^l = gain * a^l
///   linear            g^l = gain * (a^l .* y)      (mode-wise product)
///   saturated_linear  linear tuple retracted radially onto
///                     { sum_l ||g^l||_V^2 <= L }
///
/// where a^l are the anchor fields.
struct DiffusionSpec {
  DiffusionFamily family = DiffusionFamily::additive;
  std::vector<SpectralField> anchors;
  double gain = 0.0;
  double saturation_level = 1.0;

  int dims() const { return static_cast<int>(anchors.size()); }
  bool is_zero() const;
  void validate(const Band& band) const;

  static DiffusionSpec none(const Band& band, int m);
};

std::string to_string(DiffusionFamily f);
DiffusionFamily diffusion_family_from_string(const std::string& s);

std::vector<SpectralField> eval_G(const DiffusionSpec& spec, double t, const SpectralField& y);

struct DiffusionDerivative {
  std::vector<SpectralField> value;
  /// The saturated family is not differentiable on the saturation sphere;
  /// the returned derivative is then the interior (one-sided) one.
  bool one_sided = false;
};

DiffusionDerivative eval_dG(const DiffusionSpec& spec, double t, const SpectralField& y, const SpectralField& v);

/// grad_y G(t, y)^T q in the L2 pairing:
/// sum_l (dG_l v, q_l) = (v, eval_dG_adjoint(q)) for every v.
SpectralField eval_dG_adjoint(const DiffusionSpec& spec, double t, const SpectralField& y,
                              const std::vector<SpectralField>& q);

/// Lipschitz constant K of y -> G(t, y) in V (exact for the additive and
/// linear families, an upper bound for the saturated one).
double lipschitz_constant(const DiffusionSpec& spec);

/// sum_l ||g^l||_V^2.
double tuple_norm_squared(const std::vector<SpectralField>& g);

}  // namespace alphactl
