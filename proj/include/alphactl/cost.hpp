#pragma once

#include "alphactl/control_process.hpp"
#include "alphactl/spectral.hpp"

#include <string>
#include <vector>

namespace alphactl {

enum class TerminalKind { none, l2, v };

std::string to_string(TerminalKind k);
TerminalKind terminal_kind_from_string(const std::string& s);

/// Quadratic tracking cost
///   L(t_k, u, y) = w ||y - Yd_k||_2^2 + (lambda / 2) ||u||_2^2
///   h(y)         = 0, (1/2) ||y - Yd_K||_2^2 or (1/2) ||y - Yd_K||_V^2.
/// An empty target list means Yd = 0.
struct CostSpec {
  double tracking_weight = 1.0;
  double lambda = 0.0;
  TerminalKind terminal = TerminalKind::none;
  std::vector<SpectralField> targets;  // K + 1 fields or empty

  void validate(const Band& band, int K) const;

  SpectralField target(int k, const Band& band) const;
  double running(int k, const SpectralField& u, const SpectralField& y) const;
  SpectralField grad_y(int k, const SpectralField& y) const;
  SpectralField grad_u(const SpectralField& u) const;
  double terminal_value(const SpectralField& y) const;
  /// Gradient of h in the inner product defining h: the L2 gradient for the
  /// l2 terminal and the V gradient for the v terminal.
  SpectralField terminal_condition(const SpectralField& y) const;
  /// L2 representative of dh(y): dh(y) v = (g, v)_2.
  SpectralField terminal_gradient_l2(const SpectralField& y) const;

  /// Returns (||grad_u L||_2 + ||grad_y L||_2) / (1 + ||u||_V + ||y||_Wtilde).
  double growth_ratio(int k, const SpectralField& u, const SpectralField& y) const;

  bool has_state_dependence() const { return tracking_weight != 0.0 || terminal != TerminalKind::none; }
};

/// sum_k dt L(t_k, U_k, Y_k) + h(Y_K) along one path.
double path_cost(const CostSpec& cost, const std::vector<SpectralField>& states,
                 const std::vector<SpectralField>& controls, double dt);

}  // namespace alphactl
