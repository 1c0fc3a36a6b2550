#pragma once

#include "alphactl/spectral.hpp"

#include <string>

namespace alphactl {

struct ConditionInputs {
  double nu = 0.1;
  double alpha = 0.1;
  double T = 1.0;
  double epsilon = 1.0;
  double L = 0.01;
  double C_max = 1.0;
  double C_star = 1.0;
  double K_star = 1.0;
  double C_starstar = 1.0;

  static ConditionInputs from_band(const Band& band, double nu, double T, double epsilon, double L, double C_max);
};

/// Constants of the exponential-integrability conditions:
///   tau    = T e^{eps T}
///   gamma1 = C_* nu tau / alpha        gamma1bar = K_* tau / (4 alpha)
///   gamma2 = C_** nu / alpha
///   theta1 = 4 L tau^2 (1 + gamma1^2)   theta2 = 2 L e^{eps T} (1 + 2 gamma1bar^2)
///   A = 1 / (2 theta1)                  B = gamma2^2 / (2 theta2)
/// with verdicts A >= C_max and B >= C_max.
struct ConditionReport {
  ConditionInputs inputs;
  double tau = 0.0;
  double gamma1 = 0.0;
  double gamma1bar = 0.0;
  double gamma2 = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  double A = 0.0;
  double B = 0.0;
  bool g1_holds = false;
  bool g2_holds = false;
  std::string regime;

  /// Flat key=value block, one entry per line.
  std::string to_text() const;
};

ConditionReport condition_diagnostics(const ConditionInputs& in);

}  // namespace alphactl
