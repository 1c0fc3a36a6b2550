#pragma once

#include "alphactl/cli/scenario.hpp"

#include <string>
#include <vector>

namespace alphactl::cli {

struct CheckRow {
  std::string suite;
  std::string check;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct VerifyReport {
  std::vector<CheckRow> rows;
  std::string conditions_text;  // filled by the conditions suite

  bool all_pass() const;
  /// suite,check,value,threshold,pass
  std::string csv() const;
  /// "suite/check" of every failing row.
  std::vector<std::string> failures() const;
};

/// suite is one of identities, gradient, duality, conditions, all.
VerifyReport run_verify(const Scenario& scenario, const std::string& suite);

void verify_identities(const Scenario& s, VerifyReport& r);
void verify_gradient(const Scenario& s, VerifyReport& r);
void verify_duality(const Scenario& s, VerifyReport& r);
void verify_conditions(const Scenario& s, VerifyReport& r);

}  // namespace alphactl::cli
