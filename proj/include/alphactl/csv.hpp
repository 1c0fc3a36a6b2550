#pragma once

#include "alphactl/adjoint.hpp"
#include "alphactl/control.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace alphactl {

/// %.17g, so that values round-trip and reruns compare byte for byte.
std::string format_double(double v);

/// time,mode_j,mode_k,coeff preceded by a "# kind=<kind>" comment line.
void write_trajectory_csv(std::ostream& os, const std::vector<double>& times, const std::vector<SpectralField>& states,
                          const std::string& kind);
/// time,V_norm,W_norm,Wtilde_norm,curl_sigma_norm
void write_summary_csv(std::ostream& os, const std::vector<double>& times, const std::vector<SpectralField>& states);
/// time,scenario_id,mode_j,mode_k,p_coeff,q_coeff_1..m for the first `max_scenarios` scenarios.
void write_adjoint_csv(std::ostream& os, const AdjointSolution& adj, int m, std::size_t max_scenarios);
void write_duality_csv(std::ostream& os, const DualityReport& rep);
/// iter,J,grad_norm,step,constraint_active
void write_history_csv(std::ostream& os, const std::vector<HistoryEntry>& history);
/// time,node,mode_j,mode_k,coeff
void write_control_csv(std::ostream& os, const ControlProcess& U, double dt);

}  // namespace alphactl
