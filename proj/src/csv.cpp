#include "alphactl/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace alphactl {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const std::vector<double>& times, const std::vector<SpectralField>& states,
                          const std::string& kind) {
  os << "# kind=" << kind << "\n";
  os << "time,mode_j,mode_k,coeff\n";
  for (std::size_t k = 0; k < states.size(); ++k) {
    const Band& band = states[k].band();
    for (int i = 0; i < band.size(); ++i) {
      const WaveIndex w = band.wave(i);
      os << format_double(times[k]) << ',' << w.j << ',' << w.k << ',' << format_double(states[k][i]) << '\n';
    }
  }
}

void write_summary_csv(std::ostream& os, const std::vector<double>& times, const std::vector<SpectralField>& states) {
  os << "time,V_norm,W_norm,Wtilde_norm,curl_sigma_norm\n";
  for (std::size_t k = 0; k < states.size(); ++k) {
    const auto& y = states[k];
    os << format_double(times[k]) << ',' << format_double(norm(y, NormKind::V)) << ','
       << format_double(norm(y, NormKind::W)) << ',' << format_double(norm(y, NormKind::Wtilde)) << ','
       << format_double(std::sqrt(curl_sigma_norm_squared(y))) << '\n';
  }
}

void write_adjoint_csv(std::ostream& os, const AdjointSolution& adj, int m, std::size_t max_scenarios) {
  os << "time,scenario_id,mode_j,mode_k,p_coeff";
  for (int l = 1; l <= m; ++l) os << ",q_coeff_" << l;
  os << '\n';
  const int K = adj.steps();
  for (int k = 0; k <= K; ++k) {
    const std::size_t n = std::min(max_scenarios, adj.p[k].size());
    for (std::size_t p = 0; p < n; ++p) {
      const SpectralField& pk = adj.p[k][p];
      const Band& band = pk.band();
      for (int i = 0; i < band.size(); ++i) {
        const WaveIndex w = band.wave(i);
        os << format_double(adj.times[k]) << ',' << p << ',' << w.j << ',' << w.k << ',' << format_double(pk[i]);
        for (int l = 0; l < m; ++l) {
          const double q = (k < K && l < static_cast<int>(adj.q[k][p].size())) ? adj.q[k][p][l][i] : 0.0;
          os << ',' << format_double(q);
        }
        os << '\n';
      }
    }
  }
}

void write_duality_csv(std::ostream& os, const DualityReport& r) {
  os << "lhs,rhs,gap,relative_gap,se_lhs,se_rhs,se_combined\n";
  os << format_double(r.lhs) << ',' << format_double(r.rhs) << ',' << format_double(r.gap) << ','
     << format_double(r.relative_gap) << ',' << format_double(r.se_lhs) << ',' << format_double(r.se_rhs) << ','
     << format_double(r.se_combined) << '\n';
}

void write_history_csv(std::ostream& os, const std::vector<HistoryEntry>& history) {
  os << "iter,J,grad_norm,step,constraint_active\n";
  for (const auto& h : history)
    os << h.iter << ',' << format_double(h.J) << ',' << format_double(h.grad_norm) << ',' << format_double(h.step)
       << ',' << (h.constraint_active ? 1 : 0) << '\n';
}

void write_control_csv(std::ostream& os, const ControlProcess& U, double dt) {
  os << "time,node,mode_j,mode_k,coeff\n";
  for (int k = 0; k < U.steps(); ++k)
    for (std::size_t n = 0; n < U.nodes(k); ++n) {
      const SpectralField& f = U.node(k, n);
      for (int i = 0; i < f.size(); ++i) {
        const WaveIndex w = f.band().wave(i);
        os << format_double(k * dt) << ',' << n << ',' << w.j << ',' << w.k << ',' << format_double(f[i]) << '\n';
      }
    }
}

}  // namespace alphactl
