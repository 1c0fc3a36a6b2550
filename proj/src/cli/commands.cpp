#include "alphactl/cli/commands.hpp"

#include "alphactl/cli/scenario.hpp"
#include "alphactl/cli/verify.hpp"
#include "alphactl/csv.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace alphactl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  std::string command;
  std::string suite;
  fs::path out;
  int workers = 0;
  Scenario scenario;
  std::vector<std::string> outputs;

  std::ofstream open(const std::string& name) {
    std::ofstream f(out / name, std::ios::binary);
    if (!f) throw ConfigError("--out", "cannot write '" + (out / name).string() + "'");
    outputs.push_back(name);
    return f;
  }
};

std::string indexed(const char* stem, std::size_t p) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu.csv", stem, p);
  return buf;
}

void write_manifest(Run& run) {
  json m;
  m["version"] = ALPHACTL_VERSION;
  m["command"] = run.command;
  if (!run.suite.empty()) m["suite"] = run.suite;
  m["workers"] = run.workers;
  m["config"] = json::parse(resolved_json(run.scenario.config));
  const Ensemble& e = run.scenario.problem.ensemble;
  if (e.is_tree()) {
    m["noise_source"] = {{"kind", "tree"}, {"steps", e.steps}, {"m", e.dims}, {"scenarios", e.size()}};
  } else {
    m["noise_source"] = {{"kind", "monte_carlo"}, {"seeds", e.seeds()}};
  }
  m["outputs"] = run.outputs;
  std::ofstream f(run.out / "manifest.json", std::ios::binary);
  f << m.dump(2) << "\n";
}

int cmd_simulate(Run& run, std::ostream& out) {
  const auto& s = run.scenario;
  const auto& pb = s.problem;
  const auto res = run_ensemble(pb.Y0, s.U0, pb.ensemble, pb.noise, pb.config, pb.policy, s.config.diagnostics.moment);
  const std::size_t n = std::min(s.config.max_output_paths, res.trajectories.size());
  for (std::size_t p = 0; p < n; ++p) {
    const auto& tr = res.trajectories[p];
    if (tr.states.empty()) continue;
    auto f = run.open(indexed("trajectory", p));
    write_trajectory_csv(f, tr.times, tr.states, "state");
    auto g = run.open(indexed("summary", p));
    write_summary_csv(g, tr.times, tr.states);
  }
  {
    auto f = run.open("ensemble.csv");
    const auto& st = res.stats;
    f << "statistic,mean,stderr\n";
    auto row = [&](const std::string& name, const Estimate& e) {
      f << name << ',' << format_double(e.mean) << ',' << format_double(e.stderr_) << '\n';
    };
    row("sup_V2", st.sup_V2);
    row("sup_curl_sigma2", st.sup_curl2);
    row("sup_V" + std::to_string(st.moment), st.sup_Vp);
    row("dissipation", st.dissipation);
    f << "completed," << st.completed << ",0\n";
  }
  {
    auto f = run.open("aborts.csv");
    f << "path,step,message\n";
    for (const auto& a : res.aborts) f << a.path << ',' << a.step << ",\"" << a.message << "\"\n";
  }
  write_manifest(run);
  out << "simulated " << res.stats.completed << " of " << res.trajectories.size() << " paths\n";
  return res.complete() ? kSuccess : kNumericalAbort;
}

int cmd_tangent(Run& run, std::ostream& out) {
  const auto& s = run.scenario;
  const auto& pb = s.problem;
  const auto base = integrate_all(pb.Y0, s.U0, pb.ensemble, pb.noise, pb.config, pb.policy);
  const auto z = integrate_tangents(base, s.Psi, pb.noise, pb.config, pb.policy);
  const std::size_t n = std::min(s.config.max_output_paths, z.size());
  for (std::size_t p = 0; p < n; ++p) {
    auto f = run.open(indexed("tangent", p));
    write_trajectory_csv(f, z[p].times, z[p].states, "tangent");
    auto g = run.open(indexed("tangent_summary", p));
    write_summary_csv(g, z[p].times, z[p].states);
  }
  write_manifest(run);
  out << "integrated " << z.size() << " tangent paths\n";
  return kSuccess;
}

int cmd_adjoint(Run& run, std::ostream& out) {
  const auto& s = run.scenario;
  const auto& pb = s.problem;
  const auto base = integrate_all(pb.Y0, s.U0, pb.ensemble, pb.noise, pb.config, pb.policy);
  const auto adj = solve_backward(base, s.U0, pb.ensemble, pb.cost, pb.noise, pb.config, pb.adjoint, pb.policy);
  const auto z = integrate_tangents(base, s.Psi, pb.noise, pb.config, pb.policy);
  const auto d = duality_gap(base, z, adj, pb.cost, pb.ensemble, pb.config);
  {
    auto f = run.open("adjoint.csv");
    write_adjoint_csv(f, adj, pb.ensemble.dims, s.config.max_output_paths);
  }
  {
    auto f = run.open("adjoint_estimate.csv");
    f << "time,estimate,regression_condition\n";
    for (int k = 0; k <= adj.steps(); ++k)
      f << format_double(adj.times[k]) << ',' << format_double(adj.estimate_series[k]) << ','
        << format_double(k < adj.steps() ? adj.regression_condition[k] : 1.0) << '\n';
  }
  {
    auto f = run.open("duality.csv");
    write_duality_csv(f, d);
  }
  write_manifest(run);
  out << "duality gap " << format_double(d.gap) << " (relative " << format_double(d.relative_gap) << ")\n";
  return kSuccess;
}

int cmd_optimize(Run& run, std::ostream& out, std::ostream& err) {
  const auto& s = run.scenario;
  const auto& pb = s.problem;
  const auto res = optimize(pb, s.U0, s.config.optimizer);
  const auto gr = gradient_adjoint(pb, res.U);
  const auto dirs = default_directions(res.U, gr.gradient, pb.M, pb.config.dt, 100, s.config.verify.seed);
  const auto vi = optimality_residual(res.U, gr.gradient, dirs, pb.config.dt);

  // fresh paths guard against fitting the sample
  ControlProblem fresh = pb;
  if (!pb.ensemble.is_tree())
    fresh.ensemble = Ensemble::monte_carlo(s.config.noise.seed + 1, pb.ensemble.size(), pb.ensemble.steps,
                                           pb.ensemble.dt, pb.ensemble.dims);
  const auto Jf = evaluate_cost(fresh, res.U, false);
  {
    auto f = run.open("history.csv");
    write_history_csv(f, res.history);
  }
  {
    auto f = run.open("control.csv");
    write_control_csv(f, res.U, pb.config.dt);
  }
  {
    auto f = run.open("final.csv");
    f << "J,J_fresh,J_fresh_stderr,residual,optimality_residual,energy,converged,armijo_failure,iterations\n";
    f << format_double(gr.cost.J) << ',' << format_double(Jf.J) << ',' << format_double(Jf.stderr_) << ','
      << format_double(res.residual) << ',' << format_double(vi.value) << ','
      << format_double(max_scenario_energy(res.U, pb.config.dt)) << ',' << (res.converged ? 1 : 0) << ','
      << (res.armijo_failure ? 1 : 0) << ',' << res.iterations << '\n';
  }
  write_manifest(run);
  if (res.armijo_failure) err << "warning: Armijo backtracking failed; returning the best iterate\n";
  out << "J = " << format_double(gr.cost.J) << " after " << res.iterations << " iterations\n";
  return kSuccess;
}

int cmd_verify(Run& run, std::ostream& out, std::ostream& err) {
  const auto rep = run_verify(run.scenario, run.suite);
  {
    auto f = run.open("report.csv");
    f << rep.csv();
  }
  if (!rep.conditions_text.empty()) {
    auto f = run.open("conditions.txt");
    f << rep.conditions_text;
  }
  write_manifest(run);
  for (const auto& r : rep.rows)
    out << (r.pass ? "PASS " : "FAIL ") << r.suite << "/" << r.check << " = " << format_double(r.value) << "\n";
  if (rep.all_pass()) return kSuccess;
  for (const auto& f : rep.failures()) err << "verification failed: " << f << "\n";
  return kVerificationFailure;
}

int default_workers() {
  if (const char* env = std::getenv("ALPHACTL_WORKERS")) {
    try {
      return std::max(0, std::stoi(env));
    } catch (const std::exception&) {
      return 0;
    }
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Galerkin simulation, adjoints and control on the unit square", "alpha-control"};
  std::string command, config_path, out_dir, suite = "all";
  int workers = -1;
  app.add_option("command", command, "simulate | tangent | adjoint | optimize | verify")
      ->required()
      ->check(CLI::IsMember({"simulate", "tangent", "adjoint", "optimize", "verify"}));
  app.add_option("--config", config_path, "scenario JSON file")->required();
  app.add_option("--out", out_dir, "output directory")->required();
  app.add_option("--workers", workers, "worker threads (0 = machine default)")->check(CLI::NonNegativeNumber);
  app.add_option("--suite", suite, "verify suite: identities | gradient | duality | conditions | all");
  app.set_version_flag("--version", ALPHACTL_VERSION);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForVersion&) {
    out << ALPHACTL_VERSION << "\n";
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    Run run;
    run.command = command;
    if (command == "verify") run.suite = suite;
    const ScenarioConfig cfg = load_scenario(config_path);
    run.workers = workers >= 0 ? workers : (cfg.workers > 0 ? cfg.workers : default_workers());
    ExecPolicy policy;
    policy.workers = run.workers;
    run.scenario = build_scenario(cfg, policy);
    run.out = out_dir;
    std::error_code ec;
    fs::create_directories(run.out, ec);
    if (ec) throw ConfigError("--out", "cannot create '" + out_dir + "': " + ec.message());

    if (command == "simulate") return cmd_simulate(run, out);
    if (command == "tangent") return cmd_tangent(run, out);
    if (command == "adjoint") return cmd_adjoint(run, out);
    if (command == "optimize") return cmd_optimize(run, out, err);
    return cmd_verify(run, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const NumericalAbort& e) {
    err << "numerical abort at step " << e.step() << ": " << e.what() << "\n";
    return kNumericalAbort;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumericalAbort;
  }
}

}  // namespace alphactl::cli
