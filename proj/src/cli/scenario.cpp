#include "alphactl/cli/scenario.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace alphactl::cli {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(join(path, it.key()), "unknown key");
}

const json* section(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

void read(const json& j, const std::string& path, const char* key, double& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_number()) throw ConfigError(join(path, key), "expected a number");
  out = it->get<double>();
  if (!std::isfinite(out)) throw ConfigError(join(path, key), "must be finite");
}

void read(const json& j, const std::string& path, const char* key, int& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  out = it->get<int>();
}

void read(const json& j, const std::string& path, const char* key, std::uint64_t& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_number_unsigned()) throw ConfigError(join(path, key), "expected a non-negative integer");
  out = it->get<std::uint64_t>();
}

void read(const json& j, const std::string& path, const char* key, std::string& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_string()) throw ConfigError(join(path, key), "expected a string");
  out = it->get<std::string>();
}

std::vector<ModeEntry> read_modes(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of {j, k, c}");
  std::vector<ModeEntry> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    check_keys(j[i], p, {"j", "k", "c"});
    ModeEntry m;
    read(j[i], p, "j", m.j);
    read(j[i], p, "k", m.k);
    read(j[i], p, "c", m.c);
    out.push_back(m);
  }
  return out;
}

void read_modes(const json& j, const std::string& path, const char* key, std::vector<ModeEntry>& out) {
  auto it = j.find(key);
  if (it != j.end()) out = read_modes(*it, join(path, key));
}

json modes_json(const std::vector<ModeEntry>& modes) {
  json a = json::array();
  for (const auto& m : modes) a.push_back({{"j", m.j}, {"k", m.k}, {"c", m.c}});
  return a;
}

}  // namespace

ScenarioConfig parse_scenario_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("JSON parse error: ") + e.what());
  }
  check_keys(root, "", {"band", "physics", "time", "initial", "noise", "cost", "control", "tangent", "optimizer",
                        "adjoint", "diagnostics", "verify", "output", "workers"});
  ScenarioConfig c;
  if (auto s = section(root, "band")) {
    check_keys(*s, "band", {"N", "Q"});
    read(*s, "band", "N", c.N);
    read(*s, "band", "Q", c.Q);
  }
  if (auto s = section(root, "physics")) {
    check_keys(*s, "physics", {"nu", "alpha"});
    read(*s, "physics", "nu", c.nu);
    read(*s, "physics", "alpha", c.alpha);
  }
  if (auto s = section(root, "time")) {
    check_keys(*s, "time", {"T", "K", "scheme"});
    read(*s, "time", "T", c.T);
    read(*s, "time", "K", c.K);
    read(*s, "time", "scheme", c.scheme);
  }
  if (auto s = section(root, "initial")) {
    check_keys(*s, "initial", {"modes"});
    read_modes(*s, "initial", "modes", c.initial);
  }
  if (auto s = section(root, "noise")) {
    check_keys(*s, "noise", {"family", "m", "gain", "saturation_level", "anchors", "sampling", "paths", "seed"});
    read(*s, "noise", "family", c.noise.family);
    read(*s, "noise", "m", c.noise.m);
    read(*s, "noise", "gain", c.noise.gain);
    read(*s, "noise", "saturation_level", c.noise.saturation_level);
    read(*s, "noise", "sampling", c.noise.sampling);
    read(*s, "noise", "paths", c.noise.paths);
    read(*s, "noise", "seed", c.noise.seed);
    if (auto a = section(*s, "anchors")) {
      if (!a->is_array()) throw ConfigError("noise.anchors", "expected an array of mode lists");
      for (std::size_t l = 0; l < a->size(); ++l)
        c.noise.anchors.push_back(read_modes((*a)[l], "noise.anchors[" + std::to_string(l) + "]"));
      if (!s->contains("m")) c.noise.m = static_cast<int>(c.noise.anchors.size());
    }
  }
  if (auto s = section(root, "cost")) {
    check_keys(*s, "cost", {"tracking_weight", "lambda", "terminal", "target", "target_modes", "planted_control"});
    read(*s, "cost", "tracking_weight", c.cost.tracking_weight);
    read(*s, "cost", "lambda", c.cost.lambda);
    read(*s, "cost", "terminal", c.cost.terminal);
    read(*s, "cost", "target", c.cost.target);
    read_modes(*s, "cost", "target_modes", c.cost.target_modes);
    read_modes(*s, "cost", "planted_control", c.cost.planted_control);
  }
  if (auto s = section(root, "control")) {
    check_keys(*s, "control", {"parametrization", "M", "initial"});
    read(*s, "control", "parametrization", c.control.parametrization);
    read(*s, "control", "M", c.control.M);
    read_modes(*s, "control", "initial", c.control.initial);
  }
  if (auto s = section(root, "tangent")) {
    check_keys(*s, "tangent", {"forcing"});
    read_modes(*s, "tangent", "forcing", c.tangent_forcing);
  }
  if (auto s = section(root, "optimizer")) {
    check_keys(*s, "optimizer",
               {"iters", "step0", "armijo_c", "shrink", "grow", "max_step", "max_backtracks", "tol"});
    auto& o = c.optimizer;
    read(*s, "optimizer", "iters", o.iters);
    read(*s, "optimizer", "step0", o.step0);
    read(*s, "optimizer", "armijo_c", o.armijo_c);
    read(*s, "optimizer", "shrink", o.shrink);
    read(*s, "optimizer", "grow", o.grow);
    read(*s, "optimizer", "max_step", o.max_step);
    read(*s, "optimizer", "max_backtracks", o.max_backtracks);
    read(*s, "optimizer", "tol", o.tol);
  }
  if (auto s = section(root, "adjoint")) {
    check_keys(*s, "adjoint", {"backend", "ridge", "features"});
    read(*s, "adjoint", "backend", c.adjoint.backend);
    read(*s, "adjoint", "ridge", c.adjoint.ridge);
    read(*s, "adjoint", "features", c.adjoint.features);
  }
  if (auto s = section(root, "diagnostics")) {
    check_keys(*s, "diagnostics", {"C_max", "epsilon", "L", "xi_C0", "moment"});
    read(*s, "diagnostics", "C_max", c.diagnostics.C_max);
    read(*s, "diagnostics", "epsilon", c.diagnostics.epsilon);
    read(*s, "diagnostics", "L", c.diagnostics.L);
    read(*s, "diagnostics", "xi_C0", c.diagnostics.xi_C0);
    read(*s, "diagnostics", "moment", c.diagnostics.moment);
  }
  if (auto s = section(root, "verify")) {
    check_keys(*s, "verify",
               {"triples", "seed", "rhos", "gateaux_order", "fd_eps", "triangle_tol", "duality_tol", "duality_se"});
    auto& v = c.verify;
    read(*s, "verify", "triples", v.triples);
    read(*s, "verify", "seed", v.seed);
    read(*s, "verify", "gateaux_order", v.gateaux_order);
    read(*s, "verify", "fd_eps", v.fd_eps);
    read(*s, "verify", "triangle_tol", v.triangle_tol);
    read(*s, "verify", "duality_tol", v.duality_tol);
    read(*s, "verify", "duality_se", v.duality_se);
    if (auto r = section(*s, "rhos")) {
      if (!r->is_array() || r->empty()) throw ConfigError("verify.rhos", "expected a non-empty array of numbers");
      v.rhos.clear();
      for (const auto& x : *r) {
        if (!x.is_number()) throw ConfigError("verify.rhos", "expected numbers");
        v.rhos.push_back(x.get<double>());
      }
    }
  }
  if (auto s = section(root, "output")) {
    check_keys(*s, "output", {"max_paths"});
    read(*s, "output", "max_paths", c.max_output_paths);
  }
  read(root, "", "workers", c.workers);
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str());
}

std::string resolved_json(const ScenarioConfig& c) {
  json anchors = json::array();
  for (const auto& a : c.noise.anchors) anchors.push_back(modes_json(a));
  const auto& o = c.optimizer;
  json j = {
      {"band", {{"N", c.N}, {"Q", c.Q == 0 ? 3 * c.N + 1 : c.Q}}},
      {"physics", {{"nu", c.nu}, {"alpha", c.alpha}}},
      {"time", {{"T", c.T}, {"K", c.K}, {"scheme", c.scheme}}},
      {"initial", {{"modes", modes_json(c.initial)}}},
      {"noise",
       {{"family", c.noise.family},
        {"m", c.noise.m},
        {"gain", c.noise.gain},
        {"saturation_level", c.noise.saturation_level},
        {"anchors", anchors},
        {"sampling", c.noise.sampling},
        {"paths", c.noise.paths},
        {"seed", c.noise.seed}}},
      {"cost",
       {{"tracking_weight", c.cost.tracking_weight},
        {"lambda", c.cost.lambda},
        {"terminal", c.cost.terminal},
        {"target", c.cost.target},
        {"target_modes", modes_json(c.cost.target_modes)},
        {"planted_control", modes_json(c.cost.planted_control)}}},
      {"control",
       {{"parametrization", c.control.parametrization},
        {"M", c.control.M},
        {"initial", modes_json(c.control.initial)}}},
      {"tangent", {{"forcing", modes_json(c.tangent_forcing)}}},
      {"optimizer",
       {{"iters", o.iters},
        {"step0", o.step0},
        {"armijo_c", o.armijo_c},
        {"shrink", o.shrink},
        {"grow", o.grow},
        {"max_step", o.max_step},
        {"max_backtracks", o.max_backtracks},
        {"tol", o.tol}}},
      {"adjoint", {{"backend", c.adjoint.backend}, {"ridge", c.adjoint.ridge}, {"features", c.adjoint.features}}},
      {"diagnostics",
       {{"C_max", c.diagnostics.C_max},
        {"epsilon", c.diagnostics.epsilon},
        {"L", c.diagnostics.L},
        {"xi_C0", c.diagnostics.xi_C0},
        {"moment", c.diagnostics.moment}}},
      {"verify",
       {{"triples", c.verify.triples},
        {"seed", c.verify.seed},
        {"rhos", c.verify.rhos},
        {"gateaux_order", c.verify.gateaux_order},
        {"fd_eps", c.verify.fd_eps},
        {"triangle_tol", c.verify.triangle_tol},
        {"duality_tol", c.verify.duality_tol},
        {"duality_se", c.verify.duality_se}}},
      {"output", {{"max_paths", c.max_output_paths}}},
  };
  return j.dump(2);
}

namespace {

SpectralField field_from_modes(const Band& band, const std::vector<ModeEntry>& modes, const std::string& path) {
  SpectralField f(band);
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const auto& m = modes[i];
    const std::string p = path + "[" + std::to_string(i) + "]";
    if (m.j < 1 || m.j > band.N) throw ConfigError(p + ".j", "mode index outside 1..N");
    if (m.k < 1 || m.k > band.N) throw ConfigError(p + ".k", "mode index outside 1..N");
    f[band.index({m.j, m.k})] += m.c;
  }
  return f;
}

}  // namespace

Scenario build_scenario(const ScenarioConfig& c, const ExecPolicy& policy) {
  if (c.N < 1) throw ConfigError("band.N", "must be >= 1");
  const int Q = c.Q == 0 ? 3 * c.N + 1 : c.Q;
  if (Q < 3 * c.N + 1) throw ConfigError("band.Q", "must be at least 3N + 1 = " + std::to_string(3 * c.N + 1));
  if (!(c.nu >= 0.0)) throw ConfigError("physics.nu", "must be >= 0");
  if (!(c.alpha > 0.0)) throw ConfigError("physics.alpha", "must be > 0");
  if (!(c.T > 0.0)) throw ConfigError("time.T", "must be > 0");
  if (c.K < 1) throw ConfigError("time.K", "must be >= 1");
  if (c.scheme != "semi_implicit" && c.scheme != "midpoint")
    throw ConfigError("time.scheme", "expected semi_implicit or midpoint");
  if (c.noise.m < 1) throw ConfigError("noise.m", "must be >= 1");
  if (!c.noise.anchors.empty() && static_cast<int>(c.noise.anchors.size()) != c.noise.m)
    throw ConfigError("noise.anchors", "needs exactly m mode lists");
  if (c.noise.sampling != "tree" && c.noise.sampling != "monte_carlo")
    throw ConfigError("noise.sampling", "expected tree or monte_carlo");
  if (c.noise.sampling == "tree" && static_cast<long>(c.noise.m) * c.K > kMaxTreeExponent)
    throw ConfigError("noise.sampling", "scenario tree too large: m*K = " + std::to_string(c.noise.m * c.K) +
                                            " exceeds " + std::to_string(kMaxTreeExponent));
  if (c.noise.sampling == "monte_carlo" && c.noise.paths < 1) throw ConfigError("noise.paths", "must be >= 1");
  if (!(c.control.M > 0.0)) throw ConfigError("control.M", "must be > 0");
  if (c.control.parametrization != "open_loop" && c.control.parametrization != "tree_adapted")
    throw ConfigError("control.parametrization", "expected open_loop or tree_adapted");
  if (c.control.parametrization == "tree_adapted" && c.noise.sampling != "tree")
    throw ConfigError("control.parametrization", "tree_adapted controls need noise.sampling = tree");
  if (c.cost.target != "zero" && c.cost.target != "modes" && c.cost.target != "planted")
    throw ConfigError("cost.target", "expected zero, modes or planted");
  if (c.optimizer.iters < 0) throw ConfigError("optimizer.iters", "must be >= 0");
  if (!(c.optimizer.step0 > 0.0)) throw ConfigError("optimizer.step0", "must be > 0");
  if (!(c.optimizer.shrink > 0.0 && c.optimizer.shrink < 1.0)) throw ConfigError("optimizer.shrink", "must be in (0, 1)");
  if (c.optimizer.max_backtracks < 0) throw ConfigError("optimizer.max_backtracks", "must be >= 0");
  if (!(c.adjoint.ridge >= 0.0)) throw ConfigError("adjoint.ridge", "must be >= 0");
  if (c.verify.triples < 1) throw ConfigError("verify.triples", "must be >= 1");
  for (std::size_t r = 0; r < c.verify.rhos.size(); ++r)
    if (!(c.verify.rhos[r] > 0.0) || (r > 0 && !(c.verify.rhos[r] < c.verify.rhos[r - 1])))
      throw ConfigError("verify.rhos", "must be positive and decreasing");
  if (c.diagnostics.moment < 1) throw ConfigError("diagnostics.moment", "must be >= 1");

  Scenario s;
  s.config = c;
  const Band band{c.N, c.alpha};
  ControlProblem& pb = s.problem;
  pb.config = SolverConfig::make(band, c.nu, c.T, c.K);
  pb.config.Q = Q;
  pb.config.scheme = c.scheme == "midpoint" ? Scheme::midpoint : Scheme::semi_implicit;
  pb.Y0 = field_from_modes(band, c.initial, "initial.modes");
  pb.policy = policy;
  pb.M = c.control.M;

  try {
    pb.noise.family = diffusion_family_from_string(c.noise.family);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("noise.family", e.what());
  }
  pb.noise.gain = c.noise.gain;
  pb.noise.saturation_level = c.noise.saturation_level;
  for (int l = 0; l < c.noise.m; ++l) {
    if (c.noise.anchors.empty()) {
      SpectralField a(band);
      a.coeffs().setOnes();
      pb.noise.anchors.push_back(a);
    } else {
      pb.noise.anchors.push_back(
          field_from_modes(band, c.noise.anchors[l], "noise.anchors[" + std::to_string(l) + "]"));
    }
  }
  try {
    pb.noise.validate(band);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("noise", e.what());
  }
  std::optional<ScenarioTree> tree;
  if (c.noise.sampling == "tree") {
    tree.emplace(c.K, pb.config.dt, c.noise.m);
    pb.ensemble = Ensemble::from_tree(*tree);
  } else {
    pb.ensemble = Ensemble::monte_carlo(c.noise.seed, c.noise.paths, c.K, pb.config.dt, c.noise.m);
  }

  std::string backend = c.adjoint.backend;
  if (backend == "auto") backend = tree ? "tree_exact" : "regression";
  try {
    pb.adjoint.backend = backend_from_string(backend);
    pb.adjoint.regression.features = feature_map_from_string(c.adjoint.features);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("adjoint", e.what());
  }
  if (pb.adjoint.backend == Backend::tree_exact && !tree)
    throw ConfigError("adjoint.backend", "tree_exact needs noise.sampling = tree");
  pb.adjoint.regression.ridge = c.adjoint.ridge;

  pb.cost.tracking_weight = c.cost.tracking_weight;
  pb.cost.lambda = c.cost.lambda;
  if (!(c.cost.lambda >= 0.0)) throw ConfigError("cost.lambda", "must be >= 0");
  if (!(c.cost.tracking_weight >= 0.0)) throw ConfigError("cost.tracking_weight", "must be >= 0");
  try {
    pb.cost.terminal = terminal_kind_from_string(c.cost.terminal);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("cost.terminal", e.what());
  }
  if (c.cost.target == "modes") {
    pb.cost.targets.assign(c.K + 1, field_from_modes(band, c.cost.target_modes, "cost.target_modes"));
  } else if (c.cost.target == "planted") {
    // deterministic run of the planted control
    const SpectralField u = field_from_modes(band, c.cost.planted_control, "cost.planted_control");
    const std::vector<SpectralField> controls(c.K, u);
    WienerPath quiet;
    quiet.increments = Eigen::MatrixXd::Zero(c.K, c.noise.m);
    quiet.dt = pb.config.dt;
    PairingWorkspace ws(band, Q);
    try {
      pb.cost.targets = integrate(pb.Y0, controls, quiet, pb.noise, pb.config, ws).states;
    } catch (const NumericalAbort& e) {
      throw ConfigError("cost.planted_control", std::string("planted run failed: ") + e.what());
    }
  }

  const SpectralField u0 = field_from_modes(band, c.control.initial, "control.initial");
  const SpectralField psi = c.tangent_forcing.empty() ? SpectralField(band, Eigen::VectorXd::Constant(band.size(), 0.1))
                                                      : field_from_modes(band, c.tangent_forcing, "tangent.forcing");
  s.U0 = ControlProcess::open_loop(band, c.K, u0);
  s.Psi = ControlProcess::open_loop(band, c.K, psi);
  if (c.control.parametrization == "tree_adapted") {
    s.U0 = ControlProcess::tree_adapted(band, *tree, s.U0);
    s.Psi = ControlProcess::tree_adapted(band, *tree, s.Psi);
  }
  try {
    require_admissible(s.U0, pb.M, pb.config.dt);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("control.initial", e.what());
  }
  try {
    pb.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("scenario", e.what());
  }
  return s;
}

}  // namespace alphactl::cli
