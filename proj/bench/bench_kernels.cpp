// Serial reference loops against the OpenMP path loops on one ensemble.
#include "alphactl/adjoint.hpp"

#include <benchmark/benchmark.h>

using namespace alphactl;

namespace {

struct Setup {
  SolverConfig config;
  SpectralField Y0;
  DiffusionSpec noise;
  Ensemble ensemble;
  ControlProcess U;
  CostSpec cost;

  explicit Setup(std::size_t paths) {
    const Band band{4, 0.1};
    config = SolverConfig::make(band, 0.05, 1.0, 32);
    Y0 = SpectralField(band);
    for (int i = 0; i < band.size(); ++i) Y0[i] = 0.1 * std::cos(1.0 + 2 * i);
    noise.family = DiffusionFamily::linear;
    noise.gain = 0.3;
    noise.anchors = {SpectralField(band, Eigen::VectorXd::Ones(band.size()))};
    ensemble = Ensemble::monte_carlo(3, paths, config.K, config.dt, 1);
    U = ControlProcess::open_loop(band, config.K);
    cost.terminal = TerminalKind::v;
  }
};

ExecPolicy policy_for(int workers) { return workers == 0 ? ExecPolicy::serial() : ExecPolicy{Exec::parallel, workers}; }

void BM_Nonlinearity(benchmark::State& state) {
  const Band band{static_cast<int>(state.range(0)), 0.1};
  const PairingWorkspace ws(band, 3 * band.N + 1);
  SpectralField y(band, Eigen::VectorXd::LinSpaced(band.size(), -1.0, 1.0));
  for (auto _ : state) benchmark::DoNotOptimize(ws.state_nonlinearity(y));
}
BENCHMARK(BM_Nonlinearity)->Arg(2)->Arg(4)->Arg(8);

// range(0) = workers, 0 selects the serial reference loop
void BM_Ensemble(benchmark::State& state) {
  const Setup s(256);
  const ExecPolicy policy = policy_for(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(integrate_all(s.Y0, s.U, s.ensemble, s.noise, s.config, policy));
}
BENCHMARK(BM_Ensemble)->Arg(0)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_Backward(benchmark::State& state) {
  const Setup s(256);
  const ExecPolicy policy = policy_for(static_cast<int>(state.range(0)));
  const auto base = integrate_all(s.Y0, s.U, s.ensemble, s.noise, s.config, policy);
  AdjointOptions opt;
  opt.backend = Backend::regression;
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_backward(base, s.U, s.ensemble, s.cost, s.noise, s.config, opt, policy));
}
BENCHMARK(BM_Backward)->Arg(0)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
