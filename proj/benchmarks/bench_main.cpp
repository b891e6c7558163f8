#include <benchmark/benchmark.h>

#include <vector>

#include "vortspec/annulus.hpp"
#include "vortspec/ns_solver.hpp"
#include "vortspec/pressure.hpp"
#include "vortspec/specfun.hpp"

using namespace vortspec;

namespace {

RunConfig config(int K)
{
    RunConfig c;
    c.K = K;
    c.J = K;
    c.dt = 1e-3;
    c.T_final = 1.0;
    c.init.kind = InitSpec::Kind::random;
    c.init.seed = 42;
    return c;
}

void BM_BesselZero(benchmark::State& state)
{
    for (auto _ : state) {
        for (int j = 1; j <= 16; ++j) benchmark::DoNotOptimize(specfun::bessel_j_zero(static_cast<int>(state.range(0)), j));
    }
}
BENCHMARK(BM_BesselZero)->Arg(1)->Arg(16)->Arg(48);

void BM_BuildTable(benchmark::State& state)
{
    const int K = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(build_table(K, K, recommended_quad_points(K, K)));
}
BENCHMARK(BM_BuildTable)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Advection(benchmark::State& state)
{
    const NsSolver s(config(static_cast<int>(state.range(0))));
    const SpectralField w = s.initial_vorticity();
    for (auto _ : state) benchmark::DoNotOptimize(advection(w, s.grid()));
}
BENCHMARK(BM_Advection)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_NsStep(benchmark::State& state)
{
    const NsSolver s(config(static_cast<int>(state.range(0))));
    SolverState st = s.initial_state();
    for (auto _ : state) st = s.step(st);
}
BENCHMARK(BM_NsStep)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_NewtonianPotential(benchmark::State& state)
{
    const NsSolver s(config(8));
    const GridField w = to_grid(s.initial_vorticity(), s.grid());
    std::vector<Point> pts;
    for (int i = 0; i < state.range(0); ++i) pts.push_back({0.9 * i / state.range(0), 0.1});
    for (auto _ : state) benchmark::DoNotOptimize(newtonian_potential(w, pts));
}
BENCHMARK(BM_NewtonianPotential)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_RecoverPressure(benchmark::State& state)
{
    const NsSolver s(config(8));
    const SpectralField w = s.initial_vorticity();
    PressureOptions opt;
    opt.radial_cells = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(recover_pressure(w, 0.1, s.grid(), opt));
}
BENCHMARK(BM_RecoverPressure)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_GalerkinSpectra(benchmark::State& state)
{
    GalerkinOptions opt;
    opt.radial_degree = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(galerkin_spectra(0.5, opt));
}
BENCHMARK(BM_GalerkinSpectra)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_AnnulusCirculation(benchmark::State& state)
{
    for (auto _ : state) benchmark::DoNotOptimize(annulus_stokes_circulation(0.5, CirculationOptions{}));
}
BENCHMARK(BM_AnnulusCirculation)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
