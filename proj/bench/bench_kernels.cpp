// Serial reference vs OpenMP kernels: Fekete pair sums and phase-grid cells.
#include <benchmark/benchmark.h>
#include <omp.h>

#include "gpem/fekete.hpp"
#include "gpem/phase_map.hpp"

using namespace gpem;

namespace {

const FieldParams kField{-4, 3, 2.59, 1};

Eigen::VectorXd particles(int n) {
    const auto z = fekete_initial(n, kField, 1);
    return Eigen::Map<const Eigen::VectorXd>(z.data(), n);
}

void BM_EnergySerial(benchmark::State& st) {
    const auto z = particles(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(fekete_energy_serial(z, kField));
}
void BM_Energy(benchmark::State& st) {
    const auto z = particles(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(fekete_energy(z, kField, 0));
}
void BM_GradientSerial(benchmark::State& st) {
    const auto z = particles(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(fekete_gradient_serial(z, kField));
}
void BM_Gradient(benchmark::State& st) {
    const auto z = particles(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(fekete_gradient(z, kField, 0));
}
void BM_HessianSerial(benchmark::State& st) {
    const auto z = particles(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(fekete_hessian_serial(z, kField));
}
void BM_Hessian(benchmark::State& st) {
    const auto z = particles(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(fekete_hessian(z, kField, 0));
}

void BM_PhaseGridSerial(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(phase_grid_serial({-8, 2, 6}, {-2, 13, 6}));
}
void BM_PhaseGrid(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(phase_grid({-8, 2, 6}, {-2, 13, 6}, 0));
}

}  // namespace

BENCHMARK(BM_EnergySerial)->Arg(100)->Arg(400)->Arg(1600);
BENCHMARK(BM_Energy)->Arg(100)->Arg(400)->Arg(1600);
BENCHMARK(BM_GradientSerial)->Arg(100)->Arg(400)->Arg(1600);
BENCHMARK(BM_Gradient)->Arg(100)->Arg(400)->Arg(1600);
BENCHMARK(BM_HessianSerial)->Arg(100)->Arg(400);
BENCHMARK(BM_Hessian)->Arg(100)->Arg(400);
BENCHMARK(BM_PhaseGridSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PhaseGrid)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
    benchmark::Initialize(&argc, argv);
    benchmark::AddCustomContext("omp_max_threads", std::to_string(omp_get_max_threads()));
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
}
