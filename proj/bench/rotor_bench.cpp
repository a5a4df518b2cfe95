// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "rotor/ensemble.hpp"
#include "rotor/quantum/liouvillian.hpp"
#include "rotor/quantum/master.hpp"

using namespace rotor;

namespace {

classical::EnsembleConfig ensemble_config(std::size_t trajectories) {
    classical::EnsembleConfig c;
    c.params.inertia = 1.0;
    c.params.kappa = 10.0;
    c.params.n_hot = 1.0;
    c.params.n_cold = 0.0;
    c.integ = {classical::Scheme::euler, classical::NoiseModel::backaction_free, 1e-3};
    c.t_max = 1.0;
    c.output_stride = 100;
    c.trajectories = trajectories;
    c.base_seed = 1;
    return c;
}

void BM_EnsembleParallel(benchmark::State& st) {
    const auto c = ensemble_config(static_cast<std::size_t>(st.range(0)));
    omp_set_num_threads(static_cast<int>(st.range(1)));
    for (auto _ : st) benchmark::DoNotOptimize(classical::run_ensemble(c));
    st.SetItemsProcessed(st.iterations() * st.range(0) * 1000);
}

void BM_EnsembleSerial(benchmark::State& st) {
    const auto c = ensemble_config(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(classical::run_ensemble_serial(c));
    st.SetItemsProcessed(st.iterations() * st.range(0) * 1000);
}

EngineParams quantum_params() {
    EngineParams p;
    p.inertia = 10.0;
    p.kappa = 10.0;
    p.n_hot = 1.0;
    p.n_cold = 0.0;
    return p;
}

void BM_LiouvillianBlocks(benchmark::State& st) {
    const int half = static_cast<int>(st.range(0));
    const quantum::QuantumSpace s{-half, half, 20};
    omp_set_num_threads(static_cast<int>(st.range(1)));
    const quantum::Liouvillian lv(s, quantum_params());
    const quantum::Matrix rho = quantum::von_mises_state(s, 10.0, 1.0);
    quantum::Matrix out;
    for (auto _ : st) {
        lv.apply(rho, out);
        benchmark::DoNotOptimize(out.data());
    }
}

void BM_LiouvillianReference(benchmark::State& st) {
    const int half = static_cast<int>(st.range(0));
    const quantum::QuantumSpace s{-half, half, 6};
    const quantum::OperatorSet ops(s, quantum_params());
    const quantum::Matrix rho = quantum::to_full(quantum::von_mises_state(s, 10.0, 1.0), s);
    for (auto _ : st) benchmark::DoNotOptimize(quantum::reference_apply(ops, rho));
}

} // namespace

BENCHMARK(BM_EnsembleParallel)->Args({2000, 1})->Args({2000, 4})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnsembleSerial)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LiouvillianBlocks)->Args({20, 1})->Args({60, 1})->Args({120, 1})->Args({120, 4})
    ->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_LiouvillianReference)->Arg(20)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
