#include "lockleak/batch.hpp"
#include "lockleak/benchgen.hpp"
#include "lockleak/gatelock.hpp"
#include "lockleak/oracle.hpp"
#include "lockleak/sensitize.hpp"
#include "lockleak/sim.hpp"
#include "lockleak/word.hpp"

#include <benchmark/benchmark.h>

using namespace lockleak;

namespace {

LockedNetlist locked_spn(LockScheme scheme, int width, std::uint64_t seed) {
    LockingConfig c;
    c.scheme = scheme;
    c.size = KeySize::pct(25);
    c.seed = seed;
    return lock(toy_spn(width, 2), c);
}

void BM_ClassifyFig5(benchmark::State& state) {
    const Netlist n = fig5_example().netlist;
    ClassifyOptions o;
    o.mode = static_cast<AnalysisMode>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(classify_all_bits(n, ScenarioKind::SetLlKey, o));
}
BENCHMARK(BM_ClassifyFig5)
    ->Arg(static_cast<int>(AnalysisMode::DualRail))
    ->Arg(static_cast<int>(AnalysisMode::Exact))
    ->Unit(benchmark::kMicrosecond);

void BM_ClassifyLockedSpn(benchmark::State& state) {
    const Netlist n = locked_spn(LockScheme::Epic, static_cast<int>(state.range(0)), 3).netlist;
    for (auto _ : state) benchmark::DoNotOptimize(classify_all_bits(n, ScenarioKind::SetAll));
    state.counters["secret_bits"] = static_cast<double>(secret_bits(n).size());
}
BENCHMARK(BM_ClassifyLockedSpn)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_ExactVersusOracle(benchmark::State& state) {
    LockingConfig c;
    c.size = KeySize::bits(6);
    c.seed = 11;
    const Netlist n = lock(toy_spn(4, 1), c).netlist;
    ClassifyOptions o;
    o.mode = AnalysisMode::Exact;
    const bool oracle = state.range(0) != 0;
    for (auto _ : state)
        for (int b : secret_bits(n))
            benchmark::DoNotOptimize(oracle ? brute_force_leakage(n, b, ScenarioKind::SetAll).verdict
                                            : classify_bit(n, b, ScenarioKind::SetAll, o).verdict);
}
BENCHMARK(BM_ExactVersusOracle)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_DmuxInsertion(benchmark::State& state) {
    const LockedNetlist base = as_locked(lower_to_gates(toy_xtea()));
    std::uint64_t seed = 1;
    for (auto _ : state) {
        LockingConfig c;
        c.scheme = LockScheme::Dmux;
        c.size = KeySize::pct(static_cast<double>(state.range(0)));
        c.seed = seed++;
        benchmark::DoNotOptimize(dmux_lock(base, c));
    }
}
BENCHMARK(BM_DmuxInsertion)->Arg(10)->Arg(25)->Unit(benchmark::kMillisecond);

void BM_CorrectKeyMiter(benchmark::State& state) {
    const Netlist ref = lower_to_gates(toy_xtea());
    LockingConfig c;
    c.size = KeySize::pct(25);
    const LockedNetlist l = lock(ref, c);
    const Netlist keyed = apply_key(l, l.key);
    for (auto _ : state) benchmark::DoNotOptimize(equivalence_check(keyed, ref, EquivalenceMethod::SatMiter).equal);
}
BENCHMARK(BM_CorrectKeyMiter)->Unit(benchmark::kMicrosecond);

void BM_Batch(benchmark::State& state) {
    const BatchSpec spec = parse_batch_spec(
        R"({"benchmark":{"name":"toy_spn"},"schemes":["epic","dmux"],"key_sizes":["25%"],"variants":10})");
    for (auto _ : state) benchmark::DoNotOptimize(run_batch(spec, static_cast<int>(state.range(0))).verdicts.size());
}
BENCHMARK(BM_Batch)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
