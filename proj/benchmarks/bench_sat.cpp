#include "lockleak/benchgen.hpp"
#include "lockleak/rng.hpp"
#include "lockleak/sat.hpp"
#include "lockleak/tseitin.hpp"
#include "lockleak/word.hpp"

#include <benchmark/benchmark.h>

using namespace lockleak;

namespace {

Cnf pigeonhole(int pigeons, int holes) {
    Cnf cnf;
    cnf.num_vars = pigeons * holes;
    auto var = [&](int p, int h) { return p * holes + h + 1; };
    for (int p = 0; p < pigeons; ++p) {
        std::vector<int> some;
        for (int h = 0; h < holes; ++h) some.push_back(var(p, h));
        cnf.add_clause(std::move(some));
    }
    for (int h = 0; h < holes; ++h)
        for (int p = 0; p < pigeons; ++p)
            for (int q = p + 1; q < pigeons; ++q) cnf.add_clause({-var(p, h), -var(q, h)});
    return cnf;
}

// Uniform random 3-SAT at the given clause/variable ratio (x100).
Cnf random_3sat(int vars, int ratio_x100, std::uint64_t seed) {
    Rng rng(seed);
    Cnf cnf;
    cnf.num_vars = vars;
    const int clauses = vars * ratio_x100 / 100;
    for (int c = 0; c < clauses; ++c) {
        std::vector<int> cl;
        for (int k = 0; k < 3; ++k) {
            const int v = 1 + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(vars)));
            cl.push_back(coin(rng) ? v : -v);
        }
        cnf.add_clause(std::move(cl));
    }
    return cnf;
}

void BM_Pigeonhole(benchmark::State& state) {
    const int holes = static_cast<int>(state.range(0));
    const Cnf cnf = pigeonhole(holes + 1, holes);
    for (auto _ : state) benchmark::DoNotOptimize(solve(cnf, SolveBudget{}).status);
}
BENCHMARK(BM_Pigeonhole)->DenseRange(5, 8)->Unit(benchmark::kMillisecond);

void BM_Random3Sat(benchmark::State& state) {
    const auto vars = static_cast<int>(state.range(0));
    std::uint64_t seed = 1;
    for (auto _ : state) {
        state.PauseTiming();
        const Cnf cnf = random_3sat(vars, 426, seed++);
        state.ResumeTiming();
        benchmark::DoNotOptimize(solve(cnf, SolveBudget{}).status);
    }
}
BENCHMARK(BM_Random3Sat)->Arg(50)->Arg(100)->Arg(150)->Unit(benchmark::kMillisecond);

void BM_TseitinToyXtea(benchmark::State& state) {
    const Netlist n = lower_to_gates(toy_xtea(static_cast<int>(state.range(0)), 2));
    for (auto _ : state) {
        Cnf cnf;
        benchmark::DoNotOptimize(tseitin_encode(n, cnf));
    }
    state.counters["gates"] = static_cast<double>(n.gates.size());
}
BENCHMARK(BM_TseitinToyXtea)->Arg(4)->Arg(8)->Arg(16);

void BM_IncrementalAssumptions(benchmark::State& state) {
    const Cnf cnf = random_3sat(120, 380, 7);
    Solver s;
    s.add_cnf(cnf);
    int v = 1;
    for (auto _ : state) {
        const int a[] = {v};
        benchmark::DoNotOptimize(s.solve(SolveBudget{}, a).status);
        v = v % 120 + 1;
    }
}
BENCHMARK(BM_IncrementalAssumptions)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
