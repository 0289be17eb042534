#include "lockleak/errors.hpp"
#include "lockleak/sat.hpp"
#include "lockleak/sim.hpp"
#include "lockleak/tseitin.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

using namespace lockleak;
using lockleak::testkit::bits_of;
using lockleak::testkit::random_cnf;
using lockleak::testkit::random_netlist;
using lockleak::testkit::RandomShape;
using lockleak::testkit::truth_table_sat;

namespace {

const SolveBudget kNoLimit{};

bool satisfies(const Cnf& cnf, const SolveResult& r) {
    for (const auto& c : cnf.clauses) {
        bool sat = false;
        for (int l : c) sat = sat || r.value(l);
        if (!sat) return false;
    }
    return true;
}

Cnf pigeonhole(int pigeons, int holes) {
    Cnf cnf;
    cnf.num_vars = pigeons * holes;
    auto var = [&](int p, int h) { return p * holes + h + 1; };
    for (int p = 0; p < pigeons; ++p) {
        std::vector<int> some;
        for (int h = 0; h < holes; ++h) some.push_back(var(p, h));
        cnf.add_clause(some);
    }
    for (int h = 0; h < holes; ++h)
        for (int p = 0; p < pigeons; ++p)
            for (int q = p + 1; q < pigeons; ++q) cnf.add_clause({-var(p, h), -var(q, h)});
    return cnf;
}

// Uniform random 3-SAT near the phase transition.
Cnf hard_3sat(std::uint64_t seed, int vars) {
    Rng rng(seed);
    Cnf cnf;
    cnf.num_vars = vars;
    const int clauses = vars * 426 / 100;
    for (int c = 0; c < clauses; ++c) {
        std::vector<int> cl;
        for (int i = 0; i < 3; ++i) {
            const int v = 1 + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(vars)));
            cl.push_back(coin(rng) ? v : -v);
        }
        cnf.add_clause(cl);
    }
    return cnf;
}

} // namespace

TEST(Solve, UnitChain) {
    Cnf cnf;
    cnf.num_vars = 2;
    cnf.add_clause({1, 2});
    cnf.add_clause({-1});
    const auto r = solve(cnf, kNoLimit);
    ASSERT_EQ(r.status, SolveStatus::Sat);
    EXPECT_FALSE(r.value(1));
    EXPECT_TRUE(r.value(2));
    EXPECT_EQ(r.exhausted, ExhaustedBound::None);
}

TEST(Solve, Contradiction) {
    Cnf cnf;
    cnf.num_vars = 1;
    cnf.add_clause({1});
    cnf.add_clause({-1});
    EXPECT_EQ(solve(cnf, kNoLimit).status, SolveStatus::Unsat);

    Cnf empty_clause;
    empty_clause.num_vars = 3;
    empty_clause.add_clause(std::vector<int>{});
    EXPECT_EQ(solve(empty_clause, kNoLimit).status, SolveStatus::Unsat);

    Cnf nothing;
    EXPECT_EQ(solve(nothing, kNoLimit).status, SolveStatus::Sat);
}

TEST(Solve, PigeonholeFourIntoThree) {
    const Cnf php = pigeonhole(4, 3);
    EXPECT_FALSE(truth_table_sat(php));
    EXPECT_EQ(solve(php, kNoLimit).status, SolveStatus::Unsat);

    const Cnf fits = pigeonhole(3, 3);
    EXPECT_TRUE(truth_table_sat(fits));
    const auto r = solve(fits, kNoLimit);
    ASSERT_EQ(r.status, SolveStatus::Sat);
    EXPECT_TRUE(satisfies(fits, r));

    EXPECT_EQ(solve(pigeonhole(7, 6), kNoLimit).status, SolveStatus::Unsat);
}

TEST(Solve, AgreesWithTruthTables) {
    Rng rng(2024);
    int sat = 0, unsat = 0;
    for (int i = 0; i < 2000; ++i) {
        const int vars = 1 + static_cast<int>(uniform_below(rng, 20));
        const int clauses = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(vars) * 6 + 1));
        const Cnf cnf = random_cnf(rng, vars, clauses, 4);
        const auto r = solve(cnf, kNoLimit);
        const bool expect = truth_table_sat(cnf);
        ASSERT_NE(r.status, SolveStatus::Unknown);
        ASSERT_EQ(r.status == SolveStatus::Sat, expect) << i;
        if (r.status == SolveStatus::Sat) {
            ASSERT_TRUE(satisfies(cnf, r)) << i;
            ++sat;
        } else {
            ++unsat;
        }
    }
    EXPECT_GT(sat, 100);
    EXPECT_GT(unsat, 100);
}

TEST(Solve, Assumptions) {
    Cnf cnf;
    cnf.num_vars = 3;
    cnf.add_clause({1, 2});
    cnf.add_clause({-1, 3});
    const std::vector<int> a1{-2};
    const auto r1 = solve(cnf, kNoLimit, a1);
    ASSERT_EQ(r1.status, SolveStatus::Sat);
    EXPECT_TRUE(r1.value(1));
    EXPECT_TRUE(r1.value(3));
    const std::vector<int> a2{-2, -3};
    EXPECT_EQ(solve(cnf, kNoLimit, a2).status, SolveStatus::Unsat);
    const std::vector<int> a3{1, -1};
    EXPECT_EQ(solve(cnf, kNoLimit, a3).status, SolveStatus::Unsat);
}

TEST(Solver, IncrementalClausesAndAssumptions) {
    Solver s;
    const int a = s.new_var();
    const int b = s.new_var();
    EXPECT_EQ(s.num_vars(), 2);
    EXPECT_TRUE(s.add_clause({a, b}));
    const std::vector<int> not_a{-a};
    auto r = s.solve(kNoLimit, not_a);
    ASSERT_EQ(r.status, SolveStatus::Sat);
    EXPECT_TRUE(r.value(b));
    s.add_clause({-b});
    r = s.solve(kNoLimit, not_a);
    EXPECT_EQ(r.status, SolveStatus::Unsat);
    // Failure under assumptions leaves the clause set usable.
    r = s.solve(kNoLimit);
    ASSERT_EQ(r.status, SolveStatus::Sat);
    EXPECT_TRUE(r.value(a));
    EXPECT_FALSE(s.add_clause({-a}));
    EXPECT_EQ(s.solve(kNoLimit).status, SolveStatus::Unsat);
}

TEST(Solver, IncrementalMatchesFreshSolves) {
    Rng rng(8);
    for (int i = 0; i < 200; ++i) {
        const int vars = 4 + static_cast<int>(uniform_below(rng, 12));
        const Cnf all = random_cnf(rng, vars, vars * 5, 3);
        Solver s;
        for (int v = 0; v < vars; ++v) s.new_var();
        Cnf prefix;
        prefix.num_vars = vars;
        for (const auto& c : all.clauses) {
            s.add_clause(std::span<const int>(c));
            prefix.clauses.push_back(c);
            if (prefix.clauses.size() % 7 != 0) continue;
            const auto r = s.solve(kNoLimit);
            ASSERT_EQ(r.status == SolveStatus::Sat, truth_table_sat(prefix));
            if (r.status == SolveStatus::Sat) {
                ASSERT_TRUE(satisfies(prefix, r));
            }
        }
    }
}

TEST(Budget, ConflictLimitIsDeterministic) {
    const Cnf php = pigeonhole(9, 8);
    SolveBudget b;
    b.conflicts = 200;
    const auto r1 = solve(php, b);
    const auto r2 = solve(php, b);
    EXPECT_EQ(r1.status, SolveStatus::Unknown);
    EXPECT_EQ(r1.exhausted, ExhaustedBound::Conflicts);
    EXPECT_EQ(r1.conflicts, r2.conflicts);
    EXPECT_EQ(to_string(r1.exhausted), "conflicts");

    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Cnf cnf = hard_3sat(seed, 120);
        SolveBudget c;
        c.conflicts = 300;
        const auto a = solve(cnf, c);
        const auto z = solve(cnf, c);
        ASSERT_EQ(a.status, z.status);
        ASSERT_EQ(a.conflicts, z.conflicts);
        ASSERT_EQ(a.model, z.model);
        if (a.status == SolveStatus::Sat) {
            ASSERT_TRUE(satisfies(cnf, a));
        }
    }
}

TEST(Budget, AnswersDoNotDependOnBudget) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Cnf cnf = hard_3sat(seed, 80);
        const auto free = solve(cnf, kNoLimit);
        ASSERT_NE(free.status, SolveStatus::Unknown);
        SolveBudget b = SolveBudget::classification_default();
        const auto bounded = solve(cnf, b);
        EXPECT_EQ(bounded.status, free.status);
        EXPECT_EQ(bounded.model, free.model);
    }
    EXPECT_EQ(SolveBudget::classification_default().time_ms, 10'000);
    EXPECT_EQ(SolveBudget::classification_default().conflicts, 2'000'000);
}

TEST(Budget, ZeroWallClockGivesUnknown) {
    SolveBudget b;
    b.time_ms = 0;
    const auto r = solve(pigeonhole(10, 9), b);
    EXPECT_EQ(r.status, SolveStatus::Unknown);
    EXPECT_EQ(r.exhausted, ExhaustedBound::WallClock);
}

TEST(Dimacs, FixedFormat) {
    Cnf cnf;
    cnf.num_vars = 2;
    cnf.add_clause({1, -2});
    EXPECT_EQ(emit_dimacs(cnf), "p cnf 2 1\n1 -2 0\n");
    const Cnf back = parse_dimacs("c comment\np cnf 2 1\n1 -2 0\n");
    EXPECT_EQ(back.num_vars, 2);
    EXPECT_EQ(back.clauses, cnf.clauses);
    // Clauses may span lines and share them.
    const Cnf multi = parse_dimacs("p cnf 3 2\n1 2\n -3 0 2 0\n");
    EXPECT_EQ(multi.clauses, (std::vector<std::vector<int>>{{1, 2, -3}, {2}}));
}

TEST(Dimacs, MalformedInputRejected) {
    EXPECT_THROW(parse_dimacs(""), InputError);
    EXPECT_THROW(parse_dimacs("1 2 0\n"), InputError);
    EXPECT_THROW(parse_dimacs("p cnf x 1\n1 0\n"), InputError);
    EXPECT_THROW(parse_dimacs("p dnf 2 1\n1 0\n"), InputError);
    EXPECT_THROW(parse_dimacs("p cnf 2 1\n1 a 0\n"), InputError);
    EXPECT_THROW(parse_dimacs("p cnf 2 1\n3 0\n"), InputError);
    EXPECT_THROW(parse_dimacs("p cnf 2 1\n1 2\n"), InputError);
    EXPECT_THROW(parse_dimacs("p cnf 2 2\n1 2 0\n"), InputError);
    EXPECT_THROW(parse_dimacs("p cnf 2 1\np cnf 2 1\n1 0\n"), InputError);
}

TEST(Dimacs, FuzzRoundTrip) {
    Rng rng(500);
    for (int i = 0; i < 500; ++i) {
        const int vars = 1 + static_cast<int>(uniform_below(rng, 50));
        const Cnf cnf = random_cnf(rng, vars, static_cast<int>(uniform_below(rng, 80)), 6);
        const std::string text = emit_dimacs(cnf);
        const Cnf back = parse_dimacs(text);
        ASSERT_EQ(back.num_vars, cnf.num_vars);
        ASSERT_EQ(back.clauses, cnf.clauses);
        ASSERT_EQ(emit_dimacs(back), text);
    }
}

TEST(Tseitin, SingleAnd) {
    Netlist n;
    const NetId a = n.add_input("a", PortRole::Operational, 0);
    const NetId b = n.add_input("b", PortRole::Operational, 1);
    const NetId y = n.add_gate(GateKind::And, {a, b});
    n.add_output(y);
    Cnf cnf;
    const auto lits = tseitin_encode(n, cnf);
    EXPECT_EQ(cnf.num_vars, 3);
    EXPECT_EQ(cnf.clauses.size(), 3u);
    for (std::uint64_t v = 0; v < 4; ++v) {
        const std::vector<int> as{(v & 1) ? lits[a] : -lits[a], (v & 2) ? lits[b] : -lits[b]};
        const auto r = solve(cnf, kNoLimit, as);
        ASSERT_EQ(r.status, SolveStatus::Sat);
        EXPECT_EQ(r.value(lits[y]), v == 3);
    }
}

TEST(Tseitin, ConstantsAndAliases) {
    Netlist n;
    const NetId one = n.add_gate(GateKind::Const1, {});
    n.add_output(one);
    Cnf cnf;
    const auto lits = tseitin_encode(n, cnf);
    ASSERT_EQ(cnf.clauses.size(), 1u);
    EXPECT_EQ(cnf.clauses[0], std::vector<int>{lits[one]});

    Netlist m;
    const NetId a = m.add_input("a", PortRole::Operational, 0);
    const NetId inv = m.add_gate(GateKind::Not, {a});
    const NetId buf = m.add_gate(GateKind::Buf, {inv});
    m.add_output(buf);
    Cnf c2;
    const auto l2 = tseitin_encode(m, c2);
    EXPECT_TRUE(c2.clauses.empty());
    EXPECT_EQ(l2[inv], -l2[a]);
    EXPECT_EQ(l2[buf], -l2[a]);
}

TEST(Tseitin, PreEncodedNetsAreShared) {
    Netlist n;
    const NetId a = n.add_input("a", PortRole::Operational, 0);
    const NetId b = n.add_input("b", PortRole::Operational, 1);
    n.add_output(n.add_gate(GateKind::Xor, {a, b}));
    Cnf cnf;
    std::vector<int> seed(n.net_count(), 0);
    seed[a] = cnf.new_var();
    seed[b] = seed[a];
    const auto lits = tseitin_encode(n, cnf, seed);
    EXPECT_EQ(lits[a], lits[b]);
    // XOR(x, x) must be 0.
    const std::vector<int> as{lits[n.outputs[0].net]};
    EXPECT_EQ(solve(cnf, kNoLimit, as).status, SolveStatus::Unsat);
}

TEST(Tseitin, EncodeGateMatchesTruthTable) {
    for (const GateKind k : {GateKind::And, GateKind::Nand, GateKind::Or, GateKind::Nor, GateKind::Xor, GateKind::Xnor,
                             GateKind::Not, GateKind::Buf, GateKind::Mux2}) {
        Netlist g;
        std::vector<NetId> ins;
        for (int i = 0; i < arity(k); ++i) ins.push_back(g.add_input("i" + std::to_string(i), PortRole::Operational, i));
        g.add_output(g.add_gate(k, ins));
        for (std::uint64_t v = 0; v < (1u << arity(k)); ++v) {
            Cnf cnf;
            std::vector<int> in_lits;
            for (int i = 0; i < arity(k); ++i) {
                const int x = cnf.new_var();
                in_lits.push_back(x);
                cnf.add_clause({((v >> i) & 1) ? x : -x});
            }
            const int out = cnf.new_var();
            encode_gate(cnf, k, in_lits, out);
            const bool expect = simulate(g, bits_of(v, static_cast<std::size_t>(arity(k))))[0];
            const std::vector<int> wrong{expect ? -out : out};
            EXPECT_EQ(solve(cnf, kNoLimit, wrong).status, SolveStatus::Unsat) << to_string(k) << v;
            const auto r = solve(cnf, kNoLimit);
            ASSERT_EQ(r.status, SolveStatus::Sat);
            EXPECT_EQ(r.value(out), expect);
        }
    }
}

TEST(Tseitin, RandomConesMatchSimulation) {
    Rng rng(1000);
    for (int i = 0; i < 1000; ++i) {
        RandomShape shape;
        shape.operational = 1 + static_cast<int>(uniform_below(rng, 12));
        shape.gates = 1 + static_cast<int>(uniform_below(rng, 40));
        shape.outputs = 3;
        const Netlist n = random_netlist(rng, shape);
        Cnf cnf;
        const auto lits = tseitin_encode(n, cnf);

        // Forward: fixing the inputs determines every output.
        const auto in = bits_of(rng(), n.inputs.size());
        std::vector<int> as;
        for (std::size_t k = 0; k < in.size(); ++k) as.push_back(in[k] ? lits[n.inputs[k].net] : -lits[n.inputs[k].net]);
        const auto r = solve(cnf, kNoLimit, as);
        ASSERT_EQ(r.status, SolveStatus::Sat);
        const auto out = simulate(n, in);
        for (std::size_t o = 0; o < out.size(); ++o) ASSERT_EQ(r.value(lits[n.outputs[o].net]), out[o]) << i;

        // Backward: any model for a requested output value projects to inputs that produce it.
        const int target = lits[n.outputs[0].net];
        const bool value = coin(rng);
        const std::vector<int> want{value ? target : -target};
        const auto back = solve(cnf, kNoLimit, want);
        if (back.status == SolveStatus::Sat) {
            std::vector<bool> proj;
            for (const auto& pi : n.inputs) proj.push_back(back.value(lits[pi.net]));
            ASSERT_EQ(simulate(n, proj)[0], value) << i;
        } else {
            ASSERT_EQ(back.status, SolveStatus::Unsat);
            // Constant output: every input gives the other value.
            for (std::uint64_t v = 0; v < (1u << std::min<std::size_t>(n.inputs.size(), 12)); ++v)
                ASSERT_NE(simulate(n, bits_of(v, n.inputs.size()))[0], value);
        }
    }
}
