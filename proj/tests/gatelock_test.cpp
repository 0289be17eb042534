#include "lockleak/benchgen.hpp"
#include "lockleak/errors.hpp"
#include "lockleak/gatelock.hpp"
#include "lockleak/netlist.hpp"
#include "lockleak/netlist_io.hpp"
#include "lockleak/oracle.hpp"
#include "lockleak/sim.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

using namespace lockleak;
using lockleak::testkit::bits_of;
using lockleak::testkit::random_netlist;
using lockleak::testkit::RandomShape;
using lockleak::testkit::same_function;

namespace {

Netlist single_and() {
    Netlist n;
    const NetId a = n.add_input("a", PortRole::Operational, 0);
    const NetId b = n.add_input("b", PortRole::Operational, 1);
    n.add_output(n.add_gate(GateKind::And, {a, b}, "y"));
    return n;
}

LockingConfig cfg(LockScheme scheme, KeySize size, std::uint64_t seed) {
    LockingConfig c;
    c.scheme = scheme;
    c.size = size;
    c.seed = seed;
    return c;
}

// Seed whose single EPIC key gate lands on `host` with the requested gate type.
std::optional<LockedNetlist> epic_on(const Netlist& n, NetId host, const std::string& type) {
    for (std::uint64_t seed = 1; seed < 500; ++seed) {
        LockedNetlist l = epic_lock(as_locked(n), cfg(LockScheme::Epic, KeySize::bits(1), seed));
        if (l.provenance[0].hosts[0] == host && l.provenance[0].detail == type) return l;
    }
    return std::nullopt;
}

bool sequences_match(const Netlist& a, const Netlist& b, Rng& rng, int traces, int cycles) {
    for (int t = 0; t < traces; ++t) {
        std::vector<std::vector<bool>> tr;
        for (int c = 0; c < cycles; ++c) tr.push_back(bits_of(rng(), a.inputs.size()));
        if (simulate_sequence(a, tr) != simulate_sequence(b, tr)) return false;
    }
    return true;
}

} // namespace

TEST(Epic, XorOnOutputIsTransparentWithKeyZero) {
    const Netlist n = single_and();
    const auto l = epic_on(n, *n.find_net("y"), "XOR");
    ASSERT_TRUE(l);
    EXPECT_EQ(l->key, std::vector<bool>{false});
    EXPECT_TRUE(same_function(apply_key(*l, {false}), n));

    const Netlist wrong = apply_key(*l, {true});
    for (std::uint64_t v = 0; v < 4; ++v) {
        const auto in = bits_of(v, 2);
        EXPECT_EQ(simulate(wrong, in)[0], !(in[0] && in[1])) << v;
    }
}

TEST(Epic, XnorCarriesKeyOne) {
    const Netlist n = single_and();
    const auto l = epic_on(n, *n.find_net("y"), "XNOR");
    ASSERT_TRUE(l);
    EXPECT_EQ(l->key, std::vector<bool>{true});
    EXPECT_TRUE(same_function(apply_key(*l, {true}), n));
    const Netlist wrong = apply_key(*l, {false});
    for (std::uint64_t v = 0; v < 4; ++v) {
        const auto in = bits_of(v, 2);
        EXPECT_EQ(simulate(wrong, in)[0], !(in[0] && in[1]));
    }
}

TEST(Epic, InputStemLockFeedsEveryLoad) {
    Netlist n;
    const NetId a = n.add_input("a", PortRole::Operational, 0);
    const NetId b = n.add_input("b", PortRole::Operational, 1);
    n.add_output(n.add_gate(GateKind::And, {a, b}));
    n.add_output(n.add_gate(GateKind::Or, {a, b}));
    n.add_output(a);
    const auto l = epic_on(n, a, "XOR");
    ASSERT_TRUE(l);
    const Netlist wrong = apply_key(*l, {true});
    for (std::uint64_t v = 0; v < 4; ++v) {
        const auto in = bits_of(v, 2);
        const auto out = simulate(wrong, in);
        EXPECT_EQ(out[0], !in[0] && in[1]);
        EXPECT_EQ(out[1], !in[0] || in[1]);
        EXPECT_EQ(out[2], !in[0]);
    }
}

TEST(KeySize, ResolveAndParse) {
    EXPECT_THROW((void)KeySize::bits(0).resolve(10), InputError);
    EXPECT_THROW((void)KeySize::bits(11).resolve(10), InputError);
    EXPECT_EQ(KeySize::bits(10).resolve(10), 10);
    EXPECT_EQ(KeySize::pct(1).resolve(10), 1);
    EXPECT_EQ(KeySize::pct(25).resolve(10), 3);
    EXPECT_EQ(KeySize::pct(50).resolve(7), 4);
    EXPECT_EQ(KeySize::pct(100).resolve(7), 7);
    EXPECT_THROW((void)KeySize::pct(0).resolve(10), InputError);
    EXPECT_THROW((void)KeySize::pct(100.5).resolve(10), InputError);
    EXPECT_THROW((void)KeySize::pct(25).resolve(0), InputError);

    EXPECT_EQ(KeySize::parse("25%").label(), "25%");
    EXPECT_TRUE(KeySize::parse("25%").percent);
    EXPECT_FALSE(KeySize::parse("8").percent);
    EXPECT_EQ(KeySize::parse("8").resolve(100), 8);
    EXPECT_EQ(KeySize::parse("0.5%").label(), "0.5%");
    EXPECT_THROW(KeySize::parse("abc"), InputError);
    EXPECT_THROW(KeySize::parse("2.5"), InputError);
    EXPECT_THROW(KeySize::parse("%"), InputError);

    EXPECT_THROW(epic_lock(as_locked(single_and()), cfg(LockScheme::Epic, KeySize::bits(0), 1)), InputError);
    EXPECT_THROW(epic_lock(as_locked(single_and()), cfg(LockScheme::Epic, KeySize::bits(4), 1)), InputError);
}

TEST(MaxLocations, CountsInputsAndGates) {
    Netlist chain;
    const NetId a = chain.add_input("a", PortRole::Operational, 0);
    const NetId b = chain.add_input("b", PortRole::Operational, 1);
    const NetId g1 = chain.add_gate(GateKind::And, {a, b});
    const NetId g2 = chain.add_gate(GateKind::Not, {g1});
    chain.add_output(chain.add_gate(GateKind::Buf, {g2}));
    EXPECT_EQ(max_locations(chain, LockScheme::Epic), 5u);
    EXPECT_EQ(max_locations(chain, LockScheme::Dmux), 5u);

    Netlist keys;
    keys.add_output(keys.add_input("k0", PortRole::LockingKey, 0));
    keys.add_output(keys.add_input("k1", PortRole::LockingKey, 1));
    EXPECT_EQ(max_locations(keys, LockScheme::Epic), 0u);
    EXPECT_THROW(epic_lock(as_locked(keys), cfg(LockScheme::Epic, KeySize::pct(50), 1)), InputError);

    // 4 operands, 4 secret inputs, 4 buffers.
    const Netlist p = passthrough(4);
    EXPECT_EQ(max_locations(p, LockScheme::Epic), 12u);
    EXPECT_EQ(KeySize::pct(25).resolve(max_locations(p, LockScheme::Epic)), 3);
    EXPECT_EQ(epic_lock(as_locked(p), cfg(LockScheme::Epic, KeySize::pct(25), 3)).key.size(), 3u);

    // Fig. 5: 5 non-key inputs; 3 gates before locking, 5 after.
    EXPECT_EQ(max_locations(fig5_reference(), LockScheme::Epic), 8u);
    EXPECT_EQ(max_locations(fig5_example().netlist, LockScheme::Epic), 10u);
}

TEST(Dmux, ParallelConesSwapOneLoad) {
    Netlist n;
    std::vector<NetId> in;
    for (int i = 0; i < 4; ++i) in.push_back(n.add_input("i" + std::to_string(i), PortRole::Operational, i));
    const NetId g1 = n.add_gate(GateKind::And, {in[0], in[1]}, "g1");
    const NetId g2 = n.add_gate(GateKind::And, {in[2], in[3]}, "g2");
    n.add_output(n.add_gate(GateKind::Buf, {g1}, "o1"));
    n.add_output(n.add_gate(GateKind::Buf, {g2}, "o2"));

    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const LockedNetlist l = dmux_lock(as_locked(n), cfg(LockScheme::Dmux, KeySize::bits(1), seed));
        ASSERT_EQ(l.key, std::vector<bool>{false});
        ASSERT_EQ(l.provenance[0].hosts.size(), 2u);
        const NetId f1 = l.provenance[0].hosts[0];
        const NetId f2 = l.provenance[0].hosts[1];
        EXPECT_NE(f1, f2);
        EXPECT_TRUE(same_function(apply_key(l, {false}), n)) << seed;

        // With key 1 the rewired pin reads f2 instead of f1.
        const std::size_t mux_gate = l.provenance[0].inserted_gates[0];
        const NetId m = l.netlist.gates[mux_gate].output;
        Netlist expect = n;
        int rewired = 0;
        for (std::size_t g = 0; g < n.gates.size(); ++g)
            for (std::size_t p = 0; p < n.gates[g].inputs.size(); ++p)
                if (l.netlist.gates[g].inputs[p] == m) {
                    EXPECT_EQ(n.gates[g].inputs[p], f1);
                    expect.gates[g].inputs[p] = f2;
                    ++rewired;
                }
        EXPECT_EQ(rewired, 1);
        EXPECT_TRUE(same_function(apply_key(l, {true}), expect)) << seed;
    }
}

TEST(Dmux, CycleCandidatesAreResampled) {
    Netlist n;
    NetId x = n.add_input("a", PortRole::Operational, 0);
    for (int i = 0; i < 6; ++i) x = n.add_gate(GateKind::Not, {x});
    n.add_output(x);

    bool needed_retry = false;
    for (std::uint64_t seed = 1; seed <= 300; ++seed) {
        const LockedNetlist l = dmux_lock(as_locked(n), cfg(LockScheme::Dmux, KeySize::bits(3), seed));
        EXPECT_TRUE(validate(l.netlist).empty());
        EXPECT_NO_THROW((void)topo_order(l.netlist));
        EXPECT_TRUE(same_function(apply_key(l, l.key), n));
        auto one_try = cfg(LockScheme::Dmux, KeySize::bits(3), seed);
        one_try.max_retries = 1;
        try {
            (void)dmux_lock(as_locked(n), one_try);
        } catch (const CapacityError&) {
            needed_retry = true;
        }
    }
    EXPECT_TRUE(needed_retry);
}

TEST(Dmux, CapacityErrorReportsPlacedBits) {
    // The only load of `a` is the inverter, and routing its own output back is a loop.
    Netlist n;
    const NetId a = n.add_input("a", PortRole::Operational, 0);
    n.add_output(n.add_gate(GateKind::Not, {a}));
    try {
        (void)dmux_lock(as_locked(n), cfg(LockScheme::Dmux, KeySize::bits(1), 5));
        FAIL() << "expected CapacityError";
    } catch (const CapacityError& e) {
        EXPECT_EQ(e.placed, 0);
        EXPECT_EQ(e.requested, 1);
    }

    Netlist lone;
    lone.add_output(lone.add_input("a", PortRole::Operational, 0));
    EXPECT_THROW(dmux_lock(as_locked(lone), cfg(LockScheme::Dmux, KeySize::bits(1), 1)), InputError);
}

TEST(Dmux, ThousandToySpnLockingsAtOnePercentKeepFunction) {
    const Netlist spn = toy_spn(4, 2);
    ASSERT_LE(spn.inputs.size(), 16u);
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
        const LockedNetlist l = dmux_lock(as_locked(spn), cfg(LockScheme::Dmux, KeySize::pct(1), seed));
        ASSERT_EQ(l.key.size(), l.key_inputs.size());
        const Netlist unlocked = apply_key(l, l.key);
        ASSERT_TRUE(equivalence_check(unlocked, spn, EquivalenceMethod::Exhaustive).equal) << seed;
    }
}

TEST(Epic, ToySpnLockingsKeepFunction) {
    const Netlist spn = toy_spn(4, 2);
    for (const double pct : {1.0, 25.0, 50.0}) {
        for (std::uint64_t seed = 1; seed <= 100; ++seed) {
            const LockedNetlist l = epic_lock(as_locked(spn), cfg(LockScheme::Epic, KeySize::pct(pct), seed));
            ASSERT_TRUE(equivalence_check(apply_key(l, l.key), spn, EquivalenceMethod::Exhaustive).equal)
                << pct << " " << seed;
        }
    }
}

TEST(Lock, SequentialDesignKeepsBehaviour) {
    const Netlist fsm = fsm_datapath(2, 4);
    Rng rng(17);
    for (const auto scheme : {LockScheme::Epic, LockScheme::Dmux}) {
        for (std::uint64_t seed = 1; seed <= 30; ++seed) {
            const LockedNetlist l = lock(fsm, cfg(scheme, KeySize::pct(25), seed));
            ASSERT_TRUE(validate(l.netlist).empty());
            EXPECT_TRUE(sequences_match(apply_key(l, l.key), fsm, rng, 10, 6)) << to_string(scheme) << seed;
        }
    }
}

TEST(Lock, RandomNetlistsStayValidAndEquivalent) {
    Rng rng(21);
    for (int i = 0; i < 300; ++i) {
        RandomShape shape;
        shape.operational = 2 + static_cast<int>(uniform_below(rng, 5));
        shape.secret = static_cast<int>(uniform_below(rng, 4));
        shape.gates = 4 + static_cast<int>(uniform_below(rng, 30));
        const Netlist n = random_netlist(rng, shape);
        for (const auto scheme : {LockScheme::Epic, LockScheme::Dmux}) {
            LockingConfig c = cfg(scheme, KeySize::pct(25), rng());
            LockedNetlist l;
            try {
                l = lock(n, c);
            } catch (const CapacityError&) {
                continue;
            }
            ASSERT_TRUE(validate(l.netlist).empty());
            ASSERT_EQ(l.key.size(), static_cast<std::size_t>(c.size.resolve(max_locations(n, scheme))));
            ASSERT_TRUE(same_function(apply_key(l, l.key), n)) << i << " " << to_string(scheme);
        }
    }
}

TEST(Lock, GateCountGrowsByKeyLength) {
    const Netlist spn = toy_spn(8, 2);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const LockedNetlist e = epic_lock(as_locked(spn), cfg(LockScheme::Epic, KeySize::pct(25), seed));
        EXPECT_EQ(e.netlist.gates.size(), spn.gates.size() + e.key.size());

        const LockedNetlist d = dmux_lock(as_locked(spn), cfg(LockScheme::Dmux, KeySize::pct(25), seed));
        std::size_t muxes_before = 0, muxes_after = 0;
        for (const auto& g : spn.gates) muxes_before += g.kind == GateKind::Mux2;
        for (const auto& g : d.netlist.gates) muxes_after += g.kind == GateKind::Mux2;
        EXPECT_EQ(d.netlist.gates.size(), spn.gates.size() + d.key.size());
        EXPECT_EQ(muxes_after, muxes_before + d.key.size());
        EXPECT_EQ(d.netlist.count_role(PortRole::LockingKey), d.key.size());
    }
}

TEST(Lock, EpicProvenancePairsGateTypeWithKeyBit) {
    const Netlist spn = toy_spn(4, 2);
    int xors = 0, xnors = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const LockedNetlist l = epic_lock(as_locked(spn), cfg(LockScheme::Epic, KeySize::pct(50), seed));
        ASSERT_EQ(l.provenance.size(), l.key.size());
        for (std::size_t i = 0; i < l.key.size(); ++i) {
            const auto& p = l.provenance[i];
            EXPECT_EQ(p.scheme, "epic");
            const GateKind kind = l.netlist.gates[p.inserted_gates.at(0)].kind;
            if (p.detail == "XOR") {
                EXPECT_FALSE(l.key[i]);
                EXPECT_EQ(kind, GateKind::Xor);
                ++xors;
            } else {
                EXPECT_EQ(p.detail, "XNOR");
                EXPECT_TRUE(l.key[i]);
                EXPECT_EQ(kind, GateKind::Xnor);
                ++xnors;
            }
        }
    }
    EXPECT_GT(xors, 0);
    EXPECT_GT(xnors, 0);
}

TEST(Lock, DeterministicPerSeed) {
    const Netlist spn = toy_spn(4, 2);
    for (const auto scheme : {LockScheme::Epic, LockScheme::Dmux}) {
        const auto a = emit_locked_json(lock(spn, cfg(scheme, KeySize::pct(25), 42)));
        const auto b = emit_locked_json(lock(spn, cfg(scheme, KeySize::pct(25), 42)));
        const auto c = emit_locked_json(lock(spn, cfg(scheme, KeySize::pct(25), 43)));
        EXPECT_EQ(a, b);
        EXPECT_NE(a, c);
    }
}

TEST(Lock, RelockingAppendsKeyBits) {
    const LockedNetlist fig = fig5_example();
    const LockedNetlist l = epic_lock(fig, cfg(LockScheme::Epic, KeySize::bits(3), 9));
    ASSERT_EQ(l.key.size(), 5u);
    EXPECT_EQ(l.key[0], false);
    EXPECT_EQ(l.key[1], false);
    EXPECT_EQ(l.key_inputs[0], fig.key_inputs[0]);
    EXPECT_EQ(l.key_inputs[1], fig.key_inputs[1]);
    EXPECT_EQ(l.provenance[0].scheme, "dmux");
    EXPECT_EQ(l.provenance[4].scheme, "epic");
    EXPECT_TRUE(same_function(apply_key(l, l.key), apply_key(fig, fig.key)));
    for (std::size_t i = 0; i < l.key_inputs.size(); ++i) {
        const auto idx = l.netlist.find_input(l.netlist.label(l.key_inputs[i]));
        ASSERT_TRUE(idx);
        EXPECT_EQ(l.netlist.inputs[*idx].bit, static_cast<int>(i));
    }
}

TEST(ApplyKey, Fig5KeyZeroRestoresReference) {
    const LockedNetlist fig = fig5_example();
    const Netlist restored = apply_key(fig, key_from_string("00"));
    EXPECT_TRUE(validate(restored).empty());
    EXPECT_EQ(restored.count_role(PortRole::LockingKey), 0u);
    EXPECT_TRUE(equivalence_check(restored, fig5_reference(), EquivalenceMethod::Exhaustive).equal);
    EXPECT_TRUE(equivalence_check(restored, fig5_reference(), EquivalenceMethod::SatMiter).equal);
}

TEST(ApplyKey, Fig5KeyOnesLeaksFirstSecret) {
    const Netlist leaky = apply_key(fig5_example(), key_from_string("11"));
    EXPECT_FALSE(equivalence_check(leaky, fig5_reference(), EquivalenceMethod::Exhaustive).equal);

    const LeakageVerdict v0 = brute_force_leakage(leaky, 0, ScenarioKind::SetAll);
    ASSERT_EQ(v0.verdict, Verdict::DT);
    EXPECT_EQ(v0.witness->output, 1u);
    EXPECT_EQ(brute_force_leakage(leaky, 1, ScenarioKind::SetAll).verdict, Verdict::S);

    // output2 = AND(enc_key1, enc_key1) for every operational input.
    const auto ek1 = *leaky.find_input("enc_key1");
    for (std::uint64_t v = 0; v < 32; ++v) {
        const auto in = bits_of(v, leaky.inputs.size());
        EXPECT_EQ(simulate(leaky, in)[1], in[ek1]);
    }
}

TEST(ApplyKey, RejectsLengthMismatch) {
    const LockedNetlist fig = fig5_example();
    EXPECT_THROW(apply_key(fig, {true}), InputError);
    EXPECT_THROW(apply_key(fig, {true, false, true}), InputError);
    EXPECT_THROW(key_from_string("01x"), InputError);
    EXPECT_EQ(key_to_string(key_from_string("0110")), "0110");
}
