#include "lockleak/assure.hpp"
#include "lockleak/benchgen.hpp"
#include "lockleak/errors.hpp"
#include "lockleak/gatelock.hpp"
#include "lockleak/sim.hpp"
#include "lockleak/word.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

using namespace lockleak;
using lockleak::testkit::gate_eval;

namespace {

using Assignment = std::map<std::string, std::uint64_t>;

Assignment random_assignment(Rng& rng, const WordDesign& d) {
    Assignment a;
    for (std::size_t i : d.input_nodes()) a[d.nodes[i].name] = rng() & width_mask(d.nodes[i].width);
    return a;
}

WordDesign random_design(Rng& rng, int width, int inputs, int nodes) {
    WordDesign d;
    std::vector<std::size_t> words, flags;
    for (int i = 0; i < inputs; ++i)
        words.push_back(d.input("x" + std::to_string(i), width, i == 0 && inputs > 1 ? PortRole::Secret : PortRole::Operational));
    auto pick = [&](const std::vector<std::size_t>& v) { return v[uniform_below(rng, v.size())]; };
    static constexpr std::array kOps{WordOp::Add, WordOp::Sub, WordOp::BitXor, WordOp::BitXnor,
                                     WordOp::BitAnd, WordOp::BitOr};
    static constexpr std::array kCmps{CmpKind::Gt, CmpKind::Le, CmpKind::Eq, CmpKind::Ne};
    for (int k = 0; k < nodes; ++k) {
        switch (uniform_below(rng, 6)) {
        case 0: words.push_back(d.constant(width, rng() & width_mask(width))); break;
        case 1: flags.push_back(d.cmp(kCmps[uniform_below(rng, kCmps.size())], pick(words), pick(words))); break;
        case 2:
            if (!flags.empty()) {
                words.push_back(d.mux(pick(flags), pick(words), pick(words)));
                break;
            }
            [[fallthrough]];
        case 3:
            words.push_back(d.shift(coin(rng) ? WordOp::Shl : WordOp::Shr, pick(words),
                                    static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(width)))));
            break;
        default: words.push_back(d.op(kOps[uniform_below(rng, kOps.size())], pick(words), pick(words))); break;
        }
    }
    d.output("y", words.back());
    if (!flags.empty()) d.output("f", flags.back());
    return d;
}

} // namespace

TEST(Assure, ConstantBecomesKeyInput) {
    WordDesign d;
    const auto a = d.input("a", 4, PortRole::Operational);
    d.output("b", d.op(WordOp::Add, a, d.constant(4, 0b1101)));
    const AssureResult r = assure_lock(d, kAssureConst, 1);
    EXPECT_EQ(r.key.bits, (std::vector<bool>{true, true, false, true}));
    ASSERT_EQ(r.key.segments.size(), 1u);
    EXPECT_EQ(r.key.segments[0].mode, kAssureConst);
    EXPECT_EQ(r.key.segments[0].width, 4u);
    const WordNode& add = r.design.nodes[r.design.outputs[0].node];
    ASSERT_EQ(add.op, WordOp::Add);
    const WordNode& kc = r.design.nodes[add.args[1]];
    EXPECT_EQ(kc.op, WordOp::Input);
    EXPECT_EQ(kc.role, PortRole::LockingKey);
    EXPECT_EQ(kc.width, 4);
    for (std::uint64_t av = 0; av < 16; ++av)
        EXPECT_EQ(word_eval(r.design, {{"a", av}, {kc.name, 0b1101}})[0], (av + 13) & 15);
}

TEST(Assure, OperationMuxWithKeyOne) {
    WordDesign d;
    const auto a = d.input("a", 4, PortRole::Operational);
    const auto b = d.input("b", 4, PortRole::Operational);
    d.output("c", d.op(WordOp::Add, a, b));
    std::uint64_t seed = 1;
    AssureResult r = assure_lock(d, kAssureOps, seed);
    while (!r.key.bits.at(0)) r = assure_lock(d, kAssureOps, ++seed);
    const WordNode& mux = r.design.nodes[r.design.outputs[0].node];
    ASSERT_EQ(mux.op, WordOp::Mux);
    EXPECT_EQ(r.design.nodes[mux.args[0]].role, PortRole::LockingKey);
    EXPECT_EQ(r.design.nodes[mux.args[1]].op, WordOp::Add);
    EXPECT_EQ(r.design.nodes[mux.args[2]].op, WordOp::Sub);
    const std::string k = r.key.segments.at(0).input;
    for (std::uint64_t av = 0; av < 16; ++av)
        for (std::uint64_t bv = 0; bv < 16; ++bv) {
            EXPECT_EQ(word_eval(r.design, {{"a", av}, {"b", bv}, {k, 1}})[0], (av + bv) & 15);
            EXPECT_EQ(word_eval(r.design, {{"a", av}, {"b", bv}, {k, 0}})[0], (av - bv) & 15);
        }
}

TEST(Assure, ModeWithoutSitesIsReported) {
    WordDesign d;
    const auto a = d.input("a", 4, PortRole::Operational);
    const auto b = d.input("b", 4, PortRole::Operational);
    d.output("c", d.op(WordOp::BitXor, a, b));
    for (unsigned modes : {unsigned{kAssureConst}, kAssureBranch | kAssureOps, kAssureConst | kAssureOps}) {
        try {
            assure_lock(d, modes, 9);
            ADD_FAILURE() << assure_modes_label(modes);
        } catch (const CapacityError& e) {
            EXPECT_NE(std::string(e.what()).find("no lockable sites"), std::string::npos);
        }
    }
    EXPECT_EQ(assure_lock(d, kAssureOps, 9).key.bits.size(), 1u);
    EXPECT_THROW(assure_lock(d, 0, 1), InputError);
    EXPECT_THROW(parse_assure_modes(""), InputError);
    EXPECT_THROW(parse_assure_modes("ops,ops"), InputError);
    EXPECT_EQ(assure_modes_label(parse_assure_modes("branch,const")), "const+branch");
}

TEST(Assure, BranchXorsConditionWithKey) {
    WordDesign d;
    const auto a = d.input("a", 4, PortRole::Operational);
    const auto b = d.input("b", 4, PortRole::Operational);
    d.output("y", d.mux(d.cmp(CmpKind::Gt, a, b), a, b));
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const AssureResult r = assure_lock(d, kAssureBranch, seed);
        ASSERT_EQ(r.key.bits.size(), 1u);
        const WordNode& mux = r.design.nodes[r.design.outputs[0].node];
        const WordNode& cond = r.design.nodes[mux.args[0]];
        EXPECT_EQ(cond.op, WordOp::BitXor);
        const WordNode& cmp = r.design.nodes[cond.args[0]];
        EXPECT_EQ(cmp.cmp, r.key.bits[0] ? CmpKind::Le : CmpKind::Gt);
    }
}

TEST(Assure, KeyLengthIsAdditiveAcrossModes) {
    const WordDesign x = toy_xtea(4, 2);
    std::size_t const_bits = 0, ops = 0, branches = 0;
    std::vector<char> cond(x.nodes.size(), 0);
    for (const auto& n : x.nodes)
        if (n.op == WordOp::Mux) cond[n.args[0]] = 1;
    // Only nodes reachable from the outputs count; toy_xtea has no dead nodes.
    for (std::size_t i = 0; i < x.nodes.size(); ++i) {
        const WordNode& n = x.nodes[i];
        if (n.op == WordOp::Const) const_bits += static_cast<std::size_t>(n.width);
        const bool opsite = n.op == WordOp::Add || n.op == WordOp::Sub || n.op == WordOp::BitXor ||
                            n.op == WordOp::BitXnor || n.op == WordOp::BitAnd || n.op == WordOp::BitOr;
        if (opsite || (n.op == WordOp::Cmp && !cond[i])) ++ops;
        if (n.op == WordOp::Cmp && cond[i]) ++branches;
    }
    EXPECT_EQ(assure_lock(x, kAssureConst, 1).key.bits.size(), const_bits);
    EXPECT_EQ(assure_lock(x, kAssureOps, 1).key.bits.size(), ops);
    EXPECT_EQ(assure_lock(x, kAssureBranch, 1).key.bits.size(), branches);
    EXPECT_EQ(assure_lock(x, kAssureOps | kAssureBranch, 1).key.bits.size(), ops + branches);
    EXPECT_EQ(assure_lock(x, kAssureConst | kAssureOps | kAssureBranch, 1).key.bits.size(), const_bits + ops + branches);
}

TEST(Assure, CorrectKeyTransparencyAndWrongKeyCorruption) {
    Rng rng(4);
    for (int i = 0; i < 60; ++i) {
        const int width = 1 + static_cast<int>(uniform_below(rng, 4));
        const WordDesign d = random_design(rng, width, 2, 4 + static_cast<int>(uniform_below(rng, 8)));
        for (unsigned modes = 1; modes <= 7; ++modes) {
            const std::uint64_t seed = rng();
            AssureResult r;
            try {
                r = assure_lock(d, modes, seed);
            } catch (const CapacityError&) {
                continue;
            }
            const LockedNetlist l = lower_locked(r);
            const Netlist plain = lower_to_gates(d);
            ASSERT_TRUE(testkit::same_function(apply_key(l, l.key), plain)) << "design " << i << " modes " << modes;
            if (l.key.empty()) continue;
            // Word level too, on random assignments.
            for (int t = 0; t < 20; ++t) {
                Assignment a = random_assignment(rng, d);
                const auto expect = word_eval(d, a);
                std::size_t off = 0;
                for (const auto& seg : r.key.segments) {
                    std::uint64_t v = 0;
                    for (std::size_t b = 0; b < seg.width; ++b) v = (v << 1) | (r.key.bits[off + b] ? 1u : 0u);
                    a[seg.input] = v;
                    off += seg.width;
                }
                ASSERT_EQ(word_eval(r.design, a), expect);
            }
        }
    }
}

TEST(Assure, WrongKeyCorruptsUnlessProvablyEquivalent) {
    Rng rng(12);
    const WordDesign designs[] = {toy_xtea(4, 1), toy_xtea(4, 2), random_design(rng, 4, 2, 10), random_design(rng, 3, 3, 12)};
    for (const auto& d : designs) {
        const Netlist plain = lower_to_gates(d);
        for (unsigned modes = 1; modes <= 7; ++modes) {
            LockedNetlist l;
            try {
                l = lower_locked(assure_lock(d, modes, 3));
            } catch (const CapacityError&) {
                continue;
            }
            int corrupting = 0;
            for (int trial = 0; trial < 20; ++trial) {
                std::vector<bool> wrong = l.key;
                const std::size_t flips = 1 + uniform_below(rng, wrong.size());
                for (std::size_t f = 0; f < flips; ++f) wrong[uniform_below(rng, wrong.size())] = coin(rng);
                if (wrong == l.key) wrong[uniform_below(rng, wrong.size())].flip();
                const Netlist bad = apply_key(l, wrong);
                bool differs = false;
                for (int t = 0; t < 1000 && !differs; ++t) {
                    const auto in = testkit::bits_of(rng(), bad.inputs.size());
                    differs = simulate(bad, in) != simulate(plain, in);
                }
                // A flipped bit can sit behind a mux arm that is never selected.
                if (!differs) {
                    EXPECT_TRUE(equivalence_check(bad, plain, EquivalenceMethod::SatMiter).equal)
                        << "sampling missed a difference, modes " << modes;
                }
                corrupting += differs ? 1 : 0;
            }
            EXPECT_GT(corrupting, 0) << "modes " << modes;
        }
    }
}

TEST(Lowering, AddAndCompareExamples) {
    WordDesign add;
    add.output("s", add.op(WordOp::Add, add.input("a", 4, PortRole::Operational), add.input("b", 4, PortRole::Operational)));
    EXPECT_EQ(gate_eval(add, lower_to_gates(add), {{"a", 0b0011}, {"b", 0b0101}})[0], 0b1000u);

    WordDesign gt;
    gt.output("g", gt.cmp(CmpKind::Gt, gt.input("a", 3, PortRole::Operational), gt.input("b", 3, PortRole::Operational)));
    EXPECT_EQ(gate_eval(gt, lower_to_gates(gt), {{"a", 5}, {"b", 2}})[0], 1u);
    EXPECT_EQ(gate_eval(gt, lower_to_gates(gt), {{"a", 2}, {"b", 5}})[0], 0u);

    WordDesign zero;
    zero.nodes.push_back(WordNode{WordOp::Input, {}, 0, 0, "z", PortRole::Operational, CmpKind::Eq, 0});
    zero.output("o", 0);
    EXPECT_THROW(lower_to_gates(zero), InputError);
}

TEST(Lowering, ThousandRandomDesignsMatchInterpreter) {
    Rng rng(2024);
    for (int i = 0; i < 1000; ++i) {
        const int width = 1 + static_cast<int>(uniform_below(rng, 8));
        const int inputs = 1 + static_cast<int>(uniform_below(rng, 3));
        const WordDesign d = random_design(rng, width, inputs, 2 + static_cast<int>(uniform_below(rng, 10)));
        const Netlist n = lower_to_gates(d);
        for (int t = 0; t < 8; ++t) {
            const Assignment a = random_assignment(rng, d);
            ASSERT_EQ(gate_eval(d, n, a), word_eval(d, a)) << "design " << i << "\n" << emit_word_json(d);
        }
    }
}

TEST(WordEval, IdentityAndModularSubtraction) {
    WordDesign id;
    id.output("out", id.input("in", 4, PortRole::Operational));
    EXPECT_EQ(word_eval(id, {{"in", 7}})[0], 7u);
    EXPECT_THROW(word_eval(id, {}), InputError);

    WordDesign sub;
    sub.output("d", sub.op(WordOp::Sub, sub.constant(4, 2), sub.constant(4, 5)));
    EXPECT_EQ(word_eval(sub, {})[0], 13u);
}

TEST(WordEval, ToyXteaMatchesReferenceModel) {
    Rng rng(99);
    for (int width : {4, 8}) {
        for (int rounds : {1, 2}) {
            const WordDesign d = toy_xtea(width, rounds);
            const Netlist n = lower_to_gates(d);
            for (int t = 0; t < 100; ++t) {
                const std::uint64_t m = width_mask(width);
                const std::uint64_t key[4] = {rng() & m, rng() & m, rng() & m, rng() & m};
                const std::uint64_t v0 = rng() & m, v1 = rng() & m;
                const auto [r0, r1] = toy_xtea_reference(width, rounds, v0, v1, key);
                const Assignment a{{"v0", v0}, {"v1", v1}, {"k0", key[0]}, {"k1", key[1]}, {"k2", key[2]}, {"k3", key[3]}};
                ASSERT_EQ(word_eval(d, a), (std::vector<std::uint64_t>{r0, r1}));
                if (t < 10) {
                    ASSERT_EQ(gate_eval(d, n, a), (std::vector<std::uint64_t>{r0, r1}));
                }
            }
        }
    }
}

TEST(WordEval, ToyXtea8KnownAnswers) {
    const WordDesign d = toy_xtea(8, 2);
    struct Kat {
        std::uint64_t v0, v1, k[4], c0, c1;
    };
    const Kat kats[] = {
        {0x00, 0x00, {0x00, 0x00, 0x00, 0x00}, 0xf7, 0xd5},
        {0x12, 0x34, {0x01, 0x23, 0x45, 0x67}, 0xbf, 0x6b},
        {0xff, 0x80, {0xde, 0xad, 0xbe, 0xef}, 0xf8, 0xe1},
        {0xa5, 0x5a, {0x11, 0x22, 0x33, 0x44}, 0xb3, 0x03},
    };
    for (const auto& k : kats) {
        const Assignment a{{"v0", k.v0}, {"v1", k.v1}, {"k0", k.k[0]}, {"k1", k.k[1]}, {"k2", k.k[2]}, {"k3", k.k[3]}};
        EXPECT_EQ(word_eval(d, a), (std::vector<std::uint64_t>{k.c0, k.c1}));
        EXPECT_EQ(toy_xtea_reference(8, 2, k.v0, k.v1, k.k), (std::pair<std::uint64_t, std::uint64_t>{k.c0, k.c1}));
    }
}

TEST(WordJson, RoundTrip) {
    Rng rng(31);
    for (int i = 0; i < 100; ++i) {
        const WordDesign d = random_design(rng, 1 + static_cast<int>(uniform_below(rng, 8)), 2, 8);
        const std::string text = emit_word_json(d);
        EXPECT_EQ(emit_word_json(parse_word_json(text)), text);
    }
    EXPECT_THROW(parse_word_json(R"({"inputs":[],"nodes":[{"op":"add","args":[0,1],"width":4}],"outputs":[]})"), InputError);
}
