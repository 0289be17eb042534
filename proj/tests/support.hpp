#pragma once

#include "lockleak/netlist.hpp"
#include "lockleak/rng.hpp"
#include "lockleak/sat.hpp"
#include "lockleak/sim.hpp"
#include "lockleak/word.hpp"

#include <array>
#include <map>
#include <cstdint>
#include <string>
#include <vector>

namespace lockleak::testkit {

inline std::vector<bool> bits_of(std::uint64_t v, std::size_t n) {
    std::vector<bool> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = (v >> i) & 1u;
    return out;
}

struct RandomShape {
    int operational = 4;
    int secret = 0;
    int locking = 0;
    int gates = 12;
    int outputs = 2;
    int dffs = 0;
};

/// Random valid DAG. Gate inputs are drawn from earlier nets; outputs come from
/// the last gates. DFF q nets are sources whose d is wired at the end.
inline Netlist random_netlist(Rng& rng, const RandomShape& shape) {
    static constexpr std::array kKinds{GateKind::And, GateKind::Nand, GateKind::Or,  GateKind::Nor, GateKind::Xor,
                                       GateKind::Xnor, GateKind::Not, GateKind::Buf, GateKind::Mux2};
    Netlist n;
    std::vector<NetId> pool;
    for (int i = 0; i < shape.operational; ++i) pool.push_back(n.add_input("in" + std::to_string(i), PortRole::Operational, i));
    for (int i = 0; i < shape.secret; ++i) pool.push_back(n.add_input("enc_key" + std::to_string(i), PortRole::Secret, i));
    for (int i = 0; i < shape.locking; ++i) pool.push_back(n.add_input("keyinput" + std::to_string(i), PortRole::LockingKey, i));
    std::vector<std::size_t> dff_gates;
    for (int i = 0; i < shape.dffs; ++i) {
        pool.push_back(n.add_dff(kNoNet, coin(rng) ? InitValue::One : InitValue::Zero, "q" + std::to_string(i)));
        dff_gates.push_back(n.gates.size() - 1);
    }
    auto pick = [&] { return pool[uniform_below(rng, pool.size())]; };
    for (int g = 0; g < shape.gates; ++g) {
        const GateKind k = kKinds[uniform_below(rng, kKinds.size())];
        std::vector<NetId> ins;
        for (int a = 0; a < arity(k); ++a) ins.push_back(pick());
        pool.push_back(n.add_gate(k, ins, "g" + std::to_string(g)));
    }
    for (std::size_t d : dff_gates) n.gates[d].inputs = {pick()};
    const int outs = std::min<int>(shape.outputs, shape.gates);
    for (int o = 0; o < outs; ++o) n.add_output(pool[pool.size() - 1 - static_cast<std::size_t>(o)]);
    if (outs == 0) n.add_output(pool.back());
    return n;
}

/// Brute-force satisfiability by truth table.
inline bool truth_table_sat(const Cnf& cnf) {
    const std::uint64_t total = std::uint64_t{1} << cnf.num_vars;
    for (std::uint64_t m = 0; m < total; ++m) {
        bool all = true;
        for (const auto& c : cnf.clauses) {
            bool sat = false;
            for (int l : c) {
                const bool v = (m >> (std::abs(l) - 1)) & 1u;
                if ((l > 0) == v) {
                    sat = true;
                    break;
                }
            }
            if (!sat) {
                all = false;
                break;
            }
        }
        if (all) return true;
    }
    return false;
}

inline Cnf random_cnf(Rng& rng, int vars, int clauses, int width) {
    Cnf cnf;
    cnf.num_vars = vars;
    for (int c = 0; c < clauses; ++c) {
        std::vector<int> cl;
        const int w = 1 + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(width)));
        for (int i = 0; i < w; ++i) {
            const int v = 1 + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(vars)));
            cl.push_back(coin(rng) ? v : -v);
        }
        cnf.clauses.push_back(std::move(cl));
    }
    return cnf;
}

/// Exhaustive comparison of two netlists with identical input lists.
inline bool same_function(const Netlist& a, const Netlist& b) {
    return equivalence_check(a, b, a.inputs.size() <= 16 ? EquivalenceMethod::Exhaustive : EquivalenceMethod::SatMiter)
        .equal;
}

// Gate-level evaluation of a lowered design for a word-level assignment.
inline std::vector<std::uint64_t> gate_eval(const WordDesign& d, const Netlist& n,
                                            const std::map<std::string, std::uint64_t>& a) {
    std::vector<bool> in;
    for (const auto& pi : n.inputs) {
        const std::string name = n.net_names[pi.net];
        const auto open = name.rfind('[');
        const std::string word = name.substr(0, open);
        const int bit = std::stoi(name.substr(open + 1));
        in.push_back((a.at(word) >> bit) & 1u);
    }
    const auto out = simulate(n, in);
    std::vector<std::uint64_t> words;
    std::size_t pos = 0;
    for (const auto& o : d.outputs) {
        std::uint64_t v = 0;
        for (int b = 0; b < d.nodes[o.node].width; ++b) v |= std::uint64_t{out[pos++]} << b;
        words.push_back(v);
    }
    return words;
}

} // namespace lockleak::testkit
