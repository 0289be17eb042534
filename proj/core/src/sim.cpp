#include "lockleak/sim.hpp"

#include "lockleak/errors.hpp"
#include "lockleak/rng.hpp"
#include "lockleak/sat.hpp"
#include "lockleak/tseitin.hpp"

#include <map>
#include <unordered_map>

namespace lockleak {

char to_char(LogicValue v) {
    switch (v) {
    case LogicValue::Zero: return '0';
    case LogicValue::One: return '1';
    default: return 'X';
    }
}

namespace {

constexpr std::uint64_t kAll = ~std::uint64_t{0};

std::uint64_t eval_word(GateKind kind, const std::uint64_t* in) {
    switch (kind) {
    case GateKind::And: return in[0] & in[1];
    case GateKind::Nand: return ~(in[0] & in[1]);
    case GateKind::Or: return in[0] | in[1];
    case GateKind::Nor: return ~(in[0] | in[1]);
    case GateKind::Xor: return in[0] ^ in[1];
    case GateKind::Xnor: return ~(in[0] ^ in[1]);
    case GateKind::Not: return ~in[0];
    case GateKind::Buf: return in[0];
    case GateKind::Mux2: return (~in[0] & in[1]) | (in[0] & in[2]);
    case GateKind::Const0: return 0;
    case GateKind::Const1: return kAll;
    case GateKind::Dff: return in[0];
    }
    return 0;
}

// (value, defined) pairs; value bits are kept 0 wherever defined is 0.
void eval_word3(GateKind kind, const std::uint64_t* v, const std::uint64_t* d, std::uint64_t& ov, std::uint64_t& od) {
    switch (kind) {
    case GateKind::And:
    case GateKind::Nand: {
        const std::uint64_t zero = (d[0] & ~v[0]) | (d[1] & ~v[1]);
        const std::uint64_t one = d[0] & v[0] & d[1] & v[1];
        od = zero | one;
        ov = kind == GateKind::And ? one : zero;
        return;
    }
    case GateKind::Or:
    case GateKind::Nor: {
        const std::uint64_t one = (d[0] & v[0]) | (d[1] & v[1]);
        const std::uint64_t zero = d[0] & ~v[0] & d[1] & ~v[1];
        od = zero | one;
        ov = kind == GateKind::Or ? one : zero;
        return;
    }
    case GateKind::Xor:
    case GateKind::Xnor:
        od = d[0] & d[1];
        ov = (kind == GateKind::Xor ? (v[0] ^ v[1]) : ~(v[0] ^ v[1])) & od;
        return;
    case GateKind::Not:
        od = d[0];
        ov = ~v[0] & od;
        return;
    case GateKind::Buf:
    case GateKind::Dff:
        od = d[0];
        ov = v[0];
        return;
    case GateKind::Mux2: {
        const std::uint64_t s0 = d[0] & ~v[0];
        const std::uint64_t s1 = d[0] & v[0];
        const std::uint64_t sx = ~d[0];
        od = (s0 & d[1]) | (s1 & d[2]) | (sx & d[1] & d[2] & ~(v[1] ^ v[2]));
        ov = ((s0 & v[1]) | (s1 & v[2]) | (sx & v[1])) & od;
        return;
    }
    case GateKind::Const0:
        od = kAll;
        ov = 0;
        return;
    case GateKind::Const1:
        od = kAll;
        ov = kAll;
        return;
    }
}

} // namespace

LogicValue eval3(GateKind kind, std::span<const LogicValue> inputs) {
    std::uint64_t v[3] = {0, 0, 0};
    std::uint64_t d[3] = {0, 0, 0};
    for (std::size_t i = 0; i < inputs.size() && i < 3; ++i) {
        d[i] = inputs[i] == LogicValue::X ? 0 : 1;
        v[i] = inputs[i] == LogicValue::One ? 1 : 0;
    }
    std::uint64_t ov = 0;
    std::uint64_t od = 0;
    eval_word3(kind, v, d, ov, od);
    if ((od & 1) == 0) return LogicValue::X;
    return (ov & 1) ? LogicValue::One : LogicValue::Zero;
}

WordSimulator::WordSimulator(const Netlist& netlist) : netlist_(&netlist), order_(topo_order(netlist)) {}

void WordSimulator::run(std::vector<std::uint64_t>& nets) const {
    std::uint64_t in[3];
    for (std::size_t gi : order_) {
        const Gate& g = netlist_->gates[gi];
        for (std::size_t p = 0; p < g.inputs.size(); ++p) in[p] = nets[g.inputs[p]];
        nets[g.output] = eval_word(g.kind, in);
    }
}

void WordSimulator::run3(std::vector<std::uint64_t>& value, std::vector<std::uint64_t>& defined) const {
    std::uint64_t v[3];
    std::uint64_t d[3];
    for (std::size_t gi : order_) {
        const Gate& g = netlist_->gates[gi];
        for (std::size_t p = 0; p < g.inputs.size(); ++p) {
            v[p] = value[g.inputs[p]];
            d[p] = defined[g.inputs[p]];
        }
        eval_word3(g.kind, v, d, value[g.output], defined[g.output]);
    }
}

std::vector<bool> simulate(const Netlist& netlist, const std::vector<bool>& inputs) {
    if (inputs.size() != netlist.inputs.size())
        throw InputError("simulate: expected " + std::to_string(netlist.inputs.size()) + " input values, got " +
                         std::to_string(inputs.size()));
    WordSimulator sim(netlist);
    std::vector<std::uint64_t> nets(netlist.net_count(), 0);
    for (std::size_t i = 0; i < inputs.size(); ++i) nets[netlist.inputs[i].net] = inputs[i] ? kAll : 0;
    for (const Gate& g : netlist.gates)
        if (g.kind == GateKind::Dff) nets[g.output] = g.init == InitValue::One ? kAll : 0;
    sim.run(nets);
    std::vector<bool> out;
    out.reserve(netlist.outputs.size());
    for (const PrimaryOutput& o : netlist.outputs) out.push_back((nets[o.net] & 1) != 0);
    return out;
}

std::vector<LogicValue> simulate3(const Netlist& netlist, const std::vector<LogicValue>& inputs) {
    WordSimulator sim(netlist);
    std::vector<std::uint64_t> value(netlist.net_count(), 0);
    std::vector<std::uint64_t> defined(netlist.net_count(), 0);
    for (std::size_t i = 0; i < netlist.inputs.size() && i < inputs.size(); ++i) {
        const NetId net = netlist.inputs[i].net;
        defined[net] = inputs[i] == LogicValue::X ? 0 : kAll;
        value[net] = inputs[i] == LogicValue::One ? kAll : 0;
    }
    for (const Gate& g : netlist.gates)
        if (g.kind == GateKind::Dff) {
            defined[g.output] = g.init == InitValue::X ? 0 : kAll;
            value[g.output] = g.init == InitValue::One ? kAll : 0;
        }
    sim.run3(value, defined);
    std::vector<LogicValue> out;
    for (const PrimaryOutput& o : netlist.outputs) {
        if ((defined[o.net] & 1) == 0)
            out.push_back(LogicValue::X);
        else
            out.push_back((value[o.net] & 1) ? LogicValue::One : LogicValue::Zero);
    }
    return out;
}

std::vector<std::vector<bool>> simulate_sequence(const Netlist& netlist, const std::vector<std::vector<bool>>& trace) {
    WordSimulator sim(netlist);
    std::vector<std::uint64_t> nets(netlist.net_count(), 0);
    std::vector<std::pair<NetId, NetId>> regs; // (d, q)
    for (const Gate& g : netlist.gates)
        if (g.kind == GateKind::Dff) {
            if (g.init == InitValue::X)
                throw InputError("simulate_sequence: DFF " + netlist.label(g.output) + " has an unknown reset value");
            nets[g.output] = g.init == InitValue::One ? kAll : 0;
            regs.emplace_back(g.inputs[0], g.output);
        }
    std::vector<std::vector<bool>> outputs;
    std::vector<std::uint64_t> next(regs.size());
    for (const auto& frame : trace) {
        if (frame.size() != netlist.inputs.size()) throw InputError("simulate_sequence: wrong number of inputs in trace");
        for (std::size_t i = 0; i < frame.size(); ++i) nets[netlist.inputs[i].net] = frame[i] ? kAll : 0;
        sim.run(nets);
        std::vector<bool> out;
        for (const PrimaryOutput& o : netlist.outputs) out.push_back((nets[o.net] & 1) != 0);
        outputs.push_back(std::move(out));
        for (std::size_t r = 0; r < regs.size(); ++r) next[r] = nets[regs[r].first];
        for (std::size_t r = 0; r < regs.size(); ++r) nets[regs[r].second] = next[r];
    }
    return outputs;
}

namespace {

// Index of each input of `a` inside `b`, matched by net name.
std::vector<std::size_t> match_interfaces(const Netlist& a, const Netlist& b) {
    if (a.inputs.size() != b.inputs.size() || a.outputs.size() != b.outputs.size())
        throw InputError("equivalence_check: interface mismatch (" + std::to_string(a.inputs.size()) + "/" +
                         std::to_string(a.outputs.size()) + " vs " + std::to_string(b.inputs.size()) + "/" +
                         std::to_string(b.outputs.size()) + " inputs/outputs)");
    std::unordered_map<std::string, std::size_t> b_index;
    for (std::size_t i = 0; i < b.inputs.size(); ++i) b_index.emplace(b.label(b.inputs[i].net), i);
    std::vector<std::size_t> map;
    for (const PrimaryInput& in : a.inputs) {
        auto it = b_index.find(a.label(in.net));
        if (it == b_index.end())
            throw InputError("equivalence_check: interface mismatch, input '" + a.label(in.net) + "' missing");
        map.push_back(it->second);
    }
    return map;
}

// Simulates both netlists on 64 patterns; returns a mask of lanes where any output differs
// and the first differing output index per lane is recoverable by the caller.
struct PairSim {
    const Netlist& a;
    const Netlist& b;
    WordSimulator sa;
    WordSimulator sb;
    std::vector<std::size_t> map;
    std::vector<std::uint64_t> na;
    std::vector<std::uint64_t> nb;
    std::vector<std::uint64_t> out_diff;

    PairSim(const Netlist& x, const Netlist& y)
        : a(x), b(y), sa(x), sb(y), map(match_interfaces(x, y)), na(x.net_count(), 0), nb(y.net_count(), 0) {
        for (const Gate& g : a.gates)
            if (g.kind == GateKind::Dff) na[g.output] = g.init == InitValue::One ? kAll : 0;
        for (const Gate& g : b.gates)
            if (g.kind == GateKind::Dff) nb[g.output] = g.init == InitValue::One ? kAll : 0;
    }

    std::uint64_t diff(const std::vector<std::uint64_t>& input_words) {
        for (std::size_t i = 0; i < input_words.size(); ++i) {
            na[a.inputs[i].net] = input_words[i];
            nb[b.inputs[map[i]].net] = input_words[i];
        }
        sa.run(na);
        sb.run(nb);
        std::uint64_t any = 0;
        out_diff.resize(a.outputs.size());
        for (std::size_t o = 0; o < a.outputs.size(); ++o) {
            out_diff[o] = na[a.outputs[o].net] ^ nb[b.outputs[o].net];
            any |= out_diff[o];
        }
        return any;
    }
};

int lowest_lane(std::uint64_t mask) { return __builtin_ctzll(mask); }

EquivalenceResult counterexample_from(const std::vector<std::uint64_t>& words, std::uint64_t mask,
                                      const std::vector<std::uint64_t>& out_diff) {
    EquivalenceResult r;
    r.equal = false;
    const int lane = lowest_lane(mask);
    for (std::uint64_t w : words) r.counterexample.push_back(((w >> lane) & 1) != 0);
    for (std::size_t o = 0; o < out_diff.size(); ++o)
        if ((out_diff[o] >> lane) & 1) {
            r.differing_output = o;
            break;
        }
    return r;
}

// Constant-propagating, structurally hashed encoder shared by both miter halves,
// so logic the two sides have in common maps to the same literals.
class HashedEncoder {
public:
    explicit HashedEncoder(Cnf& cnf) : cnf_(cnf), true_(cnf.new_var()) { cnf_.add_clause({true_}); }

    std::vector<int> encode(const Netlist& n, std::vector<int> lits) {
        lits.resize(n.net_count(), 0);
        for (const Gate& g : n.gates)
            if (g.kind == GateKind::Dff && lits[g.output] == 0) lits[g.output] = cnf_.new_var();
        for (const auto& in : n.inputs)
            if (lits[in.net] == 0) lits[in.net] = cnf_.new_var();
        for (std::size_t gi : topo_order(n)) {
            const Gate& g = n.gates[gi];
            auto at = [&](std::size_t k) {
                const int l = lits[g.inputs[k]];
                if (l == 0) throw InputError("equivalence_check: undriven net " + n.label(g.inputs[k]));
                return l;
            };
            int out = 0;
            switch (g.kind) {
            case GateKind::Const0: out = -true_; break;
            case GateKind::Const1: out = true_; break;
            case GateKind::Buf: out = at(0); break;
            case GateKind::Not: out = -at(0); break;
            case GateKind::And: out = and2(at(0), at(1)); break;
            case GateKind::Nand: out = -and2(at(0), at(1)); break;
            case GateKind::Or: out = -and2(-at(0), -at(1)); break;
            case GateKind::Nor: out = and2(-at(0), -at(1)); break;
            case GateKind::Xor: out = xor2(at(0), at(1)); break;
            case GateKind::Xnor: out = -xor2(at(0), at(1)); break;
            case GateKind::Mux2: out = mux(at(0), at(1), at(2)); break;
            case GateKind::Dff: continue;
            }
            lits[g.output] = out;
        }
        return lits;
    }

    int constant_true() const { return true_; }

private:
    int and2(int x, int y) {
        if (x == -true_ || y == -true_ || x == -y) return -true_;
        if (x == true_ || x == y) return y;
        if (y == true_) return x;
        if (x > y) std::swap(x, y);
        return cached({0, x, y}, GateKind::And, {x, y});
    }
    int xor2(int x, int y) {
        bool flip = false;
        if (x < 0) x = -x, flip = !flip;
        if (y < 0) y = -y, flip = !flip;
        int r;
        if (x == y) r = -true_;
        else if (x == true_) r = -y;
        else if (y == true_) r = -x;
        else {
            if (x > y) std::swap(x, y);
            r = cached({1, x, y}, GateKind::Xor, {x, y});
        }
        return flip ? -r : r;
    }
    int mux(int sel, int a, int b) {
        if (sel == true_) return b;
        if (sel == -true_ || a == b) return a;
        if (sel < 0) sel = -sel, std::swap(a, b);
        return cached({2, sel, a, b}, GateKind::Mux2, {sel, a, b});
    }
    int cached(std::vector<int> key, GateKind kind, std::vector<int> ins) {
        const auto it = table_.find(key);
        if (it != table_.end()) return it->second;
        const int v = cnf_.new_var();
        encode_gate(cnf_, kind, ins, v);
        table_.emplace(std::move(key), v);
        return v;
    }

    Cnf& cnf_;
    int true_;
    std::map<std::vector<int>, int> table_;
};

EquivalenceResult sat_miter(const Netlist& a, const Netlist& b) {
    const auto map = match_interfaces(a, b);
    Cnf cnf;
    HashedEncoder enc(cnf);
    std::vector<int> lit_a(a.net_count(), 0);
    std::vector<int> lit_b(b.net_count(), 0);
    for (std::size_t i = 0; i < a.inputs.size(); ++i) {
        const int v = cnf.new_var();
        lit_a[a.inputs[i].net] = v;
        lit_b[b.inputs[map[i]].net] = v;
    }
    lit_a = enc.encode(a, std::move(lit_a));
    lit_b = enc.encode(b, std::move(lit_b));
    std::vector<int> diffs;
    std::vector<std::size_t> diff_outputs;
    for (std::size_t o = 0; o < a.outputs.size(); ++o) {
        const int x = lit_a[a.outputs[o].net];
        const int y = lit_b[b.outputs[o].net];
        if (x == 0 || y == 0) throw InputError("equivalence_check: undriven output " + std::to_string(o));
        if (x == y) continue;
        const int d = cnf.new_var();
        // d <-> (x xor y)
        cnf.add_clause({-d, x, y});
        cnf.add_clause({-d, -x, -y});
        cnf.add_clause({d, -x, y});
        cnf.add_clause({d, x, -y});
        diffs.push_back(d);
        diff_outputs.push_back(o);
    }
    if (diffs.empty()) return {};
    cnf.add_clause(diffs);
    const SolveResult res = solve(cnf, SolveBudget{});
    EquivalenceResult r;
    if (res.status == SolveStatus::Unsat) return r;
    if (res.status != SolveStatus::Sat) throw Error("equivalence_check: SAT miter did not finish");
    r.equal = false;
    for (std::size_t i = 0; i < a.inputs.size(); ++i) r.counterexample.push_back(res.value(lit_a[a.inputs[i].net]));
    for (std::size_t o = 0; o < diffs.size(); ++o)
        if (res.value(diffs[o])) {
            r.differing_output = diff_outputs[o];
            break;
        }
    return r;
}

} // namespace

EquivalenceResult equivalence_check(const Netlist& a, const Netlist& b, EquivalenceMethod method,
                                    std::uint64_t random_vectors, std::uint64_t seed) {
    if (method == EquivalenceMethod::SatMiter) return sat_miter(a, b);

    PairSim ps(a, b);
    const std::size_t n = a.inputs.size();
    std::vector<std::uint64_t> words(n, 0);

    if (method == EquivalenceMethod::Exhaustive) {
        if (n > 20) throw BoundsError("equivalence_check: exhaustive mode supports at most 20 inputs, got " + std::to_string(n));
        const std::uint64_t total = std::uint64_t{1} << n;
        static constexpr std::uint64_t kLanePattern[6] = {0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull,
                                                          0xF0F0F0F0F0F0F0F0ull, 0xFF00FF00FF00FF00ull,
                                                          0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull};
        for (std::uint64_t base = 0; base < total; base += 64) {
            // Input 0 is the most significant bit, so the first hit is the smallest counterexample.
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t b = n - 1 - i;
                words[i] = b < 6 ? kLanePattern[b] : (((base >> b) & 1) ? kAll : 0);
            }
            const std::uint64_t valid = total - base >= 64 ? kAll : ((std::uint64_t{1} << (total - base)) - 1);
            if (const std::uint64_t d = ps.diff(words) & valid) return counterexample_from(words, d, ps.out_diff);
        }
        return {};
    }

    Rng rng(seed);
    for (std::uint64_t done = 0; done < random_vectors; done += 64) {
        for (auto& w : words) w = rng();
        const std::uint64_t left = random_vectors - done;
        const std::uint64_t valid = left >= 64 ? kAll : ((std::uint64_t{1} << left) - 1);
        if (const std::uint64_t d = ps.diff(words) & valid) return counterexample_from(words, d, ps.out_diff);
    }
    return {};
}

} // namespace lockleak
