#include "lockleak/benchgen.hpp"

#include "lockleak/errors.hpp"

#include <algorithm>

namespace lockleak {

namespace {

std::string idx(const std::string& base, int i) { return base + "[" + std::to_string(i) + "]"; }

constexpr int kPresentSbox[16] = {0xC, 0x5, 0x6, 0xB, 0x9, 0x0, 0xA, 0xD, 0x3, 0xE, 0xF, 0x8, 0x4, 0x7, 0x1, 0x2};

int param(const BenchmarkParams& p, const char* key, int fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

void allow(const BenchmarkParams& p, std::string_view bench, std::initializer_list<std::string_view> keys) {
    for (const auto& [k, v] : p)
        if (std::find(keys.begin(), keys.end(), k) == keys.end())
            throw InputError("benchmark " + std::string(bench) + " has no parameter '" + k + "'");
}

} // namespace

LockedNetlist GeneratedBenchmark::gate_level() const {
    if (gate) return *gate;
    LockedNetlist l;
    l.netlist = lower_to_gates(*word);
    return l;
}

LockedNetlist fig5_example() {
    LockedNetlist l;
    Netlist& n = l.netlist;
    const NetId in1 = n.add_input("in1", PortRole::Operational, 0);
    const NetId in2 = n.add_input("in2", PortRole::Operational, 1);
    const NetId in3 = n.add_input("in3", PortRole::Operational, 2);
    const NetId ek1 = n.add_input("enc_key1", PortRole::Secret, 0);
    const NetId ek2 = n.add_input("enc_key2", PortRole::Secret, 1);
    const NetId lk1 = n.add_input("lolo_key1", PortRole::LockingKey, 0);
    const NetId lk2 = n.add_input("lolo_key2", PortRole::LockingKey, 1);
    const NetId n1 = n.add_gate(GateKind::Xor, {ek1, ek2}, "n1");
    n.add_output(n.add_gate(GateKind::Xor, {n1, in1}, "output1"));
    const NetId m1 = n.add_gate(GateKind::Mux2, {lk1, in2, ek1}, "m1");
    const NetId m2 = n.add_gate(GateKind::Mux2, {lk2, in3, m1}, "m2");
    n.add_output(n.add_gate(GateKind::And, {m1, m2}, "output2"));
    l.key = {false, false};
    l.key_inputs = {lk1, lk2};
    l.provenance = {{"dmux", "MUX2", {2}, {in2, ek1}}, {"dmux", "MUX2", {3}, {in3, m1}}};
    return l;
}

Netlist fig5_reference() {
    Netlist n;
    const NetId in1 = n.add_input("in1", PortRole::Operational, 0);
    const NetId in2 = n.add_input("in2", PortRole::Operational, 1);
    const NetId in3 = n.add_input("in3", PortRole::Operational, 2);
    const NetId ek1 = n.add_input("enc_key1", PortRole::Secret, 0);
    const NetId ek2 = n.add_input("enc_key2", PortRole::Secret, 1);
    const NetId n1 = n.add_gate(GateKind::Xor, {ek1, ek2}, "n1");
    n.add_output(n.add_gate(GateKind::Xor, {n1, in1}, "output1"));
    n.add_output(n.add_gate(GateKind::And, {in2, in3}, "output2"));
    return n;
}

Netlist passthrough(int width) {
    if (width < 1) throw InputError("passthrough width must be at least 1");
    Netlist n;
    std::vector<NetId> in;
    for (int i = 0; i < width; ++i) in.push_back(n.add_input(idx("in", i), PortRole::Operational, i));
    for (int i = 0; i < width; ++i) n.add_input(idx("key", i), PortRole::Secret, i);
    for (int i = 0; i < width; ++i) n.add_output(n.add_gate(GateKind::Buf, {in[static_cast<std::size_t>(i)]}, idx("out", i)));
    return n;
}

Netlist toy_spn(int width, int rounds) {
    if (width < 4 || width % 4 != 0 || width > 32) throw InputError("toy_spn width must be a multiple of 4 in 4..32");
    if (rounds < 1 || rounds > 8) throw InputError("toy_spn rounds must be in 1..8");
    Netlist n;
    std::vector<NetId> x;
    for (int i = 0; i < width; ++i) x.push_back(n.add_input(idx("pt", i), PortRole::Operational, i));
    std::vector<std::vector<NetId>> key(static_cast<std::size_t>(rounds) + 1);
    for (int r = 0; r <= rounds; ++r)
        for (int i = 0; i < width; ++i)
            key[static_cast<std::size_t>(r)].push_back(n.add_input(idx("key", r * width + i), PortRole::Secret, r * width + i));
    const NetId zero = n.add_gate(GateKind::Const0, {}, "tie0");
    const NetId one = n.add_gate(GateKind::Const1, {}, "tie1");

    for (int r = 0; r < rounds; ++r) {
        for (int i = 0; i < width; ++i)
            x[static_cast<std::size_t>(i)] = n.add_gate(GateKind::Xor, {x[static_cast<std::size_t>(i)], key[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)]});
        std::vector<NetId> y(static_cast<std::size_t>(width));
        for (int s = 0; s < width / 4; ++s) {
            for (int j = 0; j < 4; ++j) {
                // Mux tree: level l selects on input bit l of the nibble.
                std::vector<NetId> level;
                for (int v = 0; v < 16; ++v) level.push_back(((kPresentSbox[v] >> j) & 1) ? one : zero);
                for (int b = 0; b < 4; ++b) {
                    std::vector<NetId> next;
                    for (std::size_t m = 0; m < level.size(); m += 2)
                        next.push_back(n.add_gate(GateKind::Mux2, {x[static_cast<std::size_t>(4 * s + b)], level[m], level[m + 1]}));
                    level = std::move(next);
                }
                y[static_cast<std::size_t>(4 * s + j)] = level[0];
            }
        }
        // Bit transpose: bit i of nibble s moves to nibble i, position s.
        const int groups = width / 4;
        for (int i = 0; i < width; ++i) x[static_cast<std::size_t>((i % 4) * groups + i / 4)] = y[static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < width; ++i)
        n.add_output(n.add_gate(GateKind::Xor, {x[static_cast<std::size_t>(i)], key[static_cast<std::size_t>(rounds)][static_cast<std::size_t>(i)]}, idx("ct", i)));
    return n;
}

namespace {

int xtea_shift_left(int width) { return width / 2; }
int xtea_shift_right(int width) { return width / 2 + 1; }
std::uint64_t xtea_delta(int width) { return 0x9E3779B9ull & width_mask(width); }

} // namespace

WordDesign toy_xtea(int width, int rounds) {
    if (width < 4 || width > 32) throw InputError("toy_xtea width must be in 4..32");
    if (rounds < 1 || rounds > 8) throw InputError("toy_xtea rounds must be in 1..8");
    WordDesign d;
    std::size_t v0 = d.input("v0", width, PortRole::Operational);
    std::size_t v1 = d.input("v1", width, PortRole::Operational);
    std::size_t k[4];
    for (int i = 0; i < 4; ++i) k[i] = d.input("k" + std::to_string(i), width, PortRole::Secret);
    const int shl = xtea_shift_left(width);
    const int shr = xtea_shift_right(width);

    auto mix = [&](std::size_t v) {
        const std::size_t t = d.op(WordOp::BitXor, d.shift(WordOp::Shl, v, shl), d.shift(WordOp::Shr, v, shr));
        return d.op(WordOp::Add, t, v);
    };
    auto select = [&](std::size_t index) {
        std::size_t r = k[3];
        for (int c = 2; c >= 0; --c) r = d.mux(d.cmp(CmpKind::Eq, index, d.constant(width, static_cast<std::uint64_t>(c))), k[c], r);
        return r;
    };
    std::size_t sum = d.constant(width, 0);
    const std::size_t three = d.constant(width, 3);
    for (int r = 0; r < rounds; ++r) {
        std::size_t key_a = select(d.op(WordOp::BitAnd, sum, three));
        v0 = d.op(WordOp::Add, v0, d.op(WordOp::BitXor, mix(v1), d.op(WordOp::Add, sum, key_a)));
        sum = d.op(WordOp::Add, sum, d.constant(width, xtea_delta(width)));
        std::size_t key_b = select(d.op(WordOp::BitAnd, d.shift(WordOp::Shr, sum, width / 2), three));
        v1 = d.op(WordOp::Add, v1, d.op(WordOp::BitXor, mix(v0), d.op(WordOp::Add, sum, key_b)));
    }
    d.output("c0", v0);
    d.output("c1", v1);
    return d;
}

std::pair<std::uint64_t, std::uint64_t> toy_xtea_reference(int width, int rounds, std::uint64_t v0, std::uint64_t v1,
                                                           const std::uint64_t key[4]) {
    const std::uint64_t m = width_mask(width);
    const int shl = xtea_shift_left(width), shr = xtea_shift_right(width);
    std::uint64_t sum = 0;
    v0 &= m;
    v1 &= m;
    auto f = [&](std::uint64_t v) { return ((((v << shl) & m) ^ (v >> shr)) + v) & m; };
    for (int r = 0; r < rounds; ++r) {
        v0 = (v0 + (f(v1) ^ ((sum + key[sum & 3]) & m))) & m;
        sum = (sum + xtea_delta(width)) & m;
        v1 = (v1 + (f(v0) ^ ((sum + key[(sum >> (width / 2)) & 3]) & m))) & m;
    }
    return {v0, v1};
}

Netlist fsm_datapath(int rounds, int width) {
    if (rounds < 1 || rounds > 14) throw InputError("fsm_datapath rounds must be in 1..14");
    if (width < 3 || width > 32) throw InputError("fsm_datapath width must be in 3..32");
    Netlist n;
    const auto w = static_cast<std::size_t>(width);
    std::vector<NetId> pt, k0, k1;
    for (int i = 0; i < width; ++i) pt.push_back(n.add_input(idx("pt", i), PortRole::Operational, i));
    for (int i = 0; i < width; ++i) k0.push_back(n.add_input(idx("k0", i), PortRole::Secret, i));
    for (int i = 0; i < width; ++i) k1.push_back(n.add_input(idx("k1", i), PortRole::Secret, width + i));

    int cw = 1;
    while ((1 << cw) < rounds + 2) ++cw;
    std::vector<NetId> s, c;
    std::vector<std::size_t> s_dff, c_dff;
    for (int i = 0; i < width; ++i) {
        s.push_back(n.add_dff(kNoNet, InitValue::Zero, idx("S", i)));
        s_dff.push_back(n.gates.size() - 1);
    }
    for (int i = 0; i < cw; ++i) {
        c.push_back(n.add_dff(kNoNet, InitValue::Zero, idx("C", i)));
        c_dff.push_back(n.gates.size() - 1);
    }

    auto equals = [&](int value, const std::string& name) {
        NetId acc = kNoNet;
        for (int i = 0; i < cw; ++i) {
            const NetId bit = ((value >> i) & 1) ? c[static_cast<std::size_t>(i)] : n.add_gate(GateKind::Not, {c[static_cast<std::size_t>(i)]});
            acc = acc == kNoNet ? bit : n.add_gate(GateKind::And, {acc, bit});
        }
        return n.add_gate(GateKind::Buf, {acc}, name);
    };
    const NetId load = equals(0, "load");
    const NetId done = equals(rounds + 1, "done");
    const NetId not_done = n.add_gate(GateKind::Not, {done});

    for (std::size_t i = 0; i < w; ++i) {
        const NetId ksel = n.add_gate(GateKind::Mux2, {c[0], k0[i], k1[i]});
        const NetId nb = n.add_gate(GateKind::Not, {s[(i + 1) % w]});
        const NetId chi = n.add_gate(GateKind::Xor, {s[i], n.add_gate(GateKind::And, {nb, s[(i + 2) % w]})});
        const NetId next = n.add_gate(GateKind::Mux2, {load, n.add_gate(GateKind::Xor, {chi, ksel}), pt[i]});
        n.gates[s_dff[i]].inputs = {next};
    }
    NetId carry = kNoNet;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const NetId inc = carry == kNoNet ? n.add_gate(GateKind::Not, {c[i]}) : n.add_gate(GateKind::Xor, {c[i], carry});
        carry = carry == kNoNet ? c[i] : n.add_gate(GateKind::And, {c[i], carry});
        n.gates[c_dff[i]].inputs = {n.add_gate(GateKind::And, {inc, not_done})};
    }
    for (std::size_t i = 0; i < w; ++i) n.add_output(n.add_gate(GateKind::And, {s[i], done}, idx("out", static_cast<int>(i))));
    return n;
}

std::vector<std::string> benchmark_names() {
    return {"fig5_example", "fig5_reference", "passthrough", "toy_spn", "toy_xtea", "fsm_datapath"};
}

GeneratedBenchmark gen_benchmark(std::string_view name, const BenchmarkParams& p) {
    GeneratedBenchmark b;
    b.name = std::string(name);
    if (name == "fig5_example") {
        allow(p, name, {});
        b.gate = fig5_example();
    } else if (name == "fig5_reference") {
        allow(p, name, {});
        b.gate = LockedNetlist{fig5_reference(), {}, {}, {}};
    } else if (name == "passthrough") {
        allow(p, name, {"width"});
        b.gate = LockedNetlist{passthrough(param(p, "width", 4)), {}, {}, {}};
    } else if (name == "toy_spn") {
        allow(p, name, {"width", "rounds"});
        b.gate = LockedNetlist{toy_spn(param(p, "width", 4), param(p, "rounds", 2)), {}, {}, {}};
    } else if (name == "toy_xtea") {
        allow(p, name, {"width", "rounds"});
        b.word = toy_xtea(param(p, "width", 4), param(p, "rounds", 2));
    } else if (name == "fsm_datapath") {
        allow(p, name, {"width", "rounds"});
        b.gate = LockedNetlist{fsm_datapath(param(p, "rounds", 2), param(p, "width", 4)), {}, {}, {}};
    } else {
        throw InputError("unknown benchmark '" + std::string(name) + "'");
    }
    return b;
}

} // namespace lockleak
