#include "lockleak/netlist.hpp"

#include "lockleak/errors.hpp"

#include <algorithm>
#include <array>
#include <unordered_map>
#include <unordered_set>

namespace lockleak {

namespace {

constexpr std::array<std::string_view, 12> kKindNames = {
    "AND", "NAND", "OR", "NOR", "XOR", "XNOR", "NOT", "BUF", "MUX2", "CONST0", "CONST1", "DFF"};

} // namespace

int arity(GateKind kind) {
    switch (kind) {
    case GateKind::Not:
    case GateKind::Buf:
    case GateKind::Dff: return 1;
    case GateKind::Mux2: return 3;
    case GateKind::Const0:
    case GateKind::Const1: return 0;
    default: return 2;
    }
}

std::string_view to_string(GateKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<GateKind> gate_kind_from_string(std::string_view text) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i)
        if (kKindNames[i] == text) return static_cast<GateKind>(i);
    return std::nullopt;
}

std::string_view to_string(PortRole role) {
    switch (role) {
    case PortRole::Secret: return "secret";
    case PortRole::LockingKey: return "lolo_key";
    case PortRole::Operational: return "operational";
    }
    return "operational";
}

std::optional<PortRole> port_role_from_string(std::string_view text) {
    if (text == "secret") return PortRole::Secret;
    if (text == "lolo_key") return PortRole::LockingKey;
    if (text == "operational") return PortRole::Operational;
    return std::nullopt;
}

NetId Netlist::add_net(std::string name) {
    net_names.push_back(std::move(name));
    return static_cast<NetId>(net_names.size() - 1);
}

NetId Netlist::add_input(std::string name, PortRole role, int bit) {
    const NetId net = add_net(std::move(name));
    inputs.push_back({net, role, bit});
    return net;
}

NetId Netlist::add_gate(GateKind kind, std::vector<NetId> ins, std::string name) {
    const NetId out = add_net(std::move(name));
    add_gate_driving(kind, std::move(ins), out);
    return out;
}

void Netlist::add_gate_driving(GateKind kind, std::vector<NetId> ins, NetId output) {
    gates.push_back(Gate{kind, std::move(ins), output, InitValue::Zero});
}

NetId Netlist::add_dff(NetId d, InitValue init, std::string name) {
    const NetId q = add_net(std::move(name));
    gates.push_back(Gate{GateKind::Dff, {d}, q, init});
    return q;
}

std::optional<NetId> Netlist::find_net(std::string_view name) const {
    for (std::size_t i = 0; i < net_names.size(); ++i)
        if (net_names[i] == name) return static_cast<NetId>(i);
    return std::nullopt;
}

std::optional<std::size_t> Netlist::find_input(std::string_view name) const {
    for (std::size_t i = 0; i < inputs.size(); ++i)
        if (inputs[i].net < net_names.size() && net_names[inputs[i].net] == name) return i;
    return std::nullopt;
}

std::string Netlist::label(NetId net) const {
    if (net < net_names.size() && !net_names[net].empty()) return net_names[net];
    return "$" + std::to_string(net);
}

bool Netlist::is_sequential() const {
    return std::any_of(gates.begin(), gates.end(), [](const Gate& g) { return g.kind == GateKind::Dff; });
}

std::size_t Netlist::combinational_gate_count() const {
    return static_cast<std::size_t>(
        std::count_if(gates.begin(), gates.end(), [](const Gate& g) { return g.kind != GateKind::Dff; }));
}

std::vector<std::size_t> Netlist::inputs_with_role(PortRole role) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < inputs.size(); ++i)
        if (inputs[i].role == role) idx.push_back(i);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return inputs[a].bit < inputs[b].bit; });
    return idx;
}

std::size_t Netlist::count_role(PortRole role) const {
    return static_cast<std::size_t>(
        std::count_if(inputs.begin(), inputs.end(), [&](const PrimaryInput& p) { return p.role == role; }));
}

std::vector<Driver> compute_drivers(const Netlist& netlist) {
    std::vector<Driver> drivers(netlist.net_count());
    auto claim = [&](NetId net, DriverKind kind, std::size_t index) {
        if (net >= drivers.size()) return;
        Driver& d = drivers[net];
        d = d.kind == DriverKind::None ? Driver{kind, index} : Driver{DriverKind::Multiple, d.index};
    };
    for (std::size_t i = 0; i < netlist.inputs.size(); ++i)
        claim(netlist.inputs[i].net, DriverKind::Input, i);
    for (std::size_t g = 0; g < netlist.gates.size(); ++g)
        claim(netlist.gates[g].output, DriverKind::Gate, g);
    return drivers;
}

std::vector<std::vector<LoadPin>> compute_loads(const Netlist& netlist) {
    std::vector<std::vector<LoadPin>> loads(netlist.net_count());
    for (std::size_t g = 0; g < netlist.gates.size(); ++g) {
        const auto& ins = netlist.gates[g].inputs;
        for (std::size_t p = 0; p < ins.size(); ++p)
            if (ins[p] < loads.size()) loads[ins[p]].push_back({g, p});
    }
    return loads;
}

namespace {

// Kahn's algorithm over combinational gates. Returns the order and, if some gates
// remain, the indices of gates left on a cycle.
struct TopoResult {
    std::vector<std::size_t> order;
    std::vector<std::size_t> stuck;
};

TopoResult kahn(const Netlist& n) {
    const auto drivers = compute_drivers(n);
    const auto loads = compute_loads(n);
    std::vector<int> pending(n.gates.size(), 0);
    std::vector<std::size_t> ready;
    for (std::size_t g = 0; g < n.gates.size(); ++g) {
        const Gate& gate = n.gates[g];
        if (gate.kind == GateKind::Dff) continue;
        for (NetId in : gate.inputs) {
            if (in >= drivers.size()) continue;
            const Driver& d = drivers[in];
            if (d.kind == DriverKind::Gate && n.gates[d.index].kind != GateKind::Dff) ++pending[g];
        }
        if (pending[g] == 0) ready.push_back(g);
    }
    TopoResult res;
    // Process in ascending gate index among ready gates to keep the order deterministic.
    std::size_t head = 0;
    while (head < ready.size()) {
        const std::size_t g = ready[head++];
        res.order.push_back(g);
        const NetId out = n.gates[g].output;
        if (out >= loads.size()) continue;
        for (const LoadPin& lp : loads[out]) {
            if (n.gates[lp.gate].kind == GateKind::Dff) continue;
            if (--pending[lp.gate] == 0) ready.push_back(lp.gate);
        }
    }
    for (std::size_t g = 0; g < n.gates.size(); ++g)
        if (n.gates[g].kind != GateKind::Dff && pending[g] > 0) res.stuck.push_back(g);
    return res;
}

// Walks backwards from a stuck gate through stuck fan-in until a net repeats.
std::vector<NetId> extract_loop(const Netlist& n, const std::vector<std::size_t>& stuck) {
    const auto drivers = compute_drivers(n);
    std::unordered_set<std::size_t> stuck_set(stuck.begin(), stuck.end());
    std::vector<NetId> path;
    std::unordered_map<NetId, std::size_t> seen;
    std::size_t g = stuck.front();
    while (true) {
        const NetId out = n.gates[g].output;
        if (auto it = seen.find(out); it != seen.end()) {
            std::vector<NetId> loop(path.begin() + static_cast<std::ptrdiff_t>(it->second), path.end());
            std::reverse(loop.begin(), loop.end());
            return loop;
        }
        seen.emplace(out, path.size());
        path.push_back(out);
        bool moved = false;
        for (NetId in : n.gates[g].inputs) {
            if (in >= drivers.size()) continue;
            const Driver& d = drivers[in];
            if (d.kind == DriverKind::Gate && stuck_set.count(d.index)) {
                g = d.index;
                moved = true;
                break;
            }
        }
        if (!moved) return path;
    }
}

} // namespace

std::vector<Violation> validate(const Netlist& n) {
    std::vector<Violation> out;
    const std::size_t nets = n.net_count();
    auto in_range = [&](NetId id) { return id < nets; };

    for (std::size_t g = 0; g < n.gates.size(); ++g) {
        const Gate& gate = n.gates[g];
        std::string gname = "gate " + std::to_string(g) + " (" + std::string(to_string(gate.kind));
        gname += in_range(gate.output) ? " driving " + n.label(gate.output) + ")" : ")";
        if (static_cast<int>(gate.inputs.size()) != arity(gate.kind))
            out.push_back({"arity", gname + " has " + std::to_string(gate.inputs.size()) + " inputs, expected " +
                                        std::to_string(arity(gate.kind))});
        if (!in_range(gate.output)) out.push_back({"unresolved", gname + " drives unknown net"});
        for (NetId in : gate.inputs)
            if (!in_range(in)) out.push_back({"unresolved", gname + " reads unknown net " + std::to_string(in)});
    }
    for (std::size_t i = 0; i < n.inputs.size(); ++i)
        if (!in_range(n.inputs[i].net))
            out.push_back({"unresolved", "input " + std::to_string(i) + " refers to unknown net"});
    for (std::size_t i = 0; i < n.outputs.size(); ++i)
        if (!in_range(n.outputs[i].net))
            out.push_back({"unresolved", "output " + std::to_string(i) + " refers to unknown net"});
    if (n.outputs.empty()) out.push_back({"no-outputs", "netlist has no primary outputs"});

    const auto drivers = compute_drivers(n);
    const auto loads = compute_loads(n);
    for (NetId net = 0; net < nets; ++net) {
        if (drivers[net].kind == DriverKind::Multiple)
            out.push_back({"single-driver", "net " + n.label(net) + " has more than one driver"});
        else if (drivers[net].kind == DriverKind::None) {
            const bool used = !loads[net].empty() ||
                              std::any_of(n.outputs.begin(), n.outputs.end(),
                                          [&](const PrimaryOutput& o) { return o.net == net; });
            out.push_back({used ? "dangling" : "single-driver", "net " + n.label(net) + " has no driver"});
        }
    }

    std::unordered_set<std::string_view> names;
    for (const std::string& name : n.net_names)
        if (!name.empty() && !names.insert(name).second)
            out.push_back({"duplicate-name", "net name '" + name + "' is used more than once"});

    for (PortRole role : {PortRole::Secret, PortRole::LockingKey, PortRole::Operational}) {
        std::unordered_set<int> bits;
        for (const PrimaryInput& in : n.inputs)
            if (in.role == role && !bits.insert(in.bit).second)
                out.push_back({"duplicate-bit", std::string(to_string(role)) + " bit " + std::to_string(in.bit) +
                                                    " is declared more than once"});
    }

    const bool structurally_ok = std::none_of(out.begin(), out.end(), [](const Violation& v) {
        return v.rule == "arity" || v.rule == "unresolved" || v.rule == "single-driver";
    });
    if (structurally_ok) {
        TopoResult topo = kahn(n);
        if (!topo.stuck.empty()) {
            std::string msg = "combinational cycle through nets:";
            for (NetId net : extract_loop(n, topo.stuck)) msg += " " + n.label(net);
            out.push_back({"cycle", msg});
        }
    }
    return out;
}

std::vector<std::size_t> topo_order(const Netlist& netlist) {
    TopoResult topo = kahn(netlist);
    if (!topo.stuck.empty()) {
        auto loop = extract_loop(netlist, topo.stuck);
        std::string msg = "combinational cycle through nets:";
        for (NetId net : loop) msg += " " + netlist.label(net);
        throw CycleError(msg, std::move(loop));
    }
    return std::move(topo.order);
}

std::vector<bool> combinational_fanout(const Netlist& n, const std::vector<NetId>& seeds) {
    const auto loads = compute_loads(n);
    std::vector<bool> mark(n.net_count(), false);
    std::vector<NetId> stack;
    for (NetId s : seeds)
        if (s < mark.size() && !mark[s]) {
            mark[s] = true;
            stack.push_back(s);
        }
    while (!stack.empty()) {
        const NetId net = stack.back();
        stack.pop_back();
        for (const LoadPin& lp : loads[net]) {
            const Gate& g = n.gates[lp.gate];
            if (g.kind == GateKind::Dff || mark[g.output]) continue;
            mark[g.output] = true;
            stack.push_back(g.output);
        }
    }
    return mark;
}

std::vector<bool> combinational_fanin(const Netlist& n, const std::vector<NetId>& seeds) {
    const auto drivers = compute_drivers(n);
    std::vector<bool> mark(n.net_count(), false);
    std::vector<NetId> stack;
    for (NetId s : seeds)
        if (s < mark.size() && !mark[s]) {
            mark[s] = true;
            stack.push_back(s);
        }
    while (!stack.empty()) {
        const NetId net = stack.back();
        stack.pop_back();
        const Driver& d = drivers[net];
        if (d.kind != DriverKind::Gate) continue;
        const Gate& g = n.gates[d.index];
        if (g.kind == GateKind::Dff) continue;
        for (NetId in : g.inputs)
            if (!mark[in]) {
                mark[in] = true;
                stack.push_back(in);
            }
    }
    return mark;
}

Netlist canonicalize(const Netlist& n) {
    std::vector<NetId> remap(n.net_count(), kNoNet);
    NetId next = 0;
    auto assign = [&](NetId old) {
        if (old < remap.size() && remap[old] == kNoNet) remap[old] = next++;
    };
    for (const PrimaryInput& in : n.inputs) assign(in.net);
    for (const Gate& g : n.gates)
        if (g.kind == GateKind::Dff) assign(g.output);
    for (const Gate& g : n.gates) assign(g.output);
    for (NetId old = 0; old < n.net_count(); ++old) assign(old);

    Netlist out;
    out.net_names.resize(n.net_count());
    for (NetId old = 0; old < n.net_count(); ++old) out.net_names[remap[old]] = n.net_names[old];
    auto map = [&](NetId id) { return id < remap.size() ? remap[id] : id; };
    for (const PrimaryInput& in : n.inputs) out.inputs.push_back({map(in.net), in.role, in.bit});
    for (const PrimaryOutput& o : n.outputs) out.outputs.push_back({map(o.net), o.frame});
    for (const Gate& g : n.gates) {
        Gate copy = g;
        for (NetId& in : copy.inputs) in = map(in);
        copy.output = map(copy.output);
        out.gates.push_back(std::move(copy));
    }
    return out;
}

Netlist unroll(const Netlist& n, int frames) {
    if (frames < 1) throw InputError("unroll: frame count must be at least 1");
    const bool sequential = n.is_sequential();
    if (!sequential && frames == 1) return n;

    const auto order = topo_order(n);
    Netlist out;
    auto frame_name = [&](NetId net, int f) -> std::string {
        const std::string& base = n.net_names[net];
        if (base.empty()) return {};
        return base + "@" + std::to_string(f);
    };

    const std::size_t op_count = n.count_role(PortRole::Operational);
    std::vector<NetId> shared(n.net_count(), kNoNet);
    for (const PrimaryInput& in : n.inputs)
        if (in.role != PortRole::Operational) shared[in.net] = out.add_input(n.net_names[in.net], in.role, in.bit);

    NetId tie0 = kNoNet;
    NetId tie1 = kNoNet;
    std::vector<NetId> prev(n.net_count(), kNoNet);
    std::vector<NetId> cur(n.net_count(), kNoNet);
    int extra_op_bit = static_cast<int>(op_count) * frames;

    for (int f = 0; f < frames; ++f) {
        std::fill(cur.begin(), cur.end(), kNoNet);
        for (const PrimaryInput& in : n.inputs) {
            if (in.role == PortRole::Operational) {
                const int bit = static_cast<int>(op_count) * f + in.bit;
                cur[in.net] = out.add_input(sequential ? frame_name(in.net, f) : (f == 0 ? n.net_names[in.net] : frame_name(in.net, f)),
                                            PortRole::Operational, bit);
            } else {
                cur[in.net] = shared[in.net];
            }
        }
        for (const Gate& g : n.gates) {
            if (g.kind != GateKind::Dff) continue;
            if (f == 0) {
                switch (g.init) {
                case InitValue::Zero:
                    if (tie0 == kNoNet) tie0 = out.add_gate(GateKind::Const0, {});
                    cur[g.output] = tie0;
                    break;
                case InitValue::One:
                    if (tie1 == kNoNet) tie1 = out.add_gate(GateKind::Const1, {});
                    cur[g.output] = tie1;
                    break;
                case InitValue::X: {
                    std::string name = n.net_names[g.output].empty() ? std::string{} : n.net_names[g.output] + "@init";
                    cur[g.output] = out.add_input(std::move(name), PortRole::Operational, extra_op_bit++);
                    break;
                }
                }
            } else {
                cur[g.output] = prev[g.inputs[0]];
            }
        }
        for (std::size_t gi : order) {
            const Gate& g = n.gates[gi];
            std::vector<NetId> ins;
            ins.reserve(g.inputs.size());
            for (NetId in : g.inputs) ins.push_back(cur[in]);
            const bool keep_plain = !sequential && f == 0;
            cur[g.output] = out.add_gate(g.kind, std::move(ins), keep_plain ? n.net_names[g.output] : frame_name(g.output, f));
        }
        for (const PrimaryOutput& o : n.outputs) out.add_output(cur[o.net], f);
        std::swap(prev, cur);
    }
    return out;
}

} // namespace lockleak
