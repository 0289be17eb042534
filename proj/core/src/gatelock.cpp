#include "lockleak/gatelock.hpp"

#include "lockleak/errors.hpp"
#include "lockleak/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace lockleak {

std::string_view to_string(LockScheme s) { return s == LockScheme::Epic ? "epic" : "dmux"; }

std::optional<LockScheme> lock_scheme_from_string(std::string_view text) {
    if (text == "epic") return LockScheme::Epic;
    if (text == "dmux") return LockScheme::Dmux;
    return std::nullopt;
}

KeySize KeySize::parse(std::string_view text) {
    const bool pct = !text.empty() && text.back() == '%';
    if (pct) text.remove_suffix(1);
    double value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
        throw InputError("bad key size '" + std::string(text) + (pct ? "%'" : "'"));
    if (!pct && value != std::floor(value)) throw InputError("absolute key size must be an integer");
    return {pct, value};
}

std::string KeySize::label() const {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, amount, std::chars_format::fixed);
    return std::string(buf, end) + (percent ? "%" : "");
}

int KeySize::resolve(std::size_t max_locations) const {
    if (max_locations == 0) throw InputError("netlist has no eligible key locations");
    if (percent) {
        if (!(amount > 0.0 && amount <= 100.0)) throw InputError("key percentage must be in (0, 100]");
        const auto bits = static_cast<long>(std::lround(amount * static_cast<double>(max_locations) / 100.0));
        return static_cast<int>(std::max(bits, 1L));
    }
    if (amount < 1.0) throw InputError("absolute key size must be at least 1");
    if (amount > static_cast<double>(max_locations))
        throw InputError("key size " + label() + " exceeds " + std::to_string(max_locations) + " eligible locations");
    return static_cast<int>(amount);
}

std::vector<NetId> eligible_nets(const Netlist& netlist) {
    std::vector<NetId> nets;
    for (const auto& in : netlist.inputs)
        if (in.role != PortRole::LockingKey) nets.push_back(in.net);
    for (const auto& g : netlist.gates) nets.push_back(g.output);
    return nets;
}

std::size_t max_locations(const Netlist& netlist, LockScheme) { return eligible_nets(netlist).size(); }

LockedNetlist as_locked(const Netlist& netlist) {
    LockedNetlist l;
    l.netlist = netlist;
    return l;
}

namespace {

NetId add_key_input(LockedNetlist& l) {
    Netlist& n = l.netlist;
    int idx = static_cast<int>(n.count_role(PortRole::LockingKey));
    std::string name = "keyinput" + std::to_string(idx);
    for (int probe = idx; n.find_net(name); ++probe) name = "keyinput" + std::to_string(probe + 1);
    const NetId net = n.add_input(name, PortRole::LockingKey, idx);
    l.key_inputs.push_back(net);
    return net;
}

// Moves every gate pin and primary output reading `from` over to `to`.
void redirect(Netlist& n, NetId from, NetId to) {
    for (auto& g : n.gates)
        for (auto& in : g.inputs)
            if (in == from) in = to;
    for (auto& o : n.outputs)
        if (o.net == from) o.net = to;
}

void check_base(const LockedNetlist& base) {
    if (base.key.size() != base.key_inputs.size())
        throw InputError("locked netlist key length does not match its key inputs");
}

} // namespace

LockedNetlist epic_lock(const LockedNetlist& base, const LockingConfig& cfg) {
    check_base(base);
    LockedNetlist l = base;
    std::vector<NetId> sites = eligible_nets(base.netlist);
    const int bits = cfg.size.resolve(sites.size());
    Rng rng(cfg.seed);
    for (int i = 0; i < bits; ++i) {
        const auto j = static_cast<std::size_t>(i) + uniform_below(rng, sites.size() - static_cast<std::size_t>(i));
        std::swap(sites[static_cast<std::size_t>(i)], sites[j]);
        const NetId host = sites[static_cast<std::size_t>(i)];
        const bool xnor = coin(rng);

        const NetId k = add_key_input(l);
        const NetId t = l.netlist.add_net();
        redirect(l.netlist, host, t);
        l.netlist.add_gate_driving(xnor ? GateKind::Xnor : GateKind::Xor, {host, k}, t);
        l.key.push_back(xnor);
        l.provenance.push_back({"epic", xnor ? "XNOR" : "XOR", {l.netlist.gates.size() - 1}, {host}});
    }
    return l;
}

LockedNetlist dmux_lock(const LockedNetlist& base, const LockingConfig& cfg) {
    check_base(base);
    const std::vector<NetId> sites = eligible_nets(base.netlist);
    if (sites.size() < 2) throw InputError("D-MUX needs at least two eligible nets");
    const int bits = cfg.size.resolve(sites.size());
    LockedNetlist l = base;
    Rng rng(cfg.seed);
    for (int i = 0; i < bits; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < cfg.max_retries && !placed; ++attempt) {
            const NetId f1 = sites[uniform_below(rng, sites.size())];
            const auto loads = compute_loads(l.netlist)[f1];
            const NetId f2 = sites[uniform_below(rng, sites.size())];
            if (loads.empty() || f2 == f1) continue;
            const LoadPin pin = loads[uniform_below(rng, loads.size())];
            const Gate& sink = l.netlist.gates[pin.gate];
            if (sink.kind != GateKind::Dff && combinational_fanout(l.netlist, {sink.output})[f2]) continue;

            const NetId k = add_key_input(l);
            const NetId m = l.netlist.add_gate(GateKind::Mux2, {k, f1, f2});
            l.netlist.gates[pin.gate].inputs[pin.pin] = m;
            l.key.push_back(false);
            l.provenance.push_back({"dmux", "MUX2", {l.netlist.gates.size() - 1}, {f1, f2}});
            placed = true;
        }
        if (!placed)
            throw CapacityError("D-MUX placed " + std::to_string(i) + " of " + std::to_string(bits) +
                                    " key bits before running out of retries",
                                i, bits);
    }
    return l;
}

LockedNetlist lock(const LockedNetlist& base, const LockingConfig& cfg) {
    return cfg.scheme == LockScheme::Epic ? epic_lock(base, cfg) : dmux_lock(base, cfg);
}

LockedNetlist lock(const Netlist& netlist, const LockingConfig& cfg) { return lock(as_locked(netlist), cfg); }

Netlist apply_key(const LockedNetlist& locked, const std::vector<bool>& key) {
    if (key.size() != locked.key_inputs.size())
        throw InputError("key has " + std::to_string(key.size()) + " bits, netlist expects " +
                         std::to_string(locked.key_inputs.size()));
    Netlist n = locked.netlist;
    for (std::size_t i = 0; i < key.size(); ++i) {
        const NetId net = locked.key_inputs[i];
        const auto it = std::find_if(n.inputs.begin(), n.inputs.end(),
                                     [&](const PrimaryInput& in) { return in.net == net; });
        if (it == n.inputs.end()) throw InputError("key input " + n.label(net) + " is not a primary input");
        n.inputs.erase(it);
        n.add_gate_driving(key[i] ? GateKind::Const1 : GateKind::Const0, {}, net);
    }
    return n;
}

} // namespace lockleak
