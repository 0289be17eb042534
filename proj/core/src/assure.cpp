#include "lockleak/assure.hpp"

#include "lockleak/errors.hpp"
#include "lockleak/rng.hpp"

#include <algorithm>
#include <set>

namespace lockleak {

unsigned parse_assure_modes(std::string_view text) {
    unsigned modes = 0;
    while (!text.empty()) {
        const auto comma = text.find_first_of(",+");
        const std::string_view tok = text.substr(0, comma);
        unsigned m = 0;
        if (tok == "const") m = kAssureConst;
        else if (tok == "ops") m = kAssureOps;
        else if (tok == "branch") m = kAssureBranch;
        else throw InputError("unknown ASSURE mode '" + std::string(tok) + "'");
        if (modes & m) throw InputError("ASSURE mode '" + std::string(tok) + "' listed twice");
        modes |= m;
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
        if (text.empty()) throw InputError("trailing separator in ASSURE mode list");
    }
    if (modes == 0) throw InputError("empty ASSURE mode set");
    return modes;
}

std::string assure_modes_label(unsigned modes) {
    std::string out;
    auto add = [&](unsigned m, const char* name) {
        if (!(modes & m)) return;
        if (!out.empty()) out += '+';
        out += name;
    };
    add(kAssureConst, "const");
    add(kAssureOps, "ops");
    add(kAssureBranch, "branch");
    return out;
}

namespace {

bool is_ops_site(WordOp op) {
    switch (op) {
    case WordOp::Add:
    case WordOp::Sub:
    case WordOp::BitXor:
    case WordOp::BitXnor:
    case WordOp::BitAnd:
    case WordOp::BitOr: return true;
    default: return false;
    }
}

WordOp dummy_of(WordOp op) {
    switch (op) {
    case WordOp::Add: return WordOp::Sub;
    case WordOp::Sub: return WordOp::Add;
    case WordOp::BitXor: return WordOp::BitXnor;
    case WordOp::BitXnor: return WordOp::BitXor;
    case WordOp::BitAnd: return WordOp::BitOr;
    case WordOp::BitOr: return WordOp::BitAnd;
    default: return op;
    }
}

std::vector<std::size_t> post_order(const WordDesign& d) {
    std::vector<std::size_t> order;
    std::vector<char> state(d.nodes.size(), 0);
    std::vector<std::pair<std::size_t, std::size_t>> stack;
    for (const auto& o : d.outputs) {
        if (state[o.node]) continue;
        stack.push_back({o.node, 0});
        state[o.node] = 1;
        while (!stack.empty()) {
            auto& [node, next] = stack.back();
            if (next < d.nodes[node].args.size()) {
                const std::size_t a = d.nodes[node].args[next++];
                if (!state[a]) {
                    state[a] = 1;
                    stack.push_back({a, 0});
                }
                continue;
            }
            order.push_back(node);
            stack.pop_back();
        }
    }
    return order;
}

} // namespace

AssureResult assure_lock(const WordDesign& design, unsigned modes, std::uint64_t seed) {
    if ((modes & (kAssureConst | kAssureOps | kAssureBranch)) == 0) throw InputError("empty ASSURE mode set");
    validate(design);

    std::vector<char> feeds_condition(design.nodes.size(), 0);
    for (const WordNode& n : design.nodes)
        if (n.op == WordOp::Mux) feeds_condition[n.args[0]] = 1;

    // Sites per mode in walk order.
    std::vector<std::size_t> const_sites, ops_sites, branch_sites;
    for (std::size_t i : post_order(design)) {
        const WordNode& n = design.nodes[i];
        if (n.op == WordOp::Const && (modes & kAssureConst)) const_sites.push_back(i);
        if ((modes & kAssureOps) && (is_ops_site(n.op) || (n.op == WordOp::Cmp && !feeds_condition[i])))
            ops_sites.push_back(i);
        if ((modes & kAssureBranch) && n.op == WordOp::Cmp && feeds_condition[i]) branch_sites.push_back(i);
    }

    for (const auto& [mode, sites] : {std::pair{kAssureConst, &const_sites}, std::pair{kAssureOps, &ops_sites},
                                      std::pair{kAssureBranch, &branch_sites}})
        if ((modes & mode) && sites->empty())
            throw CapacityError("ASSURE mode '" + assure_modes_label(mode) + "': no lockable sites", 0, 0);

    AssureResult res;
    WordDesign& out = res.design;
    AssureKey& key = res.key;
    Rng rng(seed);

    // Key inputs come first so that their declaration order is the key order.
    std::vector<std::size_t> key_node(design.nodes.size(), SIZE_MAX);
    std::vector<bool> choice(design.nodes.size(), false);
    int counter = 0;
    std::set<std::string> taken;
    for (const WordNode& n : design.nodes)
        if (n.op == WordOp::Input) taken.insert(n.name);
    for (const auto& o : design.outputs) taken.insert(o.name);
    auto declare = [&](AssureMode mode, std::size_t site, int width) {
        std::string name = "lk" + std::to_string(counter++);
        while (taken.count(name)) name = "lk" + std::to_string(counter++);
        key_node[site] = out.input(name, width, PortRole::LockingKey);
        key.segments.push_back({mode, key.bits.size(), static_cast<std::size_t>(width), site, name});
    };
    for (std::size_t s : const_sites) {
        const WordNode& n = design.nodes[s];
        declare(kAssureConst, s, n.width);
        for (int b = n.width - 1; b >= 0; --b) key.bits.push_back(((n.value >> b) & 1u) != 0);
    }
    for (std::size_t s : ops_sites) {
        declare(kAssureOps, s, 1);
        choice[s] = coin(rng);
        key.bits.push_back(choice[s]);
    }
    for (std::size_t s : branch_sites) {
        declare(kAssureBranch, s, 1);
        choice[s] = coin(rng);
        key.bits.push_back(choice[s]);
    }

    std::vector<std::size_t> sub(design.nodes.size());
    for (std::size_t i = 0; i < design.nodes.size(); ++i) {
        const WordNode& n = design.nodes[i];
        if (key_node[i] != SIZE_MAX && n.op == WordOp::Const) {
            sub[i] = key_node[i];
            continue;
        }
        WordNode copy = n;
        for (auto& a : copy.args) a = sub[a];
        out.nodes.push_back(copy);
        const std::size_t orig = out.nodes.size() - 1;
        if (key_node[i] == SIZE_MAX) {
            sub[i] = orig;
            continue;
        }
        const std::size_t k = key_node[i];
        if (n.op == WordOp::Cmp && feeds_condition[i] && (modes & kAssureBranch)) {
            // (choice ? complement : original) XOR k
            if (choice[i]) out.nodes[orig].cmp = complement(n.cmp);
            sub[i] = out.op(WordOp::BitXor, orig, k);
        } else {
            const std::size_t dummy = n.op == WordOp::Cmp ? out.cmp(complement(n.cmp), copy.args[0], copy.args[1])
                                                          : out.op(dummy_of(n.op), copy.args[0], copy.args[1]);
            sub[i] = choice[i] ? out.mux(k, orig, dummy) : out.mux(k, dummy, orig);
        }
    }
    for (const auto& o : design.outputs) out.output(o.name, sub[o.node]);

    return res;
}

LockedNetlist lower_locked(const AssureResult& locked) {
    LockedNetlist l;
    l.netlist = lower_to_gates(locked.design);
    for (std::size_t idx : l.netlist.inputs_with_role(PortRole::LockingKey)) l.key_inputs.push_back(l.netlist.inputs[idx].net);
    l.key = locked.key.bits;
    if (l.key.size() != l.key_inputs.size()) throw Error("ASSURE key length does not match the lowered key inputs");
    for (const auto& seg : locked.key.segments) {
        const char* scheme = seg.mode == kAssureConst ? "assure-const" : seg.mode == kAssureOps ? "assure-ops" : "assure-branch";
        for (std::size_t b = 0; b < seg.width; ++b)
            l.provenance.push_back({scheme, seg.input + "@node" + std::to_string(seg.site), {}, {}});
    }
    return l;
}

} // namespace lockleak
