#include "lockleak/tseitin.hpp"

#include "lockleak/errors.hpp"

namespace lockleak {

void encode_gate(Cnf& cnf, GateKind kind, std::span<const int> in, int out) {
    auto and_like = [&](bool neg_in, int o) {
        // o <-> AND(l_i) with l_i = in_i (or -in_i for NOR-style)
        std::vector<int> big{o};
        for (int x : in) {
            const int l = neg_in ? -x : x;
            cnf.add_clause({-o, l});
            big.push_back(-l);
        }
        cnf.add_clause(std::move(big));
    };
    switch (kind) {
    case GateKind::And: and_like(false, out); break;
    case GateKind::Nand: and_like(false, -out); break;
    case GateKind::Nor: and_like(true, out); break;
    case GateKind::Or: and_like(true, -out); break;
    case GateKind::Xor:
    case GateKind::Xnor: {
        const int o = kind == GateKind::Xor ? out : -out;
        const int a = in[0], b = in[1];
        cnf.add_clause({-o, a, b});
        cnf.add_clause({-o, -a, -b});
        cnf.add_clause({o, -a, b});
        cnf.add_clause({o, a, -b});
        break;
    }
    case GateKind::Not:
        cnf.add_clause({out, in[0]});
        cnf.add_clause({-out, -in[0]});
        break;
    case GateKind::Buf:
        cnf.add_clause({-out, in[0]});
        cnf.add_clause({out, -in[0]});
        break;
    case GateKind::Mux2: {
        const int s = in[0], a = in[1], b = in[2];
        cnf.add_clause({s, -a, out});
        cnf.add_clause({s, a, -out});
        cnf.add_clause({-s, -b, out});
        cnf.add_clause({-s, b, -out});
        // consensus clauses
        cnf.add_clause({-a, -b, out});
        cnf.add_clause({a, b, -out});
        break;
    }
    case GateKind::Const0: cnf.add_clause({-out}); break;
    case GateKind::Const1: cnf.add_clause({out}); break;
    case GateKind::Dff: throw InputError("DFF cannot be Tseitin-encoded; unroll first");
    }
}

std::vector<int> tseitin_encode(const Netlist& netlist, Cnf& cnf, std::vector<int> lits) {
    lits.resize(netlist.net_count(), 0);
    for (const auto& in : netlist.inputs)
        if (lits[in.net] == 0) lits[in.net] = cnf.new_var();
    for (const auto& g : netlist.gates)
        if (g.kind == GateKind::Dff && lits[g.output] == 0) lits[g.output] = cnf.new_var();

    std::vector<int> ins;
    for (std::size_t gi : topo_order(netlist)) {
        const Gate& g = netlist.gates[gi];
        if (lits[g.output] != 0) continue;
        ins.clear();
        for (NetId n : g.inputs) ins.push_back(lits[n]);
        if (g.kind == GateKind::Buf) {
            lits[g.output] = ins[0];
        } else if (g.kind == GateKind::Not) {
            lits[g.output] = -ins[0];
        } else {
            const int v = cnf.new_var();
            encode_gate(cnf, g.kind, ins, v);
            lits[g.output] = v;
        }
    }
    return lits;
}

} // namespace lockleak
