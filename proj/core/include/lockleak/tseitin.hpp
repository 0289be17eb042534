#pragma once

#include "lockleak/netlist.hpp"
#include "lockleak/sat.hpp"

#include <vector>

namespace lockleak {

/// Appends the clauses of every combinational gate of `netlist` to `cnf` and
/// returns the literal of each net. `net_lits` supplies literals for nets that
/// are already encoded (0 = not yet encoded); primary inputs and DFF outputs
/// without a literal get fresh variables. BUF and NOT are encoded as literal
/// aliases, constants as unit clauses.
std::vector<int> tseitin_encode(const Netlist& netlist, Cnf& cnf, std::vector<int> net_lits = {});

/// Clauses for out <-> kind(ins); used by the netlist encoder and the leakage queries.
void encode_gate(Cnf& cnf, GateKind kind, std::span<const int> ins, int out);

} // namespace lockleak
