#pragma once

#include "lockleak/locked.hpp"
#include "lockleak/netlist.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lockleak {

enum class LogicValue : std::uint8_t { Zero, One, X };

char to_char(LogicValue v);

/// Pessimistic (Kleene) evaluation of one gate. A controlling value dominates X;
/// XOR with any X is X; MUX2 with X select yields a when a == b, else X.
LogicValue eval3(GateKind kind, std::span<const LogicValue> inputs);

/// Word-parallel evaluator: 64 input patterns per call.
class WordSimulator {
public:
    explicit WordSimulator(const Netlist& netlist);

    const Netlist& netlist() const { return *netlist_; }

    /// `nets` must have one word per net with primary inputs and DFF outputs
    /// filled in; combinational gate outputs are overwritten.
    void run(std::vector<std::uint64_t>& nets) const;

    /// Three-valued variant; `defined` bit = 1 means the value bit is valid.
    void run3(std::vector<std::uint64_t>& value, std::vector<std::uint64_t>& defined) const;

private:
    const Netlist* netlist_;
    std::vector<std::size_t> order_;
};

/// Evaluates a combinational netlist (DFF outputs read as their reset value).
/// `inputs[i]` is the value of `netlist.inputs[i]`.
std::vector<bool> simulate(const Netlist& netlist, const std::vector<bool>& inputs);

/// `inputs[i]` may be X. Unassigned inputs (shorter vector) are X.
std::vector<LogicValue> simulate3(const Netlist& netlist, const std::vector<LogicValue>& inputs);

/// Cycle-by-cycle reference simulation. `trace[f][i]` is input i in cycle f; all
/// DFFs must have a 0/1 reset value. Returns the outputs of every cycle.
std::vector<std::vector<bool>> simulate_sequence(const Netlist& netlist,
                                                 const std::vector<std::vector<bool>>& trace);

enum class EquivalenceMethod { Exhaustive, Random, SatMiter };

struct EquivalenceResult {
    bool equal = true;
    // Input assignment (indexed like the first netlist's inputs) on which they differ.
    std::vector<bool> counterexample;
    std::size_t differing_output = 0;
};

/// Inputs are matched by name, outputs by position. Exhaustive handles up to
/// 20 inputs and reports the smallest counterexample (first input most
/// significant); Random only falsifies; SatMiter is complete.
EquivalenceResult equivalence_check(const Netlist& a, const Netlist& b, EquivalenceMethod method,
                                    std::uint64_t random_vectors = 10000, std::uint64_t seed = 1);

} // namespace lockleak
