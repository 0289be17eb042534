#pragma once

#include "lockleak/locked.hpp"
#include "lockleak/netlist.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lockleak {

enum class WordOp : std::uint8_t { Const, Input, Add, Sub, BitXor, BitXnor, BitAnd, BitOr, Cmp, Mux, Shl, Shr };
enum class CmpKind : std::uint8_t { Gt, Le, Eq, Ne };

std::string_view to_string(WordOp op);
std::optional<WordOp> word_op_from_string(std::string_view text);
std::string_view to_string(CmpKind k);
std::optional<CmpKind> cmp_kind_from_string(std::string_view text);
CmpKind complement(CmpKind k);

/// Nodes only reference earlier nodes. Mux args are (cond, then, else) with a
/// 1-bit cond; Cmp yields width 1; Shl/Shr shift by the constant `amount`.
struct WordNode {
    WordOp op = WordOp::Const;
    std::vector<std::size_t> args;
    int width = 1;
    std::uint64_t value = 0;  // Const
    std::string name;         // Input
    PortRole role = PortRole::Operational; // Input
    CmpKind cmp = CmpKind::Eq; // Cmp
    int amount = 0;           // Shl, Shr
};

struct WordOutput {
    std::string name;
    std::size_t node = 0;
};

struct WordDesign {
    std::vector<WordNode> nodes;
    std::vector<WordOutput> outputs;

    std::size_t constant(int width, std::uint64_t value);
    std::size_t input(std::string name, int width, PortRole role);
    std::size_t op(WordOp op, std::size_t a, std::size_t b);
    std::size_t cmp(CmpKind kind, std::size_t a, std::size_t b);
    std::size_t mux(std::size_t cond, std::size_t then_node, std::size_t else_node);
    std::size_t shift(WordOp op, std::size_t a, int amount);
    void output(std::string name, std::size_t node) { outputs.push_back({std::move(name), node}); }

    /// Input node indices in declaration order.
    std::vector<std::size_t> input_nodes() const;
};

/// Throws InputError describing the first problem found.
void validate(const WordDesign& design);

std::uint64_t width_mask(int width);

/// Values are keyed by input name and reduced modulo 2^width. Throws InputError
/// for a missing input. Returns one value per output.
std::vector<std::uint64_t> word_eval(const WordDesign& design, const std::map<std::string, std::uint64_t>& inputs);

/// {"inputs":[{"name","width","role"}], "nodes":[{"op",...}], "outputs":[{"name","node"}]}
/// Input nodes are listed under "inputs" only; node references count inputs first.
WordDesign parse_word_json(std::string_view text);
std::string emit_word_json(const WordDesign& design);

/// Gate-level implementation. Input word `x` becomes primary inputs "x[i]" (bit i
/// = LSB + i); each output bit is a BUF net "out[i]". Secret and operational bits
/// are numbered LSB first in declaration order, locking-key bits MSB first so
/// that they line up with a key string written most significant bit first.
Netlist lower_to_gates(const WordDesign& design);

} // namespace lockleak
