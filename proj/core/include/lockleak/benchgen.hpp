#pragma once

#include "lockleak/locked.hpp"
#include "lockleak/word.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lockleak {

/// A generated design: gate-level (possibly already carrying locking-key inputs)
/// or word-level. Word designs are lowered on demand.
struct GeneratedBenchmark {
    std::string name;
    std::optional<LockedNetlist> gate;
    std::optional<WordDesign> word;

    bool is_word() const { return word.has_value(); }
    LockedNetlist gate_level() const;
};

using BenchmarkParams = std::map<std::string, int>;

/// Names: fig5_example, fig5_reference, passthrough(width), toy_spn(width, rounds),
/// toy_xtea(width, rounds), fsm_datapath(rounds, width). Unknown names or
/// parameters throw InputError.
GeneratedBenchmark gen_benchmark(std::string_view name, const BenchmarkParams& params = {});
std::vector<std::string> benchmark_names();

/// Fig. 5 circuit with its two D-MUX style locking multiplexers; correct key "00".
LockedNetlist fig5_example();
/// The same circuit before locking: output2 = AND(in2, in3).
Netlist fig5_reference();

/// out[i] = in[i]; secret inputs key[i] are not connected to anything.
Netlist passthrough(int width = 4);

/// Substitution-permutation network: per round, XOR the round key, PRESENT S-boxes
/// realized as multiplexer trees over shared constant nets, then a bit transpose;
/// a final key XOR follows the last round. Secret bits: (rounds + 1) * width.
Netlist toy_spn(int width = 4, int rounds = 2);

/// XTEA-style Feistel cycles on two width-bit halves with four secret key words.
WordDesign toy_xtea(int width = 4, int rounds = 2);

/// Reference model of toy_xtea for one input assignment, used as an oracle.
std::pair<std::uint64_t, std::uint64_t> toy_xtea_reference(int width, int rounds, std::uint64_t v0, std::uint64_t v1,
                                                           const std::uint64_t key[4]);

/// Sequential datapath: a counter-driven FSM loads the plaintext, applies
/// `rounds` keyed chi rounds alternating two secret key words, and exposes the
/// state only while the counter sits at rounds + 1.
Netlist fsm_datapath(int rounds = 2, int width = 4);

} // namespace lockleak
