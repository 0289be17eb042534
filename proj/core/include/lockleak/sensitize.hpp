#pragma once

#include "lockleak/leakage.hpp"
#include "lockleak/sat.hpp"

#include <unordered_map>

namespace lockleak {

inline constexpr std::size_t kDefaultExactUnknownCap = 24;
inline constexpr int kDefaultUnrollDepth = 8;

/// The DualRail query and where to read a witness from its models.
struct LeakageQuery {
    Cnf cnf;
    Scenario scenario;
    std::vector<int> controllable_vars; // parallel to scenario.controllable
    std::vector<std::size_t> outputs;   // candidate outputs (those the tested bit can reach)
    std::vector<int> diff_vars;         // parallel to outputs: both copies defined and unequal
    std::vector<int> copy_a_value;      // parallel to outputs: value in the copy with the bit at 0
};

/// Two copies of the netlist share the controllable inputs; the tested bit is 0 in
/// copy A and 1 in copy B and unknown inputs are X (three-valued, dual-rail). The
/// formula is satisfiable iff some output is determinate in both copies with
/// different values. Throws InputError for sequential netlists.
LeakageQuery build_leakage_query(const Netlist& netlist, int secret_bit, ScenarioKind scenario);

struct ClassifyOptions {
    AnalysisMode mode = AnalysisMode::DualRail;
    SolveBudget budget = SolveBudget::classification_default();
    // Exact mode reports ND once more unknown inputs than this feed the outputs the bit reaches.
    std::size_t exact_unknown_cap = kDefaultExactUnknownCap;
};

/// DT witnesses are checked with verify_witness before returning; a failing check
/// throws SoundnessError. The netlist must be combinational.
LeakageVerdict classify_bit(const Netlist& netlist, int secret_bit, ScenarioKind scenario,
                            const ClassifyOptions& options = {});

/// One verdict per secret bit in bit order. Sequential netlists are unrolled to
/// `unroll_depth` frames first. Per-bit failures other than SoundnessError become
/// ND verdicts with NdCause::Error.
std::vector<LeakageVerdict> classify_all_bits(const Netlist& netlist, ScenarioKind scenario,
                                              const ClassifyOptions& options = {},
                                              int unroll_depth = kDefaultUnrollDepth);

/// Replays a witness: exhaustive over the unknown inputs up to 16 bits, otherwise
/// 10,000 seeded random completions, each with the secret at 0 and at 1.
bool verify_witness(const Netlist& netlist, int secret_bit, ScenarioKind scenario, const Witness& witness);

/// Secret bit indices in ascending order.
std::vector<int> secret_bits(const Netlist& netlist);

} // namespace lockleak
