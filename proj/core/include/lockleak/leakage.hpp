#pragma once

#include "lockleak/netlist.hpp"
#include "lockleak/sat.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lockleak {

enum class ScenarioKind : std::uint8_t { SetAll, SetLlKey };

std::string_view to_string(ScenarioKind kind); // "set-all", "set-ll-key"
std::optional<ScenarioKind> scenario_from_string(std::string_view text);

/// Input partition for one tested secret bit. Indices refer to `netlist.inputs`
/// and keep the netlist's input order.
struct Scenario {
    ScenarioKind kind = ScenarioKind::SetAll;
    std::size_t tested = 0;
    std::vector<std::size_t> controllable;
    std::vector<std::size_t> unknown;
};

/// SetAll: every non-secret input is controllable, the other secret bits are unknown.
/// SetLlKey: only locking-key inputs are controllable; operational inputs and the
/// other secret bits are unknown. Throws InputError if no secret input has `secret_bit`.
Scenario make_scenario(const Netlist& netlist, int secret_bit, ScenarioKind kind);

enum class Verdict : std::uint8_t { DT, S, ND };
std::string_view to_string(Verdict v);

enum class AnalysisMode : std::uint8_t { DualRail, Exact };
std::string_view to_string(AnalysisMode m); // "dualrail", "exact"
std::optional<AnalysisMode> mode_from_string(std::string_view text);

/// Why a verdict is ND.
enum class NdCause : std::uint8_t { None, WallClock, Conflicts, UnknownCap, Error };
std::string_view to_string(NdCause c);

/// Setting the controllable inputs to `controllable` makes output `output` equal
/// secret XOR `polarity` for every value of the unknown inputs.
struct Witness {
    std::vector<bool> controllable; // one entry per Scenario::controllable
    std::size_t output = 0;
    int frame = 0;
    bool polarity = false;
};

/// Hex rendering of a bit string, first bit most significant ("11" -> "3",
/// "10000" -> "10"). An empty string renders as "0".
std::string bits_to_hex(const std::vector<bool>& bits);

struct LeakageVerdict {
    int bit = 0;
    Verdict verdict = Verdict::S;
    AnalysisMode mode = AnalysisMode::DualRail;
    std::optional<Witness> witness;
    NdCause nd_cause = NdCause::None;
    std::string message; // set when nd_cause == Error
    double solve_ms = 0.0;
    std::int64_t conflicts = 0;
    int iterations = 0; // CEGAR rounds (Exact) or 1
};

} // namespace lockleak
