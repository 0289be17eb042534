#include "lockleak/leakage.hpp"

#include "lockleak/errors.hpp"

namespace lockleak {

std::string_view to_string(ScenarioKind kind) {
    return kind == ScenarioKind::SetAll ? "set-all" : "set-ll-key";
}

std::optional<ScenarioKind> scenario_from_string(std::string_view text) {
    if (text == "set-all") return ScenarioKind::SetAll;
    if (text == "set-ll-key") return ScenarioKind::SetLlKey;
    return std::nullopt;
}

std::string_view to_string(Verdict v) {
    switch (v) {
    case Verdict::DT: return "DT";
    case Verdict::S: return "S";
    case Verdict::ND: return "ND";
    }
    return "ND";
}

std::string_view to_string(AnalysisMode m) { return m == AnalysisMode::DualRail ? "dualrail" : "exact"; }

std::optional<AnalysisMode> mode_from_string(std::string_view text) {
    if (text == "dualrail") return AnalysisMode::DualRail;
    if (text == "exact") return AnalysisMode::Exact;
    return std::nullopt;
}

std::string_view to_string(NdCause c) {
    switch (c) {
    case NdCause::None: return "none";
    case NdCause::WallClock: return "wall_clock";
    case NdCause::Conflicts: return "conflicts";
    case NdCause::UnknownCap: return "unknown_cap";
    case NdCause::Error: return "error";
    }
    return "none";
}

Scenario make_scenario(const Netlist& netlist, int secret_bit, ScenarioKind kind) {
    Scenario sc;
    sc.kind = kind;
    bool found = false;
    for (std::size_t i = 0; i < netlist.inputs.size(); ++i) {
        const auto& in = netlist.inputs[i];
        if (in.role == PortRole::Secret && in.bit == secret_bit) {
            sc.tested = i;
            found = true;
            continue;
        }
        const bool control = kind == ScenarioKind::SetAll ? in.role != PortRole::Secret
                                                          : in.role == PortRole::LockingKey;
        (control ? sc.controllable : sc.unknown).push_back(i);
    }
    if (!found) throw InputError("no secret input with bit index " + std::to_string(secret_bit));
    return sc;
}

std::string bits_to_hex(const std::vector<bool>& bits) {
    if (bits.empty()) return "0";
    static constexpr char kDigits[] = "0123456789abcdef";
    const std::size_t pad = (4 - bits.size() % 4) % 4;
    std::string out;
    unsigned nibble = 0;
    std::size_t filled = pad;
    for (bool b : bits) {
        nibble = (nibble << 1) | (b ? 1u : 0u);
        if (++filled == 4) {
            out.push_back(kDigits[nibble]);
            nibble = 0;
            filled = 0;
        }
    }
    const auto first = out.find_first_not_of('0');
    return first == std::string::npos ? "0" : out.substr(first);
}

} // namespace lockleak
