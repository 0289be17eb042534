#pragma once

#include "lockleak/leakage.hpp"

namespace lockleak {

inline constexpr std::size_t kOracleMaxControllable = 20;
inline constexpr std::size_t kOracleMaxUnknown = 16;

/// Ground truth by enumeration over a combinational netlist. Candidates are tried
/// with the controllable assignment in lexicographic order (first bit most
/// significant), then by output index, then polarity 0 before 1, so a DT verdict
/// carries the smallest witness. Never returns ND. Throws BoundsError beyond
/// 20 controllable or 16 unknown bits.
LeakageVerdict brute_force_leakage(const Netlist& netlist, int secret_bit, ScenarioKind scenario);

} // namespace lockleak
