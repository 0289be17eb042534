#pragma once

#include "lockleak/locked.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace lockleak {

enum class LockScheme : std::uint8_t { Epic, Dmux };
std::string_view to_string(LockScheme s); // "epic", "dmux"
std::optional<LockScheme> lock_scheme_from_string(std::string_view text);

/// Either a percentage of the available locations or an absolute bit count.
struct KeySize {
    bool percent = true;
    double amount = 25.0;

    static KeySize pct(double p) { return {true, p}; }
    static KeySize bits(int b) { return {false, static_cast<double>(b)}; }
    /// "25%" or "8".
    static KeySize parse(std::string_view text);
    std::string label() const;
    /// round(pct * max / 100) floored at 1, or the absolute count. Throws InputError
    /// when the request is out of range for `max_locations`.
    int resolve(std::size_t max_locations) const;
};

struct LockingConfig {
    LockScheme scheme = LockScheme::Epic;
    KeySize size;
    std::uint64_t seed = 1;
    int max_retries = 1000; // D-MUX attempts per key bit
};

/// Candidate key-gate hosts: non-key primary inputs, then combinational gate
/// outputs and flip-flop outputs in gate order.
std::vector<NetId> eligible_nets(const Netlist& netlist);
std::size_t max_locations(const Netlist& netlist, LockScheme scheme);

/// XOR (key 0) or XNOR (key 1) gates on distinct sampled nets. New key bits are
/// appended after the existing ones.
LockedNetlist epic_lock(const LockedNetlist& base, const LockingConfig& config);
/// MUX2(k, f1, f2) spliced into one load pin of f1; key 0 selects f1. Throws
/// CapacityError when a bit cannot be placed within `max_retries` attempts.
LockedNetlist dmux_lock(const LockedNetlist& base, const LockingConfig& config);
LockedNetlist lock(const LockedNetlist& base, const LockingConfig& config);
LockedNetlist lock(const Netlist& netlist, const LockingConfig& config);

/// Wraps a netlist whose locking-key inputs (if any) have no recorded key.
LockedNetlist as_locked(const Netlist& netlist);

/// Replaces every key input with a constant. Throws InputError on length mismatch.
Netlist apply_key(const LockedNetlist& locked, const std::vector<bool>& key);

} // namespace lockleak
