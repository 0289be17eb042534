#pragma once

#include "lockleak/netlist.hpp"

#include <string>
#include <vector>

namespace lockleak {

/// Where one key bit came from. `inserted_gates` index into the locked netlist's
/// gate list; `hosts` are the nets the key logic was attached to.
struct KeyBitProvenance {
    std::string scheme;                    // "epic", "dmux", "assure-const", ...
    std::string detail;                    // e.g. "XOR", "XNOR", "MUX2", site label
    std::vector<std::size_t> inserted_gates;
    std::vector<NetId> hosts;
};

/// A netlist together with the activation key. `key[i]` is the correct value of
/// the input driving `key_inputs[i]`.
struct LockedNetlist {
    Netlist netlist;
    std::vector<bool> key;
    std::vector<NetId> key_inputs;
    std::vector<KeyBitProvenance> provenance;
};

std::string key_to_string(const std::vector<bool>& key);
std::vector<bool> key_from_string(const std::string& text); // throws InputError

} // namespace lockleak
