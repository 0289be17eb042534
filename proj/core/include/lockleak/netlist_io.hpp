#pragma once

#include "lockleak/locked.hpp"
#include "lockleak/netlist.hpp"

#include <string>
#include <string_view>

namespace lockleak {

/// Canonical JSON netlist format:
///   {"inputs":[{"name","role","bit"}], "outputs":["net",...],
///    "gates":[{"kind","in":[...],"out"}], "dffs":[{"d","q","init":0|1|"x"}]}
/// Nets are referenced by name; unnamed nets are written as "$<id>". Unknown
/// fields are rejected. Parsing also rejects netlists that fail `validate`.
Netlist parse_json(std::string_view text);
std::string emit_json(const Netlist& netlist);

/// Netlist JSON plus "key", "key_inputs" and "provenance". A file without the key
/// fields parses as a locked netlist with an empty key.
LockedNetlist parse_locked_json(std::string_view text);
std::string emit_locked_json(const LockedNetlist& locked);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

} // namespace lockleak
