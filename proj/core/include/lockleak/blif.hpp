#pragma once

#include "lockleak/netlist.hpp"

#include <map>
#include <string>
#include <string_view>

namespace lockleak {

/// Cell names usable in `.gate` lines. Pins bind in listed order; the last pin
/// is the output. Lookup ignores case.
struct GateLibrary {
    std::map<std::string, GateKind> cells;

    /// AND2 NAND2 OR2 NOR2 XOR2 XNOR2 INV BUF MUX2 TIE0 TIE1.
    static GateLibrary standard();
};

/// Single-model BLIF: .model .inputs .outputs .names .latch .gate .end.
/// `.names` covers are matched to one library gate when possible (MUX2 under
/// any pin permutation) and otherwise decomposed into two-input AND/OR trees.
/// Input roles follow name prefixes: "enc_key"/"secret" are Secret,
/// "keyinput"/"lolo_key" are LockingKey, everything else Operational.
/// Throws UnsupportedFeature for .subckt, .exdc, a second model and latches
/// with level-sensitive or asynchronous control; InputError otherwise.
Netlist parse_blif(std::string_view text, const GateLibrary& library = GateLibrary::standard());

/// One `.names` per gate and `.latch d q <init>` per DFF, with init 3 for X.
/// Output frame tags are not representable and are dropped.
std::string emit_blif(const Netlist& netlist, std::string_view model = "lockleak");

} // namespace lockleak
