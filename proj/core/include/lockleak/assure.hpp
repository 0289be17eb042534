#pragma once

#include "lockleak/locked.hpp"
#include "lockleak/word.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lockleak {

enum AssureMode : unsigned { kAssureConst = 1u, kAssureOps = 2u, kAssureBranch = 4u };

/// "const", "ops,branch", ... (any order, no repeats). Throws InputError.
unsigned parse_assure_modes(std::string_view text);
/// Canonical spelling in const, ops, branch order, joined with '+'.
std::string assure_modes_label(unsigned modes);

struct AssureSegment {
    AssureMode mode = kAssureConst;
    std::size_t offset = 0;
    std::size_t width = 0;
    std::size_t site = 0;   // node index in the original design
    std::string input;      // key input created for this site
};

/// Key bits in the order of the locked design's key inputs. Constant values are
/// written most significant bit first.
struct AssureKey {
    std::vector<bool> bits;
    std::vector<AssureSegment> segments;
};

struct AssureResult {
    WordDesign design;
    AssureKey key;
};

/// Locks every site of the requested modes. Key segments are grouped by mode
/// (const, ops, branch) and ordered by a post-order walk from the outputs within
/// each group. Ops pairs: add/sub, and/or, xor/xnor, cmp/complement. Throws
/// InputError for an empty mode set and CapacityError when a requested mode has
/// no lockable sites in the design.
AssureResult assure_lock(const WordDesign& design, unsigned modes, std::uint64_t seed);

/// Lowers a locked design and attaches its key.
LockedNetlist lower_locked(const AssureResult& locked);

} // namespace lockleak
