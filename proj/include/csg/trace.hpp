#pragma once

#include <iosfwd>
#include <vector>

#include "csg/objective.hpp"

namespace csg {

/// Compact binary play batch.
///
///   "CSGT" u8:version(=1) varint:plays
///   per play: id:initial varint:steps u8:sink_reached
///             per step: varint:max_action varint:min_action id:next
///   id = varint:coords, then each coordinate as a zigzag varint
///
/// Varints are unsigned LEB128.
void write_trace(std::ostream& out, const std::vector<Play>& plays);
/// ParseError on malformed input.
std::vector<Play> read_trace(std::istream& in);

}  // namespace csg
