#pragma once

#include <iosfwd>
#include <string>

#include "csg/strategy.hpp"

namespace csg {

/// Strategy files, '#' starts a comment:
///
///   csg-strategy 1
///   constructor <name> [k=v ...]
///   [wrap leak_schedule eps=<q> grid=<q,q,..>]
///
/// or a finite table
///
///   csg-strategy 1
///   modes <n>
///   initial <mode>
///   act <mode|*> <id|*> : <a> <p> <a> <p> ...
///   update <mode|*> <id|*> <a|*> <b|*> <next|*> : <mode> <p> ...
///
/// The first matching act or update line applies; with no matching update
/// line the mode is kept, and with no matching act line action 0 is played.
StrategyPtr read_strategy(std::istream& in);
StrategyPtr read_strategy_file(const std::string& path);
StrategyPtr parse_strategy(const std::string& text);

/// Recipe of a constructed machine, or the table of a memoryless or table
/// machine. NotFinite otherwise.
void write_strategy(std::ostream& out, const StrategyMachine& machine);
std::string strategy_to_string(const StrategyMachine& machine);

}  // namespace csg
