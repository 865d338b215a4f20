#pragma once

#include <iosfwd>
#include <string>

#include "csg/game.hpp"

namespace csg {

/// Game files, line oriented, '#' starts a comment:
///
///   csg-game 1
///   name <text>                       (table form)
///   initial <id>
///   state <id> [name=<n>] [max=a,b,..] [min=a,b,..] [sink] [target]
///   row <id> <a> <b> : <id> <p> <id> <p> ...
///   any <id> : <id> <p> ...           (same row for every action pair)
///
/// or, for generated games,
///
///   builtin <name> [k=v ...]
///
/// followed in both forms by any number of
///
///   apply <transform> [k=v ...]
///
/// Ids are written "[c0,c1,..]"; probabilities are fractions or decimals and
/// are read exactly. Rows whose exact sum misses 1 by at most 1e-12 are kept
/// as float rows.
GamePtr read_game(std::istream& in);
GamePtr read_game_file(const std::string& path);
GamePtr parse_game(const std::string& text);

/// Writes the recipe of a generated game, or the full table of a finite one.
/// NotFinite for a lazy game without a recipe.
void write_game(std::ostream& out, const Game& game);
std::string game_to_string(const Game& game);

}  // namespace csg
