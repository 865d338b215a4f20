#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>

#include "csg/game.hpp"
#include "csg/params.hpp"

namespace csg {

/// Fixed ids of the (Simplified) Bad Match. The simplified game has no w.
namespace bm {
inline const StateId d{0};
inline const StateId w{1};
inline const StateId l{2};
inline const StateId s{3};
inline const StateId t{4};
}  // namespace bm

/// Five states d, w, l, s, t; target {w, s}.
std::shared_ptr<const TableGame> bad_match();
/// d, l, s, t with (1,1) -> s; target {s}.
std::shared_ptr<const TableGame> simplified_bad_match();

/// Infinite turn-based variant. Ids: d_i = [0,i], e_i = [1,i], the outcome
/// states (x,y) = [2,x,y], s = [3], t = [4], l = [5].
namespace tbm {
inline StateId d(std::int64_t i) { return StateId{0, i}; }
inline StateId e(std::int64_t i) { return StateId{1, i}; }
inline StateId pair(int x, int y) { return StateId{2, x, y}; }
inline const StateId s{3};
inline const StateId t{4};
inline const StateId l{5};
}  // namespace tbm
GamePtr turnbased_bad_match();

/// Transience testbed: trap z = [0] and chain states c_i = [1,i].
/// Max chooses {advance, loop}, Min chooses {let, reset}. Loop stays put.
/// (advance, let) moves to c_{i+1}; (advance, reset) sends the play back to
/// c_0 w.p. 2^-(i+2), into the trap w.p. 2^-(i+2), forward otherwise.
/// With n set the chain is cut at c_n, which becomes a target sink.
namespace owc {
inline const StateId trap{0};
inline StateId chain(std::int64_t i) { return StateId{1, i}; }
}  // namespace owc
GamePtr one_way_chain(std::optional<std::int64_t> n = std::nullopt);

/// Small game with an infinitely branching Min state c = [0]: Min picks
/// i >= 1 and moves to s_i = [1,i], from which the goal [2] is reached
/// w.p. 2^-i and the losing sink [3] otherwise. The kernel at c shows only s_1.
GamePtr ladder_demo();

/// Random finite game with exact rational rows. States [0..n), state 0 is
/// initial; the last `bad` states are flagged as targets (for Safety use).
std::shared_ptr<const TableGame> random_game(std::uint64_t seed, std::size_t states = 5, std::size_t max_actions = 2,
                                             std::size_t min_actions = 2, std::size_t bad = 1);

/// Builtins by name: bad_match, simplified_bad_match, turnbased_bad_match,
/// one_way_chain [n], ladder_demo, random_game seed [states max_actions
/// min_actions bad].
GamePtr builtin_game(std::string_view name, const Params& params = {});

}  // namespace csg
