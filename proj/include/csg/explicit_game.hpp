#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "csg/game.hpp"
#include "csg/objective.hpp"

namespace csg {

/// Index-based copy of a finite game for the numeric kernels.
struct ExplicitGame {
  struct Succ {
    std::uint32_t to;
    double p;
  };
  struct ExactSucc {
    std::uint32_t to;
    Rational p;
  };
  struct State {
    std::uint32_t na = 1;
    std::uint32_t nb = 1;
    std::vector<std::vector<Succ>> rows;  // a * nb + b
    std::vector<std::vector<ExactSucc>> exact_rows;  // empty unless compiled exactly
  };

  std::vector<StateId> ids;  // ascending
  std::unordered_map<StateId, std::uint32_t> index;
  std::vector<State> states;
  std::uint32_t initial = 0;
  bool exact = false;

  /// Fails with NotFinite for lazy games; exact=true keeps rational rows.
  static ExplicitGame compile(const Game& game, bool exact = false);

  std::size_t size() const { return ids.size(); }
  std::uint32_t at(const StateId& s) const;
  /// Membership vector of a state set.
  std::vector<char> mask(const StateSet& set) const;
};

}  // namespace csg
