#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "csg/explicit_game.hpp"
#include "csg/objective.hpp"
#include "csg/strategy.hpp"
#include "csg/transform.hpp"
#include "csg/value_iteration.hpp"

namespace csg {

struct FixingStep {
  StateId state;
  Dist<ActionIndex> alpha;
  std::vector<double> values;  // v_i, indexed like FixingSweepReport::states
  std::size_t iterations = 0;
  double factor = 1.0;  // r^(2^-i)
  std::vector<StateId> violations;  // states with v_i < factor * v_{i-1}
};

struct FixingSweepReport {
  double r = 0.0;
  std::vector<StateId> states;  // all states of the truncation, ascending
  std::vector<StateId> order;  // the interior states 1..N
  std::vector<double> v0;
  std::vector<FixingStep> steps;  // steps[i-1] fixes order[i-1]
  std::size_t violations = 0;

  bool all_passed() const { return violations == 0; }
  /// r_i = prod_{j > i} r^(2^-j) = r^(2^-i).
  double r_at(std::size_t i) const;
  /// v_i(s); v_0 for i = 0.
  double value(std::size_t i, const StateId& s) const;
  /// Position of s in `order` (1-based), or 0 when s is not interior.
  std::size_t rank_of(const StateId& s) const;
};

struct FixingSweepResult {
  std::shared_ptr<MemorylessMachine> sigma;
  FixingSweepReport report;
};

/// Enumeration sweep over a truncated leaky game: for i = 1..N the values of
/// G_{i-1} are computed as weighted reachability of the frontier (frontier
/// states pinned at frontier_value, bot at 0), the optimal mixed action at
/// state i is fixed, and the retention v_i(s) >= r^(2^-i) v_{i-1}(s) is
/// checked at every state. TruncationTooSmall when the start state is not
/// interior or the truncation has no interior state.
FixingSweepResult fixing_sweep(const Truncation& truncation, double r,
                               const std::function<double(const StateId&)>& frontier_value,
                               const ViOptions& options = {});

}  // namespace csg
