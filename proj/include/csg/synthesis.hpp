#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "csg/explicit_game.hpp"
#include "csg/game.hpp"
#include "csg/objective.hpp"
#include "csg/strategy.hpp"
#include "csg/value_iteration.hpp"

namespace csg {

/// Optimal mixed action of Max in the local matrix game at state i under
/// continuation values v (indexed like g.ids). Zero weights are dropped.
Dist<ActionIndex> local_optimal_action(const ExplicitGame& g, std::uint32_t i, const std::vector<double>& v);

/// Memoryless Max machine playing the locally optimal mixed action for the
/// given values at every listed state, Dirac 0 elsewhere.
std::shared_ptr<MemorylessMachine> memoryless_from_values(const Game& game, const ValueVector& values);

struct ReachSupport {
  std::shared_ptr<MemorylessMachine> sigma0;
  std::vector<StateId> L;  // ascending
  ValueVector values;  // converged reach values
  std::size_t iterate = 0;  // value-iteration iterate the strategy was read from
  std::vector<double> guarantee;  // inf over Min of P(reach T inside L), per state of S0
  bool verified = false;
  std::string note;
};

/// Memoryless reachability with a checked guarantee: reads a memoryless
/// strategy off value-iteration iterates (1, 2, 4, ... iterations) until the
/// guarantee inf_π P(stay in L until T) >= V - eps holds on S0, checked by
/// best_response_min.
ReachSupport memoryless_reach_with_support(const Game& game, const std::vector<StateId>& s0, const StateSet& target,
                                           double eps, std::size_t max_iters = 100000);

using VectorMap = std::function<std::vector<double>(const std::vector<double>&)>;

/// Vector construction: starting from y = x, raises the coordinates
/// where f(y)_i > y_i = x_i by a shrinking line search towards f(y) until
/// no such coordinate is left. NoProgress when a line search fails within
/// max_rounds halvings.
std::vector<double> technical_vector(const VectorMap& f, const std::vector<double>& x, double step_shrink = 0.5,
                                     std::size_t max_rounds = 200);

/// Both implications at y: f(y)_i > y_i => y_i > x_i and f(y)_i <= y_i =>
/// |y_i - x_i| <= tol.
bool technical_postcondition(const VectorMap& f, const std::vector<double>& x, const std::vector<double>& y,
                             double tol = 1e-9);

}  // namespace csg
