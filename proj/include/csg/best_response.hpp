#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "csg/game.hpp"
#include "csg/objective.hpp"
#include "csg/strategies.hpp"
#include "csg/strategy.hpp"

namespace csg {

/// Deterministic automaton read along a finite play prefix s_0 .. s_H.
/// `next` returns the state after reading s at step n, or -1 to reject for
/// good. A prefix is accepted iff the monitor has not rejected after s_H.
struct PlayMonitor {
  std::string label;
  int states = 1;
  int initial = 0;
  std::function<int(int q, std::int64_t step, const StateId& s)> next;
};

/// "s is visited in each of the phases 1..phases" of a 1-bit schedule.
PlayMonitor phase_visit_monitor(const OneBitSchedule& schedule, std::int64_t phases, StateId s);

struct BestResponseOptions {
  /// Finite horizon H: the play s_0 .. s_H is judged. Required for
  /// step-counting Max machines.
  std::optional<std::int64_t> horizon;
  /// Finite horizon only: judge the prefix by this monitor instead of the
  /// objective.
  std::optional<PlayMonitor> monitor;
  /// Finite horizon only: value of an undecided prefix ending in (state,
  /// Max local mode). Defaults to 0 for Reach objectives and 1 for Safety.
  std::function<double(const StateId&, LocalMode)> terminal;
  std::optional<StateId> start;
  std::size_t max_nodes = 1000000;
  std::size_t max_iters = 1000000;
  double tol = 1e-13;
};

struct ProductValue {
  StateId state;
  LocalMode mode = 0;
  double value = 0.0;
};

struct BestResponse {
  StrategyPtr pi;
  double value = 0.0;  // attained by Max from the start
  std::string method;
  std::size_t product_nodes = 0;
  std::size_t iterations = 0;
  bool converged = true;
  std::vector<ProductValue> values;  // infinite horizon: every explored node

  /// Value at an explored product node (infinite horizon).
  double value_at(const StateId& s, LocalMode mode = 0) const;
};

/// Optimal Min reply to a public-memory Max machine. Fixing σ turns the game
/// into a Min MDP over states x modes; it is solved by backward induction
/// (finite horizon) or by value iteration (Reach, ReachConstrained, Safety,
/// AvoidBot, and Buchi through end components). The returned Min machine
/// tracks σ's mode and is deterministic on the product.
BestResponse best_response_min(const Game& game, StrategyPtr sigma, const Objective& objective,
                               const BestResponseOptions& options = {});

}  // namespace csg
