#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "csg/game.hpp"
#include "csg/state_id.hpp"

namespace csg {

/// A (possibly infinite) set of states, given by membership.
class StateSet {
 public:
  StateSet() : contains_([](const StateId&) { return false; }), label_("{}") {}
  StateSet(std::function<bool(const StateId&)> contains, std::string label)
      : contains_(std::move(contains)), label_(std::move(label)) {}

  static StateSet of(std::vector<StateId> states, std::string label = {});
  /// The target predicate carried by the game.
  static StateSet targets_of(GamePtr game);
  static StateSet all();

  bool contains(const StateId& s) const { return contains_(s); }
  const std::string& label() const { return label_; }

 private:
  std::function<bool(const StateId&)> contains_;
  std::string label_;
};

StateSet set_union(StateSet a, StateSet b);

struct Objective {
  enum class Kind { Reach, ReachConstrained, Safety, Buchi, Transience, TransientBuchi, AvoidBot };

  Kind kind = Kind::Reach;
  StateSet target;
  StateSet constraint;  // ReachConstrained only

  static Objective reach(StateSet t) { return {Kind::Reach, std::move(t), {}}; }
  /// Reach t while every state before the visit lies in l.
  static Objective reach_constrained(StateSet l, StateSet t) { return {Kind::ReachConstrained, std::move(t), std::move(l)}; }
  static Objective safety(StateSet bad) { return {Kind::Safety, std::move(bad), {}}; }
  static Objective buchi(StateSet t) { return {Kind::Buchi, std::move(t), {}}; }
  static Objective transience() { return {Kind::Transience, {}, {}}; }
  static Objective transient_buchi(StateSet t) { return {Kind::TransientBuchi, std::move(t), {}}; }
  static Objective avoid_bot();

  std::string describe() const;
};

/// One step s_n --(a_n, b_n)--> s_{n+1} of a play.
struct PlayStep {
  StateId state;
  ActionIndex max_action = 0;
  ActionIndex min_action = 0;
  StateId next;
};

/// A finite play prefix. Plays always start at their recorded initial state.
/// When simulation stops on entering a sink, `sink_reached` is set and the
/// play is understood to stay there forever.
struct Play {
  StateId initial;
  std::vector<PlayStep> steps;
  bool sink_reached = false;

  std::size_t length() const { return steps.size(); }
  /// States s_0 .. s_length.
  std::vector<StateId> states() const;
  const StateId& final_state() const { return steps.empty() ? initial : steps.back().next; }
};

}  // namespace csg
