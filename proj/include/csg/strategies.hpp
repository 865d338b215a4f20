#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "csg/game.hpp"
#include "csg/params.hpp"
#include "csg/strategy.hpp"

namespace csg {

/// Phase schedule of the 1-bit Markov Bad Match strategy. Phase i >= 1 has
/// budget eps_i = eps 2^-(i+1) and length l_i = 2 ceil(ln(1/eps_i) / eps_i);
/// phase 1 starts at step 0.
class OneBitSchedule {
 public:
  explicit OneBitSchedule(const Rational& eps);

  const Rational& eps() const { return eps_; }
  Rational eps_i(std::int64_t i) const;
  std::int64_t length(std::int64_t i) const;
  /// First step of phase i.
  std::int64_t start(std::int64_t i) const;
  /// Phase containing the step.
  std::int64_t phase_of(std::int64_t step) const;

 private:
  void extend_to(std::int64_t i) const;
  Rational eps_;
  mutable std::vector<std::int64_t> starts_;  // starts_[i-1] = start of phase i
};

/// Max strategy for the Simplified Bad Match: in each phase it plays 1 with
/// probability eps_i at d until s has been seen in the phase, then 0. The
/// bit is 1 at step n iff s occurred in the current phase before step n.
/// Updates are Dirac. BadEpsilon unless 0 < eps < 1.
class BadMatchOneBitMarkov final : public StrategyMachine {
 public:
  BadMatchOneBitMarkov(const Rational& eps, StateId s_state = StateId{3});

  std::string describe() const override;
  bool uses_step_counter() const override { return true; }
  std::optional<std::int64_t> num_local_modes() const override { return 2; }
  bool dirac_updates() const override { return true; }
  Dist<ActionIndex> act(const Mode& m, const StateId& s, std::size_t num_actions) const override;
  Dist<LocalMode> update(const Mode& m, const StateId& s, ActionIndex a, ActionIndex b,
                         const StateId& next) const override;
  std::optional<std::string> recipe() const override;

  const OneBitSchedule& schedule() const { return schedule_; }

 private:
  OneBitSchedule schedule_;
  StateId s_state_;
};

StrategyPtr badmatch_max_1bit_markov(const Rational& eps);

/// Sequence r_0, r_1, ... given in a form whose tails can be bounded.
struct SequenceSpec {
  enum class Kind { Constant, Geometric, Table };
  Kind kind = Kind::Constant;
  Rational first = 0;  // constant value, or first term of the geometric
  Rational ratio = 0;  // geometric only
  std::vector<Rational> table;  // r_n for n < size; 0 beyond
  std::optional<Rational> tail_bound;  // table only: bound on the sum beyond the table

  static SequenceSpec constant(Rational c) { return {Kind::Constant, std::move(c), 0, {}, std::nullopt}; }
  static SequenceSpec geometric(Rational first, Rational ratio) {
    return {Kind::Geometric, std::move(first), std::move(ratio), {}, std::nullopt};
  }
  static SequenceSpec from_table(std::vector<Rational> values, std::optional<Rational> tail) {
    return {Kind::Table, 0, 0, std::move(values), std::move(tail)};
  }
  /// "constant:0.3", "geometric:0.1,1/2", "table:0.1,0.05" or
  /// "table:0.1,0.05;tail=0.01".
  static SequenceSpec parse(std::string_view text);
  std::string to_string() const;

  Rational at(std::int64_t n) const;
  /// Whether the series diverges; UndecidableTail when the spec cannot tell.
  bool diverges() const;
  /// Upper bound on sum_{n >= k} r_n (only for convergent specs).
  Rational tail_from(std::int64_t k) const;
};

/// Markov Max strategy playing 1 with probability r_n at step stride*n
/// (at states with two or more actions; action 0 elsewhere).
StrategyPtr markov_sequence(const SequenceSpec& r, std::int64_t stride = 2);

/// Min counter-strategy against finite-memory Max strategies in the
/// (Simplified) Bad Match. With eps_1 = eps_2 = eps/2 it plays 1 w.p. eps_1
/// for K steps, then 1 forever; K is the least horizon at which the chain of
/// (sigma, eps_1-mix) has transient mass <= eps_2.
struct CounterResult {
  StrategyPtr machine;
  std::int64_t K = 0;
  Rational transient_mass;  // at K
};
CounterResult badmatch_min_counter_finite(const Game& game, const StrategyMachine& sigma, const Rational& eps,
                                          std::size_t cap = 1000000);

/// Counter machine with K+1 saturating modes: `before` for the first K
/// steps, then Dirac `after_action`.
StrategyPtr counter_switch(std::int64_t K, Dist<ActionIndex> before, ActionIndex after_action);

/// Min counter-strategy against Markov Max strategies with rates r_n.
/// Divergent series: always 0. Convergent: 0 before step 2K, 1 afterwards,
/// where K is the least n with tail sum <= eps.
struct MarkovCounterResult {
  StrategyPtr machine;
  bool divergent = false;
  std::int64_t K = 0;
};
MarkovCounterResult badmatch_min_counter_markov(const SequenceSpec& r, const Rational& eps);

/// Step-counter Min machine: action 0 before `switch_step`, then 1.
StrategyPtr markov_switch(std::int64_t switch_step);

/// Restarts `inner` whenever the play returns to s0: the memory counts the
/// steps since the last visit to s0 (times the inner mode count) so that the
/// continuation after each return is inner played afresh.
class RestartOnReturn final : public StrategyMachine {
 public:
  RestartOnReturn(StrategyPtr inner, StateId s0);
  std::string describe() const override;
  std::optional<std::int64_t> num_local_modes() const override { return std::nullopt; }
  bool dirac_updates() const override { return inner_->dirac_updates(); }
  LocalMode initial_mode() const override { return inner_->initial_mode(); }
  Dist<ActionIndex> act(const Mode& m, const StateId& s, std::size_t num_actions) const override;
  Dist<LocalMode> update(const Mode& m, const StateId& s, ActionIndex a, ActionIndex b,
                         const StateId& next) const override;

 private:
  Mode inner_mode(const Mode& m) const;
  StrategyPtr inner_;
  StateId s0_;
  std::int64_t width_;
};

/// Constructor registry for strategy files and configs: always, constant_mix,
/// periodic2, badmatch_1bit_markov, markov_sequence, markov_switch,
/// counter_switch.
StrategyPtr make_strategy(std::string_view name, const Params& params);

}  // namespace csg
