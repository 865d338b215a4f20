#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "csg/game.hpp"
#include "csg/params.hpp"
#include "csg/strategy.hpp"

namespace csg {

/// Finite strictly ascending set of leak rates in (0,1).
class LeakGrid {
 public:
  explicit LeakGrid(std::vector<Rational> etas);
  /// {2^-j : 1 <= j <= max_exponent}, ascending.
  static LeakGrid dyadic(int max_exponent = 40);

  std::size_t size() const { return etas_.size(); }
  const Rational& eta(std::size_t j) const { return etas_[j]; }
  const std::vector<Rational>& etas() const { return etas_; }
  /// Index of the largest grid value <= bound, if any.
  std::optional<std::size_t> floor_index(const Rational& bound) const;
  /// Index of the exact value; BadParams when absent.
  std::size_t index_of(const Rational& eta) const;
  std::string to_string() const;

 private:
  std::vector<Rational> etas_;
};

/// The leaky game: Max action a at s becomes the g actions a*g + j, each
/// diverting mass eta_j to the absorbing losing state bot. Min is unchanged.
class LeakyGame final : public Game {
 public:
  LeakyGame(GamePtr base, LeakGrid grid);

  const Game& base() const { return *base_; }
  GamePtr base_ptr() const { return base_; }
  const LeakGrid& grid() const { return grid_; }
  static ActionIndex encode(ActionIndex a, std::size_t j, std::size_t g) { return static_cast<ActionIndex>(a * g + j); }

  std::string name() const override { return "leaky(" + base_->name() + ")"; }
  StateId initial_state() const override { return base_->initial_state(); }
  bool is_finite() const override { return base_->is_finite(); }
  std::vector<StateId> states() const override;
  bool has_state(const StateId& s) const override { return s == bot_state() || base_->has_state(s); }
  std::size_t num_max_actions(const StateId& s) const override;
  std::size_t num_min_actions(const StateId& s) const override;
  bool is_sink(const StateId& s) const override { return s == bot_state(); }
  bool is_target(const StateId& s) const override { return s != bot_state() && base_->is_target(s); }
  std::string state_name(const StateId& s) const override;
  std::optional<StateId> find_state(std::string_view name) const override;
  std::string max_action_name(const StateId& s, ActionIndex a) const override;
  std::string min_action_name(const StateId& s, ActionIndex b) const override;
  std::optional<std::string> recipe() const override;

 protected:
  Dist<StateId> do_kernel(const StateId& s, ActionIndex a, ActionIndex b, Precision precision) const override;

 private:
  GamePtr base_;
  LeakGrid grid_;
};

/// BotCollision when the base game already has a state with the bot id.
std::shared_ptr<const LeakyGame> leaky(GamePtr game, LeakGrid grid);

/// On the leaky game, plays sigma's mixed action with leak eta_n = the
/// largest grid value <= eps 2^-(n+1) at step n. GridTooCoarse when the
/// grid has no value that small (raised at the first step that needs it).
StrategyPtr leak_schedule_transfer(StrategyPtr sigma, const Rational& eps, LeakGrid grid);

/// Leak chosen from the current state: largest grid value <= eta(s).
StrategyPtr leak_by_state(StrategyPtr sigma, LeakGrid grid, std::function<Rational(const StateId&)> eta,
                          std::string label);

/// Strategy on the original game that plays a wherever sigma_bot plays any
/// a_eta, with the same modes. The memory update mixes sigma_bot's updates
/// over the eta variants of the realized action, weighted by sigma_bot's
/// probabilities.
StrategyPtr carry_back(StrategyPtr sigma_bot, std::shared_ptr<const LeakyGame> leaky);

/// Unfolding over S x N: ids are the base coordinates with the counter
/// appended; every transition advances the counter by one.
class UnfoldedGame final : public Game {
 public:
  explicit UnfoldedGame(GamePtr base);
  static StateId lift(const StateId& s, std::int64_t k) { return s.appended(k); }
  static StateId base_of(const StateId& u) { return u.prefix(u.size() - 1); }
  static std::int64_t counter_of(const StateId& u) { return u[u.size() - 1]; }

  std::string name() const override { return "unfold(" + base_->name() + ")"; }
  StateId initial_state() const override { return lift(base_->initial_state(), 0); }
  bool is_finite() const override { return false; }
  bool has_state(const StateId& s) const override;
  std::size_t num_max_actions(const StateId& s) const override { return base_->num_max_actions(base_of(s)); }
  std::size_t num_min_actions(const StateId& s) const override { return base_->num_min_actions(base_of(s)); }
  bool is_target(const StateId& s) const override { return base_->is_target(base_of(s)); }
  std::string state_name(const StateId& s) const override;
  std::string max_action_name(const StateId& s, ActionIndex a) const override { return base_->max_action_name(base_of(s), a); }
  std::string min_action_name(const StateId& s, ActionIndex b) const override { return base_->min_action_name(base_of(s), b); }
  std::optional<std::string> recipe() const override;

 protected:
  Dist<StateId> do_kernel(const StateId& s, ActionIndex a, ActionIndex b, Precision precision) const override;

 private:
  GamePtr base_;
};

std::shared_ptr<const UnfoldedGame> acyclic_unfold(GamePtr game);

/// A machine on the unfolding, read as a step-counter machine on the base:
/// at (s, n) with mode m it plays what sigma_u plays at (s, n) in mode m.
StrategyPtr markov_carry_back(StrategyPtr sigma_u);

/// G_alpha: at s0 Max has the single action a_alpha whose rows are the
/// alpha-mixtures of the original rows. UnsupportedAction when alpha puts
/// mass on an action not in A(s0).
class FixedActionGame final : public Game {
 public:
  FixedActionGame(GamePtr base, StateId s0, Dist<ActionIndex> alpha);

  std::string name() const override { return base_->name(); }
  StateId initial_state() const override { return base_->initial_state(); }
  bool is_finite() const override { return base_->is_finite(); }
  std::vector<StateId> states() const override { return base_->states(); }
  bool has_state(const StateId& s) const override { return base_->has_state(s); }
  std::size_t num_max_actions(const StateId& s) const override { return s == s0_ ? 1 : base_->num_max_actions(s); }
  std::size_t num_min_actions(const StateId& s) const override { return base_->num_min_actions(s); }
  bool is_sink(const StateId& s) const override { return base_->is_sink(s); }
  bool is_target(const StateId& s) const override { return base_->is_target(s); }
  std::string state_name(const StateId& s) const override { return base_->state_name(s); }
  std::optional<StateId> find_state(std::string_view name) const override { return base_->find_state(name); }
  std::string max_action_name(const StateId& s, ActionIndex a) const override;
  std::string min_action_name(const StateId& s, ActionIndex b) const override { return base_->min_action_name(s, b); }
  std::optional<std::string> recipe() const override;

  const Dist<ActionIndex>& alpha() const { return alpha_; }
  const StateId& fixed_state() const { return s0_; }

 protected:
  Dist<StateId> do_kernel(const StateId& s, ActionIndex a, ActionIndex b, Precision precision) const override;

 private:
  GamePtr base_;
  StateId s0_;
  Dist<ActionIndex> alpha_;
};

GamePtr fix_action(GamePtr game, const StateId& s0, const Dist<ActionIndex>& alpha);

/// Ids of the ladder states.
inline constexpr std::int64_t kLadderTag = -2;
inline StateId ladder_state(std::int64_t i) { return StateId{kLadderTag, i, 0}; }
inline StateId ladder_coin(std::int64_t i) { return StateId{kLadderTag, i, 1}; }

/// Replaces Min's infinite branching s -> s_i by the ladder: s -> l_0 -> l_1;
/// at l_i (i >= 1) Min picks exit (to s_i) or continue (to l'_i); l'_i moves
/// to l_{i+1} or l_{i-1} with probability 1/2 each. l_0 offers only continue.
/// NotInfiniteBranchingSpec when the game gives no family at s.
GamePtr ladder_reduce(GamePtr game, const StateId& s);

inline constexpr std::int64_t kDelayTag = -3;
inline StateId delay_state(const StateId& s) { return s.prefixed(kDelayTag); }

/// Puts a Min state with actions {stay, go} before every Max-controlled
/// state; every entry into the Max state (the initial one included) passes
/// through it. NotTurnBased when a state reached within `explore` states
/// is concurrent.
GamePtr min_delay_gadget(GamePtr game, std::size_t explore = 10000);

/// Finite restriction: includes the smallest discovered ids, in order, until
/// `n` non-bot states are in; discovered states left out become absorbing
/// frontier states.
struct Truncation {
  std::shared_ptr<const TableGame> game;
  std::vector<StateId> interior;  // ascending, bot excluded
  std::vector<StateId> frontier;  // ascending
};
Truncation truncate(const Game& game, std::size_t n);

/// Applies a named transform: leaky [grid | max_exponent], unfold, fix_action
/// state alpha, ladder state, delay, truncate n.
GamePtr apply_transform(GamePtr game, std::string_view name, const Params& params);

}  // namespace csg
