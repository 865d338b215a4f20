#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "csg/dist.hpp"
#include "csg/rng.hpp"
#include "csg/state_id.hpp"

namespace csg {

using ActionIndex = std::uint32_t;

enum class Precision { Float, Exact };

/// A two-player zero-sum concurrent stochastic game. Max picks an action in
/// [0, num_max_actions(s)), Min in [0, num_min_actions(s)), and the kernel
/// maps the triple to a successor distribution. Implementations are
/// immutable; lazy games compute local data as a pure function of the id.
class Game {
 public:
  virtual ~Game() = default;

  virtual std::string name() const = 0;
  virtual StateId initial_state() const = 0;

  virtual bool is_finite() const = 0;
  /// All states in ascending order. Only for finite games.
  virtual std::vector<StateId> states() const;

  virtual bool has_state(const StateId& s) const = 0;
  virtual std::size_t num_max_actions(const StateId& s) const = 0;
  virtual std::size_t num_min_actions(const StateId& s) const = 0;

  /// Checked kernel access; throws IllegalAction for actions out of range.
  /// With Precision::Exact the result carries exact weights (or the call
  /// fails with BadParams when the game only has float data).
  Dist<StateId> kernel(const StateId& s, ActionIndex a, ActionIndex b,
                       Precision precision = Precision::Float) const;

  virtual bool is_sink(const StateId&) const { return false; }
  virtual bool is_target(const StateId&) const { return false; }

  virtual std::string state_name(const StateId& s) const { return s.to_string(); }
  /// Resolves a display name or the canonical "[..]" form.
  virtual std::optional<StateId> find_state(std::string_view name) const;
  virtual std::string max_action_name(const StateId&, ActionIndex a) const { return std::to_string(a); }
  virtual std::string min_action_name(const StateId&, ActionIndex b) const { return std::to_string(b); }

  /// Text that rebuilds a lazy game through the game-file reader.
  virtual std::optional<std::string> recipe() const { return std::nullopt; }

  /// For states where Min really chooses among infinitely many successors
  /// s_0, s_1, ... (the kernel only shows a finite placeholder), the family
  /// i -> s_i. Input of the ladder reduction.
  virtual std::optional<std::function<StateId(std::int64_t)>> min_branch_family(const StateId&) const {
    return std::nullopt;
  }

 protected:
  virtual Dist<StateId> do_kernel(const StateId& s, ActionIndex a, ActionIndex b, Precision precision) const = 0;
};

using GamePtr = std::shared_ptr<const Game>;

/// The absorbing losing state added by the leaky construction. It sorts
/// before every other id.
inline StateId bot_state() { return StateId{INT64_MIN}; }

/// Samples a successor of (s, a, b); consumes exactly one draw.
StateId step(const Game& game, const StateId& s, ActionIndex a, ActionIndex b, RngStream& rng);

/// True iff at every listed state the kernel depends only on Max's action or
/// only on Min's action.
bool check_turn_based(const Game& game, std::span<const StateId> states);

enum class Controller { Nobody, Max, Min, Both };
/// Which player's action influences the motion at s.
Controller controller_at(const Game& game, const StateId& s);

/// Explicit finite game with exact rational kernel rows.
class TableGame final : public Game {
 public:
  struct State {
    StateId id;
    std::string name;
    std::vector<std::string> max_actions;
    std::vector<std::string> min_actions;
    std::vector<Dist<StateId>> rows;  // index a * |B| + b
    bool sink = false;
    bool target = false;
  };

  TableGame(std::string name, std::vector<State> states, StateId initial);

  std::string name() const override { return name_; }
  StateId initial_state() const override { return initial_; }
  bool is_finite() const override { return true; }
  std::vector<StateId> states() const override;
  bool has_state(const StateId& s) const override { return index_.count(s) != 0; }
  std::size_t num_max_actions(const StateId& s) const override { return at(s).max_actions.size(); }
  std::size_t num_min_actions(const StateId& s) const override { return at(s).min_actions.size(); }
  bool is_sink(const StateId& s) const override { return at(s).sink; }
  bool is_target(const StateId& s) const override { return at(s).target; }
  std::string state_name(const StateId& s) const override;
  std::optional<StateId> find_state(std::string_view name) const override;
  std::string max_action_name(const StateId& s, ActionIndex a) const override { return at(s).max_actions.at(a); }
  std::string min_action_name(const StateId& s, ActionIndex b) const override { return at(s).min_actions.at(b); }

 protected:
  Dist<StateId> do_kernel(const StateId& s, ActionIndex a, ActionIndex b, Precision precision) const override;

 private:
  const State& at(const StateId& s) const;

  std::string name_;
  std::vector<State> states_;  // sorted by id
  std::unordered_map<StateId, std::size_t> index_;
  StateId initial_;
};

/// Assembles a TableGame state by state; every (s, a, b) row must be given.
class GameBuilder {
 public:
  explicit GameBuilder(std::string name) : name_(std::move(name)) {}

  /// Adds a state with id {next index} unless an id is supplied.
  StateId add_state(std::string name, std::optional<StateId> id = std::nullopt);
  void set_actions(const StateId& s, std::vector<std::string> max_actions, std::vector<std::string> min_actions);
  void set_row(const StateId& s, ActionIndex a, ActionIndex b, Dist<StateId> row);
  /// The same row for every action pair.
  void set_uncontrolled(const StateId& s, Dist<StateId> row);
  void set_sink(const StateId& s);
  void set_target(const StateId& s, bool target = true);
  void set_initial(const StateId& s) { initial_ = s; }
  StateId id_of(std::string_view name) const;

  std::shared_ptr<const TableGame> build() const;

 private:
  struct Pending {
    TableGame::State state;
    std::map<std::pair<ActionIndex, ActionIndex>, Dist<StateId>> rows;
    std::optional<Dist<StateId>> uncontrolled;
  };
  Pending& pending(const StateId& s);

  std::string name_;
  std::vector<Pending> states_;
  std::optional<StateId> initial_;
};

/// Renders the kernel rows of a finite game into a TableGame, keeping exact
/// weights when available.
std::shared_ptr<const TableGame> materialize(const Game& game);

}  // namespace csg
