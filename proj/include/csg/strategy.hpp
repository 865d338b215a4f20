#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "csg/dist.hpp"
#include "csg/game.hpp"
#include "csg/rng.hpp"

namespace csg {

using LocalMode = std::int64_t;

/// Memory mode of a machine. The step counter belongs to the play and is
/// supplied by the caller; machines that are not step-counting never read it.
struct Mode {
  std::int64_t step = 0;
  LocalMode local = 0;
  friend bool operator==(const Mode&, const Mode&) = default;
};

enum class StrategyClass { Memoryless, FiniteMemory, Markov, OneBit, OneBitMarkov, General };
std::string_view strategy_class_name(StrategyClass c);

/// A memory-based strategy: local modes, an initial mode, and the act and
/// update maps. The same interface serves Max and Min; `num_actions` is the
/// size of the acting player's action set at s.
class StrategyMachine {
 public:
  virtual ~StrategyMachine() = default;

  virtual std::string describe() const = 0;
  virtual bool uses_step_counter() const { return false; }
  /// Number of local modes, or nullopt when unbounded.
  virtual std::optional<std::int64_t> num_local_modes() const = 0;
  virtual bool dirac_updates() const = 0;
  virtual LocalMode initial_mode() const { return 0; }

  virtual Dist<ActionIndex> act(const Mode& m, const StateId& s, std::size_t num_actions) const = 0;
  /// Distribution of the next local mode after (s, m) --(a, b)--> next.
  virtual Dist<LocalMode> update(const Mode& m, const StateId& s, ActionIndex a, ActionIndex b,
                                 const StateId& next) const = 0;

  /// Text accepted by the strategy-file reader, for constructed machines.
  virtual std::optional<std::string> recipe() const { return std::nullopt; }

  /// Derived from the mode count and the step counter flag.
  StrategyClass strategy_class() const;
  bool finite_memory() const { return !uses_step_counter() && num_local_modes().has_value(); }
};

using StrategyPtr = std::shared_ptr<const StrategyMachine>;

/// Samples an action at (m, s); one draw. Fails with ModeOutOfRange for a
/// local mode outside the machine's range and IllegalAction when the machine
/// puts mass on an unavailable action.
ActionIndex strategy_act(const StrategyMachine& machine, const Mode& m, const StateId& s, std::size_t num_actions,
                         RngStream& rng);
/// Samples the next mode (step advances by one); one draw.
Mode strategy_update(const StrategyMachine& machine, const Mode& m, const StateId& s, ActionIndex a, ActionIndex b,
                     const StateId& next, RngStream& rng);

/// Checked act distribution (mode range and action range).
Dist<ActionIndex> checked_act(const StrategyMachine& machine, const Mode& m, const StateId& s, std::size_t num_actions);

// ------------------------------------------------------------------ machines

/// Memoryless machine given by a per-state table; states without an entry
/// use `fallback` (Dirac 0 when unset).
class MemorylessMachine final : public StrategyMachine {
 public:
  using Fallback = std::function<Dist<ActionIndex>(const StateId&, std::size_t)>;
  MemorylessMachine(std::string label, std::unordered_map<StateId, Dist<ActionIndex>> table, Fallback fallback = {});

  std::string describe() const override { return label_; }
  std::optional<std::int64_t> num_local_modes() const override { return 1; }
  bool dirac_updates() const override { return true; }
  Dist<ActionIndex> act(const Mode& m, const StateId& s, std::size_t num_actions) const override;
  Dist<LocalMode> update(const Mode&, const StateId&, ActionIndex, ActionIndex, const StateId&) const override {
    return Dist<LocalMode>::dirac(0);
  }
  std::optional<std::string> recipe() const override { return recipe_; }
  void set_recipe(std::string r) { recipe_ = std::move(r); }

  const std::unordered_map<StateId, Dist<ActionIndex>>& table() const { return table_; }

 private:
  std::string label_;
  std::unordered_map<StateId, Dist<ActionIndex>> table_;
  Fallback fallback_;
  std::optional<std::string> recipe_;
};

/// Plays `action` wherever it exists, else action 0.
StrategyPtr always(ActionIndex action);
/// Plays action 1 with probability q at states offering two or more actions.
StrategyPtr constant_mix(const Rational& q);

/// Finite table machine, as read from a strategy file. Act entries and
/// update rules may use nullopt as a wildcard; the first matching update
/// rule wins, and when none matches the mode is kept.
class TableMachine final : public StrategyMachine {
 public:
  struct ActEntry {
    std::optional<LocalMode> mode;
    std::optional<StateId> state;
    Dist<ActionIndex> action;
  };
  struct UpdateRule {
    std::optional<LocalMode> mode;
    std::optional<StateId> state;
    std::optional<ActionIndex> a;
    std::optional<ActionIndex> b;
    std::optional<StateId> next;
    Dist<LocalMode> to;
  };

  TableMachine(std::string label, std::int64_t modes, LocalMode initial, std::vector<ActEntry> acts,
               std::vector<UpdateRule> updates);

  std::string describe() const override { return label_; }
  std::optional<std::int64_t> num_local_modes() const override { return modes_; }
  bool dirac_updates() const override { return dirac_; }
  LocalMode initial_mode() const override { return initial_; }
  Dist<ActionIndex> act(const Mode& m, const StateId& s, std::size_t num_actions) const override;
  Dist<LocalMode> update(const Mode& m, const StateId& s, ActionIndex a, ActionIndex b,
                         const StateId& next) const override;

  const std::vector<ActEntry>& acts() const { return acts_; }
  const std::vector<UpdateRule>& updates() const { return updates_; }

 private:
  std::string label_;
  std::int64_t modes_;
  LocalMode initial_;
  std::vector<ActEntry> acts_;
  std::vector<UpdateRule> updates_;
  bool dirac_ = true;
};

/// Two modes that alternate every step; in mode k the machine plays action 1
/// with probability q_k at states with two or more actions.
StrategyPtr periodic2(const Rational& q0, const Rational& q1);

/// Adapter over arbitrary callables, for machines assembled in code.
class LambdaMachine final : public StrategyMachine {
 public:
  using ActFn = std::function<Dist<ActionIndex>(const Mode&, const StateId&, std::size_t)>;
  using UpdateFn = std::function<Dist<LocalMode>(const Mode&, const StateId&, ActionIndex, ActionIndex, const StateId&)>;

  LambdaMachine(std::string label, std::optional<std::int64_t> modes, bool step_counter, bool dirac, ActFn act,
                UpdateFn update = {}, LocalMode initial = 0);

  std::string describe() const override { return label_; }
  bool uses_step_counter() const override { return step_counter_; }
  std::optional<std::int64_t> num_local_modes() const override { return modes_; }
  bool dirac_updates() const override { return dirac_; }
  LocalMode initial_mode() const override { return initial_; }
  Dist<ActionIndex> act(const Mode& m, const StateId& s, std::size_t num_actions) const override {
    return act_(m, s, num_actions);
  }
  Dist<LocalMode> update(const Mode& m, const StateId& s, ActionIndex a, ActionIndex b,
                         const StateId& next) const override;
  std::optional<std::string> recipe() const override { return recipe_; }
  void set_recipe(std::string r) { recipe_ = std::move(r); }

 private:
  std::string label_;
  std::optional<std::int64_t> modes_;
  bool step_counter_;
  bool dirac_;
  ActFn act_;
  UpdateFn update_;
  LocalMode initial_;
  std::optional<std::string> recipe_;
};

/// Distribution "action 1 w.p. q, else 0", collapsing to Dirac at q in {0,1}.
Dist<ActionIndex> bernoulli_action(const Rational& q);
Dist<ActionIndex> bernoulli_action(double q);

}  // namespace csg
