#include "csg/transform.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <unordered_set>

#include "csg/error.hpp"

namespace csg {

namespace {

Rational pow2_inv(std::int64_t k) {
  mpz_class den = 1;
  den <<= static_cast<mp_bitcnt_t>(k);
  return Rational(mpz_class(1), den);
}

std::optional<std::string> chain_recipe(const Game& base, const std::string& step) {
  auto r = base.recipe();
  if (!r) return std::nullopt;
  return *r + "\napply " + step;
}

}  // namespace

// --------------------------------------------------------------------- grid

LeakGrid::LeakGrid(std::vector<Rational> etas) : etas_(std::move(etas)) {
  if (etas_.empty()) fail(ErrorCode::BadParams, "leak grid is empty");
  for (std::size_t j = 0; j < etas_.size(); ++j) {
    etas_[j].canonicalize();
    if (etas_[j] <= 0 || etas_[j] >= 1) fail(ErrorCode::BadParams, "leak rates must lie in (0,1)");
    if (j > 0 && etas_[j] <= etas_[j - 1]) fail(ErrorCode::BadParams, "leak grid must be strictly ascending");
  }
}

LeakGrid LeakGrid::dyadic(int max_exponent) {
  if (max_exponent < 1) fail(ErrorCode::BadParams, "dyadic grid needs max_exponent >= 1");
  std::vector<Rational> etas;
  for (int j = max_exponent; j >= 1; --j) etas.push_back(pow2_inv(j));
  return LeakGrid(std::move(etas));
}

std::optional<std::size_t> LeakGrid::floor_index(const Rational& bound) const {
  auto it = std::upper_bound(etas_.begin(), etas_.end(), bound);
  if (it == etas_.begin()) return std::nullopt;
  return static_cast<std::size_t>(it - etas_.begin() - 1);
}

std::size_t LeakGrid::index_of(const Rational& eta) const {
  auto it = std::lower_bound(etas_.begin(), etas_.end(), eta);
  if (it == etas_.end() || *it != eta) fail(ErrorCode::BadParams, "leak rate " + csg::to_string(eta) + " not in the grid");
  return static_cast<std::size_t>(it - etas_.begin());
}

std::string LeakGrid::to_string() const {
  std::string out;
  for (std::size_t j = 0; j < etas_.size(); ++j) out += (j ? "," : "") + csg::to_string(etas_[j]);
  return out;
}

// -------------------------------------------------------------------- leaky

LeakyGame::LeakyGame(GamePtr base, LeakGrid grid) : base_(std::move(base)), grid_(std::move(grid)) {
  if (base_->has_state(bot_state())) fail(ErrorCode::BotCollision, "game already has a state with the bot id");
}

std::vector<StateId> LeakyGame::states() const {
  std::vector<StateId> out{bot_state()};
  for (const auto& s : base_->states()) out.push_back(s);
  return out;
}

std::size_t LeakyGame::num_max_actions(const StateId& s) const {
  return s == bot_state() ? 1 : base_->num_max_actions(s) * grid_.size();
}

std::size_t LeakyGame::num_min_actions(const StateId& s) const {
  return s == bot_state() ? 1 : base_->num_min_actions(s);
}

std::string LeakyGame::state_name(const StateId& s) const { return s == bot_state() ? "bot" : base_->state_name(s); }

std::optional<StateId> LeakyGame::find_state(std::string_view name) const {
  if (name == "bot") return bot_state();
  return base_->find_state(name);
}

std::string LeakyGame::max_action_name(const StateId& s, ActionIndex a) const {
  if (s == bot_state()) return "stay";
  const std::size_t g = grid_.size();
  return base_->max_action_name(s, static_cast<ActionIndex>(a / g)) + "@" + csg::to_string(grid_.eta(a % g));
}

std::string LeakyGame::min_action_name(const StateId& s, ActionIndex b) const {
  return s == bot_state() ? "stay" : base_->min_action_name(s, b);
}

std::optional<std::string> LeakyGame::recipe() const { return chain_recipe(*base_, "leaky grid=" + grid_.to_string()); }

Dist<StateId> LeakyGame::do_kernel(const StateId& s, ActionIndex a, ActionIndex b, Precision precision) const {
  if (s == bot_state()) return Dist<StateId>::dirac(s);
  const std::size_t g = grid_.size();
  const Rational& eta = grid_.eta(a % g);
  const Dist<StateId> row = base_->kernel(s, static_cast<ActionIndex>(a / g), b, precision);
  typename Dist<StateId>::Accumulator acc;
  if (row.has_exact()) {
    const Rational keep = 1 - eta;
    for (std::size_t i = 0; i < row.size(); ++i) acc.add_exact(row.outcome(i), keep * row.exact_prob(i));
    acc.add_exact(bot_state(), eta);
  } else {
    const double e = eta.get_d();
    for (std::size_t i = 0; i < row.size(); ++i) acc.add(row.outcome(i), (1.0 - e) * row.prob(i));
    acc.add(bot_state(), e);
  }
  return std::move(acc).build();
}

std::shared_ptr<const LeakyGame> leaky(GamePtr game, LeakGrid grid) {
  return std::make_shared<const LeakyGame>(std::move(game), std::move(grid));
}

// -------------------------------------------------------------- leak moves

namespace {

class LeakSchedule final : public StrategyMachine {
 public:
  LeakSchedule(StrategyPtr sigma, Rational eps, LeakGrid grid)
      : sigma_(std::move(sigma)), eps_(std::move(eps)), grid_(std::move(grid)) {}

  std::string describe() const override { return "leak_schedule(" + sigma_->describe() + ", " + to_string(eps_) + ")"; }
  bool uses_step_counter() const override { return true; }
  std::optional<std::int64_t> num_local_modes() const override { return sigma_->num_local_modes(); }
  bool dirac_updates() const override { return sigma_->dirac_updates(); }
  LocalMode initial_mode() const override { return sigma_->initial_mode(); }

  std::size_t leak_index(std::int64_t step) const {
    auto j = grid_.floor_index(eps_ * pow2_inv(step + 1));
    if (!j)
      fail(ErrorCode::GridTooCoarse, "no grid value below eps*2^-" + std::to_string(step + 1) + " (step " +
                                         std::to_string(step) + ")");
    return *j;
  }

  Dist<ActionIndex> act(const Mode& m, const StateId& s, std::size_t n) const override {
    if (s == bot_state()) return Dist<ActionIndex>::dirac(0);
    const std::size_t g = grid_.size();
    const std::size_t j = leak_index(m.step);
    return sigma_->act(m, s, n / g).map([&](ActionIndex a) { return LeakyGame::encode(a, j, g); });
  }

  Dist<LocalMode> update(const Mode& m, const StateId& s, ActionIndex a, ActionIndex b,
                         const StateId& next) const override {
    if (s == bot_state() || next == bot_state()) return Dist<LocalMode>::dirac(m.local);
    return sigma_->update(m, s, static_cast<ActionIndex>(a / grid_.size()), b, next);
  }

  std::optional<std::string> recipe() const override {
    auto r = sigma_->recipe();
    if (!r) return std::nullopt;
    return *r + "\nwrap leak_schedule eps=" + to_string(eps_) + " grid=" + grid_.to_string();
  }

 private:
  StrategyPtr sigma_;
  Rational eps_;
  LeakGrid grid_;
};

class LeakByState final : public StrategyMachine {
 public:
  LeakByState(StrategyPtr sigma, LeakGrid grid, std::function<Rational(const StateId&)> eta, std::string label)
      : sigma_(std::move(sigma)), grid_(std::move(grid)), eta_(std::move(eta)), label_(std::move(label)) {}

  std::string describe() const override { return label_; }
  bool uses_step_counter() const override { return sigma_->uses_step_counter(); }
  std::optional<std::int64_t> num_local_modes() const override { return sigma_->num_local_modes(); }
  bool dirac_updates() const override { return sigma_->dirac_updates(); }
  LocalMode initial_mode() const override { return sigma_->initial_mode(); }

  Dist<ActionIndex> act(const Mode& m, const StateId& s, std::size_t n) const override {
    if (s == bot_state()) return Dist<ActionIndex>::dirac(0);
    const std::size_t g = grid_.size();
    auto j = grid_.floor_index(eta_(s));
    if (!j) fail(ErrorCode::GridTooCoarse, "no grid value below the leak requested at " + s.to_string());
    return sigma_->act(m, s, n / g).map([&](ActionIndex a) { return LeakyGame::encode(a, *j, g); });
  }

  Dist<LocalMode> update(const Mode& m, const StateId& s, ActionIndex a, ActionIndex b,
                         const StateId& next) const override {
    if (s == bot_state() || next == bot_state()) return Dist<LocalMode>::dirac(m.local);
    return sigma_->update(m, s, static_cast<ActionIndex>(a / grid_.size()), b, next);
  }

 private:
  StrategyPtr sigma_;
  LeakGrid grid_;
  std::function<Rational(const StateId&)> eta_;
  std::string label_;
};

class CarryBack final : public StrategyMachine {
 public:
  CarryBack(StrategyPtr sigma_bot, std::shared_ptr<const LeakyGame> game)
      : sigma_(std::move(sigma_bot)), game_(std::move(game)) {
    const bool projecting = dynamic_cast<const LeakSchedule*>(sigma_.get()) != nullptr ||
                            dynamic_cast<const LeakByState*>(sigma_.get()) != nullptr;
    dirac_ = sigma_->dirac_updates() && (projecting || sigma_->num_local_modes() == 1);
  }

  std::string describe() const override { return "carry_back(" + sigma_->describe() + ")"; }
  bool uses_step_counter() const override { return sigma_->uses_step_counter(); }
  std::optional<std::int64_t> num_local_modes() const override { return sigma_->num_local_modes(); }
  bool dirac_updates() const override { return dirac_; }
  LocalMode initial_mode() const override { return sigma_->initial_mode(); }

  Dist<ActionIndex> act(const Mode& m, const StateId& s, std::size_t n) const override {
    const std::size_t g = game_->grid().size();
    return sigma_->act(m, s, n * g).map([g](ActionIndex x) { return static_cast<ActionIndex>(x / g); });
  }

  Dist<LocalMode> update(const Mode& m, const StateId& s, ActionIndex a, ActionIndex b,
                         const StateId& next) const override {
    const std::size_t g = game_->grid().size();
    const Dist<ActionIndex> alpha = sigma_->act(m, s, game_->num_max_actions(s));
    const bool exact = alpha.has_exact();
    Rational total_exact = 0;
    double total = 0.0;
    for (std::size_t j = 0; j < g; ++j) {
      const ActionIndex x = LeakyGame::encode(a, j, g);
      if (auto i = alpha.find(x)) {
        total += alpha.prob(*i);
        if (exact) total_exact += alpha.exact_prob(*i);
      }
    }
    if (total <= 0.0) return Dist<LocalMode>::dirac(m.local);
    typename Dist<LocalMode>::Accumulator acc;
    for (std::size_t j = 0; j < g; ++j) {
      const ActionIndex x = LeakyGame::encode(a, j, g);
      auto i = alpha.find(x);
      if (!i) continue;
      const Dist<LocalMode> up = sigma_->update(m, s, x, b, next);
      for (std::size_t k = 0; k < up.size(); ++k) {
        if (exact && up.has_exact())
          acc.add_exact(up.outcome(k), alpha.exact_prob(*i) / total_exact * up.exact_prob(k));
        else
          acc.add(up.outcome(k), alpha.prob(*i) / total * up.prob(k));
      }
    }
    return std::move(acc).build();
  }

 private:
  StrategyPtr sigma_;
  std::shared_ptr<const LeakyGame> game_;
  bool dirac_ = false;
};

}  // namespace

StrategyPtr leak_schedule_transfer(StrategyPtr sigma, const Rational& eps, LeakGrid grid) {
  if (eps <= 0 || eps >= 1) fail(ErrorCode::BadEpsilon, "epsilon must lie in (0,1)");
  return std::make_shared<LeakSchedule>(std::move(sigma), eps, std::move(grid));
}

StrategyPtr leak_by_state(StrategyPtr sigma, LeakGrid grid, std::function<Rational(const StateId&)> eta,
                          std::string label) {
  return std::make_shared<LeakByState>(std::move(sigma), std::move(grid), std::move(eta), std::move(label));
}

StrategyPtr carry_back(StrategyPtr sigma_bot, std::shared_ptr<const LeakyGame> game) {
  return std::make_shared<CarryBack>(std::move(sigma_bot), std::move(game));
}

// ------------------------------------------------------------------- unfold

UnfoldedGame::UnfoldedGame(GamePtr base) : base_(std::move(base)) {}

bool UnfoldedGame::has_state(const StateId& s) const {
  if (s.size() < 1 || counter_of(s) < 0) return false;
  return base_->has_state(base_of(s));
}

std::string UnfoldedGame::state_name(const StateId& s) const {
  return "(" + base_->state_name(base_of(s)) + "," + std::to_string(counter_of(s)) + ")";
}

std::optional<std::string> UnfoldedGame::recipe() const { return chain_recipe(*base_, "unfold"); }

Dist<StateId> UnfoldedGame::do_kernel(const StateId& s, ActionIndex a, ActionIndex b, Precision precision) const {
  const std::int64_t k = counter_of(s);
  return base_->kernel(base_of(s), a, b, precision).map([k](const StateId& t) { return lift(t, k + 1); });
}

std::shared_ptr<const UnfoldedGame> acyclic_unfold(GamePtr game) {
  if (game->initial_state().size() >= StateId::kMaxCoords)
    fail(ErrorCode::BadParams, "state ids too long to unfold");
  return std::make_shared<const UnfoldedGame>(std::move(game));
}

namespace {

class MarkovCarryBack final : public StrategyMachine {
 public:
  explicit MarkovCarryBack(StrategyPtr inner) : inner_(std::move(inner)) {}
  std::string describe() const override { return "markov_carry_back(" + inner_->describe() + ")"; }
  bool uses_step_counter() const override { return true; }
  std::optional<std::int64_t> num_local_modes() const override { return inner_->num_local_modes(); }
  bool dirac_updates() const override { return inner_->dirac_updates(); }
  LocalMode initial_mode() const override { return inner_->initial_mode(); }
  Dist<ActionIndex> act(const Mode& m, const StateId& s, std::size_t n) const override {
    return inner_->act(m, UnfoldedGame::lift(s, m.step), n);
  }
  Dist<LocalMode> update(const Mode& m, const StateId& s, ActionIndex a, ActionIndex b,
                         const StateId& next) const override {
    return inner_->update(m, UnfoldedGame::lift(s, m.step), a, b, UnfoldedGame::lift(next, m.step + 1));
  }

 private:
  StrategyPtr inner_;
};

}  // namespace

StrategyPtr markov_carry_back(StrategyPtr sigma_u) { return std::make_shared<MarkovCarryBack>(std::move(sigma_u)); }

// ------------------------------------------------------------------- fixing

FixedActionGame::FixedActionGame(GamePtr base, StateId s0, Dist<ActionIndex> alpha)
    : base_(std::move(base)), s0_(std::move(s0)), alpha_(std::move(alpha)) {
  if (!base_->has_state(s0_)) fail(ErrorCode::BadParams, "fix_action at unknown state " + s0_.to_string());
  const std::size_t na = base_->num_max_actions(s0_);
  for (const auto& e : alpha_.entries())
    if (e.outcome >= na)
      fail(ErrorCode::UnsupportedAction, "alpha uses action " + std::to_string(e.outcome) + " not available at " +
                                             base_->state_name(s0_));
}

std::string FixedActionGame::max_action_name(const StateId& s, ActionIndex a) const {
  if (s != s0_) return base_->max_action_name(s, a);
  std::string out = "mix(";
  for (std::size_t i = 0; i < alpha_.size(); ++i) {
    if (i) out += ",";
    out += base_->max_action_name(s, alpha_.outcome(i)) + ":" +
           (alpha_.has_exact() ? to_string(alpha_.exact_prob(i)) : std::to_string(alpha_.prob(i)));
  }
  return out + ")";
}

std::optional<std::string> FixedActionGame::recipe() const {
  if (!alpha_.has_exact()) return std::nullopt;
  std::string a;
  for (std::size_t i = 0; i < alpha_.size(); ++i)
    a += (i ? "," : "") + std::to_string(alpha_.outcome(i)) + ":" + to_string(alpha_.exact_prob(i));
  return chain_recipe(*base_, "fix_action state=" + s0_.to_string() + " alpha=" + a);
}

Dist<StateId> FixedActionGame::do_kernel(const StateId& s, ActionIndex a, ActionIndex b, Precision precision) const {
  if (s != s0_) return base_->kernel(s, a, b, precision);
  typename Dist<StateId>::Accumulator acc;
  for (std::size_t i = 0; i < alpha_.size(); ++i) {
    const Dist<StateId> row = base_->kernel(s, alpha_.outcome(i), b, precision);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (alpha_.has_exact() && row.has_exact())
        acc.add_exact(row.outcome(k), alpha_.exact_prob(i) * row.exact_prob(k));
      else
        acc.add(row.outcome(k), alpha_.prob(i) * row.prob(k));
    }
  }
  return std::move(acc).build();
}

GamePtr fix_action(GamePtr game, const StateId& s0, const Dist<ActionIndex>& alpha) {
  return std::make_shared<const FixedActionGame>(std::move(game), s0, alpha);
}

// ------------------------------------------------------------------- ladder

namespace {

class LadderGame final : public Game {
 public:
  LadderGame(GamePtr base, StateId s, std::function<StateId(std::int64_t)> family)
      : base_(std::move(base)), s_(std::move(s)), family_(std::move(family)) {}

  static bool is_ladder(const StateId& x) { return x.size() == 3 && x[0] == kLadderTag; }

  std::string name() const override { return "ladder(" + base_->name() + ")"; }
  StateId initial_state() const override { return base_->initial_state(); }
  bool is_finite() const override { return false; }
  bool has_state(const StateId& x) const override {
    if (is_ladder(x)) return (x[2] == 0 && x[1] >= 0) || (x[2] == 1 && x[1] >= 1);
    return base_->has_state(x);
  }
  std::size_t num_max_actions(const StateId& x) const override { return is_ladder(x) ? 1 : base_->num_max_actions(x); }
  std::size_t num_min_actions(const StateId& x) const override {
    if (x == s_) return 1;
    if (is_ladder(x)) return x[2] == 0 && x[1] >= 1 ? 2 : 1;
    return base_->num_min_actions(x);
  }
  bool is_sink(const StateId& x) const override { return !is_ladder(x) && base_->is_sink(x); }
  bool is_target(const StateId& x) const override { return !is_ladder(x) && base_->is_target(x); }
  std::string state_name(const StateId& x) const override {
    if (is_ladder(x)) return (x[2] == 0 ? "l" : "l'") + std::to_string(x[1]);
    return base_->state_name(x);
  }
  std::optional<StateId> find_state(std::string_view name) const override { return base_->find_state(name); }
  std::string max_action_name(const StateId& x, ActionIndex a) const override {
    return is_ladder(x) ? std::to_string(a) : base_->max_action_name(x, a);
  }
  std::string min_action_name(const StateId& x, ActionIndex b) const override {
    if (x == s_) return "enter";
    if (is_ladder(x)) {
      if (x[2] == 0 && x[1] >= 1) return b == 0 ? "exit" : "continue";
      return x[2] == 0 ? "continue" : "coin";
    }
    return base_->min_action_name(x, b);
  }
  std::optional<std::function<StateId(std::int64_t)>> min_branch_family(const StateId& x) const override {
    if (x == s_ || is_ladder(x)) return std::nullopt;
    return base_->min_branch_family(x);
  }
  std::optional<std::string> recipe() const override { return chain_recipe(*base_, "ladder state=" + s_.to_string()); }

 protected:
  Dist<StateId> do_kernel(const StateId& x, ActionIndex a, ActionIndex b, Precision precision) const override {
    if (x == s_) return Dist<StateId>::dirac(ladder_state(0));
    if (!is_ladder(x)) return base_->kernel(x, a, b, precision);
    const std::int64_t i = x[1];
    if (x[2] == 0) {
      if (i == 0) return Dist<StateId>::dirac(ladder_state(1));
      return b == 0 ? Dist<StateId>::dirac(family_(i)) : Dist<StateId>::dirac(ladder_coin(i));
    }
    return Dist<StateId>::exact({{ladder_state(i + 1), Rational(1, 2)}, {ladder_state(i - 1), Rational(1, 2)}});
  }

 private:
  GamePtr base_;
  StateId s_;
  std::function<StateId(std::int64_t)> family_;
};

}  // namespace

GamePtr ladder_reduce(GamePtr game, const StateId& s) {
  if (!game->has_state(s)) fail(ErrorCode::BadParams, "ladder_reduce at unknown state " + s.to_string());
  auto family = game->min_branch_family(s);
  if (!family) fail(ErrorCode::NotInfiniteBranchingSpec, "state " + game->state_name(s) + " has no infinite Min branching");
  if (game->has_state(ladder_state(0))) fail(ErrorCode::BadParams, "game already uses the ladder ids");
  return std::make_shared<const LadderGame>(std::move(game), s, std::move(*family));
}

// -------------------------------------------------------------------- delay

namespace {

class DelayGame final : public Game {
 public:
  explicit DelayGame(GamePtr base) : base_(std::move(base)) {}

  static bool is_delay(const StateId& x) { return x.size() >= 2 && x[0] == kDelayTag; }
  bool is_max_state(const StateId& x) const {
    return base_->has_state(x) && controller_at(*base_, x) == Controller::Max;
  }
  StateId redirect(const StateId& x) const { return is_max_state(x) ? delay_state(x) : x; }

  std::string name() const override { return "delay(" + base_->name() + ")"; }
  StateId initial_state() const override { return redirect(base_->initial_state()); }
  bool is_finite() const override { return base_->is_finite(); }
  std::vector<StateId> states() const override {
    std::vector<StateId> out;
    for (const auto& x : base_->states()) {
      out.push_back(x);
      if (is_max_state(x)) out.push_back(delay_state(x));
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  bool has_state(const StateId& x) const override {
    if (is_delay(x)) return is_max_state(x.suffix(1));
    return base_->has_state(x);
  }
  std::size_t num_max_actions(const StateId& x) const override { return is_delay(x) ? 1 : base_->num_max_actions(x); }
  std::size_t num_min_actions(const StateId& x) const override { return is_delay(x) ? 2 : base_->num_min_actions(x); }
  bool is_sink(const StateId& x) const override { return !is_delay(x) && base_->is_sink(x); }
  bool is_target(const StateId& x) const override { return !is_delay(x) && base_->is_target(x); }
  std::string state_name(const StateId& x) const override {
    return is_delay(x) ? "wait(" + base_->state_name(x.suffix(1)) + ")" : base_->state_name(x);
  }
  std::string max_action_name(const StateId& x, ActionIndex a) const override {
    return is_delay(x) ? "0" : base_->max_action_name(x, a);
  }
  std::string min_action_name(const StateId& x, ActionIndex b) const override {
    if (is_delay(x)) return b == 0 ? "stay" : "go";
    return base_->min_action_name(x, b);
  }
  std::optional<std::string> recipe() const override { return chain_recipe(*base_, "delay"); }

 protected:
  Dist<StateId> do_kernel(const StateId& x, ActionIndex a, ActionIndex b, Precision precision) const override {
    if (is_delay(x)) return Dist<StateId>::dirac(b == 0 ? x : x.suffix(1));
    return base_->kernel(x, a, b, precision).map([this](const StateId& t) { return redirect(t); });
  }

 private:
  GamePtr base_;
};

}  // namespace

GamePtr min_delay_gadget(GamePtr game, std::size_t explore) {
  std::unordered_set<StateId> seen{game->initial_state()};
  std::deque<StateId> queue{game->initial_state()};
  while (!queue.empty() && seen.size() <= explore) {
    StateId x = queue.front();
    queue.pop_front();
    if (x.size() >= 1 && (x[0] == kDelayTag)) fail(ErrorCode::BadParams, "game already uses the delay ids");
    if (x.size() >= StateId::kMaxCoords) fail(ErrorCode::BadParams, "state ids too long for the delay gadget");
    if (controller_at(*game, x) == Controller::Both)
      fail(ErrorCode::NotTurnBased, "state " + game->state_name(x) + " is concurrent");
    for (ActionIndex a = 0; a < game->num_max_actions(x); ++a)
      for (ActionIndex b = 0; b < game->num_min_actions(x); ++b)
        for (const Dist<StateId> row_ = game->kernel(x, a, b); const auto& e : row_.entries())
          if (seen.insert(e.outcome).second) queue.push_back(e.outcome);
  }
  return std::make_shared<const DelayGame>(std::move(game));
}

// ----------------------------------------------------------------- truncate

Truncation truncate(const Game& game, std::size_t n) {
  if (n < 1) fail(ErrorCode::BadParams, "truncation needs n >= 1");
  std::set<StateId> pending{game.initial_state()};
  std::unordered_set<StateId> discovered{game.initial_state()};
  std::vector<StateId> included;
  std::size_t count = 0;
  auto include = [&](const StateId& x) {
    included.push_back(x);
    for (ActionIndex a = 0; a < game.num_max_actions(x); ++a)
      for (ActionIndex b = 0; b < game.num_min_actions(x); ++b)
        for (const Dist<StateId> row_ = game.kernel(x, a, b); const auto& e : row_.entries())
          if (discovered.insert(e.outcome).second) pending.insert(e.outcome);
  };
  while (!pending.empty() && count < n) {
    StateId x = *pending.begin();
    pending.erase(pending.begin());
    include(x);
    if (x != bot_state()) ++count;
  }
  if (pending.count(bot_state())) {
    pending.erase(bot_state());
    include(bot_state());
  }
  Truncation out;
  out.frontier.assign(pending.begin(), pending.end());
  GameBuilder b(game.name() + "|" + std::to_string(n));
  auto display = [&](const StateId& x) {
    std::string nm = game.state_name(x);
    return nm == x.to_string() ? std::string() : nm;
  };
  for (const auto& x : included) b.add_state(display(x), x);
  for (const auto& x : out.frontier) b.add_state(display(x).empty() ? std::string() : display(x) + "*", x);
  for (const auto& x : included) {
    if (x != bot_state()) out.interior.push_back(x);
    std::vector<std::string> am, bm;
    for (ActionIndex a = 0; a < game.num_max_actions(x); ++a) am.push_back(game.max_action_name(x, a));
    for (ActionIndex c = 0; c < game.num_min_actions(x); ++c) bm.push_back(game.min_action_name(x, c));
    b.set_actions(x, am, bm);
    if (game.is_target(x)) b.set_target(x);
    if (game.is_sink(x)) {
      b.set_sink(x);
      continue;
    }
    for (ActionIndex a = 0; a < am.size(); ++a)
      for (ActionIndex c = 0; c < bm.size(); ++c) b.set_row(x, a, c, game.kernel(x, a, c));
  }
  for (const auto& x : out.frontier) b.set_sink(x);
  b.set_initial(game.initial_state());
  std::sort(out.interior.begin(), out.interior.end());
  out.game = b.build();
  return out;
}

// ---------------------------------------------------------------- by name

GamePtr apply_transform(GamePtr game, std::string_view name, const Params& p) {
  auto state_param = [&](const char* key) {
    std::string text = p.get_string(key);
    if (auto s = game->find_state(text)) return *s;
    fail(ErrorCode::BadParams, "unknown state '" + text + "'");
  };
  if (name == "leaky") {
    p.require_only({"grid", "max_exponent"});
    if (p.has("grid")) return leaky(game, LeakGrid(p.get_rational_list("grid")));
    return leaky(game, LeakGrid::dyadic(static_cast<int>(p.get_int("max_exponent", 40))));
  }
  if (name == "unfold") {
    p.require_only({});
    return acyclic_unfold(game);
  }
  if (name == "fix_action") {
    p.require_only({"state", "alpha"});
    StateId s = state_param("state");
    std::vector<std::pair<ActionIndex, Rational>> entries;
    std::string text = p.get_string("alpha");
    std::size_t start = 0;
    while (start < text.size()) {
      auto comma = text.find(',', start);
      std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      auto colon = item.find(':');
      if (colon == std::string::npos) fail(ErrorCode::BadParams, "alpha entries read action:prob");
      entries.emplace_back(static_cast<ActionIndex>(std::stoul(item.substr(0, colon))), parse_rational(item.substr(colon + 1)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return fix_action(game, s, Dist<ActionIndex>::exact(std::move(entries)));
  }
  if (name == "ladder") {
    p.require_only({"state"});
    return ladder_reduce(game, state_param("state"));
  }
  if (name == "delay") {
    p.require_only({"explore"});
    return min_delay_gadget(game, static_cast<std::size_t>(p.get_int("explore", 10000)));
  }
  if (name == "truncate") {
    p.require_only({"n"});
    return truncate(*game, static_cast<std::size_t>(p.get_int("n"))).game;
  }
  fail(ErrorCode::UnknownName, "no transform named '" + std::string(name) + "'");
}

}  // namespace csg
