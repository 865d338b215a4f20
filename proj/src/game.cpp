#include "csg/game.hpp"

#include <algorithm>

#include "csg/error.hpp"

namespace csg {

std::vector<StateId> Game::states() const {
  fail(ErrorCode::NotFinite, "game '" + name() + "' has no finite state enumeration");
}

Dist<StateId> Game::kernel(const StateId& s, ActionIndex a, ActionIndex b, Precision precision) const {
  if (!has_state(s)) fail(ErrorCode::BadParams, "unknown state " + s.to_string() + " in " + name());
  if (a >= num_max_actions(s))
    fail(ErrorCode::IllegalAction, "Max action " + std::to_string(a) + " not available at " + state_name(s));
  if (b >= num_min_actions(s))
    fail(ErrorCode::IllegalAction, "Min action " + std::to_string(b) + " not available at " + state_name(s));
  return do_kernel(s, a, b, precision);
}

std::optional<StateId> Game::find_state(std::string_view name) const {
  if (!name.empty() && name.front() == '[') {
    StateId s = StateId::parse(name);
    if (has_state(s)) return s;
  }
  return std::nullopt;
}

StateId step(const Game& game, const StateId& s, ActionIndex a, ActionIndex b, RngStream& rng) {
  Dist<StateId> row = game.kernel(s, a, b);
  return row.sample(rng.uniform());
}

Controller controller_at(const Game& game, const StateId& s) {
  const std::size_t na = game.num_max_actions(s), nb = game.num_min_actions(s);
  std::vector<Dist<StateId>> rows;
  rows.reserve(na * nb);
  for (ActionIndex a = 0; a < na; ++a)
    for (ActionIndex b = 0; b < nb; ++b) rows.push_back(game.kernel(s, a, b));
  auto row = [&](std::size_t a, std::size_t b) -> const Dist<StateId>& { return rows[a * nb + b]; };
  bool max_only = true, min_only = true;
  // Max alone controls: every column equal to the first column.
  for (std::size_t a = 0; a < na && max_only; ++a)
    for (std::size_t b = 1; b < nb; ++b)
      if (!(row(a, b) == row(a, 0))) {
        max_only = false;
        break;
      }
  for (std::size_t b = 0; b < nb && min_only; ++b)
    for (std::size_t a = 1; a < na; ++a)
      if (!(row(a, b) == row(0, b))) {
        min_only = false;
        break;
      }
  if (max_only && min_only) return Controller::Nobody;
  if (max_only) return Controller::Max;
  if (min_only) return Controller::Min;
  return Controller::Both;
}

bool check_turn_based(const Game& game, std::span<const StateId> states) {
  return std::all_of(states.begin(), states.end(),
                     [&](const StateId& s) { return controller_at(game, s) != Controller::Both; });
}

// ---------------------------------------------------------------- TableGame

TableGame::TableGame(std::string name, std::vector<State> states, StateId initial)
    : name_(std::move(name)), states_(std::move(states)), initial_(initial) {
  std::sort(states_.begin(), states_.end(), [](const State& x, const State& y) { return x.id < y.id; });
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (!index_.emplace(states_[i].id, i).second)
      fail(ErrorCode::BadParams, "duplicate state id " + states_[i].id.to_string());
  }
  if (!index_.count(initial_)) fail(ErrorCode::BadParams, "initial state is not a state of " + name_);
  for (const auto& st : states_) {
    if (st.max_actions.empty() || st.min_actions.empty())
      fail(ErrorCode::BadParams, "state " + st.name + " has an empty action set");
    if (st.rows.size() != st.max_actions.size() * st.min_actions.size())
      fail(ErrorCode::BadParams, "state " + st.name + " has a wrong number of kernel rows");
    for (const auto& r : st.rows) {
      for (const auto& e : r.entries())
        if (!index_.count(e.outcome))
          fail(ErrorCode::BadParams, "state " + st.name + " has a successor outside the game: " + e.outcome.to_string());
      if (st.sink && !(r.is_dirac() && r.outcome(0) == st.id))
        fail(ErrorCode::BadParams, "sink " + st.name + " must loop on itself");
    }
  }
}

std::vector<StateId> TableGame::states() const {
  std::vector<StateId> out;
  out.reserve(states_.size());
  for (const auto& st : states_) out.push_back(st.id);
  return out;
}

const TableGame::State& TableGame::at(const StateId& s) const {
  auto it = index_.find(s);
  if (it == index_.end()) fail(ErrorCode::BadParams, "unknown state " + s.to_string() + " in " + name_);
  return states_[it->second];
}

std::string TableGame::state_name(const StateId& s) const {
  auto it = index_.find(s);
  if (it == index_.end()) return s.to_string();
  const auto& n = states_[it->second].name;
  return n.empty() ? s.to_string() : n;
}

std::optional<StateId> TableGame::find_state(std::string_view name) const {
  for (const auto& st : states_)
    if (st.name == name) return st.id;
  return Game::find_state(name);
}

Dist<StateId> TableGame::do_kernel(const StateId& s, ActionIndex a, ActionIndex b, Precision precision) const {
  const State& st = at(s);
  const auto& row = st.rows[a * st.min_actions.size() + b];
  if (precision == Precision::Exact && !row.has_exact())
    fail(ErrorCode::BadParams, "row at " + state_name(s) + " has only float weights");
  return row;
}

// -------------------------------------------------------------- GameBuilder

StateId GameBuilder::add_state(std::string name, std::optional<StateId> id) {
  StateId sid = id ? *id : StateId{static_cast<std::int64_t>(states_.size())};
  for (const auto& p : states_) {
    if (p.state.id == sid) fail(ErrorCode::BadParams, "duplicate state id " + sid.to_string());
    if (!name.empty() && p.state.name == name) fail(ErrorCode::BadParams, "duplicate state name " + name);
  }
  Pending p;
  p.state.id = sid;
  p.state.name = std::move(name);
  p.state.max_actions = {"0"};
  p.state.min_actions = {"0"};
  states_.push_back(std::move(p));
  return sid;
}

GameBuilder::Pending& GameBuilder::pending(const StateId& s) {
  for (auto& p : states_)
    if (p.state.id == s) return p;
  fail(ErrorCode::BadParams, "builder has no state " + s.to_string());
}

void GameBuilder::set_actions(const StateId& s, std::vector<std::string> max_actions, std::vector<std::string> min_actions) {
  if (max_actions.empty() || min_actions.empty()) fail(ErrorCode::BadParams, "action sets must be nonempty");
  auto& p = pending(s);
  p.state.max_actions = std::move(max_actions);
  p.state.min_actions = std::move(min_actions);
}

void GameBuilder::set_row(const StateId& s, ActionIndex a, ActionIndex b, Dist<StateId> row) {
  auto& p = pending(s);
  if (a >= p.state.max_actions.size() || b >= p.state.min_actions.size())
    fail(ErrorCode::IllegalAction, "row for unavailable action pair at " + s.to_string());
  p.rows.insert_or_assign({a, b}, std::move(row));
}

void GameBuilder::set_uncontrolled(const StateId& s, Dist<StateId> row) { pending(s).uncontrolled = std::move(row); }

void GameBuilder::set_sink(const StateId& s) {
  auto& p = pending(s);
  p.state.sink = true;
  p.uncontrolled = Dist<StateId>::dirac(s);
}

void GameBuilder::set_target(const StateId& s, bool target) { pending(s).state.target = target; }

StateId GameBuilder::id_of(std::string_view name) const {
  for (const auto& p : states_)
    if (p.state.name == name) return p.state.id;
  fail(ErrorCode::UnknownName, "no state named '" + std::string(name) + "'");
}

std::shared_ptr<const TableGame> GameBuilder::build() const {
  if (states_.empty()) fail(ErrorCode::BadParams, "game has no states");
  std::vector<TableGame::State> out;
  for (const auto& p : states_) {
    TableGame::State st = p.state;
    const std::size_t na = st.max_actions.size(), nb = st.min_actions.size();
    st.rows.clear();
    for (ActionIndex a = 0; a < na; ++a) {
      for (ActionIndex b = 0; b < nb; ++b) {
        auto it = p.rows.find({a, b});
        if (it != p.rows.end()) {
          st.rows.push_back(it->second);
        } else if (p.uncontrolled) {
          st.rows.push_back(*p.uncontrolled);
        } else {
          fail(ErrorCode::BadParams, "missing kernel row (" + std::to_string(a) + "," + std::to_string(b) + ") at " +
                                         (st.name.empty() ? st.id.to_string() : st.name));
        }
      }
    }
    out.push_back(std::move(st));
  }
  return std::make_shared<const TableGame>(name_, std::move(out), initial_ ? *initial_ : states_.front().state.id);
}

std::shared_ptr<const TableGame> materialize(const Game& game) {
  if (auto t = dynamic_cast<const TableGame*>(&game)) return std::make_shared<const TableGame>(*t);
  std::vector<TableGame::State> out;
  for (const StateId& s : game.states()) {
    TableGame::State st;
    st.id = s;
    st.name = game.state_name(s);
    if (st.name == s.to_string()) st.name.clear();
    st.sink = game.is_sink(s);
    st.target = game.is_target(s);
    const std::size_t na = game.num_max_actions(s), nb = game.num_min_actions(s);
    for (ActionIndex a = 0; a < na; ++a) st.max_actions.push_back(game.max_action_name(s, a));
    for (ActionIndex b = 0; b < nb; ++b) st.min_actions.push_back(game.min_action_name(s, b));
    for (ActionIndex a = 0; a < na; ++a)
      for (ActionIndex b = 0; b < nb; ++b) st.rows.push_back(game.kernel(s, a, b));
    out.push_back(std::move(st));
  }
  return std::make_shared<const TableGame>(game.name(), std::move(out), game.initial_state());
}

}  // namespace csg
