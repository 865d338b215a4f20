#include "csg/explicit_game.hpp"

#include "csg/error.hpp"

namespace csg {

ExplicitGame ExplicitGame::compile(const Game& game, bool exact) {
  if (!game.is_finite()) fail(ErrorCode::NotFinite, "game '" + game.name() + "' is not finite");
  ExplicitGame g;
  g.exact = exact;
  g.ids = game.states();
  for (std::uint32_t i = 0; i < g.ids.size(); ++i) g.index.emplace(g.ids[i], i);
  g.states.resize(g.ids.size());
  for (std::uint32_t i = 0; i < g.ids.size(); ++i) {
    const StateId& s = g.ids[i];
    State& st = g.states[i];
    st.na = static_cast<std::uint32_t>(game.num_max_actions(s));
    st.nb = static_cast<std::uint32_t>(game.num_min_actions(s));
    st.rows.resize(std::size_t(st.na) * st.nb);
    if (exact) st.exact_rows.resize(st.rows.size());
    for (ActionIndex a = 0; a < st.na; ++a) {
      for (ActionIndex b = 0; b < st.nb; ++b) {
        Dist<StateId> row = game.kernel(s, a, b, exact ? Precision::Exact : Precision::Float);
        auto& out = st.rows[std::size_t(a) * st.nb + b];
        for (std::size_t k = 0; k < row.size(); ++k) {
          auto it = g.index.find(row.outcome(k));
          if (it == g.index.end())
            fail(ErrorCode::InvariantViolated, "successor " + row.outcome(k).to_string() + " is not enumerated");
          out.push_back({it->second, row.prob(k)});
          if (exact) st.exact_rows[std::size_t(a) * st.nb + b].push_back({it->second, row.exact_prob(k)});
        }
      }
    }
  }
  g.initial = g.at(game.initial_state());
  return g;
}

std::uint32_t ExplicitGame::at(const StateId& s) const {
  auto it = index.find(s);
  if (it == index.end()) fail(ErrorCode::BadParams, "state " + s.to_string() + " not in the game");
  return it->second;
}

std::vector<char> ExplicitGame::mask(const StateSet& set) const {
  std::vector<char> m(ids.size(), 0);
  for (std::size_t i = 0; i < ids.size(); ++i) m[i] = set.contains(ids[i]) ? 1 : 0;
  return m;
}

}  // namespace csg
