#include "csg/objective.hpp"

#include <algorithm>

namespace csg {

StateSet StateSet::of(std::vector<StateId> states, std::string label) {
  std::sort(states.begin(), states.end());
  states.erase(std::unique(states.begin(), states.end()), states.end());
  if (label.empty()) {
    label = "{";
    for (std::size_t i = 0; i < states.size(); ++i) label += (i ? "," : "") + states[i].to_string();
    label += "}";
  }
  auto shared = std::make_shared<const std::vector<StateId>>(std::move(states));
  return StateSet([shared](const StateId& s) { return std::binary_search(shared->begin(), shared->end(), s); },
                  std::move(label));
}

StateSet StateSet::targets_of(GamePtr game) {
  return StateSet([game](const StateId& s) { return game->has_state(s) && game->is_target(s); }, "T");
}

StateSet StateSet::all() {
  return StateSet([](const StateId&) { return true; }, "S");
}

StateSet set_union(StateSet a, StateSet b) {
  std::string label = a.label() + "+" + b.label();
  return StateSet([a = std::move(a), b = std::move(b)](const StateId& s) { return a.contains(s) || b.contains(s); },
                  std::move(label));
}

Objective Objective::avoid_bot() {
  return {Kind::AvoidBot, StateSet([](const StateId& s) { return s == bot_state(); }, "bot"), {}};
}

std::string Objective::describe() const {
  switch (kind) {
    case Kind::Reach: return "Reach(" + target.label() + ")";
    case Kind::ReachConstrained: return "ReachWithin(" + constraint.label() + "," + target.label() + ")";
    case Kind::Safety: return "Safety(" + target.label() + ")";
    case Kind::Buchi: return "Buchi(" + target.label() + ")";
    case Kind::Transience: return "Transience";
    case Kind::TransientBuchi: return "TransientBuchi(" + target.label() + ")";
    case Kind::AvoidBot: return "AvoidBot";
  }
  return "?";
}

std::vector<StateId> Play::states() const {
  std::vector<StateId> out{initial};
  for (const auto& st : steps) out.push_back(st.next);
  return out;
}

}  // namespace csg
