#include "csg/fixing_sweep.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "csg/error.hpp"
#include "csg/synthesis.hpp"

namespace csg {

double FixingSweepReport::r_at(std::size_t i) const { return std::pow(r, std::ldexp(1.0, -static_cast<int>(i))); }

double FixingSweepReport::value(std::size_t i, const StateId& s) const {
  auto it = std::lower_bound(states.begin(), states.end(), s);
  if (it == states.end() || *it != s) fail(ErrorCode::BadParams, "state " + s.to_string() + " not in the truncation");
  const std::size_t k = static_cast<std::size_t>(it - states.begin());
  if (i == 0) return v0[k];
  return steps.at(std::min(i, steps.size()) - 1).values[k];
}

std::size_t FixingSweepReport::rank_of(const StateId& s) const {
  auto it = std::find(order.begin(), order.end(), s);
  return it == order.end() ? 0 : static_cast<std::size_t>(it - order.begin()) + 1;
}

namespace {

// Replaces Max's choice at state i by the single mixed action alpha.
void fix_explicit(ExplicitGame& g, std::uint32_t i, const Dist<ActionIndex>& alpha) {
  auto& st = g.states[i];
  std::vector<std::vector<ExplicitGame::Succ>> rows(st.nb);
  for (std::uint32_t b = 0; b < st.nb; ++b) {
    std::vector<ExplicitGame::Succ> row;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
      for (const auto& e : st.rows[std::size_t(alpha.outcome(k)) * st.nb + b]) {
        auto it = std::find_if(row.begin(), row.end(), [&](const auto& x) { return x.to == e.to; });
        if (it == row.end())
          row.push_back({e.to, alpha.prob(k) * e.p});
        else
          it->p += alpha.prob(k) * e.p;
      }
    }
    rows[b] = std::move(row);
  }
  st.na = 1;
  st.rows = std::move(rows);
  st.exact_rows.clear();
}

}  // namespace

FixingSweepResult fixing_sweep(const Truncation& truncation, double r,
                               const std::function<double(const StateId&)>& frontier_value,
                               const ViOptions& options) {
  if (!(r > 0.0 && r < 1.0)) fail(ErrorCode::BadParams, "r must lie in (0,1)");
  if (!truncation.game) fail(ErrorCode::BadParams, "empty truncation");
  const StateId start = truncation.game->initial_state();
  if (truncation.interior.empty() ||
      !std::binary_search(truncation.interior.begin(), truncation.interior.end(), start))
    fail(ErrorCode::TruncationTooSmall, "the start state lies outside the interior of the truncation");

  ExplicitGame g = ExplicitGame::compile(*truncation.game, false);
  g.exact = false;
  std::vector<std::optional<double>> pinned(g.size());
  for (const auto& f : truncation.frontier) {
    const double v = frontier_value(f);
    if (!(v >= 0.0 && v <= 1.0)) fail(ErrorCode::BadParams, "frontier values must lie in [0,1]");
    pinned[g.at(f)] = v;
  }
  if (g.index.count(bot_state())) pinned[g.at(bot_state())] = 0.0;

  FixingSweepResult out;
  FixingSweepReport& rep = out.report;
  rep.r = r;
  rep.states = g.ids;
  rep.order = truncation.interior;
  ValueVector prev = pinned_value_iteration(g, pinned, options, "frontier-weighted reach");
  rep.v0 = prev.values;

  std::unordered_map<StateId, Dist<ActionIndex>> table;
  for (std::size_t i = 1; i <= rep.order.size(); ++i) {
    const StateId& s = rep.order[i - 1];
    const std::uint32_t idx = g.at(s);
    FixingStep step;
    step.state = s;
    step.alpha = local_optimal_action(g, idx, prev.values);
    fix_explicit(g, idx, step.alpha);
    ValueVector cur = pinned_value_iteration(g, pinned, options, "frontier-weighted reach");
    step.iterations = cur.iterations;
    step.factor = std::pow(r, std::ldexp(1.0, -static_cast<int>(i)));
    for (std::size_t k = 0; k < g.size(); ++k)
      if (cur.values[k] < step.factor * prev.values[k] - 1e-12) step.violations.push_back(g.ids[k]);
    rep.violations += step.violations.size();
    step.values = cur.values;
    table.emplace(s, step.alpha);
    rep.steps.push_back(std::move(step));
    prev = std::move(cur);
  }
  out.sigma = std::make_shared<MemorylessMachine>("fixing_sweep(r=" + std::to_string(r) + ")", std::move(table));
  return out;
}

}  // namespace csg
