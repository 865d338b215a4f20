#include "csg/synthesis.hpp"

#include <algorithm>
#include <deque>
#include <unordered_set>

#include "csg/best_response.hpp"
#include "csg/error.hpp"
#include "csg/matrix_game.hpp"

namespace csg {

Dist<ActionIndex> local_optimal_action(const ExplicitGame& g, std::uint32_t i, const std::vector<double>& v) {
  if (g.states[i].na == 1) return Dist<ActionIndex>::dirac(0);
  const MatrixSolution<double> sol = solve_matrix_game(local_matrix(g, i, v));
  double total = 0.0;
  for (double p : sol.x)
    if (p > 1e-14) total += p;
  std::vector<std::pair<ActionIndex, double>> entries;
  for (std::size_t a = 0; a < sol.x.size(); ++a)
    if (sol.x[a] > 1e-14) entries.emplace_back(static_cast<ActionIndex>(a), sol.x[a] / total);
  if (entries.size() == 1) return Dist<ActionIndex>::dirac(entries[0].first);
  return Dist<ActionIndex>::approx(std::move(entries), 1e-9);
}

std::shared_ptr<MemorylessMachine> memoryless_from_values(const Game& game, const ValueVector& values) {
  const ExplicitGame g = ExplicitGame::compile(game, false);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = values.at(g.ids[i]);
  std::unordered_map<StateId, Dist<ActionIndex>> table;
  for (std::uint32_t i = 0; i < g.size(); ++i) table.emplace(g.ids[i], local_optimal_action(g, i, v));
  return std::make_shared<MemorylessMachine>("locally_optimal(" + values.objective + ")", std::move(table));
}

namespace {

std::vector<StateId> reachable_under(const Game& game, const MemorylessMachine& sigma, const std::vector<StateId>& from,
                                     const StateSet& stop) {
  std::unordered_set<StateId> seen(from.begin(), from.end());
  std::deque<StateId> queue(from.begin(), from.end());
  while (!queue.empty()) {
    const StateId s = queue.front();
    queue.pop_front();
    if (stop.contains(s)) continue;
    const Dist<ActionIndex> alpha = sigma.act(Mode{}, s, game.num_max_actions(s));
    for (const auto& e : alpha.entries())
      for (ActionIndex b = 0; b < game.num_min_actions(s); ++b)
        for (const Dist<StateId> row_ = game.kernel(s, e.outcome, b); const auto& x : row_.entries())
          if (seen.insert(x.outcome).second) queue.push_back(x.outcome);
  }
  std::vector<StateId> out(seen.begin(), seen.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

ReachSupport memoryless_reach_with_support(const Game& game, const std::vector<StateId>& s0, const StateSet& target,
                                           double eps, std::size_t max_iters) {
  if (!(eps > 0.0 && eps < 1.0)) fail(ErrorCode::BadEpsilon, "epsilon must lie in (0,1)");
  ReachSupport out;
  out.values = reach_value_iteration(game, target, max_iters, 1e-12);
  out.note = "finite game: the guarantee is checked on the finite support L only";
  for (std::size_t k = 1;; k = std::min(2 * k, max_iters)) {
    const ValueVector vk = reach_value_iteration(game, target, k, 0.0);
    auto sigma = memoryless_from_values(game, vk);
    std::vector<StateId> L;
    for (const auto& s : reachable_under(game, *sigma, s0, target))
      if (!target.contains(s) && out.values.at(s) > 1e-12) L.push_back(s);
    const StateSet in_l = StateSet::of(L, "L");
    std::vector<double> guarantee;
    bool ok = true;
    for (const auto& s : s0) {
      double g;
      if (target.contains(s))
        g = 1.0;
      else if (out.values.at(s) <= 1e-12)
        g = 0.0;
      else {
        BestResponseOptions opt;
        opt.start = s;
        g = best_response_min(game, sigma, Objective::reach_constrained(in_l, target), opt).value;
      }
      guarantee.push_back(g);
      ok = ok && g >= out.values.at(s) - eps - 1e-9;
    }
    out.sigma0 = sigma;
    out.L = std::move(L);
    out.iterate = k;
    out.guarantee = std::move(guarantee);
    out.verified = ok;
    if (ok || k >= max_iters) break;
  }
  return out;
}

namespace {

std::vector<double> eval(const VectorMap& f, const std::vector<double>& y) {
  std::vector<double> fy = f(y);
  if (fy.size() != y.size()) fail(ErrorCode::BadParams, "f changed the dimension");
  return fy;
}

}  // namespace

std::vector<double> technical_vector(const VectorMap& f, const std::vector<double>& x, double step_shrink,
                                     std::size_t max_rounds) {
  for (double xi : x)
    if (!(xi > 0.0 && xi < 1.0)) fail(ErrorCode::BadParams, "x must lie in (0,1)^n");
  if (!(step_shrink > 0.0 && step_shrink < 1.0)) fail(ErrorCode::BadParams, "step_shrink must lie in (0,1)");
  const std::size_t n = x.size();
  std::vector<double> y = x;
  std::vector<double> fy = eval(f, y);
  for (std::size_t m = 0; m <= n; ++m) {
    bool fresh = false;
    for (std::size_t i = 0; i < n; ++i)
      if (fy[i] > y[i] && y[i] == x[i]) fresh = true;
    if (!fresh) return y;
    std::vector<char> up(n);
    for (std::size_t i = 0; i < n; ++i) up[i] = fy[i] > y[i];
    double t = 0.5;
    bool done = false;
    for (std::size_t round = 0; round < max_rounds && !done; ++round, t *= step_shrink) {
      std::vector<double> cand = y;
      for (std::size_t i = 0; i < n; ++i)
        if (up[i]) cand[i] = y[i] + t * (fy[i] - y[i]);
      const std::vector<double> fc = eval(f, cand);
      done = true;
      for (std::size_t i = 0; i < n; ++i)
        if (up[i] && !(fc[i] > cand[i] && cand[i] > y[i] && cand[i] < 1.0)) done = false;
      if (done) {
        y = std::move(cand);
        fy = fc;
      }
    }
    if (!done) fail(ErrorCode::NoProgress, "line search could not keep f(y)_i > y_i");
  }
  fail(ErrorCode::NoProgress, "raised sets did not stabilize");
}

bool technical_postcondition(const VectorMap& f, const std::vector<double>& x, const std::vector<double>& y,
                             double tol) {
  if (x.size() != y.size()) return false;
  const std::vector<double> fy = eval(f, y);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0 && y[i] < 1.0)) return false;
    if (fy[i] > y[i] && !(y[i] > x[i])) return false;
    if (fy[i] <= y[i] && std::abs(y[i] - x[i]) > tol) return false;
  }
  return true;
}

}  // namespace csg
