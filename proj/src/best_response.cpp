#include "csg/best_response.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <unordered_map>

#include "csg/error.hpp"

namespace csg {

PlayMonitor phase_visit_monitor(const OneBitSchedule& schedule, std::int64_t phases, StateId s) {
  if (phases < 1) fail(ErrorCode::BadParams, "phase monitor needs at least one phase");
  PlayMonitor m;
  m.label = "visit " + s.to_string() + " in each of phases 1.." + std::to_string(phases);
  m.states = 2;
  m.initial = 0;
  m.next = [schedule, phases, s](int q, std::int64_t step, const StateId& x) {
    const std::int64_t phase = schedule.phase_of(step);
    if (step > 0 && schedule.start(phase) == step) {
      if (phase - 1 <= phases && q != 1) return -1;
      q = 0;
    }
    if (phase <= phases && x == s) q = 1;
    return q;
  };
  return m;
}

double BestResponse::value_at(const StateId& s, LocalMode mode) const {
  for (const auto& v : values)
    if (v.state == s && v.mode == mode) return v.value;
  fail(ErrorCode::BadParams, "no product node (" + s.to_string() + ", " + std::to_string(mode) + ")");
}

namespace {

struct Key {
  StateId s;
  LocalMode m = 0;
  int q = 0;
  friend bool operator==(const Key&, const Key&) = default;
};

struct KeyHash {
  std::size_t operator()(const Key& k) const noexcept {
    std::size_t h = k.s.hash();
    h ^= std::hash<std::int64_t>{}(k.m) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= std::hash<int>{}(k.q) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

struct Succ {
  StateId next;
  LocalMode mode;
  double p;
};

// Successors of (s, m) at `step` when Min plays b, with σ's mode update.
std::vector<Succ> expand(const Game& game, const StrategyMachine& sigma, const StateId& s, LocalMode m,
                         std::int64_t step, ActionIndex b) {
  const Mode mode{step, m};
  const Dist<ActionIndex> alpha = checked_act(sigma, mode, s, game.num_max_actions(s));
  std::vector<Succ> out;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const ActionIndex a = alpha.outcome(i);
    const Dist<StateId> row = game.kernel(s, a, b);
    for (std::size_t k = 0; k < row.size(); ++k) {
      const Dist<LocalMode> up = sigma.update(mode, s, a, b, row.outcome(k));
      if (!up.is_dirac()) fail(ErrorCode::PrivateMemory, "Max memory update is not Dirac at " + s.to_string());
      out.push_back({row.outcome(k), up.outcome(0), alpha.prob(i) * row.prob(k)});
    }
  }
  return out;
}

// ------------------------------------------------------------ Min machines

class ProductTracker final : public StrategyMachine {
 public:
  ProductTracker(StrategyPtr sigma, std::unordered_map<Key, ActionIndex, KeyHash> choice, std::string label)
      : sigma_(std::move(sigma)), choice_(std::move(choice)), label_(std::move(label)) {}

  std::string describe() const override { return label_; }
  bool uses_step_counter() const override { return sigma_->uses_step_counter(); }
  std::optional<std::int64_t> num_local_modes() const override { return sigma_->num_local_modes(); }
  bool dirac_updates() const override { return true; }
  LocalMode initial_mode() const override { return sigma_->initial_mode(); }
  Dist<ActionIndex> act(const Mode& m, const StateId& s, std::size_t) const override {
    auto it = choice_.find(Key{s, m.local, 0});
    return Dist<ActionIndex>::dirac(it == choice_.end() ? 0 : it->second);
  }
  Dist<LocalMode> update(const Mode& m, const StateId& s, ActionIndex a, ActionIndex b,
                         const StateId& next) const override {
    const Dist<LocalMode> up = sigma_->update(m, s, a, b, next);
    return Dist<LocalMode>::dirac(up.outcome(0));
  }

 private:
  StrategyPtr sigma_;
  std::unordered_map<Key, ActionIndex, KeyHash> choice_;
  std::string label_;
};

class HorizonTracker final : public StrategyMachine {
 public:
  HorizonTracker(StrategyPtr sigma, std::function<int(int, std::int64_t, const StateId&)> next, int q_states,
                 LocalMode initial, std::vector<std::unordered_map<Key, ActionIndex, KeyHash>> choice,
                 std::string label)
      : sigma_(std::move(sigma)),
        next_(std::move(next)),
        q_states_(q_states),
        initial_(initial),
        choice_(std::move(choice)),
        label_(std::move(label)) {}

  std::string describe() const override { return label_; }
  bool uses_step_counter() const override { return true; }
  std::optional<std::int64_t> num_local_modes() const override {
    auto k = sigma_->num_local_modes();
    if (!k) return std::nullopt;
    return *k * q_states_;
  }
  bool dirac_updates() const override { return true; }
  LocalMode initial_mode() const override { return initial_; }
  Dist<ActionIndex> act(const Mode& m, const StateId& s, std::size_t) const override {
    if (m.step < 0 || static_cast<std::size_t>(m.step) >= choice_.size()) return Dist<ActionIndex>::dirac(0);
    const auto& layer = choice_[static_cast<std::size_t>(m.step)];
    auto it = layer.find(Key{s, m.local / q_states_, static_cast<int>(m.local % q_states_)});
    return Dist<ActionIndex>::dirac(it == layer.end() ? 0 : it->second);
  }
  Dist<LocalMode> update(const Mode& m, const StateId& s, ActionIndex a, ActionIndex b,
                         const StateId& next) const override {
    const Mode sm{m.step, m.local / q_states_};
    const LocalMode sigma_next = sigma_->update(sm, s, a, b, next).outcome(0);
    const int q = static_cast<int>(m.local % q_states_);
    const int q2 = next_(q, m.step + 1, next);
    return Dist<LocalMode>::dirac(sigma_next * q_states_ + std::max(q2, 0));
  }

 private:
  StrategyPtr sigma_;
  std::function<int(int, std::int64_t, const StateId&)> next_;
  int q_states_;
  LocalMode initial_;
  std::vector<std::unordered_map<Key, ActionIndex, KeyHash>> choice_;
  std::string label_;
};

// --------------------------------------------------------- finite horizon

constexpr int kWon = -2;
constexpr int kLost = -1;

BestResponse finite_horizon(const Game& game, StrategyPtr sigma, const Objective& objective,
                            const BestResponseOptions& opt) {
  const std::int64_t H = *opt.horizon;
  if (H < 0) fail(ErrorCode::BadParams, "horizon must be nonnegative");
  std::function<int(int, std::int64_t, const StateId&)> next;
  std::function<double(int, const StateId&, LocalMode)> at_horizon;
  std::string label;
  int q_states = 1;
  int q0 = 0;
  if (opt.monitor) {
    next = opt.monitor->next;
    q_states = opt.monitor->states;
    q0 = opt.monitor->initial;
    label = opt.monitor->label;
    at_horizon = [](int q, const StateId&, LocalMode) { return q >= 0 ? 1.0 : 0.0; };
  } else {
    const StateSet target = objective.target;
    const StateSet constraint = objective.constraint;
    label = objective.describe();
    bool safety = false;
    switch (objective.kind) {
      case Objective::Kind::Reach:
        next = [target](int q, std::int64_t, const StateId& s) { return q == 0 && target.contains(s) ? kWon : q; };
        break;
      case Objective::Kind::ReachConstrained:
        next = [target, constraint](int q, std::int64_t, const StateId& s) {
          if (q != 0) return q;
          if (target.contains(s)) return kWon;
          return constraint.contains(s) ? 0 : kLost;
        };
        break;
      case Objective::Kind::Safety:
      case Objective::Kind::AvoidBot:
        safety = true;
        next = [target](int q, std::int64_t, const StateId& s) { return q == 0 && target.contains(s) ? kLost : q; };
        break;
      default:
        fail(ErrorCode::BadParams, objective.describe() + " is not decided by a finite prefix");
    }
    auto terminal = opt.terminal;
    at_horizon = [terminal, safety](int q, const StateId& s, LocalMode m) {
      if (q == kWon) return 1.0;
      if (q == kLost) return 0.0;
      if (terminal) return terminal(s, m);
      return safety ? 1.0 : 0.0;
    };
  }
  auto decided_value = [](int q) { return q == kWon ? 1.0 : 0.0; };
  auto is_open = [&](int q) {
    if (opt.monitor) return q >= 0;
    return q == 0;
  };

  const StateId s0 = opt.start.value_or(game.initial_state());
  const LocalMode m0 = sigma->initial_mode();
  const int q_start = next(q0, 0, s0);

  // Forward pass: the open nodes of every layer.
  std::vector<std::vector<Key>> layers(static_cast<std::size_t>(H) + 1);
  std::vector<std::unordered_map<Key, std::uint32_t, KeyHash>> index(layers.size());
  auto add = [&](std::size_t n, const Key& k) {
    auto [it, fresh] = index[n].emplace(k, static_cast<std::uint32_t>(layers[n].size()));
    if (fresh) {
      layers[n].push_back(k);
      if (layers[n].size() > opt.max_nodes) fail(ErrorCode::BadParams, "product layer exceeds max_nodes");
    }
    return it->second;
  };
  std::size_t total = 0;
  if (is_open(q_start)) add(0, Key{s0, m0, q_start});
  for (std::int64_t n = 0; n < H; ++n) {
    const auto& layer = layers[static_cast<std::size_t>(n)];
    total += layer.size();
    for (std::size_t i = 0; i < layer.size(); ++i) {
      const Key k = layer[i];
      for (ActionIndex b = 0; b < game.num_min_actions(k.s); ++b)
        for (const auto& e : expand(game, *sigma, k.s, k.m, n, b)) {
          const int q2 = next(k.q, n + 1, e.next);
          if (is_open(q2)) add(static_cast<std::size_t>(n + 1), Key{e.next, e.mode, q2});
        }
    }
  }
  total += layers.back().size();

  // Backward pass.
  std::vector<double> v(layers.back().size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = at_horizon(layers.back()[i].q, layers.back()[i].s, layers.back()[i].m);
  std::vector<std::unordered_map<Key, ActionIndex, KeyHash>> choice(static_cast<std::size_t>(H));
  for (std::int64_t n = H - 1; n >= 0; --n) {
    const auto& layer = layers[static_cast<std::size_t>(n)];
    const auto& idx = index[static_cast<std::size_t>(n + 1)];
    std::vector<double> cur(layer.size());
    for (std::size_t i = 0; i < layer.size(); ++i) {
      const Key& k = layer[i];
      double best = std::numeric_limits<double>::infinity();
      ActionIndex arg = 0;
      for (ActionIndex b = 0; b < game.num_min_actions(k.s); ++b) {
        double acc = 0.0;
        for (const auto& e : expand(game, *sigma, k.s, k.m, n, b)) {
          const int q2 = next(k.q, n + 1, e.next);
          if (is_open(q2))
            acc += e.p * v[idx.at(Key{e.next, e.mode, q2})];
          else
            acc += e.p * (opt.monitor ? 0.0 : decided_value(q2));
        }
        if (acc < best - 1e-15) {
          best = acc;
          arg = b;
        }
      }
      cur[i] = std::clamp(best, 0.0, 1.0);
      choice[static_cast<std::size_t>(n)].emplace(Key{k.s, k.m, std::max(k.q, 0)}, arg);
    }
    v = std::move(cur);
  }

  BestResponse out;
  out.method = "backward induction, horizon " + std::to_string(H);
  out.product_nodes = total;
  out.iterations = static_cast<std::size_t>(H);
  if (is_open(q_start))
    out.value = v.empty() ? 0.0 : v[0];
  else
    out.value = opt.monitor ? 0.0 : decided_value(q_start);
  const LocalMode initial = m0 * q_states + std::max(q_start, 0);
  out.pi = std::make_shared<HorizonTracker>(sigma, next, q_states, initial, std::move(choice),
                                            "best_response(" + sigma->describe() + ", " + label + ")");
  return out;
}

// ------------------------------------------------------- infinite horizon

struct ProductMdp {
  std::vector<std::pair<StateId, LocalMode>> nodes;
  std::vector<std::vector<std::vector<std::pair<std::uint32_t, double>>>> edges;  // [node][b]
};

ProductMdp explore(const Game& game, const StrategyMachine& sigma, const StateId& s0, std::size_t max_nodes) {
  ProductMdp mdp;
  std::unordered_map<Key, std::uint32_t, KeyHash> index;
  auto id = [&](const StateId& s, LocalMode m) {
    auto [it, fresh] = index.emplace(Key{s, m, 0}, static_cast<std::uint32_t>(mdp.nodes.size()));
    if (fresh) {
      mdp.nodes.emplace_back(s, m);
      if (mdp.nodes.size() > max_nodes) fail(ErrorCode::BadParams, "product MDP exceeds max_nodes");
    }
    return it->second;
  };
  id(s0, sigma.initial_mode());
  for (std::size_t i = 0; i < mdp.nodes.size(); ++i) {
    const auto [s, m] = mdp.nodes[i];
    std::vector<std::vector<std::pair<std::uint32_t, double>>> rows;
    for (ActionIndex b = 0; b < game.num_min_actions(s); ++b) {
      std::vector<std::pair<std::uint32_t, double>> row;
      for (const auto& e : expand(game, sigma, s, m, 0, b)) {
        const std::uint32_t to = id(e.next, e.mode);
        auto it = std::find_if(row.begin(), row.end(), [to](const auto& x) { return x.first == to; });
        if (it == row.end())
          row.emplace_back(to, e.p);
        else
          it->second += e.p;
      }
      rows.push_back(std::move(row));
    }
    mdp.edges.push_back(std::move(rows));
  }
  return mdp;
}

double row_value(const std::vector<std::pair<std::uint32_t, double>>& row, const std::vector<double>& v) {
  double acc = 0.0;
  for (const auto& [to, p] : row) acc += p * v[to];
  return acc;
}

struct Solved {
  std::vector<double> v;
  std::vector<ActionIndex> choice;
  std::size_t iterations = 0;
  bool converged = false;
};

// Reachability of `goal` in the Min MDP; nodes with zero[i] set are stuck at
// 0. Minimizing gives the least fixpoint and a greedy choice; maximizing
// breaks ties by progress towards the goal so that the choice attains it.
Solved reach(const ProductMdp& mdp, const std::vector<char>& goal, const std::vector<char>& zero, bool minimize,
             std::size_t max_iters, double tol) {
  const std::size_t n = mdp.nodes.size();
  Solved out;
  out.v.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (goal[i]) out.v[i] = 1.0;
  std::vector<double> nv(n);
  while (out.iterations < max_iters) {
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (goal[i] || zero[i]) {
        nv[i] = out.v[i];
        continue;
      }
      double best = minimize ? 2.0 : -1.0;
      for (const auto& row : mdp.edges[i]) {
        const double x = row_value(row, out.v);
        best = minimize ? std::min(best, x) : std::max(best, x);
      }
      nv[i] = best;
      res = std::max(res, std::abs(nv[i] - out.v[i]));
    }
    std::swap(out.v, nv);
    ++out.iterations;
    if (res < tol) {
      out.converged = true;
      break;
    }
  }
  out.choice.assign(n, 0);
  if (minimize) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = 2.0;
      for (ActionIndex b = 0; b < mdp.edges[i].size(); ++b) {
        const double x = row_value(mdp.edges[i][b], out.v);
        if (x < best - 1e-15) {
          best = x;
          out.choice[i] = b;
        }
      }
    }
    return out;
  }
  // Rank nodes by the number of optimal moves needed to reach the goal.
  const double slack = std::max(1e3 * tol, 1e-10);
  std::vector<char> ranked(goal);
  bool grew = true;
  while (grew) {
    grew = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (ranked[i] || zero[i] || out.v[i] <= slack) continue;
      for (ActionIndex b = 0; b < mdp.edges[i].size(); ++b) {
        const auto& row = mdp.edges[i][b];
        if (row_value(row, out.v) < out.v[i] - slack) continue;
        if (std::any_of(row.begin(), row.end(), [&](const auto& e) { return ranked[e.first] != 0; })) {
          out.choice[i] = b;
          ranked[i] = 2;
          break;
        }
      }
    }
    for (auto& r : ranked)
      if (r == 2) {
        r = 1;
        grew = true;
      }
  }
  return out;
}

// Nodes of maximal end components inside `allowed_nodes`, with for each such
// node one action that stays inside its component.
std::vector<int> end_components(const ProductMdp& mdp, const std::vector<char>& allowed_nodes) {
  const std::size_t n = mdp.nodes.size();
  std::vector<char> in(allowed_nodes);
  std::vector<std::vector<char>> ok(n);
  for (std::size_t i = 0; i < n; ++i) ok[i].assign(mdp.edges[i].size(), 1);
  std::vector<int> comp(n, -1);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!in[i]) continue;
      bool any = false;
      for (std::size_t b = 0; b < ok[i].size(); ++b) {
        if (ok[i][b])
          for (const auto& e : mdp.edges[i][b])
            if (!in[e.first]) {
              ok[i][b] = 0;
              changed = true;
              break;
            }
        any = any || ok[i][b];
      }
      if (!any) {
        in[i] = 0;
        changed = true;
      }
    }
    // Tarjan on the remaining graph.
    std::fill(comp.begin(), comp.end(), -1);
    std::vector<int> low(n, 0), num(n, -1);
    std::vector<char> on(n, 0);
    std::vector<std::uint32_t> stack;
    int counter = 0, ncomp = 0;
    auto succs = [&](std::uint32_t i) {
      std::vector<std::uint32_t> out;
      for (std::size_t b = 0; b < ok[i].size(); ++b)
        if (ok[i][b])
          for (const auto& e : mdp.edges[i][b]) out.push_back(e.first);
      return out;
    };
    for (std::uint32_t root = 0; root < n; ++root) {
      if (!in[root] || num[root] >= 0) continue;
      std::vector<std::pair<std::uint32_t, std::vector<std::uint32_t>>> frames;
      std::vector<std::size_t> pos;
      auto push = [&](std::uint32_t v) {
        num[v] = low[v] = counter++;
        stack.push_back(v);
        on[v] = 1;
        frames.emplace_back(v, succs(v));
        pos.push_back(0);
      };
      push(root);
      while (!frames.empty()) {
        const std::uint32_t v = frames.back().first;
        auto& next = frames.back().second;
        std::size_t& p = pos.back();
        if (p < next.size()) {
          const std::uint32_t w = next[p++];
          if (!in[w]) continue;
          if (num[w] < 0)
            push(w);
          else if (on[w])
            low[v] = std::min(low[v], num[w]);
          continue;
        }
        if (low[v] == num[v]) {
          for (;;) {
            const std::uint32_t w = stack.back();
            stack.pop_back();
            on[w] = 0;
            comp[w] = ncomp;
            if (w == v) break;
          }
          ++ncomp;
        }
        frames.pop_back();
        pos.pop_back();
        if (!frames.empty()) {
          const std::uint32_t u = frames.back().first;
          low[u] = std::min(low[u], low[v]);
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!in[i]) continue;
      for (std::size_t b = 0; b < ok[i].size(); ++b) {
        if (!ok[i][b]) continue;
        for (const auto& e : mdp.edges[i][b])
          if (comp[e.first] != comp[i]) {
            ok[i][b] = 0;
            changed = true;
            break;
          }
      }
    }
  }
  std::vector<int> stay(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (!in[i]) continue;
    for (std::size_t b = 0; b < ok[i].size(); ++b)
      if (ok[i][b]) {
        stay[i] = static_cast<int>(b);
        break;
      }
  }
  return stay;
}

BestResponse infinite_horizon(const Game& game, StrategyPtr sigma, const Objective& objective,
                              const BestResponseOptions& opt) {
  if (!sigma->num_local_modes())
    fail(ErrorCode::NotFiniteMemory, "infinite-horizon best response needs a finite-memory Max machine");
  const ProductMdp mdp = explore(game, *sigma, opt.start.value_or(game.initial_state()), opt.max_nodes);
  const std::size_t n = mdp.nodes.size();
  std::vector<char> t(n, 0), zero(n, 0);
  for (std::size_t i = 0; i < n; ++i) t[i] = objective.target.contains(mdp.nodes[i].first);

  Solved sol;
  bool complement = false;
  std::string method;
  switch (objective.kind) {
    case Objective::Kind::Reach:
      sol = reach(mdp, t, zero, true, opt.max_iters, opt.tol);
      method = "value iteration (min reach)";
      break;
    case Objective::Kind::ReachConstrained:
      for (std::size_t i = 0; i < n; ++i) zero[i] = !t[i] && !objective.constraint.contains(mdp.nodes[i].first);
      sol = reach(mdp, t, zero, true, opt.max_iters, opt.tol);
      method = "value iteration (min constrained reach)";
      break;
    case Objective::Kind::Safety:
    case Objective::Kind::AvoidBot:
      sol = reach(mdp, t, zero, false, opt.max_iters, opt.tol);
      complement = true;
      method = "value iteration (max reach of the bad set)";
      break;
    case Objective::Kind::Buchi: {
      std::vector<char> free(n);
      for (std::size_t i = 0; i < n; ++i) free[i] = !t[i];
      const std::vector<int> stay = end_components(mdp, free);
      std::vector<char> goal(n);
      for (std::size_t i = 0; i < n; ++i) goal[i] = stay[i] >= 0;
      sol = reach(mdp, goal, zero, false, opt.max_iters, opt.tol);
      for (std::size_t i = 0; i < n; ++i)
        if (stay[i] >= 0) sol.choice[i] = static_cast<ActionIndex>(stay[i]);
      complement = true;
      method = "end components + value iteration";
      break;
    }
    default:
      fail(ErrorCode::BadParams, "best_response_min does not handle " + objective.describe());
  }

  BestResponse out;
  out.method = method;
  out.product_nodes = n;
  out.iterations = sol.iterations;
  out.converged = sol.converged;
  std::unordered_map<Key, ActionIndex, KeyHash> choice;
  out.values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::clamp(complement ? 1.0 - sol.v[i] : sol.v[i], 0.0, 1.0);
    out.values.push_back({mdp.nodes[i].first, mdp.nodes[i].second, v});
    choice.emplace(Key{mdp.nodes[i].first, mdp.nodes[i].second, 0}, sol.choice[i]);
  }
  out.value = out.values[0].value;
  out.pi = std::make_shared<ProductTracker>(sigma, std::move(choice),
                                            "best_response(" + sigma->describe() + ", " + objective.describe() + ")");
  return out;
}

}  // namespace

BestResponse best_response_min(const Game& game, StrategyPtr sigma, const Objective& objective,
                               const BestResponseOptions& options) {
  if (!sigma->dirac_updates())
    fail(ErrorCode::PrivateMemory, "Max machine " + sigma->describe() + " has randomized memory updates");
  if (options.horizon) return finite_horizon(game, std::move(sigma), objective, options);
  if (options.monitor) fail(ErrorCode::HorizonRequired, "a play monitor needs a finite horizon");
  if (sigma->uses_step_counter())
    fail(ErrorCode::HorizonRequired, "Max machine " + sigma->describe() + " counts steps; give a horizon");
  return infinite_horizon(game, std::move(sigma), objective, options);
}

}  // namespace csg
