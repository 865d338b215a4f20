#include "csg/chain.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <ostream>
#include <unordered_map>

#include "csg/error.hpp"

namespace csg {

std::vector<char> ProductChain::label(const StateSet& set) const {
  std::vector<char> m(nodes.size(), 0);
  for (std::size_t i = 0; i < nodes.size(); ++i) m[i] = set.contains(nodes[i].state) ? 1 : 0;
  return m;
}

std::vector<char> ProductChain::label_state(const StateId& s) const {
  std::vector<char> m(nodes.size(), 0);
  for (std::size_t i = 0; i < nodes.size(); ++i) m[i] = nodes[i].state == s ? 1 : 0;
  return m;
}

std::string ProductChain::node_name(std::uint32_t i) const {
  const Node& n = nodes[i];
  return n.state.to_string() + "/" + std::to_string(n.max_mode) + "/" + std::to_string(n.min_mode);
}

namespace {

struct NodeKey {
  StateId s;
  LocalMode m, n;
  bool operator==(const NodeKey&) const = default;
};
struct NodeKeyHash {
  std::size_t operator()(const NodeKey& k) const noexcept {
    std::size_t h = k.s.hash();
    h ^= std::hash<std::int64_t>{}(k.m) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= std::hash<std::int64_t>{}(k.n) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

template <class D>
const Rational& exact_weight(const D& d, std::size_t i) {
  if (!d.has_exact()) fail(ErrorCode::BadParams, "exact product chain needs exact distributions");
  return d.exact_prob(i);
}

}  // namespace

ProductChain product_chain(const Game& game, const StrategyMachine& sigma, const StrategyMachine& pi, bool exact,
                           std::optional<StateId> start, std::size_t max_nodes) {
  if (!sigma.finite_memory()) fail(ErrorCode::NotFiniteMemory, "Max machine " + sigma.describe() + " is not finite-memory");
  if (!pi.finite_memory()) fail(ErrorCode::NotFiniteMemory, "Min machine " + pi.describe() + " is not finite-memory");
  ProductChain chain;
  chain.exact = exact;
  std::unordered_map<NodeKey, std::uint32_t, NodeKeyHash> index;
  std::deque<std::uint32_t> queue;
  auto intern = [&](const NodeKey& k) {
    auto [it, fresh] = index.emplace(k, static_cast<std::uint32_t>(chain.nodes.size()));
    if (fresh) {
      if (chain.nodes.size() >= max_nodes) fail(ErrorCode::BadParams, "product chain exceeds the node limit");
      chain.nodes.push_back({k.s, k.m, k.n});
      chain.rows.emplace_back();
      if (exact) chain.exact_rows.emplace_back();
      queue.push_back(it->second);
    }
    return it->second;
  };
  intern({start ? *start : game.initial_state(), sigma.initial_mode(), pi.initial_mode()});

  const Precision precision = exact ? Precision::Exact : Precision::Float;
  while (!queue.empty()) {
    const std::uint32_t i = queue.front();
    queue.pop_front();
    const StateId s = chain.nodes[i].state;
    const Mode mm{0, chain.nodes[i].max_mode}, nm{0, chain.nodes[i].min_mode};
    const Dist<ActionIndex> alpha = checked_act(sigma, mm, s, game.num_max_actions(s));
    const Dist<ActionIndex> beta = checked_act(pi, nm, s, game.num_min_actions(s));
    std::map<std::uint32_t, Rational> acc_exact;
    std::map<std::uint32_t, double> acc;
    for (std::size_t ia = 0; ia < alpha.size(); ++ia) {
      for (std::size_t ib = 0; ib < beta.size(); ++ib) {
        const ActionIndex a = alpha.outcome(ia), b = beta.outcome(ib);
        const Dist<StateId> row = game.kernel(s, a, b, precision);
        for (std::size_t is = 0; is < row.size(); ++is) {
          const StateId& next = row.outcome(is);
          const Dist<LocalMode> up_m = sigma.update(mm, s, a, b, next);
          const Dist<LocalMode> up_n = pi.update(nm, s, a, b, next);
          for (std::size_t im = 0; im < up_m.size(); ++im) {
            for (std::size_t in = 0; in < up_n.size(); ++in) {
              const std::uint32_t j = intern({next, up_m.outcome(im), up_n.outcome(in)});
              if (exact) {
                acc_exact[j] += exact_weight(alpha, ia) * exact_weight(beta, ib) * exact_weight(row, is) *
                                exact_weight(up_m, im) * exact_weight(up_n, in);
              } else {
                acc[j] += alpha.prob(ia) * beta.prob(ib) * row.prob(is) * up_m.prob(im) * up_n.prob(in);
              }
            }
          }
        }
      }
    }
    if (exact) {
      Rational total = 0;
      for (auto& [j, p] : acc_exact) {
        p.canonicalize();
        total += p;
        chain.exact_rows[i].push_back({j, p});
        chain.rows[i].push_back({j, p.get_d()});
      }
      if (total != 1) fail(ErrorCode::SumNotOne, "product row at " + chain.node_name(i) + " sums to " + to_string(total));
    } else {
      double total = 0.0;
      for (auto& [j, p] : acc) {
        total += p;
        chain.rows[i].push_back({j, p});
      }
      if (std::abs(total - 1.0) > 1e-9) fail(ErrorCode::SumNotOne, "product row at " + chain.node_name(i) + " does not sum to 1");
    }
  }
  return chain;
}

BsccDecomposition bscc_decompose(const ProductChain& chain) {
  const std::size_t n = chain.size();
  std::vector<int> idx(n, -1), low(n, 0), comp(n, -1);
  std::vector<char> on_stack(n, 0);
  std::vector<std::uint32_t> stack;
  std::vector<std::vector<std::uint32_t>> comps;
  int counter = 0;
  // Iterative Tarjan: frames of (node, next edge position).
  std::vector<std::pair<std::uint32_t, std::size_t>> frames;
  for (std::uint32_t root = 0; root < n; ++root) {
    if (idx[root] >= 0) continue;
    frames.push_back({root, 0});
    idx[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!frames.empty()) {
      auto& [v, pos] = frames.back();
      if (pos < chain.rows[v].size()) {
        const std::uint32_t w = chain.rows[v][pos++].to;
        if (idx[w] < 0) {
          idx[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          frames.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], idx[w]);
        }
        continue;
      }
      const std::uint32_t done = v;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().first] = std::min(low[frames.back().first], low[done]);
      if (low[done] == idx[done]) {
        std::vector<std::uint32_t> c;
        std::uint32_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = static_cast<int>(comps.size());
          c.push_back(w);
        } while (w != done);
        comps.push_back(std::move(c));
      }
    }
  }
  BsccDecomposition out;
  out.component_of.assign(n, -1);
  std::vector<std::vector<std::uint32_t>> bottoms;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    bool bottom = true;
    for (std::uint32_t v : comps[c])
      for (const auto& e : chain.rows[v])
        if (comp[e.to] != static_cast<int>(c)) bottom = false;
    if (bottom) {
      auto members = comps[c];
      std::sort(members.begin(), members.end());
      bottoms.push_back(std::move(members));
    }
  }
  std::sort(bottoms.begin(), bottoms.end(), [](const auto& x, const auto& y) { return x.front() < y.front(); });
  for (std::size_t b = 0; b < bottoms.size(); ++b)
    for (std::uint32_t v : bottoms[b]) out.component_of[v] = static_cast<int>(b);
  for (std::uint32_t v = 0; v < n; ++v)
    if (out.component_of[v] < 0) out.transient.push_back(v);
  out.bsccs = std::move(bottoms);
  return out;
}

namespace {

template <class T>
std::vector<T> solve_reach(const ProductChain& chain, const std::vector<char>& label) {
  const std::size_t n = chain.size();
  // Nodes that can reach the label.
  std::vector<std::vector<std::uint32_t>> pred(n);
  for (std::uint32_t i = 0; i < n; ++i)
    for (const auto& e : chain.rows[i]) pred[e.to].push_back(i);
  std::vector<char> can(n, 0);
  std::deque<std::uint32_t> q;
  for (std::uint32_t i = 0; i < n; ++i)
    if (label[i]) {
      can[i] = 1;
      q.push_back(i);
    }
  while (!q.empty()) {
    auto v = q.front();
    q.pop_front();
    for (auto u : pred[v])
      if (!can[u]) {
        can[u] = 1;
        q.push_back(u);
      }
  }
  std::vector<T> x(n, T(0));
  std::vector<std::uint32_t> unknown;
  std::vector<int> pos(n, -1);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (label[i])
      x[i] = T(1);
    else if (can[i]) {
      pos[i] = static_cast<int>(unknown.size());
      unknown.push_back(i);
    }
  }
  const std::size_t m = unknown.size();
  // Row r: x_r = b_r + sum_c coef[r][c] x_c.
  std::vector<std::map<std::uint32_t, T>> coef(m);
  std::vector<T> rhs(m, T(0));
  std::vector<std::vector<std::uint32_t>> users(m);
  for (std::size_t r = 0; r < m; ++r) {
    const std::uint32_t i = unknown[r];
    auto add = [&](std::uint32_t to, const T& p) {
      if (label[to])
        rhs[r] += p;
      else if (pos[to] >= 0) {
        coef[r][static_cast<std::uint32_t>(pos[to])] += p;
        users[static_cast<std::size_t>(pos[to])].push_back(static_cast<std::uint32_t>(r));
      }
    };
    if constexpr (std::is_same_v<T, Rational>) {
      for (const auto& e : chain.exact_rows[i]) add(e.to, e.p);
    } else {
      for (const auto& e : chain.rows[i]) add(e.to, e.p);
    }
  }
  for (std::size_t p = 0; p < m; ++p) {
    T self(0);
    if (auto it = coef[p].find(static_cast<std::uint32_t>(p)); it != coef[p].end()) {
      self = it->second;
      coef[p].erase(it);
    }
    T denom = T(1) - self;
    if (sgn_any(denom) <= 0)
      fail(ErrorCode::SingularSystem, "reach system is singular at " + chain.node_name(unknown[p]));
    rhs[p] /= denom;
    for (auto& [c, v] : coef[p]) v /= denom;
    std::vector<std::uint32_t> rows = std::move(users[p]);
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    for (std::uint32_t r : rows) {
      if (r <= p) continue;
      auto it = coef[r].find(static_cast<std::uint32_t>(p));
      if (it == coef[r].end()) continue;
      T f = it->second;
      coef[r].erase(it);
      rhs[r] += f * rhs[p];
      for (const auto& [c, v] : coef[p]) {
        coef[r][c] += f * v;
        users[c].push_back(r);
      }
    }
  }
  std::vector<T> sol(m, T(0));
  for (std::size_t p = m; p-- > 0;) {
    T v = rhs[p];
    for (const auto& [c, w] : coef[p]) v += w * sol[c];
    if constexpr (std::is_same_v<T, Rational>) v.canonicalize();
    sol[p] = v;
  }
  for (std::size_t r = 0; r < m; ++r) x[unknown[r]] = sol[r];
  return x;
}

}  // namespace

std::vector<Rational> reach_probabilities(const ProductChain& chain, const std::vector<char>& label) {
  if (!chain.exact) fail(ErrorCode::BadParams, "exact reach probabilities need an exact chain");
  return solve_reach<Rational>(chain, label);
}

std::vector<double> reach_probabilities_float(const ProductChain& chain, const std::vector<char>& label) {
  return solve_reach<double>(chain, label);
}

namespace {

EventProb reach_from(const ProductChain& chain, const std::vector<char>& label, std::uint32_t from) {
  EventProb out;
  if (chain.exact) {
    out.exact = reach_probabilities(chain, label)[from];
    out.value = out.exact.get_d();
  } else {
    out.value = reach_probabilities_float(chain, label)[from];
  }
  return out;
}

}  // namespace

EventProb exact_event_prob(const ProductChain& chain, ChainEvent event, const std::vector<char>& label,
                           std::uint32_t from) {
  if (label.size() != chain.size()) fail(ErrorCode::BadParams, "label size does not match the chain");
  switch (event) {
    case ChainEvent::Reach: return reach_from(chain, label, from);
    case ChainEvent::Avoid: {
      EventProb r = reach_from(chain, label, from);
      r.exact = 1 - r.exact;
      r.value = chain.exact ? r.exact.get_d() : 1.0 - r.value;
      return r;
    }
    case ChainEvent::Buchi: {
      BsccDecomposition d = bscc_decompose(chain);
      std::vector<char> good(chain.size(), 0);
      for (const auto& c : d.bsccs) {
        bool meets = std::any_of(c.begin(), c.end(), [&](std::uint32_t v) { return label[v] != 0; });
        if (meets)
          for (auto v : c) good[v] = 1;
      }
      return reach_from(chain, good, from);
    }
  }
  return {};
}

std::vector<Rational> distribution_after(const ProductChain& chain, std::size_t k, std::uint32_t from) {
  if (!chain.exact) fail(ErrorCode::BadParams, "exact distributions need an exact chain");
  std::vector<Rational> cur(chain.size(), Rational(0)), next(chain.size());
  cur[from] = 1;
  for (std::size_t step = 0; step < k; ++step) {
    std::fill(next.begin(), next.end(), Rational(0));
    for (std::uint32_t i = 0; i < chain.size(); ++i) {
      if (sgn(cur[i]) == 0) continue;
      for (const auto& e : chain.exact_rows[i]) next[e.to] += cur[i] * e.p;
    }
    for (auto& v : next) v.canonicalize();
    std::swap(cur, next);
  }
  return cur;
}

namespace {

template <class T, class F>
void propagate(const ProductChain& chain, std::uint32_t from, std::size_t steps, F&& after_step) {
  std::vector<T> cur(chain.size(), T(0)), next(chain.size());
  cur[from] = T(1);
  if (!after_step(std::size_t(0), cur)) return;
  for (std::size_t k = 1; k <= steps; ++k) {
    std::fill(next.begin(), next.end(), T(0));
    for (std::uint32_t i = 0; i < chain.size(); ++i) {
      if (sgn_any(cur[i]) == 0) continue;
      if constexpr (std::is_same_v<T, Rational>) {
        for (const auto& e : chain.exact_rows[i]) next[e.to] += cur[i] * e.p;
      } else {
        for (const auto& e : chain.rows[i]) next[e.to] += cur[i] * e.p;
      }
    }
    if constexpr (std::is_same_v<T, Rational>)
      for (auto& v : next) v.canonicalize();
    std::swap(cur, next);
    if (!after_step(k, cur)) return;
  }
}

}  // namespace

EventProb transient_mass_at(const ProductChain& chain, std::size_t k, std::uint32_t from) {
  BsccDecomposition d = bscc_decompose(chain);
  EventProb out;
  if (chain.exact) {
    propagate<Rational>(chain, from, k, [&](std::size_t step, const std::vector<Rational>& dist) {
      if (step == k) {
        Rational m = 0;
        for (auto v : d.transient) m += dist[v];
        out.exact = m;
        out.value = m.get_d();
      }
      return true;
    });
  } else {
    propagate<double>(chain, from, k, [&](std::size_t step, const std::vector<double>& dist) {
      if (step == k) {
        double m = 0;
        for (auto v : d.transient) m += dist[v];
        out.value = m;
      }
      return true;
    });
  }
  return out;
}

std::optional<std::size_t> first_step_with_transient_mass_le(const ProductChain& chain, const Rational& bound,
                                                             std::size_t cap, std::uint32_t from) {
  BsccDecomposition d = bscc_decompose(chain);
  std::optional<std::size_t> found;
  if (chain.exact) {
    propagate<Rational>(chain, from, cap, [&](std::size_t step, const std::vector<Rational>& dist) {
      Rational m = 0;
      for (auto v : d.transient) m += dist[v];
      if (m <= bound) {
        found = step;
        return false;
      }
      return true;
    });
  } else {
    const double b = bound.get_d();
    propagate<double>(chain, from, cap, [&](std::size_t step, const std::vector<double>& dist) {
      double m = 0;
      for (auto v : d.transient) m += dist[v];
      if (m <= b) {
        found = step;
        return false;
      }
      return true;
    });
  }
  return found;
}

EventProb visit_at_least(const ProductChain& chain, std::uint32_t node, std::size_t n, std::uint32_t from) {
  if (n == 0) return {Rational(1), 1.0};
  std::vector<char> label(chain.size(), 0);
  label[node] = 1;
  EventProb out;
  if (chain.exact) {
    std::vector<Rational> reach = reach_probabilities(chain, label);
    Rational rho = 0;
    for (const auto& e : chain.exact_rows[node]) rho += e.p * reach[e.to];
    out.exact = reach[from] * pow(rho, static_cast<unsigned long>(n - 1));
    out.exact.canonicalize();
    out.value = out.exact.get_d();
  } else {
    std::vector<double> reach = reach_probabilities_float(chain, label);
    double rho = 0;
    for (const auto& e : chain.rows[node]) rho += e.p * reach[e.to];
    out.value = reach[from] * std::pow(rho, static_cast<double>(n - 1));
  }
  return out;
}

SumProdCheck one_minus_sum_le_prod(const std::vector<double>& a) {
  SumProdCheck out;
  double sum = 0.0, prod = 1.0;
  for (double v : a) {
    if (!(v >= 0.0 && v <= 1.0)) fail(ErrorCode::OutOfRange, "sequence entry outside [0,1]");
    sum += v;
    prod *= 1.0 - v;
  }
  out.lhs = 1.0 - sum;
  out.rhs = prod;
  out.holds = out.lhs <= out.rhs + 1e-12;
  return out;
}

SumProdCheck one_minus_sum_le_prod(const std::vector<Rational>& a) {
  Rational sum = 0, prod = 1;
  for (const auto& v : a) {
    if (v < 0 || v > 1) fail(ErrorCode::OutOfRange, "sequence entry outside [0,1]");
    sum += v;
    prod *= 1 - v;
  }
  Rational lhs = 1 - sum;
  return {lhs.get_d(), prod.get_d(), lhs <= prod};
}

void write_edge_list(std::ostream& out, const ProductChain& chain) {
  out << "# product chain, " << chain.size() << " nodes\n";
  for (std::uint32_t i = 0; i < chain.size(); ++i) out << "# node " << i << ' ' << chain.node_name(i) << '\n';
  for (std::uint32_t i = 0; i < chain.size(); ++i) {
    if (chain.exact) {
      for (const auto& e : chain.exact_rows[i]) out << i << ' ' << e.to << ' ' << to_string(e.p) << '\n';
    } else {
      out.precision(17);
      for (const auto& e : chain.rows[i]) out << i << ' ' << e.to << ' ' << e.p << '\n';
    }
  }
}

}  // namespace csg
