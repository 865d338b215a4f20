#include "csg/value_iteration.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "csg/error.hpp"

namespace csg {

double ValueVector::at(const StateId& s) const { return values[index_of(s)]; }

std::size_t ValueVector::index_of(const StateId& s) const {
  auto it = std::lower_bound(states.begin(), states.end(), s);
  if (it == states.end() || *it != s) fail(ErrorCode::BadParams, "no value for state " + s.to_string());
  return static_cast<std::size_t>(it - states.begin());
}

template <class T>
Matrix<T> local_matrix(const ExplicitGame& g, std::uint32_t i, const std::vector<T>& v) {
  const auto& st = g.states[i];
  Matrix<T> m(st.na, std::vector<T>(st.nb, T(0)));
  for (std::uint32_t a = 0; a < st.na; ++a) {
    for (std::uint32_t b = 0; b < st.nb; ++b) {
      T acc(0);
      const std::size_t r = std::size_t(a) * st.nb + b;
      if constexpr (std::is_same_v<T, Rational>) {
        if (!g.exact) fail(ErrorCode::BadParams, "exact iteration needs an exactly compiled game");
        for (const auto& e : st.exact_rows[r]) acc += e.p * v[e.to];
      } else {
        for (const auto& e : st.rows[r]) acc += e.p * v[e.to];
      }
      m[a][b] = acc;
    }
  }
  return m;
}

template Matrix<double> local_matrix<double>(const ExplicitGame&, std::uint32_t, const std::vector<double>&);
template Matrix<Rational> local_matrix<Rational>(const ExplicitGame&, std::uint32_t, const std::vector<Rational>&);

namespace {

template <class T>
T local_value(const ExplicitGame& g, std::uint32_t i, const std::vector<T>& v) {
  const auto& st = g.states[i];
  if (st.na == 1 && st.nb == 1) {
    T acc(0);
    if constexpr (std::is_same_v<T, Rational>) {
      for (const auto& e : st.exact_rows[0]) acc += e.p * v[e.to];
    } else {
      for (const auto& e : st.rows[0]) acc += e.p * v[e.to];
    }
    return acc;
  }
  return solve_matrix_game(local_matrix(g, i, v)).value;
}

template <class T>
ValueVector run_vi(const ExplicitGame& g, const std::vector<std::optional<T>>& pinned, bool increasing,
                   const ViOptions& opt, const std::string& label) {
  const std::size_t n = g.size();
  std::vector<T> v(n), next(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (pinned[i])
      v[i] = *pinned[i];
    else
      v[i] = increasing ? T(0) : T(1);
  }
  ValueVector out;
  out.states = g.ids;
  out.objective = label;
  out.stop_reason = "iteration cap";
  std::size_t k = 0;
  double residual = 0.0;
  while (k < opt.max_iters) {
    for (std::uint32_t i = 0; i < n; ++i) next[i] = pinned[i] ? v[i] : local_value(g, i, v);
    residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = to_double_any(T(next[i] - v[i]));
      // Exact runs must be monotone; float runs may wobble by rounding in the
      // matrix-game solver, so small reversals are clamped away.
      const double slack = std::is_same_v<T, Rational> ? 0.0 : 1e-9;
      if (increasing ? d < -slack : d > slack)
        fail(ErrorCode::InvariantViolated, "value iteration lost monotonicity at " + g.ids[i].to_string());
      if constexpr (!std::is_same_v<T, Rational>) {
        if (increasing ? d < 0 : d > 0) {
          next[i] = v[i];
          d = 0.0;
        }
      }
      const double x = to_double_any(next[i]);
      if (x < -1e-12 || x > 1.0 + 1e-12)
        fail(ErrorCode::InvariantViolated, "value left [0,1] at " + g.ids[i].to_string());
      residual = std::max(residual, std::abs(d));
    }
    std::swap(v, next);
    ++k;
    if constexpr (std::is_same_v<T, Rational>) {
      if (opt.observe_exact) opt.observe_exact(k, v);
      if (opt.observe) {
        std::vector<double> dv(n);
        for (std::size_t i = 0; i < n; ++i) dv[i] = to_double(v[i]);
        opt.observe(k, dv);
      }
    } else {
      if (opt.observe) opt.observe(k, v);
    }
    if (residual < opt.tol) {
      out.converged = true;
      out.stop_reason = "tolerance";
      break;
    }
  }
  out.iterations = k;
  out.residual = residual;
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = to_double_any(v[i]);
  if constexpr (std::is_same_v<T, Rational>) out.exact = v;
  return out;
}

}  // namespace

ValueVector value_iteration(const Game& game, const Objective& objective, const ViOptions& options) {
  const bool exact = options.precision == Precision::Exact;
  ExplicitGame g = ExplicitGame::compile(game, exact);
  std::vector<int> pinned(g.size(), -1);
  bool increasing = true;
  switch (objective.kind) {
    case Objective::Kind::Reach:
      for (std::size_t i = 0; i < g.size(); ++i)
        if (objective.target.contains(g.ids[i])) pinned[i] = 1;
      break;
    case Objective::Kind::ReachConstrained:
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (objective.target.contains(g.ids[i]))
          pinned[i] = 1;
        else if (!objective.constraint.contains(g.ids[i]))
          pinned[i] = 0;
      }
      break;
    case Objective::Kind::Safety:
    case Objective::Kind::AvoidBot:
      increasing = false;
      for (std::size_t i = 0; i < g.size(); ++i)
        if (objective.target.contains(g.ids[i])) pinned[i] = 0;
      break;
    default:
      fail(ErrorCode::BadParams, "value_iteration handles Reach, ReachConstrained and Safety, not " +
                                     objective.describe());
  }
  const std::string label = objective.describe();
  if (exact) {
    std::vector<std::optional<Rational>> p(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      if (pinned[i] >= 0) p[i] = Rational(pinned[i]);
    return run_vi<Rational>(g, p, increasing, options, label);
  }
  std::vector<std::optional<double>> p(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    if (pinned[i] >= 0) p[i] = double(pinned[i]);
  return run_vi<double>(g, p, increasing, options, label);
}

ValueVector pinned_value_iteration(const ExplicitGame& g, const std::vector<std::optional<double>>& pinned,
                                   const ViOptions& options, const std::string& label) {
  if (pinned.size() != g.size()) fail(ErrorCode::BadParams, "pinned vector has the wrong size");
  return run_vi<double>(g, pinned, true, options, label);
}

ValueVector reach_value_iteration(const Game& game, const StateSet& target, std::size_t max_iters, double tol,
                                  Precision precision) {
  ViOptions opt;
  opt.max_iters = max_iters;
  opt.tol = tol;
  opt.precision = precision;
  return value_iteration(game, Objective::reach(target), opt);
}

ValueVector buchi_value(const Game& game, const StateSet& target, const BuchiOptions& options) {
  ExplicitGame g = ExplicitGame::compile(game, false);
  const std::size_t n = g.size();
  const std::vector<char> in_t = g.mask(target);
  std::vector<double> y(n, 1.0), pre_y(n), x(n), xn(n);
  ValueVector out;
  out.states = g.ids;
  out.objective = Objective::buchi(target).describe();
  out.stop_reason = "iteration cap";
  std::size_t inner_total = 0, outer = 0;
  double outer_residual = 0.0;
  while (outer < options.outer_cap) {
    for (std::uint32_t i = 0; i < n; ++i)
      if (in_t[i]) pre_y[i] = local_value(g, i, y);
    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t k = 0; k < options.inner_cap; ++k) {
      double res = 0.0;
      for (std::uint32_t i = 0; i < n; ++i) {
        xn[i] = in_t[i] ? pre_y[i] : local_value(g, i, x);
        res = std::max(res, std::abs(xn[i] - x[i]));
      }
      std::swap(x, xn);
      ++inner_total;
      if (res < options.tol) break;
    }
    outer_residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i] > y[i] + 1e-12)
        fail(ErrorCode::InvariantViolated, "Buchi outer iterate increased at " + g.ids[i].to_string());
      outer_residual = std::max(outer_residual, std::abs(x[i] - y[i]));
    }
    y = x;
    ++outer;
    if (options.observe_outer) options.observe_outer(outer, y);
    if (outer_residual < options.tol) {
      out.converged = true;
      out.stop_reason = "tolerance";
      break;
    }
  }
  out.values = y;
  out.iterations = inner_total;
  out.outer_iterations = outer;
  out.residual = outer_residual;
  return out;
}

}  // namespace csg
