#include "csg/matrix_game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "csg/error.hpp"

namespace csg {

namespace {

template <class T>
struct Num;

template <>
struct Num<double> {
  static double abs(double v) { return std::abs(v); }
  static bool near(double a, double b, double scale) { return std::abs(a - b) <= 1e-12 * (1.0 + scale); }
  static bool pos(double v, double scale) { return v > 1e-12 * (1.0 + scale); }
  static bool neg(double v, double scale) { return v < -1e-12 * (1.0 + scale); }
  static bool finite(double v) { return std::isfinite(v); }
};

template <>
struct Num<Rational> {
  static Rational abs(const Rational& v) { return ::abs(v); }
  static bool near(const Rational& a, const Rational& b, double) { return a == b; }
  static bool pos(const Rational& v, double) { return sgn(v) > 0; }
  static bool neg(const Rational& v, double) { return sgn(v) < 0; }
  static bool finite(const Rational&) { return true; }
};

template <class T>
double scale_of(const Matrix<T>& m) {
  double s = 0.0;
  for (const auto& row : m)
    for (const auto& v : row) s = std::max(s, std::abs(to_double_any(v)));
  return s;
}

template <class T>
std::vector<T> dirac(std::size_t n, std::size_t i) {
  std::vector<T> v(n, T(0));
  v[i] = T(1);
  return v;
}

// Two rows: maximize the lower envelope of f_j(p) = a_j + s_j p over [0,1].
template <class T>
MatrixSolution<T> solve_two_rows(const Matrix<T>& m, double scale) {
  using N = Num<T>;
  const std::size_t n = m[0].size();
  std::vector<T> a(n), s(n);
  for (std::size_t j = 0; j < n; ++j) {
    a[j] = m[0][j];
    s[j] = m[1][j] - m[0][j];
  }
  auto f = [&](std::size_t j, const T& p) { return T(a[j] + s[j] * p); };
  auto envelope = [&](const T& p) {
    T v = f(0, p);
    for (std::size_t j = 1; j < n; ++j) v = std::min(v, f(j, p));
    return v;
  };

  T p(0);
  T val = envelope(p);
  for (std::size_t guard = 0; guard <= n + 1; ++guard) {
    val = envelope(p);
    T sm{};
    bool have = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (!N::near(f(j, p), val, scale)) continue;
      if (!have || s[j] < sm) sm = s[j];
      have = true;
    }
    if (!N::pos(sm, scale)) break;
    // Next breakpoint: first line with a smaller slope that meets the active one.
    bool found = false;
    T next{};
    for (std::size_t j = 0; j < n; ++j) {
      if (!(s[j] < sm) || N::near(s[j], sm, scale)) continue;
      T gap = f(j, p) - val;
      if (!N::pos(gap, scale)) continue;
      T q = p + gap / (sm - s[j]);
      if (!found || q < next) next = q;
      found = true;
    }
    if (!found || !(next < T(1)) || N::near(next, T(1), scale)) {
      p = T(1);
      val = envelope(p);
      break;
    }
    p = next;
  }

  MatrixSolution<T> out;
  out.value = val;
  out.x = {T(1) - p, p};
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < n; ++j)
    if (N::near(f(j, p), val, scale)) active.push_back(j);

  auto first_where = [&](auto pred) -> std::optional<std::size_t> {
    for (std::size_t j : active)
      if (pred(s[j])) return j;
    return std::nullopt;
  };
  const bool at_left = sgn_any(p) == 0;
  const bool at_right = p == T(1);
  if (at_left) {
    out.y = dirac<T>(n, *first_where([&](const T& v) { return !N::pos(v, scale); }));
  } else if (at_right) {
    out.y = dirac<T>(n, *first_where([&](const T& v) { return !N::neg(v, scale); }));
  } else if (auto flat = first_where([&](const T& v) { return !N::pos(v, scale) && !N::neg(v, scale); })) {
    out.y = dirac<T>(n, *flat);
  } else {
    std::size_t up = *first_where([&](const T& v) { return N::pos(v, scale); });
    std::size_t down = *first_where([&](const T& v) { return N::neg(v, scale); });
    T lambda = -s[down] / (s[up] - s[down]);
    out.y.assign(n, T(0));
    out.y[up] = lambda;
    out.y[down] = T(1) - lambda;
  }
  return out;
}

// max sum(q) s.t. A q <= 1, q >= 0 with A > 0, by a dense tableau and Bland's rule.
template <class T>
MatrixSolution<T> solve_simplex(const Matrix<T>& m, double scale) {
  using N = Num<T>;
  const std::size_t rows = m.size(), cols = m[0].size();
  T lo = m[0][0];
  for (const auto& r : m)
    for (const auto& v : r) lo = std::min(lo, v);
  const T shift = lo - T(1);

  const std::size_t vars = cols + rows;
  Matrix<T> tab(rows, std::vector<T>(vars + 1, T(0)));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) tab[i][j] = m[i][j] - shift;
    tab[i][cols + i] = T(1);
    tab[i][vars] = T(1);
  }
  std::vector<T> obj(vars + 1, T(0));
  for (std::size_t j = 0; j < cols; ++j) obj[j] = T(1);
  std::vector<std::size_t> basis(rows);
  for (std::size_t i = 0; i < rows; ++i) basis[i] = cols + i;

  const double tab_scale = scale + 1.0;
  for (std::size_t iter = 0; iter < 100000; ++iter) {
    std::size_t enter = vars;
    for (std::size_t j = 0; j < vars; ++j)
      if (N::pos(obj[j], tab_scale)) {
        enter = j;
        break;
      }
    if (enter == vars) break;
    std::size_t leave = rows;
    T best{};
    for (std::size_t i = 0; i < rows; ++i) {
      if (!N::pos(tab[i][enter], tab_scale)) continue;
      T ratio = tab[i][vars] / tab[i][enter];
      const bool tie = leave != rows && N::near(ratio, best, tab_scale);
      if (leave == rows || (tie && basis[i] < basis[leave]) || (!tie && ratio < best)) {
        best = ratio;
        leave = i;
      }
    }
    if (leave == rows) fail(ErrorCode::InvariantViolated, "matrix game LP is unbounded");
    T piv = tab[leave][enter];
    for (auto& v : tab[leave]) v /= piv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == leave || sgn_any(tab[i][enter]) == 0) continue;
      T factor = tab[i][enter];
      for (std::size_t j = 0; j <= vars; ++j) tab[i][j] -= factor * tab[leave][j];
    }
    T factor = obj[enter];
    for (std::size_t j = 0; j <= vars; ++j) obj[j] -= factor * tab[leave][j];
    basis[leave] = enter;
  }

  std::vector<T> q(cols, T(0));
  for (std::size_t i = 0; i < rows; ++i)
    if (basis[i] < cols) q[basis[i]] = tab[i][vars];
  T total(0);
  for (const auto& v : q) total += v;
  std::vector<T> u(rows, T(0));
  T utotal(0);
  for (std::size_t i = 0; i < rows; ++i) {
    u[i] = -obj[cols + i];
    if (N::neg(u[i], tab_scale)) u[i] = T(0);
    utotal += u[i];
  }
  MatrixSolution<T> out;
  out.value = T(1) / total + shift;
  out.y.resize(cols);
  for (std::size_t j = 0; j < cols; ++j) out.y[j] = q[j] / total;
  out.x.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) out.x[i] = u[i] / utotal;
  return out;
}

}  // namespace

template <class T>
MatrixSolution<T> solve_matrix_game(const Matrix<T>& m) {
  using N = Num<T>;
  if (m.empty() || m[0].empty()) fail(ErrorCode::BadParams, "matrix game needs at least one row and column");
  const std::size_t rows = m.size(), cols = m[0].size();
  for (const auto& r : m) {
    if (r.size() != cols) fail(ErrorCode::BadParams, "ragged payoff matrix");
    for (const auto& v : r)
      if (!N::finite(v)) fail(ErrorCode::BadParams, "payoff matrix has a non-finite entry");
  }
  const double scale = scale_of(m);

  bool constant = true;
  for (const auto& r : m)
    for (const auto& v : r)
      if (!N::near(v, m[0][0], scale)) constant = false;
  if (constant) {
    MatrixSolution<T> out;
    out.value = m[0][0];
    out.x.assign(rows, T(1) / T(static_cast<long>(rows)));
    out.y.assign(cols, T(1) / T(static_cast<long>(cols)));
    return out;
  }

  if (rows == 1) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < cols; ++j)
      if (m[0][j] < m[0][best] && !N::near(m[0][j], m[0][best], scale)) best = j;
    return {m[0][best], {T(1)}, dirac<T>(cols, best)};
  }
  if (cols == 1) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < rows; ++i)
      if (m[i][0] > m[best][0] && !N::near(m[i][0], m[best][0], scale)) best = i;
    return {m[best][0], dirac<T>(rows, best), {T(1)}};
  }
  if (rows == 2) return solve_two_rows(m, scale);
  if (cols == 2) {
    Matrix<T> t(2, std::vector<T>(rows));
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < 2; ++j) t[j][i] = -m[i][j];
    MatrixSolution<T> s = solve_two_rows(t, scale);
    return {-s.value, std::move(s.y), std::move(s.x)};
  }
  return solve_simplex(m, scale);
}

double duality_residual(const Matrix<double>& m, const std::vector<double>& x, const std::vector<double>& y,
                        double value) {
  const std::size_t rows = m.size(), cols = m[0].size();
  double worst_col = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < cols; ++j) {
    double v = 0.0;
    for (std::size_t i = 0; i < rows; ++i) v += x[i] * m[i][j];
    worst_col = std::min(worst_col, v);
  }
  double worst_row = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rows; ++i) {
    double v = 0.0;
    for (std::size_t j = 0; j < cols; ++j) v += m[i][j] * y[j];
    worst_row = std::max(worst_row, v);
  }
  return std::max(std::abs(value - worst_col), std::abs(worst_row - value));
}

template MatrixSolution<double> solve_matrix_game<double>(const Matrix<double>&);
template MatrixSolution<Rational> solve_matrix_game<Rational>(const Matrix<Rational>&);

}  // namespace csg
