#pragma once

#include <cstddef>
#include <vector>

#include "csg/rational.hpp"

namespace csg {

/// Dense payoff matrix, row player (Max) maximizes.
template <class T>
using Matrix = std::vector<std::vector<T>>;

template <class T>
struct MatrixSolution {
  T value{};
  std::vector<T> x;  // Max, over rows
  std::vector<T> y;  // Min, over columns
};

/// Value and optimal strategies of a zero-sum matrix game.
///
/// Two-row games are solved exactly by walking the lower envelope of the
/// column lines from x_1 = 0; the first maximizer is returned, so Max's
/// strategy puts as much weight on lower rows as optimality allows. Two-column
/// games go through the negated transpose. Larger games use a dense simplex
/// (Bland's rule) on the shifted LP. A constant matrix yields uniform
/// strategies for both players.
template <class T>
MatrixSolution<T> solve_matrix_game(const Matrix<T>& m);

/// Largest distance between `value` and the payoff of a best reply to x or
/// to y. Zero (up to rounding) exactly when (x, y, value) solves the game.
double duality_residual(const Matrix<double>& m, const std::vector<double>& x, const std::vector<double>& y,
                        double value);

extern template MatrixSolution<double> solve_matrix_game<double>(const Matrix<double>&);
extern template MatrixSolution<Rational> solve_matrix_game<Rational>(const Matrix<Rational>&);

}  // namespace csg
