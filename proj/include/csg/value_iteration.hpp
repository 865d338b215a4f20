#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <optional>
#include <string>
#include <vector>

#include "csg/explicit_game.hpp"
#include "csg/matrix_game.hpp"
#include "csg/objective.hpp"

namespace csg {

struct ValueVector {
  std::vector<StateId> states;
  std::vector<double> values;
  std::vector<Rational> exact;  // filled by exact runs only
  std::string objective;
  std::size_t iterations = 0;
  std::size_t outer_iterations = 0;  // Buchi only
  double residual = 0.0;
  bool converged = false;
  std::string stop_reason;  // "tolerance" or "iteration cap"

  double at(const StateId& s) const;
  std::size_t index_of(const StateId& s) const;
};

struct ViOptions {
  std::size_t max_iters = 100000;
  double tol = 1e-12;
  Precision precision = Precision::Float;
  /// Called after every iteration with (iteration number, iterate); both
  /// vectors are indexed like ExplicitGame::ids.
  std::function<void(std::size_t, const std::vector<double>&)> observe;
  std::function<void(std::size_t, const std::vector<Rational>&)> observe_exact;
};

/// Local matrix of expected continuation values at state i.
template <class T>
Matrix<T> local_matrix(const ExplicitGame& g, std::uint32_t i, const std::vector<T>& v);
extern template Matrix<double> local_matrix<double>(const ExplicitGame&, std::uint32_t, const std::vector<double>&);
extern template Matrix<Rational> local_matrix<Rational>(const ExplicitGame&, std::uint32_t,
                                                        const std::vector<Rational>&);

/// Jacobi value iteration for Reach, ReachConstrained and Safety objectives.
/// Reach: V_0 = 1_T, targets absorb at 1, iterates nondecrease. Safety(T):
/// V_0 = 1 off T, 0 on T, iterates nonincrease. Monotonicity and [0,1]
/// bounds are asserted every iteration (InvariantViolated).
ValueVector value_iteration(const Game& game, const Objective& objective, const ViOptions& options = {});
ValueVector reach_value_iteration(const Game& game, const StateSet& target, std::size_t max_iters, double tol,
                                  Precision precision = Precision::Float);

/// Jacobi iteration from 0 in which states with a pinned value keep it:
/// the least fixpoint of "reach the pinned states, collecting their values".
ValueVector pinned_value_iteration(const ExplicitGame& g, const std::vector<std::optional<double>>& pinned,
                                   const ViOptions& options = {}, const std::string& label = "weighted reach");

struct BuchiOptions {
  std::size_t inner_cap = 10000;
  std::size_t outer_cap = 3;
  double tol = 1e-12;
  /// Called after each outer pass with the new outer iterate.
  std::function<void(std::size_t, const std::vector<double>&)> observe_outer;
};

/// Nested fixpoint for Bu[T]: outer iterate Y from 1 downwards, inner
/// least fixpoint X from 0 with Pre(Y) at T-states and Pre(X) elsewhere.
/// Both caps are honored and reported.
ValueVector buchi_value(const Game& game, const StateSet& target, const BuchiOptions& options = {});

}  // namespace csg
