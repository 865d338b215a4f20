#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "csg/fixing_sweep.hpp"
#include "csg/game.hpp"
#include "csg/objective.hpp"
#include "csg/strategy.hpp"

namespace csg {

/// Plays `horizon` steps from the start (the game's initial state unless
/// given). Each step draws, in order: Max action, Min action, successor,
/// Max update, Min update. With stop_at_sink the play ends on entering a
/// sink and `sink_reached` is set.
Play simulate(const Game& game, const StrategyMachine& sigma, const StrategyMachine& pi, std::int64_t horizon,
              std::uint64_t seed, std::uint64_t stream, bool stop_at_sink = true,
              std::optional<StateId> start = std::nullopt);

/// Event judged on a play prefix s_0 .. s_H.
struct EventSpec {
  enum class Kind { Reach, ReachConstrained, Safety, AvoidBot, WindowedBuchi, Buchi, Transience, TransientBuchi };
  Kind kind = Kind::Reach;
  StateSet target;
  StateSet constraint;
  std::size_t min_visits = 1;  // WindowedBuchi
  std::int64_t window = 1;  // WindowedBuchi

  static EventSpec from_objective(const Objective& objective);
  /// Proxy for Bu[T]: at least k visits to T, one of them among the last
  /// `window` states.
  static EventSpec windowed_buchi(StateSet t, std::size_t k, std::int64_t window);
  std::string describe() const;
};

struct EstimationReport {
  double estimate = 0.0;
  std::size_t n = 0;
  std::size_t successes = 0;
  double confidence = 0.95;
  double ci_low = 0.0;  // Wilson
  double ci_high = 0.0;
  double hoeffding = 0.0;  // half-width sqrt(ln(2/delta) / 2n)
  std::int64_t horizon = 0;
  std::string event;
  std::uint64_t seed = 0;

  std::string to_json() const;
};

inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
  double low = 0.0;
  double high = 0.0;
};
Interval wilson_interval(std::size_t successes, std::size_t n, double z = kZ95);
double hoeffding_halfwidth(std::size_t n, double delta = 0.05);

/// Monte Carlo estimate over streams 0..n-1. Results do not depend on `jobs`.
/// EventNotPrefixDecidable for Buchi, Transience and TransientBuchi.
EstimationReport estimate(const Game& game, const StrategyMachine& sigma, const StrategyMachine& pi,
                          const EventSpec& event, std::size_t n, std::int64_t horizon, std::uint64_t seed,
                          unsigned jobs = 1, std::optional<StateId> start = std::nullopt);

enum class Direction { Super, Sub };
std::string_view direction_name(Direction d);

struct MartingaleRow {
  std::size_t returns = 0;  // n
  std::size_t samples = 0;  // plays with tau >= n
  double mean = 0.0;  // of X_{n+1} given tau >= n
  double stderr_ = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::string verdict;  // "holds", "violated" or "withheld"
};

struct MartingaleDiagnostic {
  Direction direction = Direction::Sub;
  double u = 0.0;
  std::int64_t horizon = 0;
  std::size_t plays = 0;
  std::uint64_t seed = 0;
  std::string header;  // states the transience surrogate
  std::vector<MartingaleRow> rows;

  /// No row violated and at least one row decided.
  bool holds() const;
  std::string to_json() const;
};

/// Estimates E[X_{n+1} | tau >= n] for n = 1..max_returns, where tau counts
/// visits to s0 and transience is read as "bot not reached by the horizon".
/// Verdict per n at 3 standard errors; rows with fewer than 100 conditional
/// samples are withheld. TooFewReturns when fewer than 100 plays are run.
MartingaleDiagnostic martingale_diagnostic(const Game& game, const StrategyMachine& sigma, const StrategyMachine& pi,
                                           const StateId& s0, double u, Direction direction,
                                           std::size_t max_returns, std::size_t n, std::int64_t horizon,
                                           std::uint64_t seed, unsigned jobs = 1);

struct TransienceReport {
  std::int64_t horizon = 0;
  std::int64_t window = 0;
  std::vector<char> transient;  // per play
  std::vector<std::size_t> max_visits;  // per play
  std::map<std::size_t, std::size_t> histogram;  // max visit count -> plays
  double transient_fraction = 0.0;
  double avoid_bot_fraction = 0.0;
  Interval transient_ci;
  Interval avoid_bot_ci;
  /// |transient - avoid_bot| <= 2 * the wider CI width.
  bool agreement = false;

  std::string to_json() const;
};

/// Per-play indicator "no state of the last `window` steps occurred at or
/// before step H - window", plus visit-count statistics. Plays that stopped
/// in a sink are extended by that sink. WindowTooLarge unless window < H.
TransienceReport transience_diagnostic(const std::vector<Play>& plays, std::int64_t horizon, std::int64_t window);

/// Y_n = r_{m(n)} v_{m(n)}(s_n) along a play, where m(n) is the largest
/// enumeration rank among s_1..s_n (states outside the interior rank 0).
std::vector<double> fixing_y_trace(const FixingSweepReport& report, const Play& play);

}  // namespace csg
