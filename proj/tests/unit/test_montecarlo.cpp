#include <gtest/gtest.h>

#include <cmath>

#include "csg/builtin_games.hpp"
#include "csg/explicit_game.hpp"
#include "csg/fixing_sweep.hpp"
#include "csg/montecarlo.hpp"
#include "csg/strategies.hpp"
#include "csg/transform.hpp"

using namespace csg;

namespace {

// start -> win with p, else lose; both absorbing sinks.
GamePtr coin(const Rational& p) {
  GameBuilder b("coin");
  StateId s = b.add_state("start"), w = b.add_state("win"), l = b.add_state("lose");
  b.set_row(s, 0, 0, Dist<StateId>::exact({{w, p}, {l, Rational(1) - p}}));
  b.set_sink(w);
  b.set_sink(l);
  b.set_target(w);
  b.set_initial(s);
  return b.build();
}

// s0 loops with `stay`, else falls into bot.
GamePtr leak_loop(const Rational& stay) {
  GameBuilder b("loop");
  StateId s = b.add_state("s0");
  StateId bot = b.add_state("bot", bot_state());
  if (stay == 1)
    b.set_row(s, 0, 0, Dist<StateId>::dirac(s));
  else if (stay == 0)
    b.set_row(s, 0, 0, Dist<StateId>::dirac(bot));
  else
    b.set_row(s, 0, 0, Dist<StateId>::exact({{s, stay}, {bot, Rational(1) - stay}}));
  b.set_sink(bot);
  b.set_initial(s);
  return b.build();
}

Play chain_play(const std::vector<std::int64_t>& ids) {
  Play p;
  p.initial = StateId{ids.front()};
  for (std::size_t i = 1; i < ids.size(); ++i) p.steps.push_back({StateId{ids[i - 1]}, 0, 0, StateId{ids[i]}});
  return p;
}

}  // namespace

TEST(Simulate, HorizonZeroAndDeterministicPlay) {
  auto g = simplified_bad_match();
  auto p0 = simulate(*g, *always(0), *always(0), 0, 1, 0);
  EXPECT_EQ(p0.length(), 0u);
  EXPECT_EQ(p0.final_state(), bm::d);

  // Max 0, Min 0 cycles d -> s -> d.
  auto p = simulate(*g, *always(0), *always(0), 6, 1, 0);
  ASSERT_EQ(p.length(), 6u);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(p.steps[i].next, i % 2 == 0 ? bm::s : bm::d);

  // Max 1, Min 0 goes to l and stops.
  auto q = simulate(*g, *always(1), *always(0), 10, 1, 0);
  EXPECT_TRUE(q.sink_reached);
  EXPECT_EQ(q.length(), 1u);
  EXPECT_EQ(q.final_state(), bm::l);
  auto r = simulate(*g, *always(1), *always(0), 10, 1, 0, false);
  EXPECT_EQ(r.length(), 10u);
}

TEST(Simulate, ReproducibleBySeedAndStream) {
  auto g = simplified_bad_match();
  auto sig = constant_mix(Rational(1, 3));
  auto pi = constant_mix(Rational(1, 2));
  auto a = simulate(*g, *sig, *pi, 50, 9, 3, false);
  auto b = simulate(*g, *sig, *pi, 50, 9, 3, false);
  EXPECT_EQ(a.states(), b.states());
  bool differs = false;
  for (std::uint64_t k = 4; k < 20 && !differs; ++k) differs = simulate(*g, *sig, *pi, 50, 9, k, false).states() != a.states();
  EXPECT_TRUE(differs);
}

TEST(Estimate, CoinWithinHoeffding) {
  auto g = coin(Rational(3, 10));
  EventSpec ev;
  ev.kind = EventSpec::Kind::Reach;
  ev.target = StateSet::of({*g->find_state("win")});
  const std::size_t n = 100000;
  auto rep = estimate(*g, *always(0), *always(0), ev, n, 5, 7);
  EXPECT_EQ(rep.n, n);
  EXPECT_NEAR(rep.hoeffding, std::sqrt(std::log(2.0 / 0.05) / (2.0 * n)), 1e-15);
  EXPECT_LE(std::abs(rep.estimate - 0.3), rep.hoeffding);
  EXPECT_LE(rep.ci_low, 0.3);
  EXPECT_GE(rep.ci_high, 0.3);
}

TEST(Estimate, IndependentOfJobs) {
  auto g = simplified_bad_match();
  auto ev = EventSpec::from_objective(Objective::reach(StateSet::of({bm::l})));
  auto one = estimate(*g, *constant_mix(Rational(1, 4)), *constant_mix(Rational(1, 2)), ev, 3000, 40, 5, 1);
  auto four = estimate(*g, *constant_mix(Rational(1, 4)), *constant_mix(Rational(1, 2)), ev, 3000, 40, 5, 4);
  EXPECT_EQ(one.successes, four.successes);
}

TEST(Estimate, SafetyOfUnreachableIsOne) {
  auto g = simplified_bad_match();
  auto ev = EventSpec::from_objective(Objective::safety(StateSet::of({bm::l})));
  auto rep = estimate(*g, *always(0), *constant_mix(Rational(1, 2)), ev, 500, 30, 2);
  EXPECT_EQ(rep.estimate, 1.0);
}

TEST(Estimate, TailEventsRejected) {
  auto g = simplified_bad_match();
  try {
    estimate(*g, *always(0), *always(0), EventSpec::from_objective(Objective::buchi(StateSet::of({bm::s}))), 10,
             10, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EventNotPrefixDecidable);
  }
}

TEST(Estimate, WilsonCoverage) {
  auto g = coin(Rational(1, 5));
  EventSpec ev;
  ev.kind = EventSpec::Kind::Reach;
  ev.target = StateSet::of({*g->find_state("win")});
  int covered = 0;
  const int reps = 200;
  for (int i = 0; i < reps; ++i) {
    auto rep = estimate(*g, *always(0), *always(0), ev, 400, 3, 1000 + i);
    covered += rep.ci_low <= 0.2 && 0.2 <= rep.ci_high;
  }
  EXPECT_GE(covered, reps * 9 / 10);
}

TEST(Wilson, ClosedForm) {
  auto w = wilson_interval(0, 10);
  EXPECT_EQ(w.low, 0.0);
  EXPECT_GT(w.high, 0.0);
  // oracle: textbook Wilson score for 7/20
  const double z = kZ95, n = 20, ph = 0.35;
  const double c = (ph + z * z / (2 * n)) / (1 + z * z / n);
  const double h = z / (1 + z * z / n) * std::sqrt(ph * (1 - ph) / n + z * z / (4 * n * n));
  auto v = wilson_interval(7, 20);
  EXPECT_NEAR(v.low, c - h, 1e-12);
  EXPECT_NEAR(v.high, c + h, 1e-12);
}

TEST(Martingale, PinnedLoopHoldsBothWays) {
  auto g = leak_loop(Rational(1));
  const StateId s0 = g->initial_state();
  auto sub = martingale_diagnostic(*g, *always(0), *always(0), s0, 0.4, Direction::Sub, 5, 200, 20, 1);
  auto sup = martingale_diagnostic(*g, *always(0), *always(0), s0, 0.4, Direction::Super, 5, 200, 20, 1);
  EXPECT_TRUE(sub.holds());
  EXPECT_TRUE(sup.holds());
  for (const auto& row : sub.rows) EXPECT_NEAR(row.mean, 0.4, 1e-12);
}

TEST(Martingale, ImmediateLeak) {
  auto g = leak_loop(Rational(0));
  const StateId s0 = g->initial_state();
  auto zero = martingale_diagnostic(*g, *always(0), *always(0), s0, 0.0, Direction::Sub, 1, 150, 10, 1);
  EXPECT_TRUE(zero.holds());
  auto half = martingale_diagnostic(*g, *always(0), *always(0), s0, 0.5, Direction::Sub, 3, 150, 10, 1);
  EXPECT_FALSE(half.holds());
  EXPECT_EQ(half.rows[0].verdict, "violated");
  EXPECT_EQ(half.rows[1].verdict, "withheld");
}

TEST(Martingale, FloorAndParams) {
  auto g = leak_loop(Rational(1, 2));
  const StateId s0 = g->initial_state();
  try {
    martingale_diagnostic(*g, *always(0), *always(0), s0, 0.5, Direction::Sub, 3, 99, 10, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewReturns);
  }
  EXPECT_THROW(martingale_diagnostic(*g, *always(0), *always(0), s0, 1.0, Direction::Sub, 3, 200, 10, 1), Error);
  // geometric returns: 1/2 of the conditioned plays come back, the rest leak.
  auto d = martingale_diagnostic(*g, *always(0), *always(0), s0, 0.5, Direction::Sub, 2, 20000, 40, 3);
  EXPECT_NEAR(d.rows[0].mean, 0.25, 0.02);
}

TEST(Transience, IncreasingChainVersusCycle) {
  std::vector<std::int64_t> up, cyc;
  for (std::int64_t i = 0; i <= 20; ++i) {
    up.push_back(i);
    cyc.push_back(i % 2);
  }
  auto rep = transience_diagnostic({chain_play(up), chain_play(cyc)}, 20, 5);
  ASSERT_EQ(rep.transient.size(), 2u);
  EXPECT_TRUE(rep.transient[0]);
  EXPECT_FALSE(rep.transient[1]);
  EXPECT_EQ(rep.max_visits[0], 1u);
  EXPECT_EQ(rep.max_visits[1], 11u);
  EXPECT_DOUBLE_EQ(rep.transient_fraction, 0.5);

  try {
    transience_diagnostic({chain_play(up)}, 20, 20);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WindowTooLarge);
  }
}

TEST(FixingSweep, RetentionOnChain) {
  auto gb = leaky(one_way_chain(), LeakGrid::dyadic(40));
  const Truncation tr = truncate(*gb, 50);
  auto res = fixing_sweep(tr, 0.9, [](const StateId&) { return 1.0; });
  const auto& rep = res.report;
  EXPECT_EQ(rep.steps.size(), tr.interior.size());
  EXPECT_TRUE(rep.all_passed());
  for (std::size_t i = 1; i <= rep.steps.size(); ++i) {
    EXPECT_NEAR(rep.r_at(i), std::pow(0.9, std::pow(2.0, -static_cast<double>(i))), 1e-15);
    for (const auto& s : rep.states) EXPECT_GE(rep.value(i, s), rep.r_at(i) * rep.value(i - 1, s) - 1e-12);
  }
  EXPECT_EQ(rep.rank_of(rep.order.front()), 1u);
  EXPECT_EQ(rep.rank_of(bot_state()), 0u);
  ASSERT_TRUE(res.sigma);
  EXPECT_EQ(res.sigma->strategy_class(), StrategyClass::Memoryless);
}

TEST(FixingSweep, SingleStateAndTooSmall) {
  auto gb = leaky(one_way_chain(), LeakGrid::dyadic(10));
  auto one = fixing_sweep(truncate(*gb, 1), 0.9, [](const StateId&) { return 1.0; });
  EXPECT_EQ(one.report.steps.size(), 1u);
  try {
    Truncation empty = truncate(*gb, 1);
    empty.interior.clear();
    fixing_sweep(empty, 0.9, [](const StateId&) { return 1.0; });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TruncationTooSmall);
  }
  EXPECT_THROW(truncate(*gb, 0), Error);
}

TEST(FixingSweep, YTraceStaysInUnitInterval) {
  auto gb = leaky(one_way_chain(), LeakGrid::dyadic(20));
  const Truncation tr = truncate(*gb, 10);
  auto res = fixing_sweep(tr, 0.9, [](const StateId&) { return 1.0; });
  auto p = simulate(*tr.game, *res.sigma, *always(0), 60, 3, 0);
  auto y = fixing_y_trace(res.report, p);
  EXPECT_EQ(y.size(), p.length() + 1);
  for (double v : y) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}
