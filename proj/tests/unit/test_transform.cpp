#include <gtest/gtest.h>

#include "csg/builtin_games.hpp"
#include "csg/montecarlo.hpp"
#include "csg/params.hpp"
#include "csg/strategies.hpp"
#include "csg/transform.hpp"

using namespace csg;

namespace {

// x: one Max action to y; y absorbing.  r: rows {x: 4/5, y: 1/5}.
std::shared_ptr<const TableGame> tiny() {
  GameBuilder b("tiny");
  StateId x = b.add_state("x"), y = b.add_state("y"), r = b.add_state("r");
  b.set_actions(x, {"go"}, {"go"});
  b.set_row(x, 0, 0, Dist<StateId>::dirac(y));
  b.set_actions(r, {"a", "b"}, {"c"});
  b.set_row(r, 0, 0, Dist<StateId>::exact({{x, Rational(4, 5)}, {y, Rational(1, 5)}}));
  b.set_row(r, 1, 0, Dist<StateId>::dirac(y));
  b.set_sink(y);
  b.set_initial(r);
  return b.build();
}

Mode at_step(std::int64_t n) { return Mode{n, 0}; }

}  // namespace

TEST(LeakGrid, DyadicAndFloor) {
  auto g = LeakGrid::dyadic(5);
  EXPECT_EQ(g.size(), 5u);
  EXPECT_EQ(g.eta(0), Rational(1, 32));
  EXPECT_EQ(g.eta(4), Rational(1, 2));
  EXPECT_EQ(g.floor_index(Rational(3, 16)), g.index_of(Rational(1, 8)));
  EXPECT_FALSE(g.floor_index(Rational(1, 64)).has_value());
  EXPECT_THROW(LeakGrid({Rational(1, 2), Rational(1, 4)}), Error);
  EXPECT_THROW(LeakGrid({Rational(1)}), Error);
}

TEST(Leaky, DiracRowLeaksHalf) {
  auto base = tiny();
  const StateId x = *base->find_state("x"), y = *base->find_state("y");
  LeakGrid grid({Rational(1, 4), Rational(1, 2)});
  auto g = leaky(base, grid);
  const ActionIndex a_half = LeakyGame::encode(0, grid.index_of(Rational(1, 2)), grid.size());
  auto row = g->kernel(x, a_half, 0, Precision::Exact);
  EXPECT_EQ(row.exact_prob_of(y), Rational(1, 2));
  EXPECT_EQ(row.exact_prob_of(bot_state()), Rational(1, 2));
}

TEST(Leaky, QuarterLeakScalesRow) {
  auto base = tiny();
  const StateId x = *base->find_state("x"), y = *base->find_state("y"), r = *base->find_state("r");
  LeakGrid grid({Rational(1, 4), Rational(1, 2)});
  auto g = leaky(base, grid);
  auto row = g->kernel(r, LeakyGame::encode(0, 0, 2), 0, Precision::Exact);
  EXPECT_EQ(row.exact_prob_of(x), Rational(3, 5));
  EXPECT_EQ(row.exact_prob_of(y), Rational(3, 20));
  EXPECT_EQ(row.exact_prob_of(bot_state()), Rational(1, 4));
}

TEST(Leaky, CountsActionsAndMakesBotAbsorbing) {
  auto base = tiny();
  const StateId r = *base->find_state("r"), y = *base->find_state("y");
  auto g = leaky(base, LeakGrid::dyadic(7));
  EXPECT_EQ(g->num_max_actions(r), 2u * 7u);
  EXPECT_EQ(g->num_min_actions(r), 1u);
  EXPECT_TRUE(g->is_sink(bot_state()));
  EXPECT_EQ(g->kernel(bot_state(), 0, 0), Dist<StateId>::dirac(bot_state()));
  // every state leaks, including the base sink
  EXPECT_FALSE(g->is_sink(y));
  EXPECT_EQ(g->kernel(y, LeakyGame::encode(0, 6, 7), 0, Precision::Exact).exact_prob_of(bot_state()), Rational(1, 2));
}

TEST(Leaky, EveryRowLeaksExactlyEta) {
  auto base = random_game(8);
  LeakGrid grid = LeakGrid::dyadic(4);
  auto g = leaky(base, grid);
  for (const auto& s : base->states()) {
    for (ActionIndex a = 0; a < base->num_max_actions(s); ++a)
      for (ActionIndex b = 0; b < base->num_min_actions(s); ++b)
        for (std::size_t j = 0; j < grid.size(); ++j) {
          auto orig = base->kernel(s, a, b, Precision::Exact);
          auto row = g->kernel(s, LeakyGame::encode(a, j, grid.size()), b, Precision::Exact);
          EXPECT_EQ(row.exact_prob_of(bot_state()), grid.eta(j));
          for (const auto& e : orig.entries())
            EXPECT_EQ(row.exact_prob_of(e.outcome), (1 - grid.eta(j)) * orig.exact_prob_of(e.outcome));
        }
  }
}

TEST(Leaky, BotCollision) {
  GameBuilder b("bot");
  StateId x = b.add_state("x", bot_state());
  b.set_sink(x);
  auto g = b.build();
  EXPECT_THROW(leaky(g, LeakGrid::dyadic(3)), Error);
}

TEST(LeakSchedule, StepZeroAndOne) {
  LeakGrid grid = LeakGrid::dyadic(20);
  auto base = tiny();
  auto g = leaky(base, grid);
  auto sigma = leak_schedule_transfer(always(0), Rational(1, 2), grid);
  const StateId r = *base->find_state("r");
  const std::size_t n = g->num_max_actions(r);
  auto a0 = sigma->act(at_step(0), r, n);
  auto a1 = sigma->act(at_step(1), r, n);
  ASSERT_TRUE(a0.is_dirac());
  EXPECT_EQ(grid.eta(a0.outcome(0) % grid.size()), Rational(1, 4));
  EXPECT_EQ(grid.eta(a1.outcome(0) % grid.size()), Rational(1, 8));
  EXPECT_EQ(a0.outcome(0) / grid.size(), 0u);
}

TEST(LeakSchedule, GridTooCoarse) {
  LeakGrid grid({Rational(1, 2)});
  auto base = tiny();
  auto g = leaky(base, grid);
  auto sigma = leak_schedule_transfer(always(0), Rational(1, 2), grid);
  EXPECT_THROW(sigma->act(at_step(0), *base->find_state("r"), 2), Error);
  auto fine = leak_schedule_transfer(always(0), Rational(1, 2), LeakGrid::dyadic(40));
  EXPECT_NO_THROW(fine->act(at_step(37), *base->find_state("r"), 80));
  EXPECT_THROW(fine->act(at_step(39), *base->find_state("r"), 80), Error);
  EXPECT_THROW(leak_schedule_transfer(always(0), Rational(1), grid), Error);
}

TEST(LeakSchedule, AvoidsBotWithProbabilityAtLeastOneMinusEps) {
  // the schedule needs 2^-(n+5) at step n
  LeakGrid grid = LeakGrid::dyadic(310);
  auto g = leaky(one_way_chain(), grid);
  auto sigma = leak_schedule_transfer(always(0), Rational(1, 10), grid);
  EventSpec avoid;
  avoid.kind = EventSpec::Kind::AvoidBot;
  auto rep = estimate(*g, *sigma, *always(1), avoid, 4000, 300, 17);
  EXPECT_GE(rep.ci_high, 0.9);
  EXPECT_GE(rep.estimate, 0.9 - (rep.ci_high - rep.ci_low));
}

TEST(CarryBack, RoundTripAndMerging) {
  LeakGrid grid = LeakGrid::dyadic(30);
  auto base = simplified_bad_match();
  auto g = leaky(base, grid);
  auto sigma = constant_mix(Rational(1, 3));
  auto back = carry_back(leak_schedule_transfer(sigma, Rational(1, 5), grid), g);
  for (std::int64_t n = 0; n < 25; ++n)
    EXPECT_EQ(back->act(at_step(n), bm::d, 2), sigma->act(at_step(n), bm::d, 2));

  // mixed over two leak levels of the same base action merges back
  std::unordered_map<StateId, Dist<ActionIndex>> table;
  table[bm::d] = Dist<ActionIndex>::exact({{LeakyGame::encode(1, 3, grid.size()), Rational(1, 4)},
                                           {LeakyGame::encode(1, 5, grid.size()), Rational(1, 4)},
                                           {LeakyGame::encode(0, 5, grid.size()), Rational(1, 2)}});
  auto mixed = std::make_shared<MemorylessMachine>("mixed", table);
  auto merged = carry_back(mixed, g)->act(at_step(0), bm::d, 2);
  EXPECT_EQ(merged, Dist<ActionIndex>::uniform({0, 1}));
  EXPECT_EQ(carry_back(mixed, g)->strategy_class(), StrategyClass::Memoryless);
}

TEST(Unfold, CounterAdvancesAndSinksMove) {
  auto base = simplified_bad_match();
  auto u = acyclic_unfold(base);
  auto row = u->kernel(UnfoldedGame::lift(bm::l, 4), 0, 0);
  EXPECT_EQ(row, Dist<StateId>::dirac(UnfoldedGame::lift(bm::l, 5)));
  auto play = simulate(*u, *constant_mix(Rational(1, 2)), *constant_mix(Rational(1, 2)), 200, 3, 0, false);
  std::set<StateId> seen;
  for (const auto& s : play.states()) EXPECT_TRUE(seen.insert(s).second) << "revisited " << s.to_string();
}

TEST(Unfold, MarkovCarryBack) {
  auto base = simplified_bad_match();
  auto u = acyclic_unfold(base);
  // a strategy on the unfolding that reads the counter
  auto on_u = std::make_shared<LambdaMachine>(
      "by counter", 1, false, true, [](const Mode&, const StateId& s, std::size_t) {
        return UnfoldedGame::counter_of(s) % 4 == 0 ? Dist<ActionIndex>::dirac(1) : Dist<ActionIndex>::dirac(0);
      });
  auto back = markov_carry_back(on_u);
  EXPECT_TRUE(back->uses_step_counter());
  EXPECT_EQ(back->act(at_step(8), bm::d, 2), Dist<ActionIndex>::dirac(1));
  EXPECT_EQ(back->act(at_step(9), bm::d, 2), Dist<ActionIndex>::dirac(0));
}

TEST(FixAction, DiracAndMixture) {
  auto base = tiny();
  const StateId r = *base->find_state("r"), x = *base->find_state("x"), y = *base->find_state("y");
  auto d = fix_action(base, r, Dist<ActionIndex>::dirac(1));
  EXPECT_EQ(d->num_max_actions(r), 1u);
  EXPECT_EQ(d->kernel(r, 0, 0), Dist<StateId>::dirac(y));
  auto m = fix_action(base, r, Dist<ActionIndex>::uniform({0, 1}));
  auto row = m->kernel(r, 0, 0, Precision::Exact);
  EXPECT_EQ(row.exact_prob_of(x), Rational(2, 5));
  EXPECT_EQ(row.exact_prob_of(y), Rational(3, 5));
  EXPECT_EQ(m->num_max_actions(x), 1u);
  EXPECT_THROW(fix_action(base, r, Dist<ActionIndex>::dirac(5)), Error);
}

TEST(Ladder, BinaryMinBranchingAndExits) {
  auto base = ladder_demo();
  const StateId c = base->initial_state();
  ASSERT_TRUE(base->min_branch_family(c).has_value());
  auto g = ladder_reduce(base, c);
  for (std::int64_t i = 0; i < 20; ++i) {
    EXPECT_LE(g->num_min_actions(ladder_state(i)), 2u);
    if (i >= 1) {
      EXPECT_LE(g->num_min_actions(ladder_coin(i)), 2u);
      EXPECT_EQ(g->kernel(ladder_state(i), 0, 0), Dist<StateId>::dirac((*base->min_branch_family(c))(i)));
      auto coin = g->kernel(ladder_coin(i), 0, 0, Precision::Exact);
      EXPECT_EQ(coin.exact_prob_of(ladder_state(i + 1)), Rational(1, 2));
      EXPECT_EQ(coin.exact_prob_of(ladder_state(i - 1)), Rational(1, 2));
    }
  }
  EXPECT_THROW(ladder_reduce(simplified_bad_match(), bm::d), Error);
}

TEST(Ladder, NeverExitingRevisitsLowRungs) {
  auto g = ladder_reduce(ladder_demo(), ladder_demo()->initial_state());
  auto play = simulate(*g, *always(0), *always(1), 20000, 5, 0);
  std::map<std::int64_t, int> visits;
  for (const auto& s : play.states())
    if (s.size() == 3 && s[0] == kLadderTag && s[2] == 0) ++visits[s[1]];
  for (std::int64_t i = 0; i <= 3; ++i) EXPECT_GT(visits[i], 10) << "rung " << i;
}

TEST(Delay, GoReproducesAndStayLoops) {
  GameBuilder b("turn");
  StateId x = b.add_state("x"), y = b.add_state("y"), z = b.add_state("z");
  b.set_actions(x, {"l", "r"}, {"only"});
  b.set_row(x, 0, 0, Dist<StateId>::dirac(y));
  b.set_row(x, 1, 0, Dist<StateId>::dirac(z));
  b.set_actions(y, {"only"}, {"p", "q"});
  b.set_row(y, 0, 0, Dist<StateId>::dirac(x));
  b.set_row(y, 0, 1, Dist<StateId>::dirac(z));
  b.set_sink(z);
  b.set_initial(x);
  auto base = b.build();
  auto g = min_delay_gadget(base);
  EXPECT_EQ(g->states().size(), base->states().size() + 1);
  EXPECT_EQ(g->initial_state(), delay_state(x));
  EXPECT_EQ(g->kernel(delay_state(x), 0, 1), Dist<StateId>::dirac(x));
  EXPECT_EQ(g->kernel(delay_state(x), 0, 0), Dist<StateId>::dirac(delay_state(x)));
  EXPECT_EQ(g->kernel(y, 0, 0), Dist<StateId>::dirac(delay_state(x)));
  EXPECT_THROW(min_delay_gadget(bad_match()), Error);
}

TEST(Truncate, OneWayChain) {
  auto t = truncate(*one_way_chain(), 10);
  EXPECT_EQ(t.interior.size(), 10u);
  EXPECT_FALSE(t.frontier.empty());
  for (const auto& f : t.frontier) EXPECT_TRUE(t.game->is_sink(f));
  EXPECT_THROW(truncate(*one_way_chain(), 0), Error);
}

TEST(ApplyTransform, ByName) {
  auto g = apply_transform(simplified_bad_match(), "leaky", Params::parse("max_exponent=5"));
  EXPECT_EQ(g->num_max_actions(bm::d), 10u);
  EXPECT_THROW(apply_transform(simplified_bad_match(), "nope", {}), Error);
}
