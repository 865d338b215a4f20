#include <gtest/gtest.h>

#include <cmath>

#include "csg/best_response.hpp"
#include "csg/builtin_games.hpp"
#include "csg/chain.hpp"
#include "csg/params.hpp"
#include "csg/rng.hpp"
#include "csg/strategies.hpp"

using namespace csg;

namespace {

Mode at(std::int64_t n, LocalMode m = 0) { return Mode{n, m}; }

StateSet just(const StateId& s) { return StateSet::of({s}); }

}  // namespace

TEST(Machines, MemorylessKeepsMode) {
  auto m = constant_mix(Rational(1, 4));
  EXPECT_EQ(m->strategy_class(), StrategyClass::Memoryless);
  RngStream rng(1, 0);
  Mode mode{0, 0};
  for (int i = 0; i < 10; ++i) {
    mode = strategy_update(*m, mode, bm::d, 0, 1, bm::t, rng);
    EXPECT_EQ(mode.local, 0);
    EXPECT_EQ(mode.step, i + 1);
  }
  EXPECT_EQ(m->act(at(0), bm::d, 2).exact_prob_of(1), Rational(1, 4));
}

TEST(Machines, PeriodicIsFiniteMemoryDirac) {
  auto p = periodic2(Rational(1, 10), Rational(9, 10));
  EXPECT_TRUE(p->finite_memory());
  EXPECT_TRUE(p->dirac_updates());
  EXPECT_EQ(p->num_local_modes(), 2);
  auto next = p->update(at(0, 0), bm::d, 0, 0, bm::s);
  ASSERT_TRUE(next.is_dirac());
  EXPECT_EQ(p->act(at(1, next.outcome(0)), bm::d, 2).exact_prob_of(1), Rational(9, 10));
}

TEST(Machines, ModeOutOfRange) {
  auto p = periodic2(Rational(1, 2), Rational(1, 2));
  EXPECT_THROW(checked_act(*p, at(0, 7), bm::d, 2), Error);
  auto bad = std::make_shared<LambdaMachine>(
      "two actions", 1, false, true, [](const Mode&, const StateId&, std::size_t) { return Dist<ActionIndex>::dirac(3); });
  EXPECT_THROW(checked_act(*bad, at(0), bm::d, 2), Error);
}

TEST(OneBit, ScheduleLengths) {
  OneBitSchedule sch(Rational(1, 5));
  EXPECT_EQ(sch.eps_i(1), Rational(1, 20));
  EXPECT_EQ(sch.length(1), 120);
  for (std::int64_t i = 1; i <= 6; ++i) {
    const double e = sch.eps_i(i).get_d();
    const auto len = sch.length(i);
    // oracle: the shortest even length with (1 - e)^(len/2) <= e
    const auto rounds = static_cast<std::int64_t>(std::ceil(std::log(1.0 / e) / e));
    EXPECT_EQ(len, 2 * rounds) << "phase " << i;
    EXPECT_LE(std::pow(1.0 - e, static_cast<double>(len / 2)), e);
    EXPECT_EQ(sch.start(i + 1), sch.start(i) + len);
    EXPECT_EQ(sch.phase_of(sch.start(i)), i);
    EXPECT_EQ(sch.phase_of(sch.start(i + 1) - 1), i);
  }
  EXPECT_THROW(OneBitSchedule(Rational(1)), Error);
}

TEST(OneBit, BitSetsOnEnteringSAndResetsAtPhaseEnd) {
  auto m = badmatch_max_1bit_markov(Rational(1, 5));
  EXPECT_EQ(m->strategy_class(), StrategyClass::OneBitMarkov);
  EXPECT_EQ(m->act(at(0, 0), bm::d, 2).exact_prob_of(1), Rational(1, 20));
  EXPECT_EQ(m->update(at(0, 0), bm::d, 0, 1, bm::t), Dist<LocalMode>::dirac(0));
  EXPECT_EQ(m->update(at(0, 0), bm::d, 0, 0, bm::s), Dist<LocalMode>::dirac(1));
  EXPECT_EQ(m->act(at(2, 1), bm::d, 2), Dist<ActionIndex>::dirac(0));
  EXPECT_EQ(m->update(at(119, 1), bm::s, 0, 0, bm::d), Dist<LocalMode>::dirac(0));
}

TEST(CounterFinite, HalfMixFindsK) {
  auto g = simplified_bad_match();
  auto sigma = constant_mix(Rational(1, 2));
  auto res = badmatch_min_counter_finite(*g, *sigma, Rational(1, 10));
  EXPECT_GT(res.K, 0);
  EXPECT_LE(res.transient_mass, Rational(1, 20));
  auto chain = product_chain(*g, *sigma, *res.machine);
  EXPECT_LE(exact_event_prob(chain, ChainEvent::Buchi, chain.label_state(bm::s)).exact, Rational(1, 10));
}

TEST(CounterFinite, NeverPlayingOneAttainsNothing) {
  auto g = simplified_bad_match();
  auto res = badmatch_min_counter_finite(*g, *always(0), Rational(1, 20));
  auto chain = product_chain(*g, *always(0), *res.machine);
  EXPECT_EQ(exact_event_prob(chain, ChainEvent::Buchi, chain.label_state(bm::s)).exact, 0);
}

TEST(CounterFinite, Preconditions) {
  auto g = simplified_bad_match();
  EXPECT_THROW(badmatch_min_counter_finite(*g, *always(0), Rational(1)), Error);
  EXPECT_THROW(badmatch_min_counter_finite(*g, *badmatch_max_1bit_markov(Rational(1, 5)), Rational(1, 10)), Error);
}

TEST(CounterMarkov, Branches) {
  auto constant = badmatch_min_counter_markov(SequenceSpec::constant(Rational(3, 10)), Rational(1, 20));
  EXPECT_TRUE(constant.divergent);
  EXPECT_EQ(constant.machine->act(at(1000), bm::d, 2), Dist<ActionIndex>::dirac(0));

  auto r = SequenceSpec::geometric(Rational(1, 10), Rational(1, 2));
  auto geo = badmatch_min_counter_markov(r, Rational(1, 10));
  EXPECT_FALSE(geo.divergent);
  // oracle: tail from K of 0.1 * 2^-n is 0.2 * 2^-K
  std::int64_t k = 0;
  while (Rational(1, 5) / csg::pow(Rational(2), static_cast<unsigned long>(k)) > Rational(1, 10)) ++k;
  EXPECT_EQ(geo.K, k);

  auto zero = badmatch_min_counter_markov(SequenceSpec::constant(Rational(0)), Rational(1, 10));
  EXPECT_FALSE(zero.divergent);
  EXPECT_EQ(zero.K, 0);
  EXPECT_EQ(zero.machine->act(at(0), bm::d, 2), Dist<ActionIndex>::dirac(1));

  auto table = SequenceSpec::from_table({Rational(1, 2)}, std::nullopt);
  EXPECT_THROW(badmatch_min_counter_markov(table, Rational(1, 10)), Error);
}

TEST(SequenceSpec, ParseRoundTrip) {
  for (const char* text : {"constant:3/10", "geometric:1/10,1/2"}) {
    auto r = SequenceSpec::parse(text);
    EXPECT_EQ(SequenceSpec::parse(r.to_string()).at(5), r.at(5));
  }
  EXPECT_THROW(SequenceSpec::parse("wobbly:1"), Error);
}

TEST(RestartOnReturn, ReplaysInnerFromScratch) {
  auto inner = periodic2(Rational(0), Rational(1));
  RestartOnReturn r(inner, bm::d);
  Mode m{0, r.initial_mode()};
  EXPECT_EQ(r.act(m, bm::d, 2), Dist<ActionIndex>::dirac(0));
  auto m1 = r.update(m, bm::d, 0, 1, bm::t);
  Mode after{1, m1.outcome(0)};
  EXPECT_EQ(r.act(after, bm::t, 1).outcome(0), 0u);
  auto m2 = r.update(after, bm::t, 0, 0, bm::d);
  Mode back{2, m2.outcome(0)};
  EXPECT_EQ(r.act(back, bm::d, 2), Dist<ActionIndex>::dirac(0));
}

TEST(MakeStrategy, ByName) {
  auto s = make_strategy("constant_mix", Params::parse("q=1/3"));
  EXPECT_EQ(s->act(at(0), bm::d, 2).exact_prob_of(1), Rational(1, 3));
  EXPECT_THROW(make_strategy("nope", {}), Error);
}

TEST(BestResponse, AlwaysOneLoses) {
  auto g = simplified_bad_match();
  auto br = best_response_min(*g, always(1), Objective::buchi(just(bm::s)));
  EXPECT_NEAR(br.value, 0.0, 1e-12);
  EXPECT_EQ(br.pi->act(at(0), bm::d, 2), Dist<ActionIndex>::dirac(0));
}

TEST(BestResponse, AlwaysZeroCyclesThroughT) {
  auto g = simplified_bad_match();
  auto br = best_response_min(*g, always(0), Objective::buchi(just(bm::s)));
  EXPECT_NEAR(br.value, 0.0, 1e-12);
  EXPECT_EQ(br.pi->act(at(0), bm::d, 2), Dist<ActionIndex>::dirac(1));
}

TEST(BestResponse, ReachAgainstMixMatchesClosedForm) {
  // Max mixes q on action 1; Min's best reply to reach s is action 0 (q to l, else s), or
  // action 1 (t then back).  Against q = 1/4, action 0 gives 3/4 reach and action 1
  // gives 1/4 per round then repeats, i.e. 1: Min prefers 0.
  auto g = simplified_bad_match();
  auto br = best_response_min(*g, constant_mix(Rational(1, 4)), Objective::reach(just(bm::s)));
  EXPECT_NEAR(br.value, 0.75, 1e-9);
}

TEST(BestResponse, FiniteHorizonNeedsHorizon) {
  auto g = simplified_bad_match();
  BestResponseOptions opt;
  opt.horizon = 3;
  auto br = best_response_min(*g, always(0), Objective::reach(just(bm::s)), opt);
  EXPECT_NEAR(br.value, 0.0, 1e-12);
  auto cyc = best_response_min(*g, constant_mix(Rational(1, 2)), Objective::safety(just(bm::l)), opt);
  // Min plays 0 each round: l with 1/2 at steps 1 and 3
  EXPECT_NEAR(cyc.value, 0.25, 1e-12);
}
