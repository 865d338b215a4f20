#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "csg/builtin_games.hpp"
#include "csg/chain.hpp"
#include "csg/explicit_game.hpp"
#include "csg/strategies.hpp"
#include "csg/synthesis.hpp"
#include "csg/value_iteration.hpp"

using namespace csg;

namespace {

// x -> s with probability 1, s absorbing target, z absorbing.
std::shared_ptr<const TableGame> line_game() {
  GameBuilder b("line");
  StateId x = b.add_state("x"), s = b.add_state("s"), z = b.add_state("z");
  b.set_actions(x, {"go"}, {"go"});
  b.set_row(x, 0, 0, Dist<StateId>::dirac(s));
  b.set_sink(s);
  b.set_target(s);
  b.set_sink(z);
  b.set_initial(x);
  return b.build();
}

StateSet just(const StateId& s) { return StateSet::of({s}); }

}  // namespace

TEST(ValueIteration, OneStepToAbsorbingTarget) {
  auto g = line_game();
  const StateId x = *g->find_state("x");
  ViOptions opt;
  opt.max_iters = 1;
  auto v = value_iteration(*g, Objective::reach(StateSet::targets_of(g)), opt);
  EXPECT_DOUBLE_EQ(v.at(x), 1.0);
  EXPECT_DOUBLE_EQ(v.at(*g->find_state("z")), 0.0);
}

TEST(ValueIteration, EmptyOrUnreachableTargetGivesZero) {
  auto g = simplified_bad_match();
  auto v = value_iteration(*g, Objective::reach(StateSet()));
  for (double x : v.values) EXPECT_EQ(x, 0.0);
  auto w = value_iteration(*g, Objective::reach(just(bm::l)));
  EXPECT_EQ(w.at(bm::s), 0.0);
}

TEST(ValueIteration, BadMatchOddIteratesFollowRecurrence) {
  auto g = simplified_bad_match();
  std::vector<Rational> at_d;
  ViOptions opt;
  opt.precision = Precision::Exact;
  opt.max_iters = 61;
  opt.tol = 0;
  const std::size_t d_index = 0;
  opt.observe_exact = [&](std::size_t, const std::vector<Rational>& v) { at_d.push_back(v[d_index]); };
  auto v = value_iteration(*g, Objective::reach(just(bm::s)), opt);
  ASSERT_EQ(v.states[d_index], bm::d);
  ASSERT_EQ(at_d.size(), 61u);
  // Independent oracle: local matrix [[1, x], [0, 1]] has value 1 / (2 - x).
  Rational x = 0;
  for (std::size_t k = 1; k <= 30; ++k) {
    x = 1 / (2 - x);
    EXPECT_EQ(at_d[2 * k - 2], Rational(k, k + 1)) << "iterate " << 2 * k - 1;
    EXPECT_EQ(x, Rational(k, k + 1));
  }
}

TEST(ValueIteration, FloatMatchesExact) {
  auto g = simplified_bad_match();
  ViOptions ef, ff;
  ef.precision = Precision::Exact;
  ef.max_iters = ff.max_iters = 41;
  ef.tol = ff.tol = 0;
  auto e = value_iteration(*g, Objective::reach(just(bm::s)), ef);
  auto f = value_iteration(*g, Objective::reach(just(bm::s)), ff);
  for (std::size_t i = 0; i < e.states.size(); ++i) EXPECT_NEAR(e.exact[i].get_d(), f.values[i], 1e-9);
  EXPECT_EQ(e.exact[e.index_of(bm::d)], Rational(21, 22));
}

TEST(ValueIteration, SafetyIsComplementOfReachOnTurnBasedChoice) {
  auto g = random_game(2);
  std::vector<StateId> bad;
  for (const auto& s : g->states())
    if (g->is_target(s)) bad.push_back(s);
  auto safe = value_iteration(*g, Objective::safety(StateSet::of(bad)));
  for (double x : safe.values) {
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 1.0);
  }
  for (const auto& s : bad) EXPECT_EQ(safe.at(s), 0.0);
}

TEST(Buchi, AllAbsorbingTargetsMatchesReach) {
  auto g = line_game();
  auto v = buchi_value(*g, StateSet::targets_of(g));
  EXPECT_NEAR(v.at(*g->find_state("x")), 1.0, 1e-12);
  EXPECT_EQ(v.at(*g->find_state("z")), 0.0);
  auto none = buchi_value(*g, StateSet());
  for (double x : none.values) EXPECT_EQ(x, 0.0);
}

TEST(Buchi, BadMatchNearOneWithMonotoneOuterIterates) {
  auto g = simplified_bad_match();
  BuchiOptions opt;
  opt.inner_cap = 2000;
  std::vector<double> outer;
  opt.observe_outer = [&](std::size_t, const std::vector<double>& v) { outer.push_back(v[0]); };
  auto v = buchi_value(*g, just(bm::s), opt);
  // Inner iterate 2k - 1 is k / (k + 1), so each of the outer rounds keeps
  // at least 1 - 1/1000 of the previous round.
  EXPECT_GE(v.at(bm::d), std::pow(1.0 - 1.0 / 1000, static_cast<double>(opt.outer_cap)));
  EXPECT_LT(v.at(bm::d), 1.0);
  for (std::size_t i = 1; i < outer.size(); ++i) EXPECT_LE(outer[i], outer[i - 1] + 1e-12);
}

TEST(Synthesis, EqualizerAtBadMatch) {
  auto g = simplified_bad_match();
  auto eg = ExplicitGame::compile(*g);
  std::vector<double> v(eg.size());
  v[eg.at(bm::s)] = 1.0;
  v[eg.at(bm::d)] = v[eg.at(bm::t)] = 2.0 / 3.0;
  v[eg.at(bm::l)] = 0.0;
  // Oracle: matrix [[1, 2/3], [0, 1]]; p + 0 = 2p/3 + (1 - p) gives p = 3/4.
  auto a = local_optimal_action(eg, eg.at(bm::d), v);
  EXPECT_NEAR(a.prob_of(0), 0.75, 1e-12);
}

TEST(Synthesis, DegenerateAndTurnBased) {
  auto g = simplified_bad_match();
  auto eg = ExplicitGame::compile(*g);
  std::vector<double> zero(eg.size(), 0.0);
  auto a = local_optimal_action(eg, eg.at(bm::d), zero);
  EXPECT_NEAR(a.prob_of(0), 0.5, 1e-12);
  EXPECT_NEAR(a.prob_of(1), 0.5, 1e-12);

  GameBuilder b("turn");
  StateId x = b.add_state("x"), good = b.add_state("good"), bad = b.add_state("bad");
  b.set_actions(x, {"l", "r"}, {"only"});
  b.set_row(x, 0, 0, Dist<StateId>::dirac(bad));
  b.set_row(x, 1, 0, Dist<StateId>::dirac(good));
  b.set_sink(good);
  b.set_sink(bad);
  b.set_target(good);
  b.set_initial(x);
  auto tg = b.build();
  auto v = value_iteration(*tg, Objective::reach(StateSet::targets_of(tg)));
  auto sigma = memoryless_from_values(*tg, v);
  auto act = sigma->act(Mode{}, x, 2);
  EXPECT_TRUE(act.is_dirac());
  EXPECT_EQ(act.outcome(0), 1u);
}

TEST(Synthesis, ReachSupportOnBadMatch) {
  auto g = simplified_bad_match();
  auto rs = memoryless_reach_with_support(*g, {bm::d}, just(bm::s), 0.1);
  auto act = rs.sigma0->act(Mode{}, bm::d, 2);
  EXPECT_GT(act.prob_of(1), 0.0);
  EXPECT_LT(act.prob_of(1), 0.2);
  EXPECT_TRUE(rs.verified);
  EXPECT_GE(rs.guarantee.at(0), rs.values.at(bm::d) - 0.1 - 1e-9);
}

TEST(Synthesis, ReachSupportTrivialAndVacuous) {
  auto g = line_game();
  const StateId x = *g->find_state("x"), z = *g->find_state("z");
  auto rs = memoryless_reach_with_support(*g, {x}, StateSet::targets_of(g), 0.1);
  EXPECT_NEAR(rs.guarantee.at(0), 1.0, 1e-12);
  auto none = memoryless_reach_with_support(*g, {z}, StateSet::targets_of(g), 0.1);
  EXPECT_EQ(none.values.at(z), 0.0);
}

TEST(TechnicalVector, IdentityAndConstant) {
  VectorMap id = [](const std::vector<double>& y) { return y; };
  std::vector<double> x{0.3, 0.6};
  auto y = technical_vector(id, x);
  ASSERT_EQ(y.size(), 2u);
  EXPECT_TRUE(technical_postcondition(id, x, y));

  VectorMap one = [](const std::vector<double>& y) { return std::vector<double>(y.size(), 1.0); };
  std::vector<double> half(3, 0.5);
  auto z = technical_vector(one, half);
  for (double zi : z) {
    EXPECT_GT(zi, 0.5);
    EXPECT_LT(zi, 1.0);
  }
  EXPECT_TRUE(technical_postcondition(one, half, z));
}

TEST(TechnicalVector, RandomMonotoneMaps) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 1 + trial % 5;
    std::vector<std::vector<double>> w(n, std::vector<double>(n));
    for (auto& row : w) {
      double sum = 0;
      for (auto& v : row) sum += (v = unit(gen));
      for (auto& v : row) v /= sum;
    }
    VectorMap f = [w](const std::vector<double>& y) {
      std::vector<double> out(y.size(), 0.0);
      for (std::size_t i = 0; i < y.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j) out[i] += w[i][j] * y[j];
      return out;
    };
    std::vector<double> x(n);
    for (auto& v : x) v = 0.1 + 0.8 * unit(gen);
    auto y = technical_vector(f, x);
    EXPECT_TRUE(technical_postcondition(f, x, y)) << "trial " << trial;
  }
}

TEST(SumProd, Examples) {
  auto a = one_minus_sum_le_prod(std::vector<double>{0.1, 0.2});
  EXPECT_NEAR(a.lhs, 0.7, 1e-15);
  EXPECT_NEAR(a.rhs, 0.72, 1e-15);
  EXPECT_TRUE(a.holds);
  auto b = one_minus_sum_le_prod(std::vector<double>{1.0});
  EXPECT_EQ(b.lhs, 0.0);
  EXPECT_EQ(b.rhs, 0.0);
  EXPECT_TRUE(b.holds);
  auto c = one_minus_sum_le_prod(std::vector<Rational>{Rational(1, 3), Rational(1, 2)});
  EXPECT_TRUE(c.holds);
}

TEST(Chain, MemorylessProductOnBadMatch) {
  auto g = simplified_bad_match();
  auto chain = product_chain(*g, *always(0), *always(0));
  // d -> s -> d under (0, 0).
  EXPECT_EQ(chain.size(), 2u);
  auto dec = bscc_decompose(chain);
  ASSERT_EQ(dec.bsccs.size(), 1u);
  EXPECT_EQ(dec.bsccs[0].size(), 2u);
  EXPECT_EQ(exact_event_prob(chain, ChainEvent::Buchi, chain.label_state(bm::s)).exact, 1);
}

TEST(Chain, AbsorbedAtLose) {
  auto g = simplified_bad_match();
  auto chain = product_chain(*g, *always(1), *always(0));
  EXPECT_EQ(exact_event_prob(chain, ChainEvent::Buchi, chain.label_state(bm::s)).exact, 0);
  auto dec = bscc_decompose(chain);
  ASSERT_EQ(dec.bsccs.size(), 1u);
  EXPECT_EQ(chain.nodes[dec.bsccs[0][0]].state, bm::l);
}

TEST(Chain, HalfMixEventuallyLoses) {
  auto g = simplified_bad_match();
  auto chain = product_chain(*g, *constant_mix(Rational(1, 2)), *always(0));
  EXPECT_EQ(exact_event_prob(chain, ChainEvent::Buchi, chain.label_state(bm::s)).exact, 0);
  EXPECT_EQ(exact_event_prob(chain, ChainEvent::Reach, chain.label_state(bm::l)).exact, 1);
  const std::uint32_t max_nodes = 4 * 1;
  EXPECT_LE(chain.size(), max_nodes);
}

TEST(Chain, TwoBsccsWithTransientRest) {
  // x -> lose (absorbing) or y, each 1/2; y <-> z forever.  Only x is transient.
  GameBuilder b("two");
  StateId x = b.add_state("x"), lose = b.add_state("lose"), y = b.add_state("y"), z = b.add_state("z");
  b.set_actions(x, {"a"}, {"b"});
  b.set_row(x, 0, 0, Dist<StateId>::uniform({lose, y}));
  b.set_actions(y, {"a"}, {"b"});
  b.set_row(y, 0, 0, Dist<StateId>::dirac(z));
  b.set_actions(z, {"a"}, {"b"});
  b.set_row(z, 0, 0, Dist<StateId>::dirac(y));
  b.set_sink(lose);
  b.set_initial(x);
  auto g = b.build();
  auto chain = product_chain(*g, *always(0), *always(0));
  auto dec = bscc_decompose(chain);
  ASSERT_EQ(dec.bsccs.size(), 2u);
  ASSERT_EQ(dec.transient.size(), 1u);
  EXPECT_EQ(chain.nodes[dec.transient[0]].state, x);
  EXPECT_EQ(exact_event_prob(chain, ChainEvent::Buchi, chain.label_state(y)).exact, Rational(1, 2));
}

TEST(Chain, TransientMassGeometric) {
  // x stays with 2/3, moves to absorbing y with 1/3: mass after K steps is (2/3)^K.
  GameBuilder b("geo");
  StateId x = b.add_state("x"), y = b.add_state("y");
  b.set_actions(x, {"a"}, {"b"});
  b.set_row(x, 0, 0, Dist<StateId>::exact({{x, Rational(2, 3)}, {y, Rational(1, 3)}}));
  b.set_sink(y);
  b.set_initial(x);
  auto g = b.build();
  auto chain = product_chain(*g, *always(0), *always(0));
  Rational prev = 2;
  for (std::size_t k = 0; k <= 12; ++k) {
    auto m = transient_mass_at(chain, k).exact;
    EXPECT_EQ(m, csg::pow(Rational(2, 3), k));
    EXPECT_LE(m, prev);
    prev = m;
  }
  EXPECT_EQ(first_step_with_transient_mass_le(chain, Rational(1, 10), 100), 6u);
  // visit x at least n times: (2/3)^(n-1)
  EXPECT_EQ(visit_at_least(chain, 0, 4).exact, csg::pow(Rational(2, 3), 3));
}

TEST(Chain, AbsorbingStartHasNoTransientMass) {
  auto g = line_game();
  auto chain = product_chain(*g, *always(0), *always(0), true, *g->find_state("s"));
  for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(transient_mass_at(chain, k).exact, 0);
}
