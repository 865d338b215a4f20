#include "csg/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "csg/best_response.hpp"
#include "csg/builtin_games.hpp"
#include "csg/chain.hpp"
#include "csg/error.hpp"
#include "csg/explicit_game.hpp"
#include "csg/fixing_sweep.hpp"
#include "csg/montecarlo.hpp"
#include "csg/strategies.hpp"
#include "csg/synthesis.hpp"
#include "csg/transform.hpp"
#include "csg/value_iteration.hpp"
#include "json.hpp"

namespace csg {

bool ExperimentOutput::passed() const {
  return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.passed; });
}

std::string ExperimentOutput::failures() const {
  std::string out;
  for (const auto& a : assertions)
    if (!a.passed) out += (out.empty() ? "" : ", ") + a.name;
  return out;
}

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string num(const Rational& q) { return to_string(q); }
std::string num(std::int64_t x) { return std::to_string(x); }
std::string num(std::size_t x) { return std::to_string(x); }

Rational dyadic_inv(int k) {
  mpz_class den = 1;
  den <<= static_cast<mp_bitcnt_t>(k);
  return Rational(mpz_class(1), den);
}

struct Ctx {
  const Config& config;
  ExperimentOutput& out;
  std::uint64_t seed;
  unsigned jobs;

  void check(const std::string& name, bool ok, const std::string& detail) {
    out.assertions.push_back({name, ok, detail});
    nlohmann::ordered_json j;
    j["record"] = "assertion";
    j["name"] = name;
    j["passed"] = ok;
    j["detail"] = detail;
    out.records.push_back(j.dump());
  }
  void row(std::vector<std::string> r) { out.rows.push_back(std::move(r)); }
  void record(std::string json) { out.records.push_back(std::move(json)); }
};

const std::set<std::string> kCommonKeys = {"output.dir", "montecarlo.jobs"};

std::set<std::string> keys(std::initializer_list<std::string> extra) {
  std::set<std::string> k = kCommonKeys;
  k.insert(extra.begin(), extra.end());
  return k;
}

// ---------------------------------------------------------------- badmatch

void exp_badmatch_value(Ctx& ctx) {
  const Config& c = ctx.config;
  c.require_only(keys({"solver.exact_odd", "solver.float_iters", "solver.float_tol", "solver.inner_cap",
                       "solver.outer_cap", "check.final_min", "check.buchi_min"}));
  const std::int64_t kmax = c.get_int("solver.exact_odd", 100);
  const std::int64_t float_iters = c.get_int("solver.float_iters", 10000);
  const double float_tol = c.get_double("solver.float_tol", 1e-9);
  const double final_min = c.get_double("check.final_min", 0.9999);
  const double buchi_min = c.get_double("check.buchi_min", 0.999);
  ctx.out.claim =
      "The reach value of d in the simplified Bad Match is 1, approached by the value iterates at rate k/(k+1); "
      "the Buchi fixpoint at d is 1 as well.";
  ctx.out.header = {"series", "index", "value", "reference", "abs_error"};

  auto game = simplified_bad_match();
  const StateSet target = StateSet::of({bm::s}, "{s}");
  const ExplicitGame g = ExplicitGame::compile(*game, false);
  const std::uint32_t di = g.at(bm::d);
  const std::size_t exact_iters = static_cast<std::size_t>(2 * kmax - 1);

  std::vector<Rational> exact_d(exact_iters + 1);
  ViOptions eo;
  eo.max_iters = exact_iters;
  eo.tol = 0.0;
  eo.precision = Precision::Exact;
  eo.observe_exact = [&](std::size_t k, const std::vector<Rational>& v) { exact_d.at(k) = v[di]; };
  value_iteration(*game, Objective::reach(target), eo);

  std::vector<double> float_d(static_cast<std::size_t>(float_iters) + 1, 0.0);
  ViOptions fo;
  fo.max_iters = static_cast<std::size_t>(float_iters);
  fo.tol = 0.0;
  fo.observe = [&](std::size_t k, const std::vector<double>& v) { float_d.at(k) = v[di]; };
  const ValueVector fv = value_iteration(*game, Objective::reach(target), fo);

  // x_k = 1/(2 - x_{k-1}) from x_0 = 0.
  Rational x = 0;
  bool exact_ok = true;
  double worst_float = 0.0;
  for (std::int64_t k = 1; k <= kmax; ++k) {
    x = 1 / (2 - x);
    const std::size_t it = static_cast<std::size_t>(2 * k - 1);
    const Rational& got = exact_d[it];
    exact_ok = exact_ok && got == x;
    const double err = std::abs(float_d[it] - x.get_d());
    worst_float = std::max(worst_float, err);
    ctx.row({"exact_odd_iterate", num(static_cast<std::int64_t>(it)), num(got), num(x), num(std::abs(Rational(got - x).get_d()))});
    ctx.row({"float_odd_iterate", num(static_cast<std::int64_t>(it)), num(float_d[it]), num(x), num(err)});
  }
  ctx.check("exact_odd_iterates", exact_ok,
            "iterate 2k-1 at d equals k/(k+1) for k <= " + std::to_string(kmax) + ": " + (exact_ok ? "yes" : "no"));
  ctx.check("float_matches_exact", worst_float <= float_tol,
            "max |float - exact| = " + num(worst_float) + " (tolerance " + num(float_tol) + ")");
  const double final_d = fv.at(bm::d);
  ctx.row({"float_final", num(float_iters), num(final_d), num(final_min), ""});
  ctx.check("final_iterate", final_d >= final_min,
            "V(d) after " + std::to_string(float_iters) + " iterations = " + num(final_d) + ", required >= " +
                num(final_min));

  BuchiOptions bo;
  bo.inner_cap = static_cast<std::size_t>(c.get_int("solver.inner_cap", 10000));
  bo.outer_cap = static_cast<std::size_t>(c.get_int("solver.outer_cap", 3));
  std::vector<double> outer;
  bo.observe_outer = [&](std::size_t, const std::vector<double>& y) { outer.push_back(y[di]); };
  const ValueVector bv = buchi_value(*game, target, bo);
  bool monotone = true;
  for (std::size_t i = 0; i < outer.size(); ++i) {
    if (i > 0 && outer[i] > outer[i - 1] + 1e-15) monotone = false;
    ctx.row({"buchi_outer", num(i + 1), num(outer[i]), "", ""});
  }
  ctx.row({"buchi_value", num(bv.outer_iterations), num(bv.at(bm::d)), num(buchi_min), ""});
  ctx.check("buchi_value", bv.at(bm::d) >= buchi_min,
            "Buchi V(d) = " + num(bv.at(bm::d)) + " with inner cap " + std::to_string(bo.inner_cap) + ", required >= " +
                num(buchi_min));
  ctx.check("buchi_outer_monotone", monotone && !outer.empty(),
            std::to_string(outer.size()) + " outer iterates, nonincreasing: " + (monotone ? "yes" : "no"));
}

void exp_badmatch_1bit(Ctx& ctx) {
  const Config& c = ctx.config;
  c.require_only(keys({"strategy.eps", "objective.phases", "check.slack"}));
  const Rational eps = c.get_rational("strategy.eps", Rational(1, 5));
  const std::int64_t phases = c.get_int("objective.phases", 6);
  const double slack = c.get_double("check.slack", 1e-12);
  ctx.out.claim =
      "Against the 1-bit Markov Max strategy with parameter eps, the best Min reply cannot stop the play from "
      "visiting s in every phase except with probability at most eps*2^-i in phase i.";
  ctx.out.header = {"phase", "start", "length", "eps_i", "loss_budget"};

  auto game = simplified_bad_match();
  auto sigma = std::make_shared<const BadMatchOneBitMarkov>(eps);
  const OneBitSchedule& sched = sigma->schedule();
  Rational budget = 0;
  for (std::int64_t i = 1; i <= phases; ++i) {
    const Rational loss = eps * dyadic_inv(static_cast<int>(i));
    budget += loss;
    ctx.row({num(i), num(sched.start(i)), num(sched.length(i)), num(sched.eps_i(i)), num(loss)});
  }
  const std::int64_t horizon = sched.start(phases + 1);
  BestResponseOptions opt;
  opt.horizon = horizon;
  opt.monitor = phase_visit_monitor(sched, phases, bm::s);
  const BestResponse br = best_response_min(*game, sigma, Objective::reach(StateSet::of({bm::s}, "{s}")), opt);
  const double bound = Rational(1 - budget).get_d();
  ctx.row({"value", num(horizon), num(static_cast<std::int64_t>(br.product_nodes)), num(br.value), num(bound)});
  ctx.out.notes.push_back("horizon " + std::to_string(horizon) + ", " + std::to_string(br.product_nodes) +
                          " product nodes, method " + br.method);
  ctx.check("phase_visits_value", br.value >= bound - slack,
            "Max value " + num(br.value) + " against the best reply, required >= " + num(bound));
}

// ---------------------------------------------------------------- counters

void exp_counter_finite(Ctx& ctx) {
  const Config& c = ctx.config;
  c.require_only(keys({"counter.eps", "strategy.memoryless_q", "strategy.periodic_q0", "strategy.periodic_q1",
                       "solver.cap"}));
  const Rational eps = c.get_rational("counter.eps", Rational(1, 20));
  const auto qs = c.get_rational_list("strategy.memoryless_q",
                                      std::vector<Rational>{Rational(1, 10), Rational(1, 2), Rational(9, 10)});
  const Rational q0 = c.get_rational("strategy.periodic_q0", Rational(1, 2));
  const Rational q1 = c.get_rational("strategy.periodic_q1", Rational(1, 10));
  const std::size_t cap = static_cast<std::size_t>(c.get_int("solver.cap", 1000000));
  ctx.out.claim =
      "Every finite-memory Max strategy in the simplified Bad Match is worthless for Buchi(s): the counter "
      "strategy (mix eps/2 for K steps, then action 1) holds the Buchi probability to eps.";
  ctx.out.header = {"strategy", "K", "transient_mass_at_K", "chain_nodes", "buchi_exact", "buchi_float"};

  auto game = simplified_bad_match();
  std::vector<StrategyPtr> machines;
  for (const auto& q : qs) machines.push_back(constant_mix(q));
  machines.push_back(periodic2(q0, q1));
  for (const auto& sigma : machines) {
    const CounterResult cr = badmatch_min_counter_finite(*game, *sigma, eps, cap);
    const ProductChain chain = product_chain(*game, *sigma, *cr.machine, true);
    const EventProb p = exact_event_prob(chain, ChainEvent::Buchi, chain.label(StateSet::of({bm::s})));
    ctx.row({sigma->describe(), num(cr.K), num(cr.transient_mass), num(chain.size()), num(p.exact), num(p.value)});
    ctx.check("buchi_le_eps[" + sigma->describe() + "]", p.exact <= eps,
              "exact Buchi attainment " + num(p.exact) + " (" + num(p.value) + "), required <= " + num(eps));
  }
}

void exp_counter_markov(Ctx& ctx) {
  const Config& c = ctx.config;
  c.require_only(keys({"counter.eps", "strategy.constant", "strategy.geometric_first", "strategy.geometric_ratio",
                       "montecarlo.plays", "montecarlo.horizon", "montecarlo.window", "montecarlo.min_visits",
                       "check.bound", "check.equivalence_steps"}));
  const Rational eps = c.get_rational("counter.eps", Rational(1, 20));
  const Rational constant = c.get_rational("strategy.constant", Rational(3, 10));
  const Rational first = c.get_rational("strategy.geometric_first", Rational(1, 10));
  const Rational ratio = c.get_rational("strategy.geometric_ratio", Rational(1, 2));
  const std::size_t plays = static_cast<std::size_t>(c.get_int("montecarlo.plays", 100000));
  const std::int64_t horizon = c.get_int("montecarlo.horizon", 1000);
  const std::int64_t window = c.get_int("montecarlo.window", 100);
  const std::size_t min_visits = static_cast<std::size_t>(c.get_int("montecarlo.min_visits", 1));
  const double bound = c.get_double("check.bound", 0.25);
  const std::int64_t eq_steps = c.get_int("check.equivalence_steps", 1000);
  ctx.out.claim =
      "Markov Max strategies in the simplified Bad Match are worthless: a divergent rate series loses to Min "
      "always playing 0, a convergent one loses to Min switching to 1 once the remaining series is below eps.";
  ctx.out.header = {"case", "quantity", "value", "detail"};

  auto game = simplified_bad_match();
  const StateSet s_set = StateSet::of({bm::s}, "{s}");

  // Divergent case. At d the step is even, so the Markov machine plays the
  // same mixed action at every visit and the play equals the memoryless mix.
  const SequenceSpec cs = SequenceSpec::constant(constant);
  const MarkovCounterResult cc = badmatch_min_counter_markov(cs, eps);
  ctx.check("constant_divergent_branch", cc.divergent, "series " + cs.to_string() + " diverges: " + (cc.divergent ? "yes" : "no"));
  const StrategyPtr markov = markov_sequence(cs, 2);
  const StrategyPtr mix = constant_mix(constant);
  bool same = true;
  for (std::int64_t n = 0; n < eq_steps && same; n += 2) {
    const Mode m{n, 0};
    same = markov->act(m, bm::d, 2).approx_equal(mix->act(Mode{}, bm::d, 2), 0.0);
  }
  ctx.check("constant_equivalence", same,
            "Markov machine equals the memoryless mix at d for even steps < " + std::to_string(eq_steps));
  const ProductChain chain = product_chain(*game, *mix, *cc.machine, true);
  const EventProb pc = exact_event_prob(chain, ChainEvent::Buchi, chain.label(s_set));
  ctx.row({"constant", "buchi_exact", num(pc.exact), cc.machine->describe()});
  ctx.check("constant_attainment_zero", pc.exact == 0, "exact Buchi attainment " + num(pc.exact) + ", required 0");

  // Convergent case.
  const SequenceSpec gs = SequenceSpec::geometric(first, ratio);
  const MarkovCounterResult gc = badmatch_min_counter_markov(gs, eps);
  ctx.row({"geometric", "K", num(gc.K), "least K with tail sum <= eps; switch at step 2K"});
  ctx.row({"geometric", "tail_at_K", num(gs.tail_from(gc.K)), gs.to_string()});
  const StrategyPtr sigma = markov_sequence(gs, 2);
  const EventSpec ev = EventSpec::windowed_buchi(s_set, min_visits, window);
  const EstimationReport est = estimate(*game, *sigma, *gc.machine, ev, plays, horizon, ctx.seed, ctx.jobs);
  ctx.record(est.to_json());
  ctx.row({"geometric", "estimate", num(est.estimate), ev.describe()});
  ctx.row({"geometric", "ci_low", num(est.ci_low), "Wilson 95%"});
  ctx.row({"geometric", "ci_high", num(est.ci_high), "Wilson 95%"});
  ctx.row({"geometric", "hoeffding", num(est.hoeffding), "half-width"});
  ctx.out.notes.push_back("Buchi is judged by the windowed proxy: " + ev.describe() + " within horizon " +
                          std::to_string(horizon));
  ctx.check("geometric_ci_below_bound", est.ci_high < bound,
            "95% CI [" + num(est.ci_low) + ", " + num(est.ci_high) + "] from " + std::to_string(plays) +
                " plays, required entirely below " + num(bound));
}

// ------------------------------------------------------------------- leaky

void exp_leaky_equiv(Ctx& ctx) {
  const Config& c = ctx.config;
  c.require_only(keys({"game.count", "game.states", "game.first_seed", "leak.eps", "leak.max_exponent",
                       "solver.horizon", "check.slack"}));
  const std::int64_t count = c.get_int("game.count", 20);
  const std::int64_t n_states = c.get_int("game.states", 5);
  const std::uint64_t first_seed = static_cast<std::uint64_t>(c.get_int("game.first_seed", static_cast<std::int64_t>(ctx.seed)));
  const Rational eps = c.get_rational("leak.eps", Rational(1, 20));
  const int max_exp = static_cast<int>(c.get_int("leak.max_exponent", 70));
  const std::int64_t horizon = c.get_int("solver.horizon", 60);
  const double slack = c.get_double("check.slack", 1e-9);
  ctx.out.claim =
      "Moving a Max strategy into the leaky game with leak eps*2^-(n+1) at step n keeps at least (1-eps) of its "
      "Safety value: (1-eps) V_G <= attained in the leaky game <= V_G.";
  ctx.out.header = {"game_seed", "V_G", "sigma_in_G", "attained_leaky", "lower", "passed"};

  const LeakGrid grid = LeakGrid::dyadic(max_exp);
  const double e = eps.get_d();
  std::size_t passed = 0;
  for (std::int64_t i = 0; i < count; ++i) {
    const std::uint64_t gs = first_seed + static_cast<std::uint64_t>(i);
    auto g = random_game(gs, static_cast<std::size_t>(n_states), 2, 2, 1);
    const StateSet bad = StateSet::targets_of(g);
    ViOptions vo;
    vo.tol = 1e-14;
    const ValueVector vg = value_iteration(*g, Objective::safety(bad), vo);
    const double v = vg.at(g->initial_state());
    auto sigma = memoryless_from_values(*g, vg);
    const BestResponse in_g = best_response_min(*g, sigma, Objective::safety(bad));
    auto gb = leaky(g, grid);
    const StrategyPtr sigma_bot = leak_schedule_transfer(sigma, eps, grid);
    BestResponseOptions opt;
    opt.horizon = horizon;
    opt.terminal = [&](const StateId& s, LocalMode) {
      if (s == bot_state()) return 0.0;
      return in_g.value_at(s, 0);
    };
    const StateSet bad_bot = set_union(bad, StateSet::of({bot_state()}, "{bot}"));
    const BestResponse att = best_response_min(*gb, sigma_bot, Objective::safety(bad_bot), opt);
    const double lower = (1.0 - e) * v;
    const bool ok = att.value >= lower - slack && att.value <= v + slack;
    passed += ok;
    ctx.row({num(gs), num(v), num(in_g.value), num(att.value), num(lower), ok ? "1" : "0"});
    ctx.check("bracket[seed=" + std::to_string(gs) + "]", ok,
              num(lower) + " <= " + num(att.value) + " <= " + num(v) + " (slack " + num(slack) + ")");
  }
  ctx.out.notes.push_back(std::to_string(passed) + " of " + std::to_string(count) + " games inside the bracket");
  ctx.out.notes.push_back("attainment: backward induction over " + std::to_string(horizon) +
                          " steps, continued by the attainment of sigma in G");
}

void exp_leaky_nullset(Ctx& ctx) {
  const Config& c = ctx.config;
  c.require_only(keys({"leak.grid", "leak.eta", "strategy.q", "opponent.q", "check.steps"}));
  const LeakGrid grid(c.get_rational_list("leak.grid", std::vector<Rational>{Rational(1, 8), Rational(1, 4), Rational(1, 2)}));
  const Rational eta = c.get_rational("leak.eta", Rational(1, 8));
  const Rational q = c.get_rational("strategy.q", Rational(1, 2));
  const Rational qo = c.get_rational("opponent.q", Rational(1, 2));
  std::vector<std::int64_t> steps;
  for (const auto& x : c.get_rational_list("check.steps", std::vector<Rational>{10, 100, 1000}))
    steps.push_back(static_cast<std::int64_t>(x.get_d()));
  ctx.out.claim =
      "In the leaky game a memoryless Max strategy leaks at least eta_min per step, so the mass not yet absorbed "
      "after n steps, and the probability of n visits to one state, are at most (1-eta_min)^(n-1).";
  ctx.out.header = {"quantity", "node", "n", "exact", "bound", "float"};

  auto gb = leaky(simplified_bad_match(), grid);
  const auto j = grid.floor_index(eta);
  if (!j) fail(ErrorCode::GridTooCoarse, "no grid value below eta");
  const Rational eta_used = grid.eta(*j);
  auto sigma = leak_by_state(constant_mix(q), grid, [eta](const StateId&) { return eta; },
                             "leak_by_state(constant_mix(" + num(q) + "), " + num(eta) + ")");
  const StrategyPtr pi = constant_mix(qo);
  const ProductChain chain = product_chain(*gb, *sigma, *pi, true);
  const Rational keep = 1 - eta_used;
  for (const std::int64_t n : steps) {
    const EventProb tm = transient_mass_at(chain, static_cast<std::size_t>(n));
    const Rational b = csg::pow(keep, static_cast<unsigned long>(n - 1));
    ctx.row({"transient_mass", "*", num(n), num(tm.exact), num(b), num(tm.value)});
    ctx.check("transient_mass[n=" + std::to_string(n) + "]", tm.exact <= b,
              "mass outside the bottom components after " + std::to_string(n) + " steps = " + num(tm.value) +
                  ", bound " + num(b.get_d()));
    bool visits_ok = true;
    for (std::uint32_t node = 0; node < chain.size(); ++node) {
      if (chain.nodes[node].state == bot_state()) continue;
      const EventProb va = visit_at_least(chain, node, static_cast<std::size_t>(n));
      visits_ok = visits_ok && va.exact <= b;
      ctx.row({"visit_at_least", chain.node_name(node), num(n), num(va.exact), num(b), num(va.value)});
    }
    ctx.check("visit_at_least[n=" + std::to_string(n) + "]", visits_ok,
              "every node visited n times with probability <= (1-eta)^(n-1)");
  }
}

// ---------------------------------------------------------------- fixing

void exp_fixing_sweep(Ctx& ctx) {
  const Config& c = ctx.config;
  c.require_only(keys({"game.max_exponent", "truncation.n", "sweep.r", "sweep.frontier_value", "montecarlo.plays",
                       "montecarlo.horizon"}));
  const int max_exp = static_cast<int>(c.get_int("game.max_exponent", 40));
  const std::size_t n_trunc = static_cast<std::size_t>(c.get_int("truncation.n", 50));
  const double r = c.get_double("sweep.r", 0.9);
  const double fv = c.get_double("sweep.frontier_value", 1.0);
  const std::size_t plays = static_cast<std::size_t>(c.get_int("montecarlo.plays", 20000));
  const std::int64_t horizon = c.get_int("montecarlo.horizon", 20000);
  ctx.out.claim =
      "Fixing locally optimal mixed actions one state at a time keeps each value within the factor r^(2^-i), "
      "and the resulting memoryless strategy escapes to the frontier with probability at least r times the "
      "initial value.";
  ctx.out.header = {"step", "state", "alpha", "factor", "value_at_start", "violations", "iterations"};

  auto gb = leaky(one_way_chain(), LeakGrid::dyadic(max_exp));
  const Truncation tr = truncate(*gb, n_trunc);
  const FixingSweepResult res = fixing_sweep(tr, r, [fv](const StateId&) { return fv; });
  const FixingSweepReport& rep = res.report;
  const StateId start = tr.game->initial_state();
  ctx.row({"0", "", "", "1", num(rep.value(0, start)), "0", ""});
  for (std::size_t i = 0; i < rep.steps.size(); ++i) {
    const FixingStep& st = rep.steps[i];
    std::string alpha;
    for (std::size_t k = 0; k < st.alpha.size(); ++k)
      alpha += (k ? ";" : "") + std::to_string(st.alpha.outcome(k)) + ":" + num(st.alpha.prob(k));
    ctx.row({num(i + 1), st.state.to_string(), alpha, num(st.factor), num(rep.value(i + 1, start)),
             num(st.violations.size()), num(st.iterations)});
  }
  ctx.check("retention", rep.all_passed(),
            std::to_string(rep.violations) + " retention violations over " + std::to_string(rep.steps.size()) +
                " fixing steps");

  const double v0 = rep.value(0, start);
  const StateSet frontier = StateSet::of(tr.frontier, "frontier");
  const BestResponse br = best_response_min(*tr.game, res.sigma, Objective::reach(frontier));
  EventSpec ev;
  ev.kind = EventSpec::Kind::Reach;
  ev.target = frontier;
  const EstimationReport est = estimate(*tr.game, *res.sigma, *br.pi, ev, plays, horizon, ctx.seed, ctx.jobs);
  ctx.record(est.to_json());
  ctx.row({"escape", "best_response", "", num(r * v0), num(br.value), "", ""});
  ctx.row({"escape", "estimate", "", num(r * v0), num(est.estimate), num(est.ci_low), num(est.ci_high)});
  ctx.check("escape_exact", br.value >= r * v0,
            "escape probability against the best reply " + num(br.value) + ", required >= r*v0 = " + num(r * v0));
  ctx.check("escape_estimate", est.ci_low >= r * v0,
            "95% CI [" + num(est.ci_low) + ", " + num(est.ci_high) + "] from " + std::to_string(plays) +
                " plays, required low end >= " + num(r * v0));

  // Y_n along a few plays, for the record.
  std::size_t monotone_plays = 0;
  const std::size_t traced = std::min<std::size_t>(plays, 200);
  for (std::size_t i = 0; i < traced; ++i) {
    const Play p = simulate(*tr.game, *res.sigma, *br.pi, horizon, ctx.seed, i);
    const std::vector<double> y = fixing_y_trace(rep, p);
    bool finite = std::all_of(y.begin(), y.end(), [](double t) { return t >= 0.0 && t <= 1.0; });
    monotone_plays += finite;
  }
  ctx.out.notes.push_back("Y_n traced on " + std::to_string(traced) + " plays; " + std::to_string(monotone_plays) +
                          " stayed in [0,1]");
}

// -------------------------------------------------------------- martingale

void exp_martingale(Ctx& ctx) {
  const Config& c = ctx.config;
  c.require_only(keys({"game.max_exponent", "leak.trap_eta", "leak.chain_exponent", "montecarlo.plays",
                       "montecarlo.value_plays", "montecarlo.horizon", "martingale.max_returns", "martingale.u_factor",
                       "transience.plays", "transience.window"}));
  const int max_exp = static_cast<int>(c.get_int("game.max_exponent", 40));
  const Rational trap_eta = c.get_rational("leak.trap_eta", Rational(1, 2));
  const int chain_exp = static_cast<int>(c.get_int("leak.chain_exponent", 40));
  const std::size_t plays = static_cast<std::size_t>(c.get_int("montecarlo.plays", 50000));
  const std::size_t value_plays = static_cast<std::size_t>(c.get_int("montecarlo.value_plays", 50000));
  const std::int64_t horizon = c.get_int("montecarlo.horizon", 200);
  const std::size_t max_returns = static_cast<std::size_t>(c.get_int("martingale.max_returns", 5));
  const double u_factor = c.get_double("martingale.u_factor", 0.5);
  const std::size_t tr_plays = static_cast<std::size_t>(c.get_int("transience.plays", 2000));
  const std::int64_t tr_window = c.get_int("transience.window", 50);
  ctx.out.claim =
      "With u below the value, the process X_n (u while the play keeps returning to s0, the transience indicator "
      "afterwards) is a sub-martingale under the restarting strategy; a looping strategy gives a super-martingale.";
  ctx.out.header = {"strategy", "direction", "returns", "samples", "mean", "stderr", "ci_low", "ci_high", "verdict"};

  const LeakGrid grid = LeakGrid::dyadic(max_exp);
  auto gb = leaky(one_way_chain(), grid);
  const Rational chain_eta = dyadic_inv(chain_exp);
  auto eta = [trap_eta, chain_eta](const StateId& s) { return s == owc::trap ? trap_eta : chain_eta; };
  const StateId s0 = owc::chain(0);
  const StrategyPtr advance = leak_by_state(always(0), grid, eta, "advance");
  const StrategyPtr sigma_star = std::make_shared<const RestartOnReturn>(advance, s0);
  const StrategyPtr pi = always(1);

  EventSpec avoid;
  avoid.kind = EventSpec::Kind::AvoidBot;
  const EstimationReport vhat = estimate(*gb, *sigma_star, *pi, avoid, value_plays, horizon, ctx.seed + 1, ctx.jobs, s0);
  ctx.record(vhat.to_json());
  const double u = u_factor * vhat.estimate;
  ctx.out.notes.push_back("V-hat(s0) = " + num(vhat.estimate) + " (Avoid bot within the horizon), u = " + num(u));

  auto emit = [&](const std::string& label, const MartingaleDiagnostic& d) {
    ctx.record(d.to_json());
    for (const auto& row : d.rows)
      ctx.row({label, std::string(direction_name(d.direction)), num(row.returns), num(row.samples), num(row.mean),
               num(row.stderr_), num(row.ci_low), num(row.ci_high), row.verdict});
  };

  const MartingaleDiagnostic sub =
      martingale_diagnostic(*gb, *sigma_star, *pi, s0, u, Direction::Sub, max_returns, plays, horizon, ctx.seed, ctx.jobs);
  emit("restart", sub);
  ctx.out.notes.push_back(sub.header);
  bool sub_ok = true;
  std::string detail;
  for (const auto& row : sub.rows) {
    sub_ok = sub_ok && row.samples >= 100 && row.verdict == "holds";
    detail += "n=" + std::to_string(row.returns) + ":" + row.verdict + "(" + std::to_string(row.samples) + ") ";
  }
  ctx.check("sub_martingale", sub_ok, detail + "; required: holds with >= 100 samples for n <= " + std::to_string(max_returns));

  const StrategyPtr loop = leak_by_state(always(1), grid, eta, "loop");
  const MartingaleDiagnostic sup =
      martingale_diagnostic(*gb, *loop, *pi, s0, u, Direction::Super, max_returns, plays, horizon, ctx.seed + 2, ctx.jobs);
  emit("loop", sup);
  bool sup_ok = sup.holds();
  detail.clear();
  for (const auto& row : sup.rows) detail += "n=" + std::to_string(row.returns) + ":" + row.verdict + " ";
  ctx.check("super_martingale_loop", sup_ok, detail);

  std::vector<Play> ps;
  ps.reserve(tr_plays);
  for (std::size_t i = 0; i < tr_plays; ++i) ps.push_back(simulate(*gb, *sigma_star, *pi, horizon, ctx.seed + 3, i, true, s0));
  const TransienceReport trep = transience_diagnostic(ps, horizon, tr_window);
  ctx.record(trep.to_json());
  ctx.out.notes.push_back("transience window indicator " + num(trep.transient_fraction) + " vs Avoid bot " +
                          num(trep.avoid_bot_fraction) + ", agreement: " + (trep.agreement ? "yes" : "no"));
}

// ------------------------------------------------------------------ ladder

void exp_ladder(Ctx& ctx) {
  const Config& c = ctx.config;
  c.require_only(keys({"ladder.depth", "ladder.walk_steps", "ladder.return_min", "delay.explore"}));
  const std::int64_t depth = c.get_int("ladder.depth", 50);
  const std::int64_t walk_steps = c.get_int("ladder.walk_steps", 4000);
  const double return_min = c.get_double("ladder.return_min", 0.95);
  const std::size_t explore = static_cast<std::size_t>(c.get_int("delay.explore", 2000));
  ctx.out.claim =
      "The ladder turns Min's infinite choice into binary choices: every s_i stays reachable by exiting at rung i, "
      "and never exiting is a recurrent walk. The delay gadget puts a Min waiting state before each Max state.";
  ctx.out.header = {"check", "index", "value", "detail"};

  GamePtr base = ladder_demo();
  const StateId c0{0};
  const auto family = base->min_branch_family(c0);
  GamePtr lad = ladder_reduce(base, c0);

  std::size_t max_branch = 0;
  std::unordered_set<StateId> seen{lad->initial_state()};
  std::deque<StateId> queue{lad->initial_state()};
  while (!queue.empty()) {
    const StateId x = queue.front();
    queue.pop_front();
    if (x.size() == 3 && x[0] == kLadderTag && x[1] > depth) continue;
    max_branch = std::max({max_branch, lad->num_max_actions(x), lad->num_min_actions(x)});
    for (ActionIndex a = 0; a < lad->num_max_actions(x); ++a)
      for (ActionIndex b = 0; b < lad->num_min_actions(x); ++b) {
        const Dist<StateId> row = lad->kernel(x, a, b);
        max_branch = std::max(max_branch, row.size());
        for (const auto& e : row.entries())
          if (seen.insert(e.outcome).second) queue.push_back(e.outcome);
      }
  }
  ctx.row({"branching", num(seen.size()), num(max_branch), "max of action counts and support sizes"});
  ctx.check("binary_branching", max_branch <= 2,
            "largest branching " + std::to_string(max_branch) + " over " + std::to_string(seen.size()) + " states");

  bool exits_ok = family.has_value();
  for (std::int64_t i = 1; i <= depth && exits_ok; ++i) {
    const StateId rung = ladder_state(i);
    std::size_t exit_b = 0;
    for (ActionIndex b = 0; b < lad->num_min_actions(rung); ++b)
      if (lad->min_action_name(rung, b) == "exit") exit_b = b;
    const Dist<StateId> row = lad->kernel(rung, 0, static_cast<ActionIndex>(exit_b));
    exits_ok = row.is_dirac() && row.outcome(0) == (*family)(i);
  }
  ctx.check("exit_reaches_s_i", exits_ok, "exit at rung i leads to s_i for i <= " + std::to_string(depth));

  // Never exiting: mass of first return to rung 1.
  std::unordered_map<StateId, double> mass{{ladder_state(1), 1.0}};
  double returned = 0.0;
  for (std::int64_t t = 0; t < walk_steps; ++t) {
    std::unordered_map<StateId, double> next;
    for (const auto& [x, p] : mass) {
      ActionIndex b = 0;
      for (ActionIndex k = 0; k < lad->num_min_actions(x); ++k)
        if (lad->min_action_name(x, k) == "continue") b = k;
      for (const Dist<StateId> row_ = lad->kernel(x, 0, b); const auto& e : row_.entries()) next[e.outcome] += p * e.prob;
    }
    if (auto it = next.find(ladder_state(1)); it != next.end()) {
      returned += it->second;
      next.erase(it);
    }
    mass = std::move(next);
    if (t + 1 == walk_steps / 4 || t + 1 == walk_steps / 2 || t + 1 == walk_steps)
      ctx.row({"return_to_rung1", num(t + 1), num(returned), "never exit"});
  }
  ctx.check("recurrent_walk", returned >= return_min,
            "return probability to rung 1 within " + std::to_string(walk_steps) + " steps = " + num(returned) +
                ", required >= " + num(return_min));

  GamePtr tb = turnbased_bad_match();
  GamePtr dg = min_delay_gadget(tb, explore);
  std::vector<StateId> states;
  std::unordered_set<StateId> dseen{dg->initial_state()};
  std::deque<StateId> dq{dg->initial_state()};
  bool entries_ok = true, gadget_ok = true;
  while (!dq.empty() && states.size() < explore) {
    const StateId x = dq.front();
    dq.pop_front();
    states.push_back(x);
    const bool is_delay = x.size() >= 2 && x[0] == kDelayTag;
    if (is_delay) {
      const StateId inner = x.suffix(1);
      gadget_ok = gadget_ok && dg->num_min_actions(x) == 2 && dg->num_max_actions(x) == 1 &&
                  dg->kernel(x, 0, 0).outcome(0) == x && dg->kernel(x, 0, 1).outcome(0) == inner;
    }
    for (ActionIndex a = 0; a < dg->num_max_actions(x); ++a)
      for (ActionIndex b = 0; b < dg->num_min_actions(x); ++b)
        for (const Dist<StateId> row_ = dg->kernel(x, a, b); const auto& e : row_.entries()) {
          const StateId& y = e.outcome;
          const bool y_delay = y.size() >= 2 && y[0] == kDelayTag;
          if (!y_delay && controller_at(*tb, y) == Controller::Max && x != delay_state(y)) entries_ok = false;
          if (dseen.insert(y).second) dq.push_back(y);
        }
  }
  const bool turn_based = check_turn_based(*dg, states);
  ctx.row({"delay_states_explored", num(states.size()), turn_based ? "1" : "0", "turn-based"});
  ctx.check("delay_turn_based", turn_based, "delay game is turn-based on " + std::to_string(states.size()) + " states");
  ctx.check("delay_entries", entries_ok && gadget_ok,
            "every Max state is entered through its waiting state, which offers stay and go");
}

using ExperimentFn = void (*)(Ctx&);

const std::map<std::string, ExperimentFn>& registry() {
  static const std::map<std::string, ExperimentFn> r = {
      {"exp_badmatch_value", exp_badmatch_value}, {"exp_badmatch_1bit", exp_badmatch_1bit},
      {"exp_counter_finite", exp_counter_finite}, {"exp_counter_markov", exp_counter_markov},
      {"exp_leaky_equiv", exp_leaky_equiv},       {"exp_leaky_nullset", exp_leaky_nullset},
      {"exp_fixing_sweep", exp_fixing_sweep},     {"exp_martingale", exp_martingale},
      {"exp_ladder", exp_ladder},
  };
  return r;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + p.string());
  out << text;
}

void write_files(const ExperimentOutput& out, const Config& config) {
  namespace fs = std::filesystem;
  const fs::path dir(out.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / "results.csv", results_csv(out));
  std::string jsonl;
  for (const auto& r : out.records) jsonl += r + "\n";
  write_text(dir / "records.jsonl", jsonl);

  nlohmann::ordered_json meta;
  meta["experiment"] = out.experiment;
  meta["version"] = CSG_VERSION;
  meta["seed"] = out.seed;
  meta["jobs"] = out.jobs;
  meta["wall_time_s"] = out.wall_seconds;
  meta["passed"] = out.passed();
  auto asserts = nlohmann::ordered_json::array();
  for (const auto& a : out.assertions) asserts.push_back({{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
  meta["assertions"] = asserts;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config.values()) cfg[k] = v;
  meta["config"] = cfg;
  write_text(dir / "meta.json", meta.dump(2) + "\n");

  std::ostringstream s;
  s << out.experiment << "\n\n";
  s << "Claim checked: " << out.claim << "\n\n";
  for (const auto& a : out.assertions) s << (a.passed ? "PASS " : "FAIL ") << a.name << ": " << a.detail << "\n";
  if (!out.notes.empty()) {
    s << "\n";
    for (const auto& n : out.notes) s << "note: " << n << "\n";
  }
  s << "\n" << (out.passed() ? "all assertions passed" : "failed: " + out.failures()) << "\n";
  write_text(dir / "summary.txt", s.str());
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, f] : registry()) v.push_back(k);
    return v;
  }();
  return names;
}

std::string output_dir_for(const Config& config, const RunOptions& options) {
  if (options.out_dir) return *options.out_dir;
  if (const char* env = std::getenv("CSG_OUT_DIR"); env && *env) return env;
  if (config.has("output.dir")) return config.get_string("output.dir");
  return "out/" + config.experiment();
}

std::string results_csv(const ExperimentOutput& out) {
  std::string text;
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) text += (i ? "," : "") + csv_field(fields[i]);
    text += "\n";
  };
  line(out.header);
  for (const auto& r : out.rows) line(r);
  return text;
}

ExperimentOutput run_experiment_report(const Config& config, const RunOptions& options) {
  auto it = registry().find(config.experiment());
  if (it == registry().end()) fail(ErrorCode::ConfigInvalid, "unknown experiment '" + config.experiment() + "'");
  ExperimentOutput out;
  out.experiment = config.experiment();
  out.seed = options.seed.value_or(config.seed());
  Config effective = config;
  if (options.seed) effective.set_seed(*options.seed);
  std::int64_t jobs = options.jobs ? static_cast<std::int64_t>(*options.jobs) : config.get_int("montecarlo.jobs", 1);
  if (jobs < 1) fail(ErrorCode::ConfigInvalid, "jobs must be positive");
  out.jobs = static_cast<unsigned>(jobs);
  out.out_dir = output_dir_for(config, options);
  const auto t0 = std::chrono::steady_clock::now();
  Ctx ctx{effective, out, out.seed, out.jobs};
  it->second(ctx);
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (options.write_files) write_files(out, effective);
  return out;
}

ExperimentOutput run_experiment(const Config& config, const RunOptions& options) {
  ExperimentOutput out = run_experiment_report(config, options);
  if (!out.passed()) fail(ErrorCode::AssertionFailed, out.experiment + ": " + out.failures());
  return out;
}

}  // namespace csg
