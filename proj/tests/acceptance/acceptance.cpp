// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "csg/best_response.hpp"
#include "csg/builtin_games.hpp"
#include "csg/chain.hpp"
#include "csg/config.hpp"
#include "csg/error.hpp"
#include "csg/experiments.hpp"
#include "csg/explicit_game.hpp"
#include "csg/fixing_sweep.hpp"
#include "csg/matrix_game.hpp"
#include "csg/montecarlo.hpp"
#include "csg/strategies.hpp"
#include "csg/synthesis.hpp"
#include "csg/transform.hpp"
#include "csg/value_iteration.hpp"

using namespace csg;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[fail] ";
    }
    detail << what << "; ";
  }
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

Rational two_pow_neg(int k) { return Rational(1) / csg::pow(Rational(2), static_cast<unsigned long>(k)); }

const StateSet kS = StateSet::of({bm::s}, "{s}");

// ---------------------------------------------------------------------------

void criterion1(Verdict& v) {
  auto game = simplified_bad_match();
  const ExplicitGame g = ExplicitGame::compile(*game, false);
  const std::uint32_t di = g.at(bm::d);
  constexpr std::int64_t kMax = 100;
  constexpr std::size_t kFloatIters = 10000;
  constexpr double kFloatTol = 1e-9;
  constexpr double kFinalMin = 0.9999;

  std::vector<Rational> exact(2 * kMax);
  ViOptions eo;
  eo.max_iters = 2 * kMax - 1;
  eo.tol = 0.0;
  eo.precision = Precision::Exact;
  eo.observe_exact = [&](std::size_t k, const std::vector<Rational>& x) { exact.at(k) = x[di]; };
  value_iteration(*game, Objective::reach(kS), eo);

  std::vector<double> flt(kFloatIters + 1);
  ViOptions fo;
  fo.max_iters = kFloatIters;
  fo.tol = 0.0;
  fo.observe = [&](std::size_t k, const std::vector<double>& x) { flt.at(k) = x[di]; };
  const ValueVector fv = value_iteration(*game, Objective::reach(kS), fo);

  // x_{k+1} = 1/(2 - x_k), and k/(k+1) in closed form
  Rational x = 0;
  bool law = true, closed = true;
  double worst = 0.0;
  for (std::int64_t k = 1; k <= kMax; ++k) {
    x = 1 / (2 - x);
    const Rational& got = exact[static_cast<std::size_t>(2 * k - 1)];
    law = law && got == x;
    closed = closed && got == Rational(k, k + 1);
    worst = std::max(worst, std::abs(flt[static_cast<std::size_t>(2 * k - 1)] - x.get_d()));
  }
  v.require(law, "exact odd iterates follow 1/(2-x) for k<=100");
  v.require(closed, "exact odd iterates equal k/(k+1)");
  v.require(worst <= kFloatTol, "float vs exact max error " + fmt(worst) + " <= 1e-9");
  const double final_d = fv.at(bm::d);
  v.require(final_d >= kFinalMin, "V(d) after 1e4 iterations " + fmt(final_d) + " >= 0.9999");
}

void criterion2(Verdict& v) {
  auto game = simplified_bad_match();
  const ExplicitGame g = ExplicitGame::compile(*game, false);
  const std::uint32_t di = g.at(bm::d);
  BuchiOptions bo;
  bo.inner_cap = 10000;
  std::vector<double> outer;
  bo.observe_outer = [&](std::size_t, const std::vector<double>& y) { outer.push_back(y[di]); };
  const ValueVector bv = buchi_value(*game, kS, bo);
  bool monotone = !outer.empty();
  for (std::size_t i = 1; i < outer.size(); ++i) monotone = monotone && outer[i] <= outer[i - 1];
  v.require(bv.at(bm::d) >= 0.999, "Buchi V(d) " + fmt(bv.at(bm::d)) + " >= 0.999");
  v.require(monotone, std::to_string(outer.size()) + " outer iterates nonincreasing");
}

void criterion3(Verdict& v) {
  const Rational eps(1, 5);
  constexpr std::int64_t kPhases = 6;
  auto game = simplified_bad_match();
  auto sigma = std::make_shared<const BadMatchOneBitMarkov>(eps);
  const OneBitSchedule& sched = sigma->schedule();
  std::int64_t horizon = 0;
  Rational loss = 0;
  for (std::int64_t i = 1; i <= kPhases; ++i) {
    // phase length: shortest even l with (1 - e_i)^(l/2) <= e_i, e_i = eps 2^-(i+1)
    const double e = Rational(eps * two_pow_neg(static_cast<int>(i) + 1)).get_d();
    const auto rounds = static_cast<std::int64_t>(std::ceil(std::log(1.0 / e) / e));
    v.require(sched.length(i) == 2 * rounds, "l_" + std::to_string(i) + " = " + std::to_string(sched.length(i)));
    horizon += sched.length(i);
    loss += eps * two_pow_neg(static_cast<int>(i));
  }
  BestResponseOptions opt;
  opt.horizon = horizon;
  opt.monitor = phase_visit_monitor(sched, kPhases, bm::s);
  const BestResponse br = best_response_min(*game, sigma, Objective::reach(kS), opt);
  const double bound = Rational(1 - loss).get_d();
  v.require(br.value >= bound - 1e-12,
            "Max value " + fmt(br.value) + " >= " + fmt(bound) + " over horizon " + std::to_string(horizon));
}

void criterion4(Verdict& v) {
  const Rational eps(1, 20);
  auto game = simplified_bad_match();
  std::vector<StrategyPtr> machines{constant_mix(Rational(1, 10)), constant_mix(Rational(1, 2)),
                                    constant_mix(Rational(9, 10)), periodic2(Rational(1, 2), Rational(1, 10))};
  for (const auto& sigma : machines) {
    const CounterResult cr = badmatch_min_counter_finite(*game, *sigma, eps);
    const ProductChain chain = product_chain(*game, *sigma, *cr.machine, true);
    const EventProb p = exact_event_prob(chain, ChainEvent::Buchi, chain.label(kS));
    v.require(chain.exact && p.exact <= eps, sigma->describe() + ": exact Buchi " + fmt(p.exact.get_d()) + " <= 0.05");
  }
}

void criterion5(Verdict& v) {
  const Rational eps(1, 20);
  auto game = simplified_bad_match();

  const SequenceSpec cs = SequenceSpec::constant(Rational(3, 10));
  const MarkovCounterResult cc = badmatch_min_counter_markov(cs, eps);
  v.require(cc.divergent, "constant series takes the divergent branch");
  // at d the step count is even, so the machine is the constant mix there
  const StrategyPtr markov = markov_sequence(cs, 2);
  const StrategyPtr mix = constant_mix(Rational(3, 10));
  bool same = true;
  for (std::int64_t n = 0; n < 1000; n += 2) same = same && markov->act(Mode{n, 0}, bm::d, 2) == mix->act(Mode{}, bm::d, 2);
  v.require(same, "Markov machine matches the mix at d");
  const ProductChain chain = product_chain(*game, *mix, *cc.machine, true);
  const EventProb pc = exact_event_prob(chain, ChainEvent::Buchi, chain.label(kS));
  v.require(pc.exact == 0, "constant case exact attainment " + fmt(pc.exact.get_d()) + " == 0");

  const SequenceSpec gs = SequenceSpec::geometric(Rational(1, 10), Rational(1, 2));
  const MarkovCounterResult gc = badmatch_min_counter_markov(gs, eps);
  // tail of 0.1 * 2^-n from K is 0.2 * 2^-K
  std::int64_t k = 0;
  while (Rational(1, 5) * two_pow_neg(static_cast<int>(k)) > eps) ++k;
  v.require(!gc.divergent && gc.K == k, "geometric switch index K = " + std::to_string(gc.K));
  constexpr std::size_t kPlays = 100000;
  constexpr std::int64_t kHorizon = 1000;
  const EventSpec ev = EventSpec::windowed_buchi(kS, 1, 100);
  const EstimationReport est = estimate(*game, *markov_sequence(gs, 2), *gc.machine, ev, kPlays, kHorizon, 20240601);
  v.require(est.n == kPlays && est.ci_high < 0.25,
            "geometric estimate " + fmt(est.estimate) + ", 95% CI [" + fmt(est.ci_low) + ", " + fmt(est.ci_high) +
                "] below 0.25");
}

void criterion6(Verdict& v) {
  const Config cfg = Config::parse(
      "experiment = exp_leaky_equiv\nseed = 7\n[game]\ncount = 20\nstates = 5\nfirst_seed = 1\n"
      "[leak]\neps = 1/20\nmax_exponent = 70\n[solver]\nhorizon = 60\n[check]\nslack = 1e-9\n");
  RunOptions opt;
  opt.write_files = false;
  const ExperimentOutput out = run_experiment_report(cfg, opt);
  const auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(out.header.begin(), out.header.end(), name) - out.header.begin());
  };
  const std::size_t cv = col("V_G"), ca = col("attained_leaky");
  std::size_t inside = 0;
  for (const auto& row : out.rows) {
    const double vg = std::stod(row.at(cv)), att = std::stod(row.at(ca));
    inside += (1.0 - 0.05) * vg <= att + 1e-9 && att <= vg + 1e-9;
  }
  v.require(out.rows.size() == 20, std::to_string(out.rows.size()) + " games");
  v.require(inside == 20, std::to_string(inside) + " of 20 inside (1-eps) V_G <= attained <= V_G");
  v.require(out.passed(), "experiment assertions " + (out.passed() ? std::string("all hold") : out.failures()));
}

void criterion7(Verdict& v) {
  const LeakGrid grid({Rational(1, 8), Rational(1, 4), Rational(1, 2)});
  const Rational eta(1, 8);
  auto gb = leaky(simplified_bad_match(), grid);
  auto sigma = leak_by_state(constant_mix(Rational(1, 2)), grid, [eta](const StateId&) { return eta; }, "leak 1/8");
  const ProductChain chain = product_chain(*gb, *sigma, *constant_mix(Rational(1, 2)), true);
  v.require(chain.exact, "exact chain with " + std::to_string(chain.size()) + " nodes");
  for (std::size_t n : {10u, 100u, 1000u}) {
    const EventProb tm = transient_mass_at(chain, n);
    const Rational bound = csg::pow(Rational(7, 8), static_cast<unsigned long>(n - 1));
    v.require(tm.exact <= bound, "n=" + std::to_string(n) + ": mass " + fmt(tm.value) + " <= " + fmt(bound.get_d()));
  }
}

void criterion8(Verdict& v) {
  const LeakGrid grid = LeakGrid::dyadic(40);
  auto gb = leaky(one_way_chain(), grid);
  const Rational chain_eta = two_pow_neg(40);
  auto eta = [chain_eta](const StateId& s) { return s == owc::trap ? Rational(1, 2) : chain_eta; };
  const StateId s0 = owc::chain(0);
  const StrategyPtr sigma_star =
      std::make_shared<const RestartOnReturn>(leak_by_state(always(0), grid, eta, "advance"), s0);
  const StrategyPtr pi = always(1);
  constexpr std::size_t kPlays = 50000;
  constexpr std::int64_t kHorizon = 200;
  constexpr std::uint64_t kSeed = 4242;

  EventSpec avoid;
  avoid.kind = EventSpec::Kind::AvoidBot;
  const EstimationReport vhat = estimate(*gb, *sigma_star, *pi, avoid, kPlays, kHorizon, kSeed + 1, 1, s0);
  const double u = 0.5 * vhat.estimate;
  v.require(vhat.estimate > 0.0 && vhat.estimate < 1.0, "V-hat(s0) = " + fmt(vhat.estimate) + ", u = " + fmt(u));

  const auto sub = martingale_diagnostic(*gb, *sigma_star, *pi, s0, u, Direction::Sub, 5, kPlays, kHorizon, kSeed);
  for (const auto& row : sub.rows) {
    // 3 sigma, recomputed here
    const bool holds = row.mean >= u - 3.0 * row.stderr_ - 1e-12;
    v.require(row.samples >= 100 && holds && row.verdict == "holds",
              "sub n=" + std::to_string(row.returns) + " mean " + fmt(row.mean) + " (" + std::to_string(row.samples) +
                  " samples)");
  }
  v.require(sub.rows.size() == 5, "five return counts");

  const StrategyPtr loop = leak_by_state(always(1), grid, eta, "loop");
  const auto sup = martingale_diagnostic(*gb, *loop, *pi, s0, u, Direction::Super, 5, kPlays, kHorizon, kSeed + 2);
  bool decided = false, violated = false;
  for (const auto& row : sup.rows) {
    if (row.samples < 100) continue;
    decided = true;
    violated = violated || row.mean > u + 3.0 * row.stderr_ + 1e-12;
  }
  v.require(sup.holds() && decided && !violated, "loop strategy gives the super-martingale verdict");
}

void criterion9(Verdict& v) {
  constexpr double kR = 0.9;
  auto gb = leaky(one_way_chain(), LeakGrid::dyadic(40));
  const Truncation tr = truncate(*gb, 50);
  const FixingSweepResult res = fixing_sweep(tr, kR, [](const StateId&) { return 1.0; });
  const FixingSweepReport& rep = res.report;
  // retention recomputed from the reported values
  std::size_t bad = 0;
  for (std::size_t i = 1; i <= rep.steps.size(); ++i) {
    const double f = std::pow(kR, std::pow(2.0, -static_cast<double>(i)));
    for (const auto& s : rep.states) bad += rep.value(i, s) < f * rep.value(i - 1, s) - 1e-12;
  }
  v.require(rep.steps.size() == tr.interior.size() && !rep.steps.empty(),
            std::to_string(rep.steps.size()) + " fixing steps");
  v.require(bad == 0 && rep.all_passed(), std::to_string(bad) + " retention violations");

  const StateId start = tr.game->initial_state();
  const double v0 = rep.value(0, start);
  const StateSet frontier = StateSet::of(tr.frontier, "frontier");
  const BestResponse br = best_response_min(*tr.game, res.sigma, Objective::reach(frontier));
  EventSpec ev;
  ev.kind = EventSpec::Kind::Reach;
  ev.target = frontier;
  const EstimationReport est = estimate(*tr.game, *res.sigma, *br.pi, ev, 20000, 20000, 99);
  v.require(est.ci_low >= kR * v0, "escape estimate " + fmt(est.estimate) + ", CI low " + fmt(est.ci_low) +
                                       " >= r*V = " + fmt(kR * v0));
}

void criterion10(Verdict& v) {
  std::mt19937_64 gen(10);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::size_t sp_ok = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> a(1 + gen() % 12);
    for (auto& x : a) x = unit(gen) * (t % 3 == 0 ? 1.0 : 0.2);
    double sum = 0, prod = 1;
    for (double x : a) {
      sum += x;
      prod *= 1 - x;
    }
    const SumProdCheck c = one_minus_sum_le_prod(a);
    sp_ok += c.holds && 1 - sum <= prod + 1e-12 && std::abs(c.lhs - (1 - sum)) < 1e-12 && std::abs(c.rhs - prod) < 1e-12;
  }
  v.require(sp_ok == 1000, std::to_string(sp_ok) + "/1000 sum-product inequalities");

  // continuous maps on [0,1]^n: squashed mixtures of the coordinates
  std::size_t tv_ok = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + t % 5;
    std::vector<std::vector<double>> w(n, std::vector<double>(n));
    std::vector<double> bias(n), exps(n);
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0;
      for (auto& x : w[i]) sum += (x = unit(gen));
      for (auto& x : w[i]) x /= sum;
      bias[i] = 0.3 * unit(gen);
      exps[i] = 0.5 + 1.5 * unit(gen);
    }
    VectorMap f = [=](const std::vector<double>& y) {
      std::vector<double> out(n);
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < n; ++j) s += w[i][j] * y[j];
        out[i] = std::min(1.0, bias[i] + (1 - bias[i]) * std::pow(s, exps[i]));
      }
      return out;
    };
    std::vector<double> x(n);
    for (auto& xi : x) xi = unit(gen);
    const std::vector<double> y = technical_vector(f, x);
    const std::vector<double> fy = f(y);
    bool ok = y.size() == n && technical_postcondition(f, x, y);
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (fy[i] > y[i]) ok = y[i] > x[i];
      else ok = std::abs(y[i] - x[i]) <= 1e-9;
    }
    tv_ok += ok;
  }
  v.require(tv_ok == 100, std::to_string(tv_ok) + "/100 technical-vector postconditions");

  std::uniform_int_distribution<int> dim(1, 6);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    Matrix<double> m(static_cast<std::size_t>(dim(gen)));
    const auto cols = static_cast<std::size_t>(dim(gen));
    for (auto& row : m) {
      row.resize(cols);
      for (auto& e : row) e = 2 * unit(gen) - 1;
    }
    const auto sol = solve_matrix_game(m);
    // best-reply gaps computed here
    double guarantee = 1e300, threat = -1e300;
    for (std::size_t j = 0; j < cols; ++j) {
      double s = 0;
      for (std::size_t i = 0; i < m.size(); ++i) s += sol.x[i] * m[i][j];
      guarantee = std::min(guarantee, s);
    }
    for (std::size_t i = 0; i < m.size(); ++i) {
      double s = 0;
      for (std::size_t j = 0; j < cols; ++j) s += m[i][j] * sol.y[j];
      threat = std::max(threat, s);
    }
    worst = std::max({worst, std::abs(guarantee - sol.value), std::abs(threat - sol.value),
                      duality_residual(m, sol.x, sol.y, sol.value)});
  }
  v.require(worst <= 1e-9, "matrix duality residual " + fmt(worst) + " <= 1e-9 over 1000 games");
}

struct Criterion {
  int id;
  double budget_s;
  std::function<void(Verdict&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> all = {
      {1, 1.0, criterion1},  {2, 10.0, criterion2}, {3, 30.0, criterion3},  {4, 5.0, criterion4},
      {5, 60.0, criterion5}, {6, 60.0, criterion6}, {7, 60.0, criterion7},  {8, 120.0, criterion8},
      {9, 120.0, criterion9}, {10, 30.0, criterion10},
  };
  int failed = 0;
  for (const auto& c : all) {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("threw ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    v.require(secs < c.budget_s, "runtime " + fmt(secs) + " s < " + fmt(c.budget_s) + " s");
    failed += !v.pass;
    std::cout << "criterion " << c.id << ": " << (v.pass ? "PASS" : "FAIL") << "  " << v.detail.str() << std::endl;
  }
  std::cout << (all.size() - static_cast<std::size_t>(failed)) << "/" << all.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
