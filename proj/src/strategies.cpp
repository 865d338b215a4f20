#include "csg/strategies.hpp"

#include <cmath>
#include <deque>
#include <mutex>

#include "csg/builtin_games.hpp"
#include "csg/chain.hpp"
#include "csg/error.hpp"

namespace csg {

namespace {

Rational pow2_inv(std::int64_t k) {
  mpz_class den = 1;
  den <<= static_cast<mp_bitcnt_t>(k);
  return Rational(mpz_class(1), den);
}

void check_eps(const Rational& eps) {
  if (eps <= 0 || eps >= 1) fail(ErrorCode::BadEpsilon, "epsilon must lie in (0,1), got " + to_string(eps));
}

}  // namespace

// ------------------------------------------------------------------ 1-bit

OneBitSchedule::OneBitSchedule(const Rational& eps) : eps_(eps) {
  check_eps(eps);
  starts_.push_back(0);
}

Rational OneBitSchedule::eps_i(std::int64_t i) const { return eps_ * pow2_inv(i + 1); }

std::int64_t OneBitSchedule::length(std::int64_t i) const {
  const double e = eps_i(i).get_d();
  return 2 * static_cast<std::int64_t>(std::ceil(std::log(1.0 / e) / e));
}

void OneBitSchedule::extend_to(std::int64_t i) const {
  while (static_cast<std::int64_t>(starts_.size()) < i) {
    const std::int64_t last = static_cast<std::int64_t>(starts_.size());
    starts_.push_back(starts_.back() + length(last));
  }
}

std::int64_t OneBitSchedule::start(std::int64_t i) const {
  if (i < 1) fail(ErrorCode::BadParams, "phases are numbered from 1");
  extend_to(i);
  return starts_[static_cast<std::size_t>(i - 1)];
}

std::int64_t OneBitSchedule::phase_of(std::int64_t step) const {
  std::int64_t i = 1;
  while (start(i + 1) <= step) ++i;
  return i;
}

BadMatchOneBitMarkov::BadMatchOneBitMarkov(const Rational& eps, StateId s_state)
    : schedule_(eps), s_state_(s_state) {}

std::string BadMatchOneBitMarkov::describe() const { return "badmatch_1bit_markov(" + to_string(schedule_.eps()) + ")"; }

std::optional<std::string> BadMatchOneBitMarkov::recipe() const {
  return "constructor badmatch_1bit_markov eps=" + to_string(schedule_.eps());
}

Dist<ActionIndex> BadMatchOneBitMarkov::act(const Mode& m, const StateId&, std::size_t num_actions) const {
  if (num_actions < 2 || m.local == 1) return Dist<ActionIndex>::dirac(0);
  return bernoulli_action(schedule_.eps_i(schedule_.phase_of(m.step)));
}

// The bit is set on entering s; a new phase starts from 0 unless it starts at s.
Dist<LocalMode> BadMatchOneBitMarkov::update(const Mode& m, const StateId&, ActionIndex, ActionIndex,
                                             const StateId& next) const {
  const bool entered = next == s_state_;
  if (schedule_.phase_of(m.step + 1) != schedule_.phase_of(m.step)) return Dist<LocalMode>::dirac(entered ? 1 : 0);
  return Dist<LocalMode>::dirac(m.local == 1 || entered ? 1 : 0);
}

StrategyPtr badmatch_max_1bit_markov(const Rational& eps) { return std::make_shared<BadMatchOneBitMarkov>(eps); }

// --------------------------------------------------------------- sequences

SequenceSpec SequenceSpec::parse(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) fail(ErrorCode::BadParams, "sequence spec needs kind:values");
  std::string kind(text.substr(0, colon));
  std::string body(text.substr(colon + 1));
  auto split = [](const std::string& s) {
    std::vector<Rational> out;
    std::size_t start = 0;
    while (start <= s.size()) {
      auto c = s.find(',', start);
      std::string item = s.substr(start, c == std::string::npos ? std::string::npos : c - start);
      if (!item.empty()) out.push_back(parse_rational(item));
      if (c == std::string::npos) break;
      start = c + 1;
    }
    return out;
  };
  SequenceSpec spec;
  if (kind == "constant") {
    spec = constant(parse_rational(body));
  } else if (kind == "geometric") {
    auto v = split(body);
    if (v.size() != 2) fail(ErrorCode::BadParams, "geometric sequence needs first,ratio");
    spec = geometric(v[0], v[1]);
  } else if (kind == "table") {
    std::optional<Rational> tail;
    if (auto semi = body.find(';'); semi != std::string::npos) {
      std::string rest = body.substr(semi + 1);
      body = body.substr(0, semi);
      if (rest.rfind("tail=", 0) != 0) fail(ErrorCode::BadParams, "table tail must read tail=<bound>");
      tail = parse_rational(rest.substr(5));
    }
    spec = from_table(split(body), tail);
  } else {
    fail(ErrorCode::BadParams, "unknown sequence kind '" + kind + "'");
  }
  for (std::int64_t n = 0; n < 4; ++n) {
    Rational r = spec.at(n);
    if (r < 0 || r > 1) fail(ErrorCode::BadParams, "sequence values must lie in [0,1]");
  }
  if (spec.kind == Kind::Geometric && spec.ratio < 0) fail(ErrorCode::BadParams, "geometric ratio must be >= 0");
  if (spec.kind == Kind::Geometric && spec.ratio > 1 && spec.first > 0)
    fail(ErrorCode::BadParams, "geometric sequence leaves [0,1]");
  return spec;
}

std::string SequenceSpec::to_string() const {
  switch (kind) {
    case Kind::Constant: return "constant:" + csg::to_string(first);
    case Kind::Geometric: return "geometric:" + csg::to_string(first) + "," + csg::to_string(ratio);
    case Kind::Table: {
      std::string out = "table:";
      for (std::size_t i = 0; i < table.size(); ++i) out += (i ? "," : "") + csg::to_string(table[i]);
      if (tail_bound) out += ";tail=" + csg::to_string(*tail_bound);
      return out;
    }
  }
  return "";
}

Rational SequenceSpec::at(std::int64_t n) const {
  switch (kind) {
    case Kind::Constant: return first;
    case Kind::Geometric: return first * pow(ratio, static_cast<unsigned long>(n));
    case Kind::Table: return n < static_cast<std::int64_t>(table.size()) ? table[static_cast<std::size_t>(n)] : Rational(0);
  }
  return 0;
}

bool SequenceSpec::diverges() const {
  switch (kind) {
    case Kind::Constant: return first > 0;
    case Kind::Geometric: return first > 0 && ratio >= 1;
    case Kind::Table:
      if (!tail_bound) fail(ErrorCode::UndecidableTail, "table sequence has no tail bound");
      return false;
  }
  return false;
}

Rational SequenceSpec::tail_from(std::int64_t k) const {
  if (diverges()) fail(ErrorCode::InvariantViolated, "divergent sequence has no finite tail");
  switch (kind) {
    case Kind::Constant: return 0;
    case Kind::Geometric:
      if (first == 0) return 0;
      return first * pow(ratio, static_cast<unsigned long>(k)) / (1 - ratio);
    case Kind::Table: {
      Rational t = *tail_bound;
      for (std::size_t n = static_cast<std::size_t>(std::max<std::int64_t>(k, 0)); n < table.size(); ++n) t += table[n];
      return t;
    }
  }
  return 0;
}

StrategyPtr markov_sequence(const SequenceSpec& r, std::int64_t stride) {
  if (stride < 1) fail(ErrorCode::BadParams, "stride must be >= 1");
  // r_i is recomputed for every step of every play otherwise.
  struct Cache {
    std::mutex mu;
    std::deque<Dist<ActionIndex>> rows;
  };
  auto cache = std::make_shared<Cache>();
  auto m = std::make_shared<LambdaMachine>(
      "markov_sequence(" + r.to_string() + ")", 1, true, true,
      [r, stride, cache](const Mode& mode, const StateId&, std::size_t n) {
        if (n < 2) return Dist<ActionIndex>::dirac(0);
        const auto i = static_cast<std::size_t>(mode.step / stride);
        std::lock_guard lock(cache->mu);
        while (cache->rows.size() <= i) cache->rows.push_back(bernoulli_action(r.at(static_cast<std::int64_t>(cache->rows.size()))));
        return cache->rows[i];
      });
  m->set_recipe("constructor markov_sequence r=" + r.to_string() + " stride=" + std::to_string(stride));
  return m;
}

// ------------------------------------------------------------ counters

StrategyPtr counter_switch(std::int64_t K, Dist<ActionIndex> before, ActionIndex after_action) {
  if (K < 0) fail(ErrorCode::BadParams, "counter length must be >= 0");
  auto after = Dist<ActionIndex>::dirac(after_action);
  std::string label = "counter_switch(K=" + std::to_string(K) + ")";
  auto m = std::make_shared<LambdaMachine>(
      label, K + 1, false, true,
      [K, before, after](const Mode& mode, const StateId&, std::size_t n) {
        if (n < 2) return Dist<ActionIndex>::dirac(0);
        return mode.local < K ? before : after;
      },
      [K](const Mode& mode, const StateId&, ActionIndex, ActionIndex, const StateId&) {
        return Dist<LocalMode>::dirac(std::min<LocalMode>(mode.local + 1, K));
      });
  if (before.has_exact() && before.size() <= 2) {
    m->set_recipe("constructor counter_switch K=" + std::to_string(K) + " q=" + to_string(before.exact_prob_of(1)) +
                  " after=" + std::to_string(after_action));
  }
  return m;
}

CounterResult badmatch_min_counter_finite(const Game& game, const StrategyMachine& sigma, const Rational& eps,
                                          std::size_t cap) {
  check_eps(eps);
  if (!sigma.finite_memory())
    fail(ErrorCode::NotFiniteMemory, "counter construction needs a finite-memory Max strategy, got " + sigma.describe());
  const Rational eps1 = eps / 2, eps2 = eps / 2;
  Dist<ActionIndex> mix = bernoulli_action(eps1);
  StrategyPtr pi1 = constant_mix(eps1);
  ProductChain chain = product_chain(game, sigma, *pi1, true);
  auto k = first_step_with_transient_mass_le(chain, eps2, cap);
  if (!k) fail(ErrorCode::KNotFound, "transient mass stays above " + to_string(eps2) + " for " + std::to_string(cap) + " steps");
  CounterResult out;
  out.K = static_cast<std::int64_t>(*k);
  out.transient_mass = transient_mass_at(chain, *k).exact;
  out.machine = counter_switch(out.K, mix, 1);
  return out;
}

StrategyPtr markov_switch(std::int64_t switch_step) {
  auto m = std::make_shared<LambdaMachine>(
      "markov_switch(" + std::to_string(switch_step) + ")", 1, true, true,
      [switch_step](const Mode& mode, const StateId&, std::size_t n) {
        if (n < 2) return Dist<ActionIndex>::dirac(0);
        return Dist<ActionIndex>::dirac(mode.step < switch_step ? 0 : 1);
      });
  m->set_recipe("constructor markov_switch step=" + std::to_string(switch_step));
  return m;
}

MarkovCounterResult badmatch_min_counter_markov(const SequenceSpec& r, const Rational& eps) {
  check_eps(eps);
  MarkovCounterResult out;
  if (r.diverges()) {
    out.divergent = true;
    out.machine = always(0);
    return out;
  }
  std::int64_t k = 0;
  while (r.tail_from(k) > eps) {
    if (++k > 1000000) fail(ErrorCode::KNotFound, "no K with tail sum <= eps below 10^6");
  }
  out.K = k;
  out.machine = markov_switch(2 * k);
  return out;
}

// ------------------------------------------------------------------ restart

RestartOnReturn::RestartOnReturn(StrategyPtr inner, StateId s0) : inner_(std::move(inner)), s0_(s0) {
  auto modes = inner_->num_local_modes();
  if (!modes) fail(ErrorCode::NotFiniteMemory, "restart wrapper needs finitely many inner modes");
  width_ = *modes;
}

std::string RestartOnReturn::describe() const { return "restart(" + inner_->describe() + " at " + s0_.to_string() + ")"; }

Mode RestartOnReturn::inner_mode(const Mode& m) const { return {m.local / width_, m.local % width_}; }

Dist<ActionIndex> RestartOnReturn::act(const Mode& m, const StateId& s, std::size_t num_actions) const {
  return inner_->act(inner_mode(m), s, num_actions);
}

Dist<LocalMode> RestartOnReturn::update(const Mode& m, const StateId& s, ActionIndex a, ActionIndex b,
                                        const StateId& next) const {
  if (next == s0_) return Dist<LocalMode>::dirac(inner_->initial_mode());
  const Mode im = inner_mode(m);
  const std::int64_t since = im.step + 1;
  return inner_->update(im, s, a, b, next).map([&](LocalMode l) { return since * width_ + l; });
}

// ---------------------------------------------------------------- registry

StrategyPtr make_strategy(std::string_view name, const Params& p) {
  if (name == "always") {
    p.require_only({"action"});
    return always(static_cast<ActionIndex>(p.get_int("action", 0)));
  }
  if (name == "constant_mix") {
    p.require_only({"q"});
    return constant_mix(p.get_rational("q"));
  }
  if (name == "periodic2") {
    p.require_only({"q0", "q1"});
    return periodic2(p.get_rational("q0"), p.get_rational("q1"));
  }
  if (name == "badmatch_1bit_markov") {
    p.require_only({"eps"});
    return badmatch_max_1bit_markov(p.get_rational("eps"));
  }
  if (name == "markov_sequence") {
    p.require_only({"r", "stride"});
    return markov_sequence(SequenceSpec::parse(p.get_string("r")), p.get_int("stride", 2));
  }
  if (name == "markov_switch") {
    p.require_only({"step"});
    return markov_switch(p.get_int("step"));
  }
  if (name == "counter_switch") {
    p.require_only({"K", "q", "after"});
    return counter_switch(p.get_int("K"), bernoulli_action(p.get_rational("q", Rational(0))),
                          static_cast<ActionIndex>(p.get_int("after", 1)));
  }
  fail(ErrorCode::UnknownName, "no strategy constructor named '" + std::string(name) + "'");
}

}  // namespace csg
