#include "csg/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <unordered_map>

#include "csg/error.hpp"
#include "json.hpp"

namespace csg {

namespace {

// One play in progress; consumes draws in the documented order.
class Walker {
 public:
  Walker(const Game& game, const StrategyMachine& sigma, const StrategyMachine& pi, std::uint64_t seed,
         std::uint64_t stream, StateId start)
      : game_(game),
        sigma_(sigma),
        pi_(pi),
        rng_(seed, stream),
        state_(std::move(start)),
        ms_{0, sigma.initial_mode()},
        mp_{0, pi.initial_mode()} {}

  const StateId& state() const { return state_; }
  PlayStep advance() {
    const ActionIndex a = strategy_act(sigma_, ms_, state_, game_.num_max_actions(state_), rng_);
    const ActionIndex b = strategy_act(pi_, mp_, state_, game_.num_min_actions(state_), rng_);
    StateId next = step(game_, state_, a, b, rng_);
    const Mode ms = strategy_update(sigma_, ms_, state_, a, b, next, rng_);
    const Mode mp = strategy_update(pi_, mp_, state_, a, b, next, rng_);
    PlayStep out{state_, a, b, next};
    ms_ = ms;
    mp_ = mp;
    state_ = std::move(next);
    return out;
  }

 private:
  const Game& game_;
  const StrategyMachine& sigma_;
  const StrategyMachine& pi_;
  RngStream rng_;
  StateId state_;
  Mode ms_;
  Mode mp_;
};

template <class F>
void parallel_for(std::size_t n, unsigned jobs, F&& body) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(jobs);
  for (unsigned w = 0; w < jobs; ++w)
    workers.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += jobs) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : workers) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Outcome of an event on one sampled play.
bool judge(const Game& game, const StrategyMachine& sigma, const StrategyMachine& pi, const EventSpec& ev,
           std::int64_t horizon, std::uint64_t seed, std::uint64_t stream, const StateId& start) {
  Walker w(game, sigma, pi, seed, stream, start);
  const std::int64_t first_window = horizon - ev.window + 1;
  std::size_t visits = 0;
  bool late = false;
  auto see = [&](const StateId& s, std::int64_t k) -> std::optional<bool> {
    switch (ev.kind) {
      case EventSpec::Kind::Reach:
        if (ev.target.contains(s)) return true;
        break;
      case EventSpec::Kind::ReachConstrained:
        if (ev.target.contains(s)) return true;
        if (!ev.constraint.contains(s)) return false;
        break;
      case EventSpec::Kind::Safety:
        if (ev.target.contains(s)) return false;
        break;
      case EventSpec::Kind::AvoidBot:
        if (s == bot_state()) return false;
        break;
      case EventSpec::Kind::WindowedBuchi:
        if (ev.target.contains(s)) {
          ++visits;
          if (k >= first_window) late = true;
        }
        break;
      default:
        break;
    }
    return std::nullopt;
  };
  auto at_end = [&]() {
    switch (ev.kind) {
      case EventSpec::Kind::Safety:
      case EventSpec::Kind::AvoidBot:
        return true;
      case EventSpec::Kind::WindowedBuchi:
        return visits >= ev.min_visits && late;
      default:
        return false;
    }
  };
  if (auto r = see(w.state(), 0)) return *r;
  for (std::int64_t k = 1; k <= horizon; ++k) {
    w.advance();
    if (auto r = see(w.state(), k)) return *r;
    if (game.is_sink(w.state())) {
      // The rest of the play stays here.
      if (ev.kind == EventSpec::Kind::WindowedBuchi && ev.target.contains(w.state())) {
        const std::int64_t rest = horizon - k;
        visits += static_cast<std::size_t>(rest);
        if (horizon >= first_window) late = true;
      }
      if (ev.kind == EventSpec::Kind::ReachConstrained) return false;
      return at_end();
    }
  }
  return at_end();
}

double mean_of(const std::vector<char>& v) {
  if (v.empty()) return 0.0;
  std::size_t k = 0;
  for (char c : v) k += c != 0;
  return static_cast<double>(k) / static_cast<double>(v.size());
}

}  // namespace

Play simulate(const Game& game, const StrategyMachine& sigma, const StrategyMachine& pi, std::int64_t horizon,
              std::uint64_t seed, std::uint64_t stream, bool stop_at_sink, std::optional<StateId> start) {
  if (horizon < 0) fail(ErrorCode::BadParams, "horizon must be nonnegative");
  Play play;
  play.initial = start.value_or(game.initial_state());
  if (!game.has_state(play.initial)) fail(ErrorCode::BadParams, "unknown start state " + play.initial.to_string());
  Walker w(game, sigma, pi, seed, stream, play.initial);
  if (stop_at_sink && game.is_sink(play.initial)) {
    play.sink_reached = true;
    return play;
  }
  for (std::int64_t k = 0; k < horizon; ++k) {
    play.steps.push_back(w.advance());
    if (stop_at_sink && game.is_sink(w.state())) {
      play.sink_reached = true;
      break;
    }
  }
  return play;
}

EventSpec EventSpec::from_objective(const Objective& objective) {
  EventSpec e;
  e.target = objective.target;
  e.constraint = objective.constraint;
  switch (objective.kind) {
    case Objective::Kind::Reach: e.kind = Kind::Reach; break;
    case Objective::Kind::ReachConstrained: e.kind = Kind::ReachConstrained; break;
    case Objective::Kind::Safety: e.kind = Kind::Safety; break;
    case Objective::Kind::AvoidBot: e.kind = Kind::AvoidBot; break;
    case Objective::Kind::Buchi: e.kind = Kind::Buchi; break;
    case Objective::Kind::Transience: e.kind = Kind::Transience; break;
    case Objective::Kind::TransientBuchi: e.kind = Kind::TransientBuchi; break;
  }
  return e;
}

EventSpec EventSpec::windowed_buchi(StateSet t, std::size_t k, std::int64_t window) {
  if (window < 1) fail(ErrorCode::BadParams, "window must be positive");
  EventSpec e;
  e.kind = Kind::WindowedBuchi;
  e.target = std::move(t);
  e.min_visits = k;
  e.window = window;
  return e;
}

std::string EventSpec::describe() const {
  switch (kind) {
    case Kind::Reach: return "Reach(" + target.label() + ")";
    case Kind::ReachConstrained: return "Reach(" + constraint.label() + " U " + target.label() + ")";
    case Kind::Safety: return "Safety(" + target.label() + ")";
    case Kind::AvoidBot: return "Avoid(bot)";
    case Kind::WindowedBuchi:
      return "BuchiProxy(" + target.label() + ", visits>=" + std::to_string(min_visits) +
             ", last " + std::to_string(window) + ")";
    case Kind::Buchi: return "Buchi(" + target.label() + ")";
    case Kind::Transience: return "Transience";
    case Kind::TransientBuchi: return "TransientBuchi(" + target.label() + ")";
  }
  return "?";
}

Interval wilson_interval(std::size_t successes, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2 * nn)) / denom;
  const double half = z / denom * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn));
  return {std::max(0.0, std::min(p, center - half)), std::min(1.0, std::max(p, center + half))};
}

double hoeffding_halfwidth(std::size_t n, double delta) {
  if (n == 0) return 1.0;
  return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n)));
}

std::string EstimationReport::to_json() const {
  nlohmann::ordered_json j;
  j["record"] = "estimate";
  j["event"] = event;
  j["n"] = n;
  j["successes"] = successes;
  j["estimate"] = estimate;
  j["confidence"] = confidence;
  j["ci_low"] = ci_low;
  j["ci_high"] = ci_high;
  j["hoeffding"] = hoeffding;
  j["horizon"] = horizon;
  j["seed"] = seed;
  return j.dump();
}

EstimationReport estimate(const Game& game, const StrategyMachine& sigma, const StrategyMachine& pi,
                          const EventSpec& event, std::size_t n, std::int64_t horizon, std::uint64_t seed,
                          unsigned jobs, std::optional<StateId> start) {
  if (event.kind == EventSpec::Kind::Buchi || event.kind == EventSpec::Kind::Transience ||
      event.kind == EventSpec::Kind::TransientBuchi)
    fail(ErrorCode::EventNotPrefixDecidable, event.describe() + " is not decided by finite prefixes; use a proxy");
  if (n < 1) fail(ErrorCode::BadParams, "estimate needs n >= 1");
  if (horizon < 0) fail(ErrorCode::BadParams, "horizon must be nonnegative");
  const StateId s0 = start.value_or(game.initial_state());
  std::vector<char> hit(n, 0);
  parallel_for(n, jobs, [&](std::size_t i) { hit[i] = judge(game, sigma, pi, event, horizon, seed, i, s0); });
  EstimationReport r;
  r.n = n;
  for (char c : hit) r.successes += c != 0;
  r.estimate = static_cast<double>(r.successes) / static_cast<double>(n);
  const Interval ci = wilson_interval(r.successes, n);
  r.ci_low = ci.low;
  r.ci_high = ci.high;
  r.hoeffding = hoeffding_halfwidth(n);
  r.horizon = horizon;
  r.event = event.describe();
  r.seed = seed;
  return r;
}

std::string_view direction_name(Direction d) { return d == Direction::Super ? "super" : "sub"; }

bool MartingaleDiagnostic::holds() const {
  bool decided = false;
  for (const auto& row : rows) {
    if (row.verdict == "violated") return false;
    if (row.verdict == "holds") decided = true;
  }
  return decided;
}

std::string MartingaleDiagnostic::to_json() const {
  nlohmann::ordered_json j;
  j["record"] = "martingale";
  j["direction"] = std::string(direction_name(direction));
  j["u"] = u;
  j["horizon"] = horizon;
  j["plays"] = plays;
  j["seed"] = seed;
  j["header"] = header;
  j["holds"] = holds();
  auto rs = nlohmann::ordered_json::array();
  for (const auto& row : rows)
    rs.push_back({{"n", row.returns},
                  {"samples", row.samples},
                  {"mean", row.mean},
                  {"stderr", row.stderr_},
                  {"ci_low", row.ci_low},
                  {"ci_high", row.ci_high},
                  {"verdict", row.verdict}});
  j["rows"] = rs;
  return j.dump();
}

MartingaleDiagnostic martingale_diagnostic(const Game& game, const StrategyMachine& sigma, const StrategyMachine& pi,
                                           const StateId& s0, double u, Direction direction,
                                           std::size_t max_returns, std::size_t n, std::int64_t horizon,
                                           std::uint64_t seed, unsigned jobs) {
  if (!(u >= 0.0 && u < 1.0)) fail(ErrorCode::BadParams, "u must lie in [0,1)");
  if (max_returns < 1) fail(ErrorCode::BadParams, "max_returns must be positive");
  constexpr std::size_t kFloor = 100;
  if (n < kFloor) fail(ErrorCode::TooFewReturns, "fewer than 100 plays");
  std::vector<std::size_t> tau(n, 0);
  std::vector<char> tr(n, 0);
  parallel_for(n, jobs, [&](std::size_t i) {
    const Play p = simulate(game, sigma, pi, horizon, seed, i, true, s0);
    std::size_t visits = 0;
    for (const auto& s : p.states())
      if (s == s0) ++visits;
    if (p.sink_reached && p.final_state() == s0) visits += static_cast<std::size_t>(horizon) - p.length();
    tau[i] = visits;
    tr[i] = p.final_state() != bot_state();
  });
  MartingaleDiagnostic out;
  out.direction = direction;
  out.u = u;
  out.horizon = horizon;
  out.plays = n;
  out.seed = seed;
  out.header = "transience read as 'bot not reached within " + std::to_string(horizon) +
               " steps' (a surrogate, not the tail event)";
  for (std::size_t k = 1; k <= max_returns; ++k) {
    MartingaleRow row;
    row.returns = k;
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (tau[i] < k) continue;
      const double x = tau[i] >= k + 1 ? u : (tr[i] ? 1.0 : 0.0);
      ++row.samples;
      sum += x;
      sq += x * x;
    }
    if (row.samples > 0) {
      const double m = sum / static_cast<double>(row.samples);
      const double var = std::max(0.0, sq / static_cast<double>(row.samples) - m * m);
      row.mean = m;
      row.stderr_ = std::sqrt(var / static_cast<double>(row.samples));
      row.ci_low = m - kZ95 * row.stderr_;
      row.ci_high = m + kZ95 * row.stderr_;
    }
    if (row.samples < kFloor) {
      row.verdict = "withheld";
    } else {
      const double slack = 3.0 * row.stderr_ + 1e-12;
      const bool ok = direction == Direction::Sub ? row.mean >= u - slack : row.mean <= u + slack;
      row.verdict = ok ? "holds" : "violated";
    }
    out.rows.push_back(row);
  }
  return out;
}

std::string TransienceReport::to_json() const {
  nlohmann::ordered_json j;
  j["record"] = "transience";
  j["horizon"] = horizon;
  j["window"] = window;
  j["plays"] = transient.size();
  j["transient_fraction"] = transient_fraction;
  j["avoid_bot_fraction"] = avoid_bot_fraction;
  j["transient_ci"] = {transient_ci.low, transient_ci.high};
  j["avoid_bot_ci"] = {avoid_bot_ci.low, avoid_bot_ci.high};
  j["agreement"] = agreement;
  auto h = nlohmann::ordered_json::object();
  for (const auto& [k, v] : histogram) h[std::to_string(k)] = v;
  j["max_visit_histogram"] = h;
  return j.dump();
}

TransienceReport transience_diagnostic(const std::vector<Play>& plays, std::int64_t horizon, std::int64_t window) {
  if (window < 1 || window >= horizon) fail(ErrorCode::WindowTooLarge, "window must lie in [1, horizon)");
  TransienceReport out;
  out.horizon = horizon;
  out.window = window;
  std::vector<char> avoid;
  for (const auto& p : plays) {
    std::vector<StateId> states = p.states();
    if (static_cast<std::int64_t>(states.size()) > horizon + 1)
      fail(ErrorCode::BadParams, "play longer than the horizon");
    if (static_cast<std::int64_t>(states.size()) < horizon + 1) {
      if (!p.sink_reached) fail(ErrorCode::BadParams, "plays must share the horizon");
      states.resize(static_cast<std::size_t>(horizon) + 1, p.final_state());
    }
    const std::size_t cut = static_cast<std::size_t>(horizon - window);
    std::unordered_map<StateId, std::size_t> early, count;
    for (std::size_t k = 0; k <= cut; ++k) ++early[states[k]];
    bool transient = true;
    for (std::size_t k = cut + 1; k < states.size(); ++k)
      if (early.count(states[k])) transient = false;
    std::size_t mx = 0;
    for (const auto& s : states) mx = std::max(mx, ++count[s]);
    out.transient.push_back(transient);
    out.max_visits.push_back(mx);
    ++out.histogram[mx];
    avoid.push_back(states.back() != bot_state());
  }
  out.transient_fraction = mean_of(out.transient);
  out.avoid_bot_fraction = mean_of(avoid);
  const std::size_t n = plays.size();
  auto count_of = [](const std::vector<char>& v) {
    std::size_t k = 0;
    for (char c : v) k += c != 0;
    return k;
  };
  out.transient_ci = wilson_interval(count_of(out.transient), n);
  out.avoid_bot_ci = wilson_interval(count_of(avoid), n);
  const double width = std::max(out.transient_ci.high - out.transient_ci.low, out.avoid_bot_ci.high - out.avoid_bot_ci.low);
  out.agreement = std::abs(out.transient_fraction - out.avoid_bot_fraction) <= 2.0 * width;
  return out;
}

std::vector<double> fixing_y_trace(const FixingSweepReport& report, const Play& play) {
  std::vector<double> out;
  std::size_t m = 0;
  for (const auto& s : play.states()) {
    m = std::max(m, report.rank_of(s));
    out.push_back(report.r_at(m) * report.value(m, s));
  }
  return out;
}

}  // namespace csg
