#include "csg/csg.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "csg/builtin_games.hpp"
#include "csg/config.hpp"
#include "csg/error.hpp"
#include "csg/experiments.hpp"
#include "csg/game_io.hpp"
#include "csg/montecarlo.hpp"
#include "csg/strategies.hpp"
#include "csg/strategy_io.hpp"
#include "csg/synthesis.hpp"
#include "csg/trace.hpp"
#include "csg/transform.hpp"
#include "csg/value_iteration.hpp"
#include "json.hpp"

struct csg_game {
  csg::GamePtr game;
};

struct csg_strategy {
  csg::StrategyPtr machine;
};

struct csg_values {
  csg::GamePtr game;
  csg::ValueVector values;
};

namespace {

thread_local std::string g_last_error;

csg_status to_status(csg::ErrorCode code) { return static_cast<csg_status>(static_cast<int>(code)); }

template <class F>
csg_status guarded(F&& body) {
  try {
    body();
    return CSG_OK;
  } catch (const csg::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = std::string("internal: ") + e.what();
    return CSG_INTERNAL;
  } catch (...) {
    g_last_error = "internal: unknown exception";
    return CSG_INTERNAL;
  }
}

#define CSG_REQUIRE(p)                                                  \
  do {                                                                  \
    if (!(p)) {                                                         \
      g_last_error = "NullArgument: " #p;                               \
      return CSG_NULL_ARGUMENT;                                         \
    }                                                                   \
  } while (0)

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

csg::Params params_of(const char* text) { return text ? csg::Params::parse(text) : csg::Params{}; }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

csg::StateSet target_of(const csg::GamePtr& game, const char* spec) {
  const std::string text = spec ? trim(spec) : std::string("targets");
  if (text == "targets" || text.empty()) return csg::StateSet::targets_of(game);
  std::vector<csg::StateId> ids;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ';');) {
    item = trim(item);
    if (item.empty()) continue;
    auto s = game->find_state(item);
    if (!s) csg::fail(csg::ErrorCode::UnknownName, "no state '" + item + "' in " + game->name());
    ids.push_back(*s);
  }
  return csg::StateSet::of(std::move(ids), text);
}

csg::EventSpec event_of(const csg::GamePtr& game, const char* event, const char* target) {
  std::string text = event ? trim(event) : std::string("reach");
  std::string kind = text.substr(0, text.find(' '));
  const csg::Params p = params_of(text.size() > kind.size() ? text.c_str() + kind.size() : nullptr);
  csg::EventSpec ev;
  ev.target = target_of(game, target);
  if (kind == "reach") {
    p.require_only({});
    ev.kind = csg::EventSpec::Kind::Reach;
  } else if (kind == "safety") {
    p.require_only({});
    ev.kind = csg::EventSpec::Kind::Safety;
  } else if (kind == "avoid_bot") {
    p.require_only({});
    ev.kind = csg::EventSpec::Kind::AvoidBot;
  } else if (kind == "reach_constrained") {
    p.require_only({"constraint"});
    ev.kind = csg::EventSpec::Kind::ReachConstrained;
    const std::string c = p.get_string("constraint");
    ev.constraint = target_of(game, c.c_str());
  } else if (kind == "windowed_buchi") {
    p.require_only({"k", "window"});
    ev = csg::EventSpec::windowed_buchi(ev.target, static_cast<std::size_t>(p.get_int("k", 1)), p.get_int("window"));
  } else {
    csg::fail(csg::ErrorCode::UnknownName, "unknown event '" + kind + "'");
  }
  return ev;
}

}  // namespace

extern "C" {

const char* csg_version(void) { return CSG_VERSION; }

const char* csg_last_error(void) { return g_last_error.c_str(); }

const char* csg_status_name(csg_status status) {
  if (status == CSG_OK) return "Ok";
  if (status == CSG_NULL_ARGUMENT) return "NullArgument";
  if (status == CSG_INTERNAL) return "Internal";
  if (status >= CSG_NON_POSITIVE_PROB && status <= CSG_INVARIANT_VIOLATED)
    return csg::error_code_name(static_cast<csg::ErrorCode>(status)).data();
  return "Unknown";
}

void csg_string_free(char* s) { std::free(s); }

// ------------------------------------------------------------------- games

csg_status csg_game_builtin(const char* name, const char* params, csg_game** out) {
  CSG_REQUIRE(name);
  CSG_REQUIRE(out);
  return guarded([&] { *out = new csg_game{csg::builtin_game(name, params_of(params))}; });
}

csg_status csg_game_load(const char* path, csg_game** out) {
  CSG_REQUIRE(path);
  CSG_REQUIRE(out);
  return guarded([&] { *out = new csg_game{csg::read_game_file(path)}; });
}

csg_status csg_game_parse(const char* text, csg_game** out) {
  CSG_REQUIRE(text);
  CSG_REQUIRE(out);
  return guarded([&] { *out = new csg_game{csg::parse_game(text)}; });
}

csg_status csg_game_transform(const csg_game* game, const char* name, const char* params, csg_game** out) {
  CSG_REQUIRE(game);
  CSG_REQUIRE(name);
  CSG_REQUIRE(out);
  return guarded([&] { *out = new csg_game{csg::apply_transform(game->game, name, params_of(params))}; });
}

csg_status csg_game_write(const csg_game* game, char** text) {
  CSG_REQUIRE(game);
  CSG_REQUIRE(text);
  return guarded([&] { *text = dup(csg::game_to_string(*game->game)); });
}

csg_status csg_game_name(const csg_game* game, char** name) {
  CSG_REQUIRE(game);
  CSG_REQUIRE(name);
  return guarded([&] { *name = dup(game->game->name()); });
}

csg_status csg_game_initial_state(const csg_game* game, char** id) {
  CSG_REQUIRE(game);
  CSG_REQUIRE(id);
  return guarded([&] { *id = dup(game->game->initial_state().to_string()); });
}

csg_status csg_game_num_states(const csg_game* game, size_t* n) {
  CSG_REQUIRE(game);
  CSG_REQUIRE(n);
  return guarded([&] {
    if (!game->game->is_finite()) csg::fail(csg::ErrorCode::NotFinite, game->game->name() + " is not finite");
    *n = game->game->states().size();
  });
}

void csg_game_free(csg_game* game) { delete game; }

// -------------------------------------------------------------- strategies

csg_status csg_strategy_make(const char* name, const char* params, csg_strategy** out) {
  CSG_REQUIRE(name);
  CSG_REQUIRE(out);
  return guarded([&] { *out = new csg_strategy{csg::make_strategy(name, params_of(params))}; });
}

csg_status csg_strategy_load(const char* path, csg_strategy** out) {
  CSG_REQUIRE(path);
  CSG_REQUIRE(out);
  return guarded([&] { *out = new csg_strategy{csg::read_strategy_file(path)}; });
}

csg_status csg_strategy_parse(const char* text, csg_strategy** out) {
  CSG_REQUIRE(text);
  CSG_REQUIRE(out);
  return guarded([&] { *out = new csg_strategy{csg::parse_strategy(text)}; });
}

csg_status csg_strategy_write(const csg_strategy* strategy, char** text) {
  CSG_REQUIRE(strategy);
  CSG_REQUIRE(text);
  return guarded([&] { *text = dup(csg::strategy_to_string(*strategy->machine)); });
}

csg_status csg_strategy_describe(const csg_strategy* strategy, char** text) {
  CSG_REQUIRE(strategy);
  CSG_REQUIRE(text);
  return guarded([&] { *text = dup(strategy->machine->describe()); });
}

void csg_strategy_free(csg_strategy* strategy) { delete strategy; }

// ----------------------------------------------------------------- solving

csg_status csg_solve(const csg_game* game, const char* objective, const char* target, int exact, size_t max_iters,
                     double tol, csg_values** out) {
  CSG_REQUIRE(game);
  CSG_REQUIRE(objective);
  CSG_REQUIRE(out);
  return guarded([&] {
    const csg::StateSet t = target_of(game->game, target);
    const std::string kind = objective;
    csg::ValueVector v;
    if (kind == "reach" || kind == "safety") {
      csg::ViOptions o;
      if (max_iters > 0) o.max_iters = max_iters;
      if (tol >= 0.0) o.tol = tol;
      o.precision = exact ? csg::Precision::Exact : csg::Precision::Float;
      v = csg::value_iteration(*game->game, kind == "reach" ? csg::Objective::reach(t) : csg::Objective::safety(t), o);
    } else if (kind == "buchi") {
      if (exact) csg::fail(csg::ErrorCode::BadParams, "the Buchi solver runs in floating point only");
      csg::BuchiOptions o;
      if (max_iters > 0) o.inner_cap = max_iters;
      if (tol >= 0.0) o.tol = tol;
      v = csg::buchi_value(*game->game, t, o);
    } else {
      csg::fail(csg::ErrorCode::UnknownName, "unknown objective '" + kind + "'");
    }
    *out = new csg_values{game->game, std::move(v)};
  });
}

csg_status csg_values_count(const csg_values* values, size_t* n) {
  CSG_REQUIRE(values);
  CSG_REQUIRE(n);
  *n = values->values.states.size();
  return CSG_OK;
}

csg_status csg_values_entry(const csg_values* values, size_t i, char** state, double* value, char** exact) {
  CSG_REQUIRE(values);
  return guarded([&] {
    const auto& v = values->values;
    if (i >= v.states.size()) csg::fail(csg::ErrorCode::OutOfRange, "value index " + std::to_string(i));
    if (state) *state = dup(v.states[i].to_string());
    if (value) *value = v.values[i];
    if (exact) *exact = dup(v.exact.empty() ? std::string() : csg::to_string(v.exact[i]));
  });
}

csg_status csg_values_at(const csg_values* values, const char* state, double* value) {
  CSG_REQUIRE(values);
  CSG_REQUIRE(state);
  CSG_REQUIRE(value);
  return guarded([&] {
    auto s = values->game->find_state(state);
    if (!s) csg::fail(csg::ErrorCode::UnknownName, std::string("no state '") + state + "'");
    *value = values->values.at(*s);
  });
}

csg_status csg_values_iterations(const csg_values* values, size_t* iterations, int* converged) {
  CSG_REQUIRE(values);
  if (iterations) *iterations = values->values.iterations;
  if (converged) *converged = values->values.converged ? 1 : 0;
  return CSG_OK;
}

csg_status csg_values_csv(const csg_values* values, char** text) {
  CSG_REQUIRE(values);
  CSG_REQUIRE(text);
  return guarded([&] {
    const auto& v = values->values;
    std::ostringstream os;
    os.precision(17);
    os << "state,name,value,exact\n";
    for (std::size_t i = 0; i < v.states.size(); ++i) {
      std::string id = v.states[i].to_string();
      std::string name = values->game->state_name(v.states[i]);
      auto quote = [](const std::string& s) {
        if (s.find_first_of(",\"") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
      };
      os << quote(id) << "," << quote(name) << "," << v.values[i] << ","
         << (v.exact.empty() ? std::string() : csg::to_string(v.exact[i])) << "\n";
    }
    *text = dup(os.str());
  });
}

csg_status csg_values_strategy(const csg_values* values, csg_strategy** out) {
  CSG_REQUIRE(values);
  CSG_REQUIRE(out);
  return guarded([&] { *out = new csg_strategy{csg::memoryless_from_values(*values->game, values->values)}; });
}

void csg_values_free(csg_values* values) { delete values; }

// -------------------------------------------------------------- simulation

csg_status csg_estimate(const csg_game* game, const csg_strategy* max_strategy, const csg_strategy* min_strategy,
                        const char* event, const char* target, int64_t horizon, size_t plays, uint64_t seed,
                        unsigned jobs, char** report) {
  CSG_REQUIRE(game);
  CSG_REQUIRE(max_strategy);
  CSG_REQUIRE(min_strategy);
  CSG_REQUIRE(report);
  return guarded([&] {
    const csg::EventSpec ev = event_of(game->game, event, target);
    const csg::EstimationReport r = csg::estimate(*game->game, *max_strategy->machine, *min_strategy->machine, ev,
                                                  plays, horizon, seed, jobs == 0 ? 1 : jobs);
    *report = dup(r.to_json());
  });
}

csg_status csg_simulate_trace(const csg_game* game, const csg_strategy* max_strategy, const csg_strategy* min_strategy,
                              int64_t horizon, size_t plays, uint64_t seed, const char* path) {
  CSG_REQUIRE(game);
  CSG_REQUIRE(max_strategy);
  CSG_REQUIRE(min_strategy);
  CSG_REQUIRE(path);
  return guarded([&] {
    std::vector<csg::Play> ps;
    ps.reserve(plays);
    for (std::size_t i = 0; i < plays; ++i)
      ps.push_back(csg::simulate(*game->game, *max_strategy->machine, *min_strategy->machine, horizon, seed, i));
    std::ofstream out(path, std::ios::binary);
    if (!out) csg::fail(csg::ErrorCode::IoError, std::string("cannot write ") + path);
    csg::write_trace(out, ps);
  });
}

csg_status csg_simulate_jsonl(const csg_game* game, const csg_strategy* max_strategy, const csg_strategy* min_strategy,
                              int64_t horizon, size_t plays, uint64_t seed, char** text) {
  CSG_REQUIRE(game);
  CSG_REQUIRE(max_strategy);
  CSG_REQUIRE(min_strategy);
  CSG_REQUIRE(text);
  return guarded([&] {
    std::string out;
    for (std::size_t i = 0; i < plays; ++i) {
      const csg::Play p = csg::simulate(*game->game, *max_strategy->machine, *min_strategy->machine, horizon, seed, i);
      nlohmann::ordered_json j;
      j["record"] = "play";
      j["stream"] = i;
      j["initial"] = p.initial.to_string();
      auto steps = nlohmann::ordered_json::array();
      for (const auto& s : p.steps) steps.push_back({s.max_action, s.min_action, s.next.to_string()});
      j["steps"] = steps;
      j["final"] = p.final_state().to_string();
      j["sink_reached"] = p.sink_reached;
      out += j.dump() + "\n";
    }
    *text = dup(out);
  });
}

// ------------------------------------------------------------- experiments

csg_status csg_run_experiment(const char* config_path, const char* out_dir, int64_t seed, unsigned jobs,
                              char** summary) {
  CSG_REQUIRE(config_path);
  return guarded([&] {
    const csg::Config config = csg::Config::load(config_path);
    csg::RunOptions opt;
    if (out_dir) opt.out_dir = out_dir;
    if (seed >= 0) opt.seed = static_cast<std::uint64_t>(seed);
    if (jobs > 0) opt.jobs = jobs;
    const csg::ExperimentOutput out = csg::run_experiment_report(config, opt);
    if (summary) {
      std::ostringstream s;
      s << out.experiment << " (seed " << out.seed << ", " << out.wall_seconds << " s) -> " << out.out_dir << "\n";
      for (const auto& a : out.assertions) s << (a.passed ? "  PASS " : "  FAIL ") << a.name << ": " << a.detail << "\n";
      *summary = dup(s.str());
    }
    if (!out.passed()) csg::fail(csg::ErrorCode::AssertionFailed, out.experiment + ": " + out.failures());
  });
}

}  // extern "C"
