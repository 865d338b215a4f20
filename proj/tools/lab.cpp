// lab: command-line front end over the C API.
//
//   lab run <config> [--seed N] [--out DIR] [--jobs J]
//   lab solve <game> --objective reach|safety|buchi [--target T] [--exact|--float]
//   lab transform <game> <name> [k=v ...]
//   lab simulate <game> --max S --min S [--event E] [--target T] [--plays N]
//
// <game> is a game file or NAME[:k=v,...] naming a builtin; strategies are
// strategy files or NAME[:k=v,...] naming a constructor.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "csg/csg.h"

namespace {

struct Failure {
  csg_status status;
};

void check(csg_status st) {
  if (st != CSG_OK) throw Failure{st};
}

std::string take(char* s) {
  std::string out = s ? s : "";
  csg_string_free(s);
  return out;
}

using GameHandle = std::unique_ptr<csg_game, decltype(&csg_game_free)>;
using StrategyHandle = std::unique_ptr<csg_strategy, decltype(&csg_strategy_free)>;

// "name:k=v,k=v" -> ("name", "k=v k=v")
std::pair<std::string, std::string> split_ref(const std::string& ref) {
  const auto colon = ref.find(':');
  if (colon == std::string::npos) return {ref, ""};
  std::string params = ref.substr(colon + 1);
  for (char& c : params)
    if (c == ',') c = ' ';
  return {ref.substr(0, colon), params};
}

GameHandle open_game(const std::string& ref) {
  csg_game* g = nullptr;
  if (std::filesystem::is_regular_file(ref)) {
    check(csg_game_load(ref.c_str(), &g));
  } else {
    auto [name, params] = split_ref(ref);
    check(csg_game_builtin(name.c_str(), params.c_str(), &g));
  }
  return GameHandle(g, csg_game_free);
}

StrategyHandle open_strategy(const std::string& ref) {
  csg_strategy* s = nullptr;
  if (std::filesystem::is_regular_file(ref)) {
    check(csg_strategy_load(ref.c_str(), &s));
  } else {
    auto [name, params] = split_ref(ref);
    check(csg_strategy_make(name.c_str(), params.c_str(), &s));
  }
  return StrategyHandle(s, csg_strategy_free);
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "lab: cannot write " << path << "\n";
    throw Failure{CSG_IO_ERROR};
  }
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lab: experiments and tools for concurrent stochastic games"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(csg_version()));

  std::optional<std::uint64_t> seed;
  std::string out_path;
  unsigned jobs = 0;

  auto* run = app.add_subcommand("run", "run an experiment config");
  std::string config;
  run->add_option("config", config, "experiment config file")->required();
  run->add_option("--seed", seed, "override the config seed");
  run->add_option("--out", out_path, "output directory");
  run->add_option("--jobs", jobs, "parallel Monte Carlo streams");

  auto* solve = app.add_subcommand("solve", "value iteration on a finite game");
  std::string game_ref, objective = "reach", target = "targets", strategy_out;
  std::size_t iters = 0;
  double tol = -1.0;
  bool exact = false, fl = false;
  solve->add_option("game", game_ref, "game file or builtin NAME[:k=v,...]")->required();
  solve->add_option("--objective", objective, "reach, safety or buchi")->check(CLI::IsMember({"reach", "safety", "buchi"}));
  solve->add_option("--target", target, "'targets' or ids/names separated by ';'");
  solve->add_option("--iters", iters, "iteration cap (inner cap for buchi)");
  solve->add_option("--tol", tol, "stopping tolerance");
  auto* ex = solve->add_flag("--exact", exact, "rational arithmetic");
  solve->add_flag("--float", fl, "floating point (default)")->excludes(ex);
  solve->add_option("--out", out_path, "CSV output file (default stdout)");
  solve->add_option("--strategy-out", strategy_out, "write the locally optimal memoryless Max strategy");

  auto* transform = app.add_subcommand("transform", "apply a game transform and print the game file");
  std::string tname;
  std::vector<std::string> tparams;
  transform->add_option("game", game_ref, "game file or builtin")->required();
  transform->add_option("name", tname, "leaky, unfold, fix_action, ladder, delay, truncate")->required();
  transform->add_option("params", tparams, "k=v parameters");
  transform->add_option("--out", out_path, "output file (default stdout)");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate or raw plays");
  std::string max_ref, min_ref, event = "reach", trace_path;
  std::int64_t horizon = 1000;
  std::size_t plays = 1000;
  bool raw = false;
  simulate->add_option("game", game_ref, "game file or builtin")->required();
  simulate->add_option("--max", max_ref, "Max strategy")->required();
  simulate->add_option("--min", min_ref, "Min strategy")->required();
  simulate->add_option("--event", event, "reach, safety, avoid_bot, reach_constrained ..., windowed_buchi ...");
  simulate->add_option("--target", target, "'targets' or ids/names separated by ';'");
  simulate->add_option("--horizon", horizon, "steps per play");
  simulate->add_option("--plays", plays, "number of plays");
  simulate->add_option("--seed", seed, "seed (default 0)");
  simulate->add_option("--jobs", jobs, "parallel streams");
  simulate->add_option("--trace", trace_path, "also write the plays as a binary trace");
  simulate->add_flag("--plays-jsonl", raw, "print one JSON line per play instead of the estimate");
  simulate->add_option("--out", out_path, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      char* summary = nullptr;
      const csg_status st = csg_run_experiment(config.c_str(), out_path.empty() ? nullptr : out_path.c_str(),
                                               seed ? static_cast<std::int64_t>(*seed) : -1, jobs, &summary);
      std::cout << take(summary);
      check(st);
    } else if (solve->parsed()) {
      GameHandle g = open_game(game_ref);
      csg_values* v = nullptr;
      check(csg_solve(g.get(), objective.c_str(), target.c_str(), exact ? 1 : 0, iters, tol, &v));
      std::unique_ptr<csg_values, decltype(&csg_values_free)> values(v, csg_values_free);
      char* csv = nullptr;
      check(csg_values_csv(values.get(), &csv));
      emit(take(csv), out_path);
      if (!strategy_out.empty()) {
        csg_strategy* s = nullptr;
        check(csg_values_strategy(values.get(), &s));
        StrategyHandle sh(s, csg_strategy_free);
        char* text = nullptr;
        check(csg_strategy_write(sh.get(), &text));
        emit(take(text), strategy_out);
      }
    } else if (transform->parsed()) {
      GameHandle g = open_game(game_ref);
      std::string params;
      for (const auto& p : tparams) params += p + " ";
      csg_game* t = nullptr;
      check(csg_game_transform(g.get(), tname.c_str(), params.c_str(), &t));
      GameHandle th(t, csg_game_free);
      char* text = nullptr;
      check(csg_game_write(th.get(), &text));
      emit(take(text), out_path);
    } else if (simulate->parsed()) {
      GameHandle g = open_game(game_ref);
      StrategyHandle smax = open_strategy(max_ref);
      StrategyHandle smin = open_strategy(min_ref);
      const std::uint64_t s = seed.value_or(0);
      char* text = nullptr;
      if (raw)
        check(csg_simulate_jsonl(g.get(), smax.get(), smin.get(), horizon, plays, s, &text));
      else
        check(csg_estimate(g.get(), smax.get(), smin.get(), event.c_str(), target.c_str(), horizon, plays, s, jobs,
                           &text));
      std::string out = take(text);
      if (!raw) out += "\n";
      emit(out, out_path);
      if (!trace_path.empty()) check(csg_simulate_trace(g.get(), smax.get(), smin.get(), horizon, plays, s, trace_path.c_str()));
    }
  } catch (const Failure& f) {
    std::cerr << "lab: " << csg_last_error() << "\n";
    return f.status == CSG_ASSERTION_FAILED ? 1 : 2;
  }
  return 0;
}
