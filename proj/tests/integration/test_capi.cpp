// Exercises the shared library through its C header only.
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "csg/csg.h"

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  csg_string_free(s);
  return out;
}

struct Game {
  csg_game* g = nullptr;
  ~Game() { csg_game_free(g); }
};
struct Strategy {
  csg_strategy* s = nullptr;
  ~Strategy() { csg_strategy_free(s); }
};
struct Values {
  csg_values* v = nullptr;
  ~Values() { csg_values_free(v); }
};

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("csg_capi_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STREQ(csg_version(), "1.0.0");
  EXPECT_STREQ(csg_status_name(CSG_OK), "Ok");
  EXPECT_STREQ(csg_status_name(CSG_SUM_NOT_ONE), "SumNotOne");
  EXPECT_STREQ(csg_status_name(CSG_NULL_ARGUMENT), "NullArgument");
  EXPECT_STREQ(csg_status_name(CSG_INVARIANT_VIOLATED), "InvariantViolated");
}

TEST(CApi, NullArguments) {
  csg_game* g = nullptr;
  EXPECT_EQ(csg_game_builtin(nullptr, nullptr, &g), CSG_NULL_ARGUMENT);
  EXPECT_EQ(csg_game_builtin("simplified_bad_match", nullptr, nullptr), CSG_NULL_ARGUMENT);
  EXPECT_EQ(csg_game_parse(nullptr, &g), CSG_NULL_ARGUMENT);
  EXPECT_EQ(csg_game_load(nullptr, &g), CSG_NULL_ARGUMENT);
  EXPECT_EQ(csg_game_write(nullptr, nullptr), CSG_NULL_ARGUMENT);
  size_t n = 0;
  EXPECT_EQ(csg_game_num_states(nullptr, &n), CSG_NULL_ARGUMENT);
  csg_strategy* s = nullptr;
  EXPECT_EQ(csg_strategy_make(nullptr, nullptr, &s), CSG_NULL_ARGUMENT);
  csg_values* v = nullptr;
  EXPECT_EQ(csg_solve(nullptr, "reach", "targets", 0, 0, -1.0, &v), CSG_NULL_ARGUMENT);
  EXPECT_EQ(csg_values_count(nullptr, &n), CSG_NULL_ARGUMENT);
  EXPECT_EQ(csg_estimate(nullptr, nullptr, nullptr, "reach", "targets", 10, 10, 1, 1, nullptr), CSG_NULL_ARGUMENT);
  EXPECT_EQ(csg_run_experiment(nullptr, nullptr, -1, 0, nullptr), CSG_NULL_ARGUMENT);
  EXPECT_NE(std::string(csg_last_error()), "");
  csg_game_free(nullptr);
  csg_strategy_free(nullptr);
  csg_values_free(nullptr);
  csg_string_free(nullptr);
}

TEST(CApi, GamesRoundTrip) {
  Game g;
  ASSERT_EQ(csg_game_builtin("simplified_bad_match", nullptr, &g.g), CSG_OK);
  char* text = nullptr;
  ASSERT_EQ(csg_game_write(g.g, &text), CSG_OK);
  const std::string written = take(text);
  EXPECT_EQ(written.rfind("csg-game 1", 0), 0u);

  Game back;
  ASSERT_EQ(csg_game_parse(written.c_str(), &back.g), CSG_OK);
  size_t n = 0;
  ASSERT_EQ(csg_game_num_states(back.g, &n), CSG_OK);
  EXPECT_EQ(n, 4u);
  char* init = nullptr;
  ASSERT_EQ(csg_game_initial_state(back.g, &init), CSG_OK);
  EXPECT_EQ(take(init), "[0]");

  const auto path = scratch("game.game");
  std::ofstream(path) << written;
  Game loaded;
  ASSERT_EQ(csg_game_load(path.c_str(), &loaded.g), CSG_OK);
  char* name = nullptr;
  ASSERT_EQ(csg_game_name(loaded.g, &name), CSG_OK);
  EXPECT_FALSE(take(name).empty());
  std::filesystem::remove(path);

  Game missing;
  EXPECT_EQ(csg_game_load("/nonexistent/x.game", &missing.g), CSG_IO_ERROR);
  EXPECT_EQ(missing.g, nullptr);
  Game bad;
  EXPECT_EQ(csg_game_builtin("no_such_game", nullptr, &bad.g), CSG_UNKNOWN_NAME);
  EXPECT_NE(std::string(csg_last_error()).find("no_such_game"), std::string::npos);
}

TEST(CApi, Transforms) {
  Game g, leaky, chain;
  ASSERT_EQ(csg_game_builtin("simplified_bad_match", nullptr, &g.g), CSG_OK);
  ASSERT_EQ(csg_game_transform(g.g, "leaky", "max_exponent=4", &leaky.g), CSG_OK);
  size_t n = 0;
  ASSERT_EQ(csg_game_num_states(leaky.g, &n), CSG_OK);
  EXPECT_EQ(n, 5u);  // bot joins

  ASSERT_EQ(csg_game_builtin("one_way_chain", nullptr, &chain.g), CSG_OK);
  EXPECT_EQ(csg_game_num_states(chain.g, &n), CSG_NOT_FINITE);
  Game cut;
  ASSERT_EQ(csg_game_transform(chain.g, "truncate", "n=6", &cut.g), CSG_OK);
  ASSERT_EQ(csg_game_num_states(cut.g, &n), CSG_OK);
  EXPECT_GE(n, 6u);
  Game nope;
  EXPECT_EQ(csg_game_transform(g.g, "fold", nullptr, &nope.g), CSG_UNKNOWN_NAME);
}

TEST(CApi, SolveExactAndValues) {
  Game g;
  ASSERT_EQ(csg_game_builtin("simplified_bad_match", nullptr, &g.g), CSG_OK);
  Values v;
  ASSERT_EQ(csg_solve(g.g, "reach", "[3]", 1, 41, -1.0, &v.v), CSG_OK);
  size_t n = 0;
  ASSERT_EQ(csg_values_count(v.v, &n), CSG_OK);
  EXPECT_EQ(n, 4u);
  double at_d = 0;
  ASSERT_EQ(csg_values_at(v.v, "[0]", &at_d), CSG_OK);
  // oracle: iterate 2k-1 at d is k/(k+1); 41 = 2*21 - 1
  EXPECT_NEAR(at_d, 21.0 / 22.0, 1e-12);
  bool found = false;
  for (size_t i = 0; i < n; ++i) {
    char *state = nullptr, *exact = nullptr;
    double value = 0;
    ASSERT_EQ(csg_values_entry(v.v, i, &state, &value, &exact), CSG_OK);
    const std::string st = take(state), ex = take(exact);
    if (st == "[0]") {
      found = true;
      EXPECT_EQ(ex, "21/22");
    }
  }
  EXPECT_TRUE(found);
  size_t iters = 0;
  int converged = -1;
  ASSERT_EQ(csg_values_iterations(v.v, &iters, &converged), CSG_OK);
  EXPECT_EQ(iters, 41u);
  char* csv = nullptr;
  ASSERT_EQ(csg_values_csv(v.v, &csv), CSG_OK);
  EXPECT_EQ(take(csv).rfind("state,name,value,exact", 0), 0u);
  char *a = nullptr, *b = nullptr;
  double x = 0;
  EXPECT_EQ(csg_values_entry(v.v, 99, &a, &x, &b), CSG_OUT_OF_RANGE);

  csg_strategy* sigma = nullptr;
  ASSERT_EQ(csg_values_strategy(v.v, &sigma), CSG_OK);
  char* desc = nullptr;
  ASSERT_EQ(csg_strategy_describe(sigma, &desc), CSG_OK);
  EXPECT_FALSE(take(desc).empty());
  csg_strategy_free(sigma);

  Values bad;
  EXPECT_EQ(csg_solve(g.g, "parity", "targets", 0, 0, -1.0, &bad.v), CSG_UNKNOWN_NAME);
}

TEST(CApi, StrategiesAndSimulation) {
  Game g;
  ASSERT_EQ(csg_game_builtin("simplified_bad_match", nullptr, &g.g), CSG_OK);
  Strategy sigma, pi;
  ASSERT_EQ(csg_strategy_make("constant_mix", "q=1/4", &sigma.s), CSG_OK);
  ASSERT_EQ(csg_strategy_make("always", "action=0", &pi.s), CSG_OK);
  char* text = nullptr;
  ASSERT_EQ(csg_strategy_write(sigma.s, &text), CSG_OK);
  const std::string written = take(text);
  Strategy back;
  ASSERT_EQ(csg_strategy_parse(written.c_str(), &back.s), CSG_OK);
  const auto spath = scratch("s.strategy");
  std::ofstream(spath) << written;
  Strategy loaded;
  ASSERT_EQ(csg_strategy_load(spath.c_str(), &loaded.s), CSG_OK);
  std::filesystem::remove(spath);

  // Min always 0: l with 1/4 each round, else s and back. Reach l within 40 steps.
  char* report = nullptr;
  ASSERT_EQ(csg_estimate(g.g, loaded.s, pi.s, "reach", "[2]", 40, 4000, 3, 1, &report), CSG_OK);
  const std::string json = take(report);
  const auto pos = json.find("\"estimate\":");
  ASSERT_NE(pos, std::string::npos);
  const double est = std::stod(json.substr(pos + 11));
  const double exact = 1.0 - std::pow(0.75, 20);
  EXPECT_NEAR(est, exact, 0.03);

  char* lines = nullptr;
  ASSERT_EQ(csg_simulate_jsonl(g.g, sigma.s, pi.s, 10, 3, 1, &lines), CSG_OK);
  const std::string jl = take(lines);
  EXPECT_EQ(std::count(jl.begin(), jl.end(), '\n'), 3);

  const auto tpath = scratch("plays.trace");
  ASSERT_EQ(csg_simulate_trace(g.g, sigma.s, pi.s, 10, 5, 1, tpath.c_str()), CSG_OK);
  std::ifstream in(tpath, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  EXPECT_EQ(std::string(magic, 4), "CSGT");
  in.close();
  std::filesystem::remove(tpath);

  char* none = nullptr;
  EXPECT_EQ(csg_estimate(g.g, sigma.s, pi.s, "buchi", "[3]", 10, 10, 1, 1, &none), CSG_UNKNOWN_NAME);
  Strategy bad;
  EXPECT_EQ(csg_strategy_parse("csg-strategy 1\nmodes 1\ninitial 4\nact * * : 0 1\n", &bad.s),
            CSG_MODE_OUT_OF_RANGE);
}

TEST(CApi, RunExperiment) {
  const auto dir = scratch("exp");
  std::filesystem::create_directories(dir);
  const auto cfg = dir / "one.cfg";
  std::ofstream(cfg) << "experiment = exp_badmatch_1bit\nseed = 1\n[strategy]\neps = 1/5\n[objective]\nphases = 2\n";
  char* summary = nullptr;
  const auto out = dir / "out";
  ASSERT_EQ(csg_run_experiment(cfg.c_str(), out.c_str(), 5, 1, &summary), CSG_OK) << csg_last_error();
  EXPECT_NE(take(summary).find("PASS"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(out / "results.csv"));
  EXPECT_EQ(csg_run_experiment((dir / "missing.cfg").c_str(), nullptr, -1, 0, nullptr), CSG_IO_ERROR);
  std::filesystem::remove_all(dir);
}
