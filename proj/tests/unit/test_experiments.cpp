#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "csg/config.hpp"
#include "csg/error.hpp"
#include "csg/experiments.hpp"

using namespace csg;
namespace fs = std::filesystem;

namespace {

const char* kOneBit = "experiment = exp_badmatch_1bit\nseed = 1\n[strategy]\neps = 1/5\n[objective]\nphases = 3\n";

struct EnvGuard {
  explicit EnvGuard(const char* value) {
    if (value)
      setenv("CSG_OUT_DIR", value, 1);
    else
      unsetenv("CSG_OUT_DIR");
  }
  ~EnvGuard() { unsetenv("CSG_OUT_DIR"); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("csg_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Experiments, NamesListed) {
  const auto& names = experiment_names();
  EXPECT_EQ(names.size(), 9u);
  for (const char* n : {"exp_badmatch_value", "exp_badmatch_1bit", "exp_counter_finite", "exp_counter_markov",
                        "exp_leaky_equiv", "exp_leaky_nullset", "exp_fixing_sweep", "exp_martingale", "exp_ladder"})
    EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
}

TEST(Experiments, OutputDirPrecedence) {
  auto plain = Config::parse(kOneBit);
  auto with_dir = Config::parse(std::string(kOneBit) + "[output]\ndir = from_config\n");
  RunOptions none;
  RunOptions flag;
  flag.out_dir = "from_flag";
  {
    EnvGuard env(nullptr);
    EXPECT_EQ(output_dir_for(plain, none), (fs::path("out") / "exp_badmatch_1bit").string());
    EXPECT_EQ(output_dir_for(with_dir, none), "from_config");
  }
  {
    EnvGuard env("from_env");
    EXPECT_EQ(output_dir_for(with_dir, none), "from_env");
    EXPECT_EQ(output_dir_for(with_dir, flag), "from_flag");
  }
}

TEST(Experiments, WritesAllFilesAndPasses) {
  const fs::path dir = scratch("1bit");
  RunOptions opt;
  opt.out_dir = dir.string();
  auto out = run_experiment(Config::parse(kOneBit), opt);
  EXPECT_TRUE(out.passed()) << out.failures();
  for (const char* f : {"results.csv", "records.jsonl", "meta.json", "summary.txt"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  const std::string csv = slurp(dir / "results.csv");
  EXPECT_EQ(csv, results_csv(out));
  EXPECT_EQ(csv.substr(0, csv.find('\n')).find(','), out.header.front().size());
  EXPECT_NE(slurp(dir / "meta.json").find("\"seed\""), std::string::npos);
  fs::remove_all(dir);
}

TEST(Experiments, CsvIsDeterministic) {
  const char* cfg = "experiment = exp_counter_finite\nseed = 4\n[counter]\neps = 1/20\n";
  RunOptions opt;
  opt.write_files = false;
  auto a = run_experiment_report(Config::parse(cfg), opt);
  auto b = run_experiment_report(Config::parse(cfg), opt);
  EXPECT_EQ(results_csv(a), results_csv(b));
  EXPECT_TRUE(a.passed()) << a.failures();
}

TEST(Experiments, UnknownKeyAndExperiment) {
  RunOptions opt;
  opt.write_files = false;
  try {
    run_experiment_report(Config::parse(std::string(kOneBit) + "typo = 3\n"), opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigInvalid);
  }
  try {
    run_experiment_report(Config::parse("experiment = exp_nothing\nseed = 1\n"), opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigInvalid);
  }
}
