#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "csg/config.hpp"

namespace csg {

struct Assertion {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ExperimentOutput {
  std::string experiment;
  std::string out_dir;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  double wall_seconds = 0.0;
  std::string claim;  // what the experiment checks, in plain words
  std::vector<std::string> notes;
  std::vector<std::string> header;  // results.csv
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> records;  // records.jsonl, one JSON object per line
  std::vector<Assertion> assertions;

  bool passed() const;
  /// Names of the failed assertions, comma separated.
  std::string failures() const;
};

struct RunOptions {
  std::optional<std::string> out_dir;  // beats CSG_OUT_DIR and [output] dir
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  bool write_files = true;
};

const std::vector<std::string>& experiment_names();

/// Output directory: --out, else $CSG_OUT_DIR, else output.dir, else
/// out/<experiment>.
std::string output_dir_for(const Config& config, const RunOptions& options);

/// Runs the experiment and writes results.csv, records.jsonl, meta.json and
/// summary.txt. Failed assertions are reported, not thrown.
ExperimentOutput run_experiment_report(const Config& config, const RunOptions& options = {});

/// As above, then AssertionFailed naming the failed assertions.
ExperimentOutput run_experiment(const Config& config, const RunOptions& options = {});

/// CSV text of the results table.
std::string results_csv(const ExperimentOutput& out);

}  // namespace csg
