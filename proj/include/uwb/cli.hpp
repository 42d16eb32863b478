#pragma once

// Command-line front end: simulate, sample, diagnose, crlb and nrmse.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "uwb/config.hpp"

namespace uwb {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitTimeout = 2, kExitNumeric = 3 };

/// Maps the exception currently being handled to an exit code.
int exit_code_for_current_exception();

/// Complex CSV with columns index, freq_hz, re, im. Lines starting with '#'
/// carry provenance and are skipped on read.
void write_measurement(const std::filesystem::path& file, const Measurement& m,
                       const std::string& provenance);
/// Reads y and checks its frequencies against `grid`.
Measurement read_measurement(const std::filesystem::path& file, const FrequencyGrid& grid);

/// "# config_hash=<hash> seed=<seed>"
std::string provenance_line(const ExperimentConfig& cfg, std::uint64_t seed);

struct SampleOptions {
  std::filesystem::path measurement;
  std::filesystem::path out;
  std::optional<std::filesystem::path> resume;
  long checkpoint_every = 0;
  bool verbose = false;
};

struct DiagnoseOptions {
  std::vector<std::filesystem::path> runs;  // output directories of `sample`
  std::filesystem::path out;
  long mpsrf_step = 100;
  int mpsrf_stage = 0;
  int stage = 4;
  std::size_t max_lag = 200;
  bool estimates = true;
};

enum class NrmseEstimator { Pipeline, Local };

int cmd_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out);
int cmd_sample(const ExperimentConfig& cfg, const SampleOptions& opts);
int cmd_diagnose(const DiagnoseOptions& opts);
int cmd_crlb(const ExperimentConfig& cfg, const std::filesystem::path& out);
int cmd_nrmse(const ExperimentConfig& cfg, const std::filesystem::path& out,
              NrmseEstimator estimator, bool verbose = false);

/// Parses argv and dispatches; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace uwb
