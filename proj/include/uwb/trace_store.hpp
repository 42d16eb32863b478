#pragma once

// Per-level sample traces with stage labels and run metadata; persisted as
// one CSV per level plus a JSON sidecar.

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace uwb {

enum class Stage { I = 1, II = 2, III = 3, IV = 4 };

struct TraceRow {
  long iteration = 0;
  int stage = 1;
  double temperature = 1.0;
  double log_posterior = 0.0;
  double log_likelihood = 0.0;
  std::vector<double> values;  // theta, gamma, sigma_v2
};

class LevelTrace {
 public:
  explicit LevelTrace(std::size_t width = 0) : width_(width) {}

  void append(const TraceRow& row);
  std::size_t size() const { return iteration_.size(); }
  std::size_t width() const { return width_; }
  bool empty() const { return iteration_.empty(); }

  long iteration(std::size_t i) const { return iteration_[i]; }
  int stage(std::size_t i) const { return stage_[i]; }
  double temperature(std::size_t i) const { return temperature_[i]; }
  double log_posterior(std::size_t i) const { return log_posterior_[i]; }
  double log_likelihood(std::size_t i) const { return log_likelihood_[i]; }
  double value(std::size_t i, std::size_t column) const { return values_[i * width_ + column]; }

  /// Rows whose stage is `stage` (0 selects every row), columns [first, first+count).
  Eigen::MatrixXd matrix(std::size_t first, std::size_t count, int stage = 0) const;
  std::vector<std::size_t> rows_in_stage(int stage) const;

 private:
  std::size_t width_;
  std::vector<long> iteration_;
  std::vector<int> stage_;
  std::vector<double> temperature_;
  std::vector<double> log_posterior_;
  std::vector<double> log_likelihood_;
  std::vector<double> values_;
};

struct TraceStore {
  std::vector<std::string> columns;  // names of TraceRow::values
  std::size_t theta_size = 0;
  std::size_t gamma_size = 0;
  std::vector<LevelTrace> levels;
  nlohmann::json metadata = nlohmann::json::object();

  static TraceStore make(std::size_t layers, std::size_t gamma_size, std::size_t levels);

  /// Writes level_<k>.csv (k = 1..L) and metadata.json into dir.
  void save(const std::filesystem::path& dir) const;
  static TraceStore load(const std::filesystem::path& dir);

  /// theta columns of level `level` (0-based) restricted to a stage.
  Eigen::MatrixXd theta(std::size_t level, int stage = 0) const;
};

/// Locale-independent shortest round-trip decimal form (at most 17 digits).
std::string format_double(double v);

}  // namespace uwb
