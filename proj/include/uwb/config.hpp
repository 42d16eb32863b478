#pragma once

// Versioned experiment configuration (JSON) and the objects built from it.

#include <cstdint>
#include <filesystem>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "uwb/em_forward.hpp"
#include "uwb/pipeline.hpp"
#include "uwb/posterior.hpp"

namespace uwb {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kConfigSchemaVersion = 1;

struct ExperimentConfig {
  // Ground truth: a named preset, or explicit eps/sigma/d when preset is empty.
  std::string preset = "lung_deflated";
  std::vector<double> eps;
  std::vector<double> sigma;
  std::vector<double> d;
  std::string preset_file;  // empty selects the shipped data file
  double eps_medium = 1.0;
  double sigma_medium = 0.0;

  int n_freq = 512;
  double bandwidth_hz = 16e9;
  int pulse_length = 23;
  int basis_size = 8;
  double center_frequency_hz = 4e9;

  double snr_db = 40.0;  // +inf for a noise-free measurement
  std::uint64_t measurement_seed = 7;

  double eps_min = 2.0, eps_max = 100.0;
  double sigma_min = 5e-3, sigma_max = 3.0;
  double d_min = 1e-3, d_max = 3e-2;

  double prior_concentration = 100.0;
  bool last_layer_flat = true;
  std::vector<double> prior_modes;           // normalized; empty uses the truth
  std::vector<double> prior_concentrations;  // empty uses the rule above
  double sigma_gamma2 = 10.0;
  double alpha_v = 1e-3;
  double beta_v = 1e-3;

  PipelineConfig pipeline;

  double burn_in_fraction = 0.0;
  double credibility_level = 0.95;
  std::vector<double> crlb_snr_db = {10, 20, 30, 40, 50};
  int nrmse_trials = 20;

  std::size_t layers() const;
  void validate() const;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& file);
nlohmann::json to_json(const ExperimentConfig& cfg);
/// FNV-1a over the canonical JSON form, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

struct Experiment {
  LayerProfile truth;
  FrequencyGrid grid;
  Eigen::MatrixXd basis;
  Eigen::VectorXd pulse;       // ground-truth waveform h = A gamma
  Eigen::VectorXd gamma_true;  // projection of the derivative-of-Gaussian pulse
  ParameterBox box;
  BetaPriorSpec theta_prior;
  PulsePriorSpec pulse_prior;
  NoisePriorSpec noise_prior;

  /// Noise variance that gives `snr_db` on the noise-free signal (0 for +inf).
  double noise_variance(double snr_db) const;
  Measurement simulate(double snr_db, std::uint64_t seed) const;
  PosteriorModel model(Measurement m) const;
  Eigen::VectorXd phi_true() const;  // (theta, gamma)
};

Experiment build_experiment(const ExperimentConfig& cfg);

}  // namespace uwb
