#include "uwb/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "uwb/presets.hpp"
#include "uwb/pulse.hpp"

namespace uwb {

namespace {

using nlohmann::json;

/// Typed access to one JSON object that remembers which keys were read so
/// the rest can be rejected.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
  }

  Section sub(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Section(j_.contains(key) ? j_.at(key) : empty, path_ + "." + key);
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ConfigError(path_ + ": unknown key '" + key + "'");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_snr(Section& s, const std::string& key, double& out) {
  if (!s.has(key)) {
    s.get(key, out);
    return;
  }
  const json& v = s.raw(key);
  if (v.is_null() || (v.is_string() && v.get<std::string>() == "inf"))
    out = std::numeric_limits<double>::infinity();
  else if (v.is_number())
    out = v.get<double>();
  else
    throw ConfigError("snr_db must be a number, \"inf\" or null");
}

}  // namespace

std::size_t ExperimentConfig::layers() const {
  if (preset.empty()) return eps.size();
  const PresetLibrary lib =
      preset_file.empty() ? PresetLibrary::load_default() : PresetLibrary::load(preset_file);
  return lib.preset(preset).tissues.size();
}

void ExperimentConfig::validate() const {
  if (preset.empty()) {
    if (eps.empty() || eps.size() != sigma.size() || eps.size() != d.size())
      throw ConfigError("explicit profile needs eps, sigma and d of equal nonzero length");
  }
  if (n_freq < 1) throw ConfigError("grid.n_freq must be positive");
  if (!(bandwidth_hz > 0.0)) throw ConfigError("grid.bandwidth_hz must be positive");
  if (pulse_length < 1 || basis_size < 1) throw ConfigError("pulse sizes must be positive");
  if (basis_size > pulse_length) throw ConfigError("pulse.basis_size must not exceed pulse.length");
  if (!(center_frequency_hz > 0.0)) throw ConfigError("pulse.center_frequency_hz must be positive");
  if (!(eps_min < eps_max && sigma_min < sigma_max && d_min < d_max))
    throw ConfigError("bounds must satisfy min < max");
  if (!(eps_min > 0.0 && sigma_min >= 0.0 && d_min > 0.0))
    throw ConfigError("bounds must be positive");
  if (!(prior_concentration >= 0.0)) throw ConfigError("prior concentration must be >= 0");
  if (!(sigma_gamma2 > 0.0 && alpha_v > 0.0 && beta_v > 0.0))
    throw ConfigError("prior hyperparameters must be positive");
  if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0))
    throw ConfigError("burn_in_fraction must lie in [0, 1)");
  if (!(credibility_level > 0.0 && credibility_level < 1.0))
    throw ConfigError("credibility_level must lie in (0, 1)");
  if (nrmse_trials < 1) throw ConfigError("nrmse.trials must be positive");
  const std::size_t m = layers();
  if (!prior_modes.empty() && prior_modes.size() != 3 * m)
    throw ConfigError("priors.modes must have 3M entries");
  if (!prior_concentrations.empty() && prior_concentrations.size() != 3 * m)
    throw ConfigError("priors.concentrations must have 3M entries");
  try {
    pipeline.validate(static_cast<Eigen::Index>(3 * m));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("sampler settings: ") + e.what());
  }
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  Section root(j, "config");
  int version = 0;
  root.get("schema_version", version);
  if (version != kConfigSchemaVersion)
    throw ConfigError("config.schema_version must be " + std::to_string(kConfigSchemaVersion));

  {
    Section s = root.sub("profile");
    s.get("preset", c.preset);
    s.get("preset_file", c.preset_file);
    s.get("eps", c.eps);
    s.get("sigma", c.sigma);
    s.get("d", c.d);
    s.get("eps_medium", c.eps_medium);
    s.get("sigma_medium", c.sigma_medium);
    s.finish();
  }
  {
    Section s = root.sub("grid");
    s.get("n_freq", c.n_freq);
    s.get("bandwidth_hz", c.bandwidth_hz);
    s.finish();
  }
  {
    Section s = root.sub("pulse");
    s.get("length", c.pulse_length);
    s.get("basis_size", c.basis_size);
    s.get("center_frequency_hz", c.center_frequency_hz);
    s.finish();
  }
  {
    Section s = root.sub("measurement");
    read_snr(s, "snr_db", c.snr_db);
    s.get("seed", c.measurement_seed);
    s.finish();
  }
  {
    Section s = root.sub("bounds");
    std::vector<double> e{c.eps_min, c.eps_max}, g{c.sigma_min, c.sigma_max}, d{c.d_min, c.d_max};
    s.get("eps", e);
    s.get("sigma", g);
    s.get("d", d);
    s.finish();
    if (e.size() != 2 || g.size() != 2 || d.size() != 2)
      throw ConfigError("config.bounds entries must be [min, max] pairs");
    c.eps_min = e[0];
    c.eps_max = e[1];
    c.sigma_min = g[0];
    c.sigma_max = g[1];
    c.d_min = d[0];
    c.d_max = d[1];
  }
  {
    Section s = root.sub("priors");
    s.get("concentration", c.prior_concentration);
    s.get("last_layer_flat", c.last_layer_flat);
    s.get("modes", c.prior_modes);
    s.get("concentrations", c.prior_concentrations);
    s.get("sigma_gamma2", c.sigma_gamma2);
    s.get("alpha_v", c.alpha_v);
    s.get("beta_v", c.beta_v);
    s.finish();
  }
  PipelineConfig& p = c.pipeline;
  {
    Section s = root.sub("tempering");
    s.get("levels", p.levels);
    s.get("t_first", p.t_first);
    s.get("t_last", p.t_last);
    std::string init = "geometric";
    s.get("init", init);
    if (init != "geometric") throw ConfigError("config.tempering.init must be \"geometric\"");
    s.finish();
  }
  {
    Section s = root.sub("adaptation");
    AdaptationConfig& a = p.adapt;
    s.get("k_t", a.k_t);
    s.get("j_t", a.j_t);
    s.get("n_t", a.n_t);
    s.get("k_eps", a.k_eps);
    s.get("j_eps", a.j_eps);
    s.get("xi", a.xi);
    s.get("eps_init", a.eps_init);
    s.get("convergence_tolerance", a.convergence_tolerance);
    s.get("mh_target", a.mh_target);
    s.get("mh_concentration_init", a.mh_concentration_init);
    s.finish();
  }
  {
    Section s = root.sub("sampler");
    std::string kernel = to_string(p.kernel);
    s.get("kernel", kernel);
    try {
      p.kernel = kernel_from_string(kernel);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config.sampler.kernel: ") + e.what());
    }
    s.get("leapfrog_steps", p.gibbs.leapfrog_steps);
    s.get("prior_in_potential", p.gibbs.prior_in_potential);
    s.get("slice_width", p.gibbs.slice.width);
    s.get("slice_max_stepout", p.gibbs.slice.max_stepout);
    s.get("slice_max_shrink", p.gibbs.slice.max_shrink);
    s.get("random_scan", p.gibbs.slice.random_scan);
    s.finish();
  }
  {
    Section s = root.sub("stages");
    s.get("stage1_min", p.stage1_min);
    s.get("stage1_max", p.stage1_max);
    s.get("stage2_length", p.stage2_length);
    s.get("stage3_max", p.stage3_max);
    s.get("stage4_length", p.stage4_length);
    s.get("reset_swaps_at_stage", p.reset_swaps_at_stage);
    s.finish();
  }
  {
    Section s = root.sub("estimation");
    s.get("burn_in_fraction", c.burn_in_fraction);
    s.get("credibility_level", c.credibility_level);
    s.finish();
  }
  {
    Section s = root.sub("crlb");
    s.get("snr_db", c.crlb_snr_db);
    s.finish();
  }
  {
    Section s = root.sub("nrmse");
    s.get("trials", c.nrmse_trials);
    s.finish();
  }
  root.get("seed", p.seed);
  root.get("workers", p.workers);
  root.finish();
  if (p.workers == 0) p.workers = p.levels;
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw ConfigError("cannot open config " + file.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
  try {
    return parse_config(j);
  } catch (const ConfigError& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

json to_json(const ExperimentConfig& c) {
  const PipelineConfig& p = c.pipeline;
  const AdaptationConfig& a = p.adapt;
  json j;
  j["schema_version"] = kConfigSchemaVersion;
  json profile = {{"eps_medium", c.eps_medium}, {"sigma_medium", c.sigma_medium}};
  if (!c.preset.empty()) profile["preset"] = c.preset;
  if (!c.preset_file.empty()) profile["preset_file"] = c.preset_file;
  if (!c.eps.empty()) profile["eps"] = c.eps;
  if (!c.sigma.empty()) profile["sigma"] = c.sigma;
  if (!c.d.empty()) profile["d"] = c.d;
  j["profile"] = profile;
  j["grid"] = {{"n_freq", c.n_freq}, {"bandwidth_hz", c.bandwidth_hz}};
  j["pulse"] = {{"length", c.pulse_length},
                {"basis_size", c.basis_size},
                {"center_frequency_hz", c.center_frequency_hz}};
  j["measurement"] = {{"seed", c.measurement_seed}};
  if (std::isinf(c.snr_db))
    j["measurement"]["snr_db"] = "inf";
  else
    j["measurement"]["snr_db"] = c.snr_db;
  j["bounds"] = {{"eps", {c.eps_min, c.eps_max}},
                 {"sigma", {c.sigma_min, c.sigma_max}},
                 {"d", {c.d_min, c.d_max}}};
  j["priors"] = {{"concentration", c.prior_concentration},
                 {"last_layer_flat", c.last_layer_flat},
                 {"sigma_gamma2", c.sigma_gamma2},
                 {"alpha_v", c.alpha_v},
                 {"beta_v", c.beta_v}};
  if (!c.prior_modes.empty()) j["priors"]["modes"] = c.prior_modes;
  if (!c.prior_concentrations.empty()) j["priors"]["concentrations"] = c.prior_concentrations;
  j["tempering"] = {{"levels", p.levels}, {"t_first", p.t_first}, {"t_last", p.t_last},
                    {"init", "geometric"}};
  j["adaptation"] = {{"k_t", a.k_t},
                     {"j_t", a.j_t},
                     {"n_t", a.n_t},
                     {"k_eps", a.k_eps},
                     {"j_eps", a.j_eps},
                     {"xi", a.xi},
                     {"eps_init", a.eps_init},
                     {"convergence_tolerance", a.convergence_tolerance},
                     {"mh_target", a.mh_target},
                     {"mh_concentration_init", a.mh_concentration_init}};
  j["sampler"] = {{"kernel", to_string(p.kernel)},
                  {"leapfrog_steps", p.gibbs.leapfrog_steps},
                  {"prior_in_potential", p.gibbs.prior_in_potential},
                  {"slice_width", p.gibbs.slice.width},
                  {"slice_max_stepout", p.gibbs.slice.max_stepout},
                  {"slice_max_shrink", p.gibbs.slice.max_shrink},
                  {"random_scan", p.gibbs.slice.random_scan}};
  j["stages"] = {{"stage1_min", p.stage1_min},       {"stage1_max", p.stage1_max},
                 {"stage2_length", p.stage2_length}, {"stage3_max", p.stage3_max},
                 {"stage4_length", p.stage4_length}, {"reset_swaps_at_stage", p.reset_swaps_at_stage}};
  j["estimation"] = {{"burn_in_fraction", c.burn_in_fraction},
                     {"credibility_level", c.credibility_level}};
  j["crlb"] = {{"snr_db", c.crlb_snr_db}};
  j["nrmse"] = {{"trials", c.nrmse_trials}};
  j["seed"] = p.seed;
  j["workers"] = p.workers;
  return j;
}

std::string config_hash(const ExperimentConfig& cfg) {
  json j = to_json(cfg);
  // Worker count never changes results.
  j.erase("workers");
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double Experiment::noise_variance(double snr_db) const {
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  return noise_variance_for_snr(noise_free_signal(truth, gamma_true, basis, grid), snr_db);
}

Measurement Experiment::simulate(double snr_db, std::uint64_t seed) const {
  return synthesize_measurement(truth, gamma_true, basis, grid, noise_variance(snr_db), seed);
}

PosteriorModel Experiment::model(Measurement m) const {
  return PosteriorModel(std::move(m), truth.layers(), truth.eps_medium, truth.sigma_medium, box,
                        theta_prior, pulse_prior, noise_prior);
}

Eigen::VectorXd Experiment::phi_true() const {
  const Eigen::VectorXd th = truth.theta();
  Eigen::VectorXd phi(th.size() + gamma_true.size());
  phi << th, gamma_true;
  return phi;
}

Experiment build_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  Experiment e;
  if (!cfg.preset.empty()) {
    const PresetLibrary lib =
        cfg.preset_file.empty() ? PresetLibrary::load_default() : PresetLibrary::load(cfg.preset_file);
    e.truth = lib.profile(cfg.preset, cfg.eps_medium, cfg.sigma_medium);
  } else {
    e.truth.eps = cfg.eps;
    e.truth.sigma = cfg.sigma;
    e.truth.d = cfg.d;
    e.truth.eps_medium = cfg.eps_medium;
    e.truth.sigma_medium = cfg.sigma_medium;
    e.truth.validate();
  }
  const std::size_t m = e.truth.layers();
  const SubspaceSpec spec = SubspaceSpec::with_default_bandwidth(cfg.pulse_length, cfg.basis_size);
  const double dt = sample_interval_for_bandwidth(spec.half_bandwidth, cfg.bandwidth_hz);
  e.grid = FrequencyGrid::regular(cfg.n_freq, dt, cfg.pulse_length);
  e.basis = dps_basis(spec);
  const PulseProjection proj =
      project_pulse(gaussian_derivative_pulse(cfg.center_frequency_hz, cfg.pulse_length, dt), e.basis);
  e.gamma_true = proj.gamma;
  e.pulse = e.basis * e.gamma_true;

  e.box = ParameterBox::uniform_ranges(m, cfg.eps_min, cfg.eps_max, cfg.sigma_min, cfg.sigma_max,
                                       cfg.d_min, cfg.d_max);
  const Eigen::VectorXd theta = e.truth.theta();
  if (!e.box.contains_strict(theta)) throw ConfigError("true profile lies outside the bounds");
  const auto n = static_cast<Eigen::Index>(3 * m);
  e.theta_prior.mode =
      cfg.prior_modes.empty()
          ? Eigen::VectorXd(e.box.normalize(theta))
          : Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(cfg.prior_modes.data(), n));
  if (cfg.prior_concentrations.empty()) {
    e.theta_prior.concentration = Eigen::VectorXd::Constant(n, cfg.prior_concentration);
    if (cfg.last_layer_flat) {
      e.theta_prior.concentration[static_cast<Eigen::Index>(eps_index(m, m))] = 0.0;
      e.theta_prior.concentration[static_cast<Eigen::Index>(sigma_index(m, m))] = 0.0;
    }
  } else {
    e.theta_prior.concentration =
        Eigen::Map<const Eigen::VectorXd>(cfg.prior_concentrations.data(), n);
  }
  e.theta_prior.validate(n);
  e.pulse_prior.sigma_gamma2 = cfg.sigma_gamma2;
  e.pulse_prior.basis = e.basis;
  e.noise_prior = {cfg.alpha_v, cfg.beta_v};
  return e;
}

}  // namespace uwb
