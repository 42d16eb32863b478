#include "uwb/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "uwb/bounds.hpp"
#include "uwb/diagnostics.hpp"
#include "uwb/pipeline.hpp"
#include "uwb/pulse.hpp"

namespace uwb {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  return os;
}

void write_json(const fs::path& file, const json& j) {
  std::ofstream os = open_out(file);
  os << j.dump(2) << '\n';
  if (!os) throw std::runtime_error("failed writing " + file.string());
}

json read_json(const fs::path& file) {
  std::ifstream is(file);
  if (!is) throw std::runtime_error("cannot open " + file.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw std::runtime_error(file.string() + ": " + e.what());
  }
}

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

json named(const std::vector<std::string>& names, const Eigen::VectorXd& v) {
  json j = json::object();
  for (std::size_t i = 0; i < names.size(); ++i) j[names[i]] = v[static_cast<Eigen::Index>(i)];
  return j;
}

/// theta names followed by gamma1..L.
std::vector<std::string> phi_names(std::size_t layers, std::size_t gamma_size) {
  std::vector<std::string> n = parameter_names(layers);
  for (std::size_t k = 1; k <= gamma_size; ++k) n.push_back("gamma" + std::to_string(k));
  return n;
}

json provenance(const ExperimentConfig& cfg, std::uint64_t seed) {
  return {{"config_hash", config_hash(cfg)}, {"seed", seed}};
}

void progress(bool verbose, const std::string& msg) {
  if (verbose) std::cerr << msg << std::endl;
}

}  // namespace

int exit_code_for_current_exception() {
  try {
    throw;
  } catch (const StageTimeout&) {
    return kExitTimeout;
  } catch (const DomainError&) {
    return kExitNumeric;
  } catch (const SamplerError&) {
    return kExitNumeric;
  } catch (const DiagnosticError&) {
    return kExitNumeric;
  } catch (const std::range_error&) {
    return kExitNumeric;
  } catch (const std::overflow_error&) {
    return kExitNumeric;
  } catch (...) {
    return kExitUsage;
  }
}

std::string provenance_line(const ExperimentConfig& cfg, std::uint64_t seed) {
  return "# config_hash=" + config_hash(cfg) + " seed=" + std::to_string(seed);
}

void write_measurement(const fs::path& file, const Measurement& m, const std::string& prov) {
  std::ofstream os = open_out(file);
  if (!prov.empty()) os << prov << '\n';
  os << "index,freq_hz,re,im\n";
  for (std::size_t n = 0; n < m.grid.size(); ++n) {
    const auto i = static_cast<Eigen::Index>(n);
    os << n + 1 << ',' << format_double(m.grid.omega[n] / (2.0 * std::numbers::pi)) << ','
       << format_double(m.y[i].real()) << ',' << format_double(m.y[i].imag()) << '\n';
  }
  if (!os) throw std::runtime_error("failed writing " + file.string());
}

Measurement read_measurement(const fs::path& file, const FrequencyGrid& grid) {
  std::ifstream is(file);
  if (!is) throw std::runtime_error("cannot open measurement " + file.string());
  Measurement m;
  m.grid = grid;
  m.y.resize(static_cast<Eigen::Index>(grid.size()));
  std::string line;
  std::size_t lineno = 0, rows = 0;
  bool header = false;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error(file.string() + ":" + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "index,freq_hz,re,im") fail("expected header index,freq_hz,re,im");
      header = true;
      continue;
    }
    std::istringstream ls(line);
    ls.imbue(std::locale::classic());
    std::string cell[4];
    for (auto& c : cell)
      if (!std::getline(ls, c, ',')) fail("expected 4 fields");
    std::size_t idx = 0;
    double f = 0, re = 0, im = 0;
    try {
      idx = std::stoul(cell[0]);
      f = std::stod(cell[1]);
      re = std::stod(cell[2]);
      im = std::stod(cell[3]);
    } catch (const std::exception&) {
      fail("malformed number");
    }
    if (idx != rows + 1) fail("index out of sequence");
    if (rows >= grid.size()) fail("more rows than grid frequencies");
    const double expect = grid.omega[rows] / (2.0 * std::numbers::pi);
    if (std::abs(f - expect) > 1e-9 * expect) fail("frequency does not match the configured grid");
    m.y[static_cast<Eigen::Index>(rows)] = Complex(re, im);
    ++rows;
  }
  if (!header) throw std::runtime_error(file.string() + ": missing header");
  if (rows != grid.size())
    throw std::runtime_error(file.string() + ": expected " + std::to_string(grid.size()) +
                             " rows, found " + std::to_string(rows));
  return m;
}

int cmd_simulate(const ExperimentConfig& cfg, const fs::path& out) {
  const Experiment e = build_experiment(cfg);
  const std::uint64_t seed = cfg.measurement_seed;
  const Measurement m = e.simulate(cfg.snr_db, seed);
  const std::string prov = provenance_line(cfg, seed);
  fs::create_directories(out);
  write_measurement(out / "measurement.csv", m, prov);

  const double sigma_v2 = e.noise_variance(cfg.snr_db);
  const Eigen::VectorXcd clean = noise_free_signal(e.truth, e.gamma_true, e.basis, e.grid);
  const Eigen::VectorXcd noise = m.y - clean;
  json truth = provenance(cfg, seed);
  truth["theta"] = named(parameter_names(e.truth.layers()), e.truth.theta());
  truth["gamma"] = to_vec(e.gamma_true);
  truth["sigma_v2"] = sigma_v2;
  truth["snr_db_target"] = std::isinf(cfg.snr_db) ? json("inf") : json(cfg.snr_db);
  const double noise_power = signal_power(noise);
  truth["snr_db_realized"] =
      noise_power > 0.0 ? json(10.0 * std::log10(signal_power(clean) / noise_power)) : json("inf");
  write_json(out / "truth.json", truth);
  write_json(out / "config.json", to_json(cfg));

  std::ofstream bs = open_out(out / "basis.csv");
  bs << prov << "\nq";
  for (Eigen::Index k = 0; k < e.basis.cols(); ++k) bs << ",a" << k + 1;
  bs << ",pulse\n";
  for (Eigen::Index q = 0; q < e.basis.rows(); ++q) {
    bs << q;
    for (Eigen::Index k = 0; k < e.basis.cols(); ++k) bs << ',' << format_double(e.basis(q, k));
    bs << ',' << format_double(e.pulse[q]) << '\n';
  }
  return kExitOk;
}

int cmd_sample(const ExperimentConfig& cfg, const SampleOptions& opts) {
  const Experiment e = build_experiment(cfg);
  const Measurement m = read_measurement(opts.measurement, e.grid);
  const PosteriorModel model = e.model(m);
  const std::string hash = config_hash(cfg);
  fs::create_directories(opts.out);

  Pipeline pipe(model, cfg.pipeline);
  if (opts.resume) {
    const json ck = read_json(*opts.resume);
    if (ck.value("config_hash", std::string()) != hash)
      throw ConfigError("checkpoint was written with a different configuration");
    pipe.restore(ck.at("pipeline"));
    progress(opts.verbose, "resumed at iteration " + std::to_string(pipe.iteration()));
  } else {
    pipe.initialize();
  }
  pipe.trace().metadata["config_hash"] = hash;
  pipe.trace().metadata["seed"] = cfg.pipeline.seed;

  auto save_checkpoint = [&]() {
    json ck = provenance(cfg, cfg.pipeline.seed);
    ck["pipeline"] = pipe.checkpoint();
    write_json(opts.out / "checkpoint.json", ck);
  };

  Stage last = pipe.stage();
  while (pipe.status() == RunStatus::Running) {
    pipe.step();
    if (pipe.stage() != last) {
      last = pipe.stage();
      progress(opts.verbose, "iteration " + std::to_string(pipe.iteration()) + ": stage " +
                                 std::to_string(static_cast<int>(last)));
    }
    if (opts.checkpoint_every > 0 && pipe.iteration() % opts.checkpoint_every == 0 &&
        pipe.status() == RunStatus::Running)
      save_checkpoint();
  }

  write_json(opts.out / "config.json", to_json(cfg));
  write_measurement(opts.out / "measurement.csv", m, provenance_line(cfg, cfg.measurement_seed));
  pipe.trace().save(opts.out / "trace");
  json report = provenance(cfg, cfg.pipeline.seed);
  report["run"] = pipe.report();
  write_json(opts.out / "report.json", report);

  if (pipe.status() == RunStatus::Timeout) {
    save_checkpoint();
    std::cerr << "stage " << static_cast<int>(pipe.stage()) << " timed out after "
              << pipe.stage_iteration() << " iterations; checkpoint written\n";
    return kExitTimeout;
  }

  const EstimateReport est =
      estimate_report(model, pipe.trace(), 0, static_cast<int>(Stage::IV), cfg.burn_in_fraction,
                      cfg.credibility_level);
  json ej = provenance(cfg, cfg.pipeline.seed);
  const std::vector<std::string>& cols = pipe.trace().columns;
  ej["mmse"] = named(cols, est.mmse);
  ej["map"] = named(cols, est.map);
  ej["map_log_posterior"] = est.map_log_posterior;
  ej["credibility_level"] = est.level;
  json iv = json::object();
  for (std::size_t c = 0; c < cols.size(); ++c)
    iv[cols[c]] = {est.intervals[c].lower, est.intervals[c].upper};
  ej["intervals"] = iv;
  write_json(opts.out / "estimate.json", ej);
  return kExitOk;
}

int cmd_diagnose(const DiagnoseOptions& opts) {
  if (opts.runs.empty()) throw ConfigError("diagnose needs at least one run directory");
  fs::create_directories(opts.out);
  std::vector<TraceStore> traces;
  std::ostringstream prov;
  prov << "#";
  for (const fs::path& dir : opts.runs) {
    traces.push_back(TraceStore::load(dir / "trace"));
    const json& meta = traces.back().metadata;
    prov << " run=" << dir.filename().string()
         << " config_hash=" << meta.value("config_hash", std::string("unknown"))
         << " seed=" << meta.value("seed", std::uint64_t{0});
  }
  const std::size_t p = traces.front().theta_size;
  const std::vector<std::string>& names = traces.front().columns;
  for (const TraceStore& t : traces)
    if (t.theta_size != p || t.columns != names)
      throw ConfigError("diagnose: runs have different parameter layouts");

  std::ofstream lp = open_out(opts.out / "log_posterior.csv");
  lp << prov.str() << "\nrun,iteration,stage,log_posterior\n";
  for (std::size_t r = 0; r < traces.size(); ++r) {
    const LevelTrace& t = traces[r].levels.at(0);
    for (std::size_t i = 0; i < t.size(); ++i)
      lp << r + 1 << ',' << t.iteration(i) << ',' << t.stage(i) << ','
         << format_double(t.log_posterior(i)) << '\n';
  }

  if (traces.size() >= 2) {
    std::vector<Eigen::MatrixXd> runs;
    Eigen::Index n = std::numeric_limits<Eigen::Index>::max();
    for (const TraceStore& t : traces) {
      runs.push_back(t.theta(0, opts.mpsrf_stage));
      n = std::min(n, runs.back().rows());
    }
    for (Eigen::MatrixXd& r : runs) r = r.topRows(n).eval();
    std::ofstream ms = open_out(opts.out / "mpsrf.csv");
    ms << prov.str() << "\niteration,mpsrf\n";
    for (const MpsrfPoint& pt : mpsrf_curve(runs, opts.mpsrf_step))
      ms << pt.iteration << ',' << format_double(pt.value) << '\n';
  }

  std::ofstream as = open_out(opts.out / "acf.csv");
  std::ofstream ts = open_out(opts.out / "act.csv");
  as << prov.str() << "\nrun,parameter,lag,acf\n";
  ts << prov.str() << "\nrun,parameter,act\n";
  for (std::size_t r = 0; r < traces.size(); ++r) {
    const Eigen::MatrixXd th = traces[r].theta(0, opts.stage);
    if (th.rows() < 2) throw DiagnosticError("diagnose: too few samples in the selected stage");
    for (std::size_t k = 0; k < p; ++k) {
      const auto c = static_cast<Eigen::Index>(k);
      const std::vector<double> s(th.col(c).data(), th.col(c).data() + th.rows());
      const std::vector<double> rho = acf(s, std::min<std::size_t>(opts.max_lag, s.size() - 1));
      for (std::size_t lag = 0; lag < rho.size(); ++lag)
        as << r + 1 << ',' << names[k] << ',' << lag << ',' << format_double(rho[lag]) << '\n';
      ts << r + 1 << ',' << names[k] << ',' << format_double(act(s)) << '\n';
    }
  }

  if (opts.estimates) {
    json all = json::array();
    for (std::size_t r = 0; r < traces.size(); ++r) {
      const fs::path& dir = opts.runs[r];
      const ExperimentConfig cfg = load_config(dir / "config.json");
      const Experiment e = build_experiment(cfg);
      const PosteriorModel model = e.model(read_measurement(dir / "measurement.csv", e.grid));
      const EstimateReport est = estimate_report(model, traces[r], 0, opts.stage,
                                                 cfg.burn_in_fraction, cfg.credibility_level);
      json ej = provenance(cfg, cfg.pipeline.seed);
      ej["run"] = dir.string();
      ej["mmse"] = named(names, est.mmse);
      ej["map"] = named(names, est.map);
      ej["map_log_posterior"] = est.map_log_posterior;
      ej["credibility_level"] = est.level;
      json iv = json::object();
      for (std::size_t c = 0; c < names.size(); ++c)
        iv[names[c]] = {est.intervals[c].lower, est.intervals[c].upper};
      ej["intervals"] = iv;
      all.push_back(ej);
    }
    write_json(opts.out / "estimates.json", all);
  }
  return kExitOk;
}

int cmd_crlb(const ExperimentConfig& cfg, const fs::path& out) {
  const Experiment e = build_experiment(cfg);
  const ReflectivityModel forward(e.grid, e.truth.layers(), e.truth.eps_medium, e.truth.sigma_medium);
  const Eigen::MatrixXcd pulse_map = partial_dft(e.grid) * e.basis;
  const Eigen::VectorXd phi = e.phi_true();
  const std::vector<std::string> names = phi_names(e.truth.layers(), e.basis.cols());
  const Eigen::MatrixXcd jac = signal_jacobian(forward, pulse_map, e.truth.theta(), e.gamma_true);

  std::ofstream os = open_out(out / "crlb.csv");
  os << provenance_line(cfg, cfg.measurement_seed) << "\nsnr_db,parameter,true_value,variance,nrmse_bound,flagged\n";
  json summary = provenance(cfg, cfg.measurement_seed);
  summary["sweep"] = json::array();
  for (double snr : cfg.crlb_snr_db) {
    const CrlbReport r = crlb(fisher(jac, e.noise_variance(snr)), phi, snr);
    for (Eigen::Index i = 0; i < phi.size(); ++i)
      os << format_double(snr) << ',' << names[static_cast<std::size_t>(i)] << ','
         << format_double(phi[i]) << ',' << format_double(r.variance[i]) << ','
         << format_double(r.nrmse_bound[i]) << ',' << (r.flagged[static_cast<std::size_t>(i)] ? 1 : 0)
         << '\n';
    summary["sweep"].push_back({{"snr_db", snr},
                                {"condition_number", r.condition_number},
                                {"pseudo_inverse", r.pseudo_inverse}});
  }
  write_json(out / "crlb.json", summary);
  return kExitOk;
}

int cmd_nrmse(const ExperimentConfig& cfg, const fs::path& out, NrmseEstimator estimator,
              bool verbose) {
  const Experiment e = build_experiment(cfg);
  const Eigen::VectorXd phi = e.phi_true();
  const Eigen::Index p = e.truth.theta().size();
  const std::vector<std::string> names = phi_names(e.truth.layers(), e.basis.cols());

  std::vector<int> timeouts(static_cast<std::size_t>(cfg.nrmse_trials), 0);
  const auto trial = [&](int t) -> Eigen::VectorXd {
    const Measurement m =
        e.simulate(cfg.snr_db, derive_seed(cfg.measurement_seed, static_cast<std::uint64_t>(t) + 1));
    const PosteriorModel model = e.model(m);
    MapResult r;
    if (estimator == NrmseEstimator::Local) {
      const double s2 = std::max(e.noise_variance(cfg.snr_db), 1e-300);
      r = map_refine(model, ModelState{e.truth.theta(), e.gamma_true, s2});
    } else {
      PipelineConfig pc = cfg.pipeline;
      pc.seed = derive_seed(cfg.pipeline.seed, static_cast<std::uint64_t>(t) + 1);
      pc.workers = 1;
      Pipeline pipe(model, pc);
      if (pipe.run() != RunStatus::Done) {
        timeouts[static_cast<std::size_t>(t)] = 1;
        throw StageTimeout("trial " + std::to_string(t) + " timed out");
      }
      r = map_estimate(model, pipe.trace(), 0, static_cast<int>(Stage::IV));
    }
    progress(verbose, "trial " + std::to_string(t) + " done");
    Eigen::VectorXd est(phi.size());
    est << r.state.theta, r.state.gamma;
    return est;
  };
  const NrmseResult res = nrmse_harness(phi, trial, cfg.nrmse_trials, cfg.pipeline.workers);

  Eigen::VectorXd bound = Eigen::VectorXd::Constant(phi.size(), std::nan(""));
  std::vector<bool> flagged(static_cast<std::size_t>(phi.size()), false);
  if (std::isfinite(cfg.snr_db)) {
    const ReflectivityModel forward(e.grid, e.truth.layers(), e.truth.eps_medium,
                                    e.truth.sigma_medium);
    const Eigen::MatrixXcd pulse_map = partial_dft(e.grid) * e.basis;
    const CrlbReport c = crlb(fisher(forward, pulse_map, e.truth.theta(), e.gamma_true,
                                     e.noise_variance(cfg.snr_db)),
                              phi, cfg.snr_db);
    bound = c.nrmse_bound;
    flagged = c.flagged;
  }

  const std::string prov = provenance_line(cfg, cfg.pipeline.seed);
  std::ofstream os = open_out(out / "nrmse.csv");
  os << prov << "\nparameter,true_value,crlb_nrmse,empirical_nrmse,ratio,flagged\n";
  for (Eigen::Index i = 0; i < phi.size(); ++i)
    os << names[static_cast<std::size_t>(i)] << ',' << format_double(phi[i]) << ','
       << format_double(bound[i]) << ',' << format_double(res.nrmse[i]) << ','
       << format_double(res.nrmse[i] / bound[i]) << ',' << (flagged[static_cast<std::size_t>(i)] ? 1 : 0)
       << '\n';
  std::ofstream ts = open_out(out / "trials.csv");
  ts << prov << "\ntrial";
  for (const std::string& n : names) ts << ',' << n;
  ts << '\n';
  for (std::size_t t = 0; t < res.estimates.size(); ++t) {
    ts << t;
    for (Eigen::Index i = 0; i < res.estimates[t].size(); ++i)
      ts << ',' << format_double(res.estimates[t][i]);
    ts << '\n';
  }
  json summary = provenance(cfg, cfg.pipeline.seed);
  summary["completed"] = res.completed;
  summary["failed"] = res.failed;
  int n_timeouts = 0;
  for (int v : timeouts) n_timeouts += v;
  summary["timeouts"] = n_timeouts;
  summary["estimator"] = estimator == NrmseEstimator::Local ? "local" : "pipeline";
  summary["theta_size"] = p;
  write_json(out / "nrmse.json", summary);
  if (res.completed == 0) return n_timeouts > 0 ? kExitTimeout : kExitNumeric;
  return kExitOk;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Blind layered-media inversion from UWB radar measurements"};
  app.require_subcommand(1);

  std::string config_path = std::string(UWBINV_CONFIG_DIR) + "/lung_reference.json";
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out = "out";
  bool verbose = false;
  auto common = [&](CLI::App* sub, bool with_config) {
    if (with_config) sub->add_option("-c,--config", config_path, "experiment config (JSON)");
    sub->add_option("--seed", seed, "override the random seed");
    sub->add_option("--workers", workers, "worker threads (default: one per level)");
    sub->add_option("-o,--out", out, "output directory");
    sub->add_flag("-v,--verbose", verbose, "progress on stderr");
  };

  CLI::App* sim = app.add_subcommand("simulate", "synthesize a measurement and its ground truth");
  common(sim, true);
  double snr_override = std::nan("");
  bool noise_free = false;
  sim->add_option("--snr", snr_override, "SNR in dB");
  sim->add_flag("--noise-free", noise_free, "no additive noise");

  CLI::App* smp = app.add_subcommand("sample", "run the four-stage sampler on a measurement");
  common(smp, true);
  SampleOptions sopts;
  std::string measurement, resume;
  smp->add_option("-m,--measurement", measurement, "measurement CSV")->required();
  smp->add_option("--resume", resume, "checkpoint to resume from");
  smp->add_option("--checkpoint-every", sopts.checkpoint_every, "checkpoint period in iterations");

  CLI::App* dia = app.add_subcommand("diagnose", "MPSRF, ACF/ACT and estimates from sampler runs");
  common(dia, false);
  DiagnoseOptions dopts;
  std::vector<std::string> runs;
  dia->add_option("runs", runs, "output directories of `sample`")->required();
  dia->add_option("--step", dopts.mpsrf_step, "MPSRF evaluation period");
  dia->add_option("--mpsrf-stage", dopts.mpsrf_stage, "stage used for MPSRF (0 = all)");
  dia->add_option("--stage", dopts.stage, "stage used for ACF and estimates");
  dia->add_option("--max-lag", dopts.max_lag, "largest ACF lag");
  bool no_estimates = false;
  dia->add_flag("--no-estimates", no_estimates, "skip MMSE/MAP/interval estimates");

  CLI::App* crl = app.add_subcommand("crlb", "Cramer-Rao bounds over an SNR sweep");
  common(crl, true);
  std::vector<double> sweep;
  crl->add_option("--snr", sweep, "SNR values in dB");

  CLI::App* nrm = app.add_subcommand("nrmse", "empirical N-RMSE against the CRLB");
  common(nrm, true);
  int trials = 0;
  std::string est_name = "pipeline";
  nrm->add_option("--trials", trials, "number of noisy trials");
  nrm->add_option("--estimator", est_name, "pipeline or local")
      ->check(CLI::IsMember({"pipeline", "local"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (dia->parsed()) {
      for (const std::string& r : runs) dopts.runs.emplace_back(r);
      dopts.out = out;
      dopts.estimates = !no_estimates;
      return cmd_diagnose(dopts);
    }
    ExperimentConfig cfg = load_config(config_path);
    if (workers) cfg.pipeline.workers = *workers < 1 ? cfg.pipeline.levels : *workers;
    if (sim->parsed()) {
      if (seed) cfg.measurement_seed = *seed;
      if (noise_free) cfg.snr_db = std::numeric_limits<double>::infinity();
      else if (!std::isnan(snr_override)) cfg.snr_db = snr_override;
      return cmd_simulate(cfg, out);
    }
    if (seed) cfg.pipeline.seed = *seed;
    if (smp->parsed()) {
      sopts.measurement = measurement;
      sopts.out = out;
      if (!resume.empty()) sopts.resume = fs::path(resume);
      sopts.verbose = verbose;
      return cmd_sample(cfg, sopts);
    }
    if (crl->parsed()) {
      if (!sweep.empty()) cfg.crlb_snr_db = sweep;
      return cmd_crlb(cfg, out);
    }
    if (trials > 0) cfg.nrmse_trials = trials;
    cfg.validate();
    return cmd_nrmse(cfg, out, est_name == "local" ? NrmseEstimator::Local : NrmseEstimator::Pipeline,
                     verbose);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for_current_exception();
  }
}

}  // namespace uwb
