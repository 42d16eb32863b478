#include "uwb/pipeline.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

namespace uwb {

long PipelineConfig::effective_stage1_min() const {
  return stage1_min > 0 ? stage1_min : 2L * adapt.n_t * adapt.j_t;
}

void PipelineConfig::validate(Eigen::Index theta_size) const {
  adapt.validate();
  if (levels < 1) throw DomainError("at least one temperature level is required");
  if (!(t_first > 0.0)) throw DomainError("T_1 must be positive");
  if (levels > 1 && !(t_last > t_first)) throw DomainError("T_L must exceed T_1");
  if (gibbs.leapfrog_steps < 1) throw DomainError("leapfrog steps must be >= 1");
  if (!(gibbs.slice.width > 0.0)) throw DomainError("slice width must be positive");
  if (stage2_length < 10 * theta_size)
    throw DomainError("stage II must collect at least 10 samples per parameter");
  if (stage1_max < effective_stage1_min()) throw DomainError("stage I timeout below its minimum");
  if (stage3_max < 1 || stage4_length < 1) throw DomainError("stage lengths must be positive");
  if (workers < 1) throw DomainError("workers must be >= 1");
}

nlohmann::json to_json(const KernelStats& s) {
  return {{"proposals", s.proposals},     {"acceptances", s.acceptances},
          {"stepouts", s.stepouts},       {"shrinks", s.shrinks},
          {"reflections", s.reflections}, {"livelocks", s.livelocks}};
}

namespace {

KernelStats stats_from_json(const nlohmann::json& j) {
  KernelStats s;
  s.proposals = j.at("proposals");
  s.acceptances = j.at("acceptances");
  s.stepouts = j.at("stepouts");
  s.shrinks = j.at("shrinks");
  s.reflections = j.at("reflections");
  s.livelocks = j.at("livelocks");
  return s;
}

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string rng_state(const Rng& r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

Rng rng_from_state(const std::string& s) {
  Rng r;
  std::istringstream is(s);
  is >> r;
  if (!is) throw std::runtime_error("corrupt RNG state in checkpoint");
  return r;
}

void hash_bytes(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
}

void hash_double(std::uint64_t& h, double v) { hash_bytes(h, &v, sizeof v); }

}  // namespace

Pipeline::Pipeline(const PosteriorModel& model, PipelineConfig cfg)
    : model_(&model),
      cfg_(std::move(cfg)),
      pool_(std::make_shared<WorkerPool>(cfg_.workers)),
      rng_(derive_seed(cfg_.seed, 0)),
      ladder_(TemperatureLadder::geometric(cfg_.levels, cfg_.t_first, cfg_.t_last)),
      ledger_(static_cast<std::size_t>(cfg_.levels)),
      trace_(TraceStore::make(model.layers(), static_cast<std::size_t>(model.gamma_size()),
                              static_cast<std::size_t>(cfg_.levels))) {
  cfg_.validate(model.theta_size());
  for (int l = 0; l < cfg_.levels; ++l)
    level_rngs_.emplace_back(derive_seed(cfg_.seed, static_cast<std::uint64_t>(l) + 1));
  chains_.resize(static_cast<std::size_t>(cfg_.levels));
  const Eigen::Index p = model.theta_size();
  for (ChainState& c : chains_) {
    c.sampler.step_size = cfg_.adapt.eps_init;
    c.sampler.mass = MassMatrix::identity(p);
    c.sampler.mh_concentration = Eigen::VectorXd::Constant(p, cfg_.adapt.mh_concentration_init);
  }
  stage_stats_.assign(4, std::vector<KernelStats>(static_cast<std::size_t>(cfg_.levels)));
  trace_.metadata["seed"] = cfg_.seed;
}

void Pipeline::initialize() {
  std::vector<ModelState> states;
  const BetaPriorSpec& prior = model_->theta_prior();
  const double sg = std::sqrt(model_->pulse_prior().sigma_gamma2);
  for (int l = 0; l < cfg_.levels; ++l) {
    Rng& r = level_rngs_[static_cast<std::size_t>(l)];
    ModelState s;
    Eigen::VectorXd bar(model_->theta_size());
    for (Eigen::Index i = 0; i < bar.size(); ++i) {
      double t = 0.0;
      while (!(t > 0.0 && t < 1.0)) t = beta_draw(r, prior.a(i), prior.b(i));
      bar[i] = t;
    }
    s.theta = model_->box().denormalize(bar);
    s.gamma.resize(model_->gamma_size());
    for (Eigen::Index k = 0; k < s.gamma.size(); ++k) s.gamma[k] = sg * standard_normal(r);
    const double r2 = model_->residual_norm2(s.theta, s.gamma);
    s.sigma_v2 = std::max(r2 / static_cast<double>(model_->data_size()), 1e-300);
    states.push_back(std::move(s));
  }
  initialize(states);
}

void Pipeline::initialize(const std::vector<ModelState>& states) {
  if (states.size() != chains_.size()) throw DimensionError("one initial state per level");
  for (std::size_t l = 0; l < states.size(); ++l) {
    if (!model_->box().contains_strict(states[l].theta))
      throw DomainError("initial theta must lie strictly inside the box");
    chains_[l].replica = make_replica(*model_, states[l]);
  }
  initialized_ = true;
  begin_stage(Stage::I);
}

void Pipeline::begin_stage(Stage s) {
  if (!stage_starts_.empty()) stage_swaps_.push_back(ledger_.total_ratios());
  stage_ = s;
  stage_iteration_ = 0;
  stage_starts_.push_back(iteration_ + 1);
  if (cfg_.reset_swaps_at_stage) ledger_ = SwapLedger(chains_.size());
  for (ChainState& c : chains_) c.sampler.window = KernelStats{};
  if (s == Stage::IV) ladder_.frozen = true;
}

void Pipeline::set_kernel(KernelKind kernel) {
  if (stage_ == Stage::IV || (stage_ == Stage::III && stage_iteration_ > 0))
    throw std::logic_error("kernel can only change before stage III runs");
  cfg_.kernel = kernel;
  if (stage_ == Stage::III && kernel == KernelKind::Slice) begin_stage(Stage::IV);
}

double Pipeline::untempered_log_posterior(const Replica& r) const {
  return r.log_likelihood + model_->log_prior_theta(r.state.theta) +
         model_->log_prior_gamma(r.state.gamma) + model_->log_prior_noise(r.state.sigma_v2);
}

void Pipeline::record() {
  for (std::size_t l = 0; l < chains_.size(); ++l) {
    const Replica& r = chains_[l].replica;
    TraceRow row;
    row.iteration = iteration_;
    row.stage = static_cast<int>(stage_);
    row.temperature = ladder_[l];
    row.log_likelihood = r.log_likelihood;
    row.log_posterior = untempered_log_posterior(r);
    row.values.reserve(trace_.columns.size());
    for (Eigen::Index i = 0; i < r.state.theta.size(); ++i) row.values.push_back(r.state.theta[i]);
    for (Eigen::Index i = 0; i < r.state.gamma.size(); ++i) row.values.push_back(r.state.gamma[i]);
    row.values.push_back(r.state.sigma_v2);
    trace_.levels[l].append(row);
  }
}

void Pipeline::adapt_stage1() {
  const AdaptationConfig& a = cfg_.adapt;
  if (chains_.size() >= 3 && stage_iteration_ % a.j_t == 0) {
    swap_history_.push_back(ledger_.ratios());
    ladder_ = update_temperatures(ladder_, ledger_, a);
    ladder_.validate();
    ladder_history_.push_back(ladder_.temperatures);
  }
  if (stage_iteration_ < cfg_.effective_stage1_min()) return;
  const bool converged =
      chains_.size() < 3 || check_convergence(ladder_history_, a.n_t, a.convergence_tolerance);
  if (converged) {
    ladder_.frozen = true;
    begin_stage(Stage::II);
  }
}

void Pipeline::finish_stage2() {
  for (std::size_t l = 0; l < chains_.size(); ++l) {
    const Eigen::MatrixXd th = trace_.theta(l, static_cast<int>(Stage::II));
    Eigen::MatrixXd bar(th.rows(), th.cols());
    for (Eigen::Index r = 0; r < th.rows(); ++r)
      bar.row(r) = model_->box().normalize(th.row(r).transpose()).transpose();
    chains_[l].sampler.mass = MassMatrix::from_inverse(estimate_covariance(bar));
    chains_[l].sampler.step_size = cfg_.adapt.eps_init;
  }
  begin_stage(Stage::III);
  if (cfg_.kernel == KernelKind::Slice) begin_stage(Stage::IV);
}

void Pipeline::adapt_stage3() {
  const AdaptationConfig& a = cfg_.adapt;
  const bool mh = cfg_.kernel == KernelKind::Mh;
  if (stage_iteration_ % a.j_eps != 0) return;
  std::vector<double> snapshot;
  for (ChainState& c : chains_) {
    const double acc = c.sampler.window.acceptance_ratio();
    if (mh) {
      const double k = update_mh_concentration(c.sampler.mh_concentration[0], acc, a.mh_target,
                                               a.k_eps);
      c.sampler.mh_concentration.setConstant(k);
      snapshot.push_back(k);
    } else {
      c.sampler.step_size = update_step_size(c.sampler.step_size, acc, a.xi, a.k_eps);
      snapshot.push_back(c.sampler.step_size);
    }
    c.sampler.window = KernelStats{};
  }
  eps_history_.push_back(snapshot);
  if (check_convergence(eps_history_, a.n_t, a.convergence_tolerance)) begin_stage(Stage::IV);
}

RunStatus Pipeline::step() {
  if (!initialized_) initialize();
  if (status_ != RunStatus::Running) return status_;

  const KernelKind kernel =
      (stage_ == Stage::I || stage_ == Stage::II) ? KernelKind::Slice : cfg_.kernel;
  const double* temps = ladder_.temperatures.data();
  pool_->run(chains_.size(), [&](std::size_t l) {
    gibbs_cycle(chains_[l], *model_, temps[l], kernel, cfg_.gibbs, level_rngs_[l]);
  });
  propose_swap(chains_, ladder_, ledger_, rng_);
  ++iteration_;
  ++stage_iteration_;
  record();

  const Stage before = stage_;
  switch (stage_) {
    case Stage::I:
      adapt_stage1();
      if (stage_ == before && stage_iteration_ >= cfg_.stage1_max) status_ = RunStatus::Timeout;
      break;
    case Stage::II:
      if (stage_iteration_ >= cfg_.stage2_length) finish_stage2();
      break;
    case Stage::III:
      adapt_stage3();
      if (stage_ == before && stage_iteration_ >= cfg_.stage3_max) status_ = RunStatus::Timeout;
      break;
    case Stage::IV:
      if (stage_iteration_ >= cfg_.stage4_length) status_ = RunStatus::Done;
      break;
  }
  for (int s = static_cast<int>(before); s < static_cast<int>(stage_); ++s)
    for (std::size_t l = 0; l < chains_.size(); ++l)
      stage_stats_[static_cast<std::size_t>(s) - 1][l] = chains_[l].sampler.stats;
  if (status_ == RunStatus::Done) {
    stage_swaps_.push_back(ledger_.total_ratios());
    for (std::size_t l = 0; l < chains_.size(); ++l) stage_stats_[3][l] = chains_[l].sampler.stats;
  }
  return status_;
}

RunStatus Pipeline::run(long max_iterations) {
  if (!initialized_) initialize();
  for (long k = 0; status_ == RunStatus::Running && (max_iterations < 0 || k < max_iterations); ++k)
    step();
  return status_;
}

RunStatus Pipeline::run_until(Stage s) {
  if (!initialized_) initialize();
  while (status_ == RunStatus::Running && static_cast<int>(stage_) < static_cast<int>(s)) step();
  return status_;
}

std::uint64_t Pipeline::adaptation_hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (double t : ladder_.temperatures) hash_double(h, t);
  for (const ChainState& c : chains_) {
    hash_double(h, c.sampler.step_size);
    const Eigen::MatrixXd& m = c.sampler.mass.inverse_mass();
    for (Eigen::Index i = 0; i < m.size(); ++i) hash_double(h, m.data()[i]);
    for (Eigen::Index i = 0; i < c.sampler.mh_concentration.size(); ++i)
      hash_double(h, c.sampler.mh_concentration[i]);
  }
  hash_double(h, cfg_.gibbs.slice.width);
  return h;
}

nlohmann::json Pipeline::checkpoint() const {
  nlohmann::json j;
  j["format"] = "uwbinv-checkpoint";
  j["version"] = 1;
  j["seed"] = cfg_.seed;
  j["levels"] = cfg_.levels;
  j["kernel"] = to_string(cfg_.kernel);
  j["stage"] = static_cast<int>(stage_);
  j["status"] = static_cast<int>(status_);
  j["iteration"] = iteration_;
  j["stage_iteration"] = stage_iteration_;
  j["stage_starts"] = stage_starts_;
  j["ladder"] = ladder_.temperatures;
  j["ladder_frozen"] = ladder_.frozen;
  j["ledger"] = {{"proposed", ledger_.proposed},
                 {"accepted", ledger_.accepted},
                 {"total_proposed", ledger_.total_proposed},
                 {"total_accepted", ledger_.total_accepted}};
  j["ladder_history"] = ladder_history_;
  j["swap_history"] = swap_history_;
  j["eps_history"] = eps_history_;
  j["stage_swaps"] = stage_swaps_;
  j["rng"] = rng_state(rng_);
  nlohmann::json chains = nlohmann::json::array();
  for (std::size_t l = 0; l < chains_.size(); ++l) {
    const ChainState& c = chains_[l];
    const Eigen::MatrixXd& m = c.sampler.mass.inverse_mass();
    chains.push_back({{"theta", to_vec(c.replica.state.theta)},
                      {"gamma", to_vec(c.replica.state.gamma)},
                      {"sigma_v2", c.replica.state.sigma_v2},
                      {"step_size", c.sampler.step_size},
                      {"inverse_mass", std::vector<double>(m.data(), m.data() + m.size())},
                      {"mh_concentration", to_vec(c.sampler.mh_concentration)},
                      {"stats", to_json(c.sampler.stats)},
                      {"window", to_json(c.sampler.window)},
                      {"rng", rng_state(level_rngs_[l])}});
  }
  j["chains"] = chains;
  nlohmann::json stage_stats = nlohmann::json::array();
  for (const auto& per_level : stage_stats_) {
    nlohmann::json a = nlohmann::json::array();
    for (const KernelStats& s : per_level) a.push_back(to_json(s));
    stage_stats.push_back(a);
  }
  j["stage_stats"] = stage_stats;
  nlohmann::json levels = nlohmann::json::array();
  for (const LevelTrace& t : trace_.levels) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < t.size(); ++i) {
      std::vector<double> v(t.width());
      for (std::size_t c = 0; c < t.width(); ++c) v[c] = t.value(i, c);
      rows.push_back({t.iteration(i), t.stage(i), t.temperature(i), t.log_posterior(i),
                      t.log_likelihood(i), v});
    }
    levels.push_back(rows);
  }
  j["trace"] = levels;
  return j;
}

void Pipeline::restore(const nlohmann::json& j) {
  if (j.at("format") != "uwbinv-checkpoint" || j.at("version") != 1)
    throw std::runtime_error("not a supported checkpoint");
  if (j.at("levels").get<int>() != cfg_.levels || j.at("seed").get<std::uint64_t>() != cfg_.seed)
    throw std::runtime_error("checkpoint does not match the configuration");
  cfg_.kernel = kernel_from_string(j.at("kernel"));
  stage_ = static_cast<Stage>(j.at("stage").get<int>());
  status_ = static_cast<RunStatus>(j.at("status").get<int>());
  iteration_ = j.at("iteration");
  stage_iteration_ = j.at("stage_iteration");
  stage_starts_ = j.at("stage_starts").get<std::vector<long>>();
  ladder_.temperatures = j.at("ladder").get<std::vector<double>>();
  ladder_.frozen = j.at("ladder_frozen");
  const auto& lg = j.at("ledger");
  ledger_.proposed = lg.at("proposed").get<std::vector<long>>();
  ledger_.accepted = lg.at("accepted").get<std::vector<long>>();
  ledger_.total_proposed = lg.at("total_proposed").get<std::vector<long>>();
  ledger_.total_accepted = lg.at("total_accepted").get<std::vector<long>>();
  ladder_history_ = j.at("ladder_history").get<std::vector<std::vector<double>>>();
  swap_history_ = j.at("swap_history").get<std::vector<std::vector<double>>>();
  eps_history_ = j.at("eps_history").get<std::vector<std::vector<double>>>();
  stage_swaps_ = j.at("stage_swaps").get<std::vector<std::vector<double>>>();
  rng_ = rng_from_state(j.at("rng"));
  const auto& chains = j.at("chains");
  if (chains.size() != chains_.size()) throw std::runtime_error("checkpoint level count mismatch");
  const Eigen::Index p = model_->theta_size();
  for (std::size_t l = 0; l < chains_.size(); ++l) {
    const auto& c = chains[l];
    ModelState s{from_vec(c.at("theta").get<std::vector<double>>()),
                 from_vec(c.at("gamma").get<std::vector<double>>()), c.at("sigma_v2").get<double>()};
    chains_[l].replica = make_replica(*model_, s);
    chains_[l].sampler.step_size = c.at("step_size");
    const auto im = c.at("inverse_mass").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(im.size()) != p * p)
      throw std::runtime_error("checkpoint mass matrix has the wrong size");
    chains_[l].sampler.mass =
        MassMatrix::from_inverse(Eigen::Map<const Eigen::MatrixXd>(im.data(), p, p));
    chains_[l].sampler.mh_concentration = from_vec(c.at("mh_concentration").get<std::vector<double>>());
    chains_[l].sampler.stats = stats_from_json(c.at("stats"));
    chains_[l].sampler.window = stats_from_json(c.at("window"));
    level_rngs_[l] = rng_from_state(c.at("rng"));
  }
  const auto& ss = j.at("stage_stats");
  for (std::size_t s = 0; s < stage_stats_.size(); ++s)
    for (std::size_t l = 0; l < chains_.size(); ++l)
      stage_stats_[s][l] = stats_from_json(ss.at(s).at(l));
  const auto& levels = j.at("trace");
  for (std::size_t l = 0; l < trace_.levels.size(); ++l) {
    LevelTrace t(trace_.columns.size());
    for (const auto& row : levels.at(l)) {
      TraceRow r;
      r.iteration = row.at(0);
      r.stage = row.at(1);
      r.temperature = row.at(2);
      r.log_posterior = row.at(3);
      r.log_likelihood = row.at(4);
      r.values = row.at(5).get<std::vector<double>>();
      t.append(r);
    }
    trace_.levels[l] = std::move(t);
  }
  initialized_ = true;
}

nlohmann::json Pipeline::report() const {
  nlohmann::json j;
  j["status"] = status_ == RunStatus::Done ? "done" : status_ == RunStatus::Timeout ? "timeout" : "running";
  j["stage"] = static_cast<int>(stage_);
  j["iterations"] = iteration_;
  j["stage_starts"] = stage_starts_;
  j["kernel"] = to_string(cfg_.kernel);
  j["final_ladder"] = ladder_.temperatures;
  std::vector<double> eps;
  for (const ChainState& c : chains_) eps.push_back(c.sampler.step_size);
  j["final_step_sizes"] = eps;
  j["ladder_history"] = ladder_history_;
  j["swap_ratio_history"] = swap_history_;
  j["step_size_history"] = eps_history_;
  j["stage_swap_ratios"] = ledger_.total_ratios();
  j["swap_ratios_by_stage"] = stage_swaps_;
  nlohmann::json stats = nlohmann::json::object();
  const char* names[] = {"I", "II", "III", "IV"};
  for (std::size_t s = 0; s < stage_stats_.size(); ++s) {
    nlohmann::json a = nlohmann::json::array();
    for (std::size_t l = 0; l < stage_stats_[s].size(); ++l) {
      KernelStats d = stage_stats_[s][l];
      if (s > 0) {
        const KernelStats& prev = stage_stats_[s - 1][l];
        d.proposals -= prev.proposals;
        d.acceptances -= prev.acceptances;
        d.stepouts -= prev.stepouts;
        d.shrinks -= prev.shrinks;
        d.reflections -= prev.reflections;
        d.livelocks -= prev.livelocks;
      }
      a.push_back(to_json(d));
    }
    stats[names[s]] = a;
  }
  j["kernel_stats"] = stats;
  return j;
}

}  // namespace uwb
