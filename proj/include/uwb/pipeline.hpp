#pragma once

// Four-stage parallel-tempered Gibbs sampler: ladder adaptation with slice
// updates, covariance collection, HMC step-size adaptation, then frozen
// sampling. Every iteration runs one Gibbs cycle per level followed by one
// swap proposal.

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "uwb/parallel.hpp"
#include "uwb/posterior.hpp"
#include "uwb/samplers.hpp"
#include "uwb/tempering.hpp"
#include "uwb/trace_store.hpp"

namespace uwb {

struct StageTimeout : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PipelineConfig {
  int levels = 16;
  double t_first = 1.0;
  double t_last = 1e5;
  AdaptationConfig adapt;
  GibbsSettings gibbs;
  KernelKind kernel = KernelKind::Hmc;  // kernel of stages III and IV
  long stage1_min = 0;                  // 0 selects 2 * N_T * J_T
  long stage1_max = 200000;
  long stage2_length = 4000;
  long stage3_max = 200000;
  long stage4_length = 10000;
  bool reset_swaps_at_stage = true;
  std::uint64_t seed = 1;
  int workers = 1;

  long effective_stage1_min() const;
  void validate(Eigen::Index theta_size) const;
};

enum class RunStatus { Running, Done, Timeout };

class Pipeline {
 public:
  Pipeline(const PosteriorModel& model, PipelineConfig cfg);

  /// Each level starts from a prior draw of theta and gamma.
  void initialize();
  /// Explicit starting states, one per level.
  void initialize(const std::vector<ModelState>& states);

  RunStatus step();
  /// Steps until done, the timeout, or `max_iterations` more iterations.
  RunStatus run(long max_iterations = -1);
  /// Steps until the current stage is at least `stage` (or the run ends).
  RunStatus run_until(Stage stage);

  /// Switches the stage III/IV kernel. Only allowed before stage III starts
  /// or at its first iteration. A slice kernel there has nothing to adapt, so
  /// stage IV begins at once.
  void set_kernel(KernelKind kernel);

  const PipelineConfig& config() const { return cfg_; }
  const PosteriorModel& model() const { return *model_; }
  Stage stage() const { return stage_; }
  RunStatus status() const { return status_; }
  long iteration() const { return iteration_; }
  long stage_iteration() const { return stage_iteration_; }
  const std::vector<long>& stage_starts() const { return stage_starts_; }
  const TemperatureLadder& ladder() const { return ladder_; }
  const SwapLedger& ledger() const { return ledger_; }
  const std::vector<ChainState>& chains() const { return chains_; }
  const TraceStore& trace() const { return trace_; }
  TraceStore& trace() { return trace_; }
  const std::vector<std::vector<double>>& ladder_history() const { return ladder_history_; }
  const std::vector<std::vector<double>>& swap_ratio_history() const { return swap_history_; }
  const std::vector<std::vector<double>>& step_size_history() const { return eps_history_; }
  /// Per-level swap acceptance ratios since the start of the current stage.
  std::vector<double> stage_swap_ratios() const { return ledger_.total_ratios(); }
  /// Swap ratios accumulated over each completed stage (index 0 = stage I).
  const std::vector<std::vector<double>>& swap_ratios_by_stage() const { return stage_swaps_; }

  /// Hash of everything adaptation may change (ladder, step sizes, mass
  /// matrices, MH concentrations).
  std::uint64_t adaptation_hash() const;

  nlohmann::json checkpoint() const;
  void restore(const nlohmann::json& checkpoint);
  nlohmann::json report() const;

 private:
  void begin_stage(Stage s);
  void record();
  double untempered_log_posterior(const Replica& r) const;
  void adapt_stage1();
  void finish_stage2();
  void adapt_stage3();

  const PosteriorModel* model_;
  PipelineConfig cfg_;
  std::shared_ptr<WorkerPool> pool_;

  Rng rng_;
  std::vector<Rng> level_rngs_;
  std::vector<ChainState> chains_;
  TemperatureLadder ladder_;
  SwapLedger ledger_;
  TraceStore trace_;

  Stage stage_ = Stage::I;
  RunStatus status_ = RunStatus::Running;
  long iteration_ = 0;
  long stage_iteration_ = 0;
  std::vector<long> stage_starts_;
  std::vector<std::vector<double>> ladder_history_;
  std::vector<std::vector<double>> swap_history_;
  std::vector<std::vector<double>> eps_history_;
  std::vector<std::vector<KernelStats>> stage_stats_;
  std::vector<std::vector<double>> stage_swaps_;
  bool initialized_ = false;
};

nlohmann::json to_json(const KernelStats& s);

}  // namespace uwb
