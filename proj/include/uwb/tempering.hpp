#pragma once

// Temperature ladder, replica exchange between adjacent levels, and the
// proportional controllers that tune the ladder and the HMC step sizes.

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "uwb/rng.hpp"
#include "uwb/samplers.hpp"

namespace uwb {

struct TemperatureLadder {
  std::vector<double> temperatures;  // T_1 = 1 < ... < T_L
  bool frozen = false;

  static TemperatureLadder geometric(int levels, double t_first, double t_last);
  /// T_1 followed by cumulative exp(log-gap) increments.
  static TemperatureLadder from_log_gaps(double t_first, const std::vector<double>& log_gaps);

  std::size_t size() const { return temperatures.size(); }
  double operator[](std::size_t i) const { return temperatures[i]; }
  /// log(T_{l+1} - T_l) for l = 1..L-1.
  std::vector<double> log_gaps() const;
  /// Throws DomainError unless T_1 > 0 and strictly increasing.
  void validate() const;
};

/// Per adjacent pair counters over the current window and over the run.
struct SwapLedger {
  std::vector<long> proposed;
  std::vector<long> accepted;
  std::vector<long> total_proposed;
  std::vector<long> total_accepted;

  explicit SwapLedger(std::size_t levels = 1);
  std::size_t pairs() const { return proposed.size(); }
  /// Window swap ratios s_l; pairs without proposals report 0.
  std::vector<double> ratios() const;
  std::vector<double> total_ratios() const;
  void record(std::size_t pair, bool accepted_swap);
  void reset_window();
};

struct AdaptationConfig {
  double k_t = 10.0;
  int j_t = 200;
  int n_t = 10;
  double k_eps = 0.5;
  int j_eps = 100;
  double xi = 0.85;
  double eps_init = 1.0;
  double convergence_tolerance = 0.1;
  double mh_target = 0.30;
  double mh_concentration_init = 100.0;

  void validate() const;
};

/// log of the exchange acceptance for levels (lo, lo+1).
double swap_log_acceptance(double loglik_lo, double loglik_hi, double t_lo, double t_hi);

struct SwapOutcome {
  std::size_t pair = 0;
  bool proposed = false;
  bool accepted = false;
  double probability = 0.0;
};

/// Picks a pair uniformly and decides acceptance; the caller swaps states.
SwapOutcome decide_swap(const std::vector<double>& log_likelihoods,
                        const TemperatureLadder& ladder, SwapLedger& ledger, Rng& rng);

/// Full exchange step for generic level states; `loglik` maps a state to its
/// untempered log-likelihood.
template <class State, class LogLik>
SwapOutcome propose_swap(std::vector<State>& states, LogLik&& loglik,
                         const TemperatureLadder& ladder, SwapLedger& ledger, Rng& rng) {
  std::vector<double> ll;
  ll.reserve(states.size());
  for (const State& s : states) ll.push_back(loglik(s));
  SwapOutcome o = decide_swap(ll, ladder, ledger, rng);
  if (o.accepted) std::swap(states[o.pair], states[o.pair + 1]);
  return o;
}

/// Swaps only the replicas; sampler settings stay with their level.
SwapOutcome propose_swap(std::vector<ChainState>& chains, const TemperatureLadder& ladder,
                         SwapLedger& ledger, Rng& rng);

/// Controller errors e_l = s_{l+1} - s_l, with the last error held at zero.
std::vector<double> swap_errors(const std::vector<double>& swap_ratios);

/// Log-gaps after one controller step, before endpoint pinning.
std::vector<double> step_log_gaps(const std::vector<double>& log_gaps,
                                  const std::vector<double>& errors, double k_t);

/// Adds a common constant to the log-gaps so the ladder ends at t_last.
std::vector<double> pin_log_gaps(const std::vector<double>& log_gaps, double t_first,
                                 double t_last);

/// One controller update from the ledger window; resets the window. A frozen
/// ladder is returned unchanged.
TemperatureLadder update_temperatures(const TemperatureLadder& ladder, SwapLedger& ledger,
                                      const AdaptationConfig& cfg);

/// True iff every component's sample sd over the last n snapshots, divided
/// by its window mean, is at most `tolerance`.
bool check_convergence(const std::vector<std::vector<double>>& history, int n,
                       double tolerance = 0.1);

/// log eps <- log eps - (xi - xi_hat) k.
double update_step_size(double step_size, double acceptance, double target, double gain);
std::vector<double> update_step_sizes(const std::vector<double>& step_sizes,
                                      const std::vector<double>& acceptance,
                                      const AdaptationConfig& cfg);

/// MH proposal concentration: raised when acceptance is below target.
double update_mh_concentration(double concentration, double acceptance, double target,
                               double gain);

/// Sample covariance of rows plus a 1e-8 ridge, eigenvalues floored at 1e-10.
/// Needs at least 10 * dim rows.
Eigen::MatrixXd estimate_covariance(const Eigen::MatrixXd& samples);

}  // namespace uwb
