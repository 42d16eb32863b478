#include "uwb/tempering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace uwb {

TemperatureLadder TemperatureLadder::geometric(int levels, double t_first, double t_last) {
  if (levels < 1) throw DomainError("ladder needs at least one level");
  if (!(t_first > 0.0)) throw DomainError("T_1 must be positive");
  TemperatureLadder l;
  if (levels == 1) {
    l.temperatures = {t_first};
    return l;
  }
  if (!(t_last > t_first)) throw DomainError("T_L must exceed T_1");
  const double ratio = std::log(t_last / t_first) / (levels - 1);
  for (int i = 0; i < levels; ++i) l.temperatures.push_back(t_first * std::exp(ratio * i));
  l.temperatures.back() = t_last;
  return l;
}

TemperatureLadder TemperatureLadder::from_log_gaps(double t_first,
                                                   const std::vector<double>& log_gaps) {
  TemperatureLadder l;
  l.temperatures.push_back(t_first);
  for (double g : log_gaps) l.temperatures.push_back(l.temperatures.back() + std::exp(g));
  return l;
}

std::vector<double> TemperatureLadder::log_gaps() const {
  std::vector<double> g;
  for (std::size_t i = 0; i + 1 < temperatures.size(); ++i)
    g.push_back(std::log(temperatures[i + 1] - temperatures[i]));
  return g;
}

void TemperatureLadder::validate() const {
  if (temperatures.empty()) throw DomainError("empty ladder");
  if (!(temperatures[0] > 0.0)) throw DomainError("T_1 must be positive");
  for (std::size_t i = 1; i < temperatures.size(); ++i)
    if (!(temperatures[i] > temperatures[i - 1]))
      throw DomainError("temperatures must be strictly increasing");
}

SwapLedger::SwapLedger(std::size_t levels) {
  const std::size_t n = levels > 0 ? levels - 1 : 0;
  proposed.assign(n, 0);
  accepted.assign(n, 0);
  total_proposed.assign(n, 0);
  total_accepted.assign(n, 0);
}

std::vector<double> SwapLedger::ratios() const {
  std::vector<double> r(pairs(), 0.0);
  for (std::size_t i = 0; i < pairs(); ++i)
    if (proposed[i] > 0) r[i] = static_cast<double>(accepted[i]) / static_cast<double>(proposed[i]);
  return r;
}

std::vector<double> SwapLedger::total_ratios() const {
  std::vector<double> r(pairs(), 0.0);
  for (std::size_t i = 0; i < pairs(); ++i)
    if (total_proposed[i] > 0)
      r[i] = static_cast<double>(total_accepted[i]) / static_cast<double>(total_proposed[i]);
  return r;
}

void SwapLedger::record(std::size_t pair, bool accepted_swap) {
  ++proposed[pair];
  ++total_proposed[pair];
  if (accepted_swap) {
    ++accepted[pair];
    ++total_accepted[pair];
  }
}

void SwapLedger::reset_window() {
  std::fill(proposed.begin(), proposed.end(), 0);
  std::fill(accepted.begin(), accepted.end(), 0);
}

void AdaptationConfig::validate() const {
  if (!(k_t > 0.0 && k_eps > 0.0)) throw DomainError("controller gains must be positive");
  if (j_t < 1 || j_eps < 1 || n_t < 2) throw DomainError("adaptation periods must be positive");
  if (!(xi > 0.0 && xi < 1.0)) throw DomainError("target acceptance must lie in (0, 1)");
  if (!(mh_target > 0.0 && mh_target < 1.0)) throw DomainError("MH target must lie in (0, 1)");
  if (!(eps_init > 0.0)) throw DomainError("initial step size must be positive");
  if (!(convergence_tolerance > 0.0)) throw DomainError("convergence tolerance must be positive");
  if (!(mh_concentration_init > 0.0)) throw DomainError("MH concentration must be positive");
}

double swap_log_acceptance(double loglik_lo, double loglik_hi, double t_lo, double t_hi) {
  return (1.0 / t_hi - 1.0 / t_lo) * (loglik_lo - loglik_hi);
}

SwapOutcome decide_swap(const std::vector<double>& log_likelihoods,
                        const TemperatureLadder& ladder, SwapLedger& ledger, Rng& rng) {
  SwapOutcome o;
  const std::size_t levels = ladder.size();
  if (levels < 2) return o;
  if (log_likelihoods.size() != levels) throw DimensionError("one log-likelihood per level");
  std::uniform_int_distribution<std::size_t> pick(0, levels - 2);
  o.pair = pick(rng);
  o.proposed = true;
  const double la = swap_log_acceptance(log_likelihoods[o.pair], log_likelihoods[o.pair + 1],
                                        ladder[o.pair], ladder[o.pair + 1]);
  o.probability = la >= 0.0 ? 1.0 : std::exp(la);
  o.accepted = std::log(uniform_open01(rng)) < la;
  ledger.record(o.pair, o.accepted);
  return o;
}

SwapOutcome propose_swap(std::vector<ChainState>& chains, const TemperatureLadder& ladder,
                         SwapLedger& ledger, Rng& rng) {
  std::vector<double> ll;
  ll.reserve(chains.size());
  for (const ChainState& c : chains) ll.push_back(c.replica.log_likelihood);
  SwapOutcome o = decide_swap(ll, ladder, ledger, rng);
  if (o.accepted) std::swap(chains[o.pair].replica, chains[o.pair + 1].replica);
  return o;
}

std::vector<double> swap_errors(const std::vector<double>& s) {
  std::vector<double> e(s.size(), 0.0);
  for (std::size_t l = 0; l + 1 < s.size(); ++l) e[l] = s[l + 1] - s[l];
  return e;
}

std::vector<double> step_log_gaps(const std::vector<double>& log_gaps,
                                  const std::vector<double>& errors, double k_t) {
  if (log_gaps.size() != errors.size()) throw DimensionError("one error per gap");
  std::vector<double> g(log_gaps);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] -= k_t * errors[i];
  return g;
}

std::vector<double> pin_log_gaps(const std::vector<double>& log_gaps, double t_first,
                                 double t_last) {
  if (log_gaps.empty()) return {};
  const double mx = *std::max_element(log_gaps.begin(), log_gaps.end());
  double sum = 0.0;
  for (double g : log_gaps) sum += std::exp(g - mx);
  const double shift = std::log(t_last - t_first) - (mx + std::log(sum));
  std::vector<double> out(log_gaps);
  for (double& g : out) g += shift;
  return out;
}

TemperatureLadder update_temperatures(const TemperatureLadder& ladder, SwapLedger& ledger,
                                      const AdaptationConfig& cfg) {
  if (ladder.frozen || ladder.size() < 3) {
    ledger.reset_window();
    return ladder;
  }
  const std::vector<double> g =
      step_log_gaps(ladder.log_gaps(), swap_errors(ledger.ratios()), cfg.k_t);
  TemperatureLadder next = TemperatureLadder::from_log_gaps(
      ladder.temperatures.front(),
      pin_log_gaps(g, ladder.temperatures.front(), ladder.temperatures.back()));
  next.temperatures.back() = ladder.temperatures.back();
  ledger.reset_window();
  return next;
}

bool check_convergence(const std::vector<std::vector<double>>& history, int n, double tolerance) {
  if (n < 2 || history.size() < static_cast<std::size_t>(n)) return false;
  const std::size_t start = history.size() - static_cast<std::size_t>(n);
  const std::size_t dim = history.back().size();
  for (std::size_t k = 0; k < dim; ++k) {
    double mean = 0.0;
    for (std::size_t j = start; j < history.size(); ++j) mean += history[j].at(k);
    mean /= n;
    double ss = 0.0;
    for (std::size_t j = start; j < history.size(); ++j) {
      const double d = history[j][k] - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / (n - 1));
    if (sd == 0.0) continue;
    if (!(sd / std::abs(mean) <= tolerance)) return false;
  }
  return true;
}

double update_step_size(double step_size, double acceptance, double target, double gain) {
  return std::exp(std::log(step_size) - (target - acceptance) * gain);
}

std::vector<double> update_step_sizes(const std::vector<double>& step_sizes,
                                      const std::vector<double>& acceptance,
                                      const AdaptationConfig& cfg) {
  if (step_sizes.size() != acceptance.size()) throw DimensionError("one acceptance per level");
  std::vector<double> out(step_sizes.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = update_step_size(step_sizes[i], acceptance[i], cfg.xi, cfg.k_eps);
  return out;
}

double update_mh_concentration(double concentration, double acceptance, double target,
                               double gain) {
  return std::exp(std::log(concentration) + (target - acceptance) * gain);
}

Eigen::MatrixXd estimate_covariance(const Eigen::MatrixXd& samples) {
  const Eigen::Index n = samples.rows();
  const Eigen::Index d = samples.cols();
  if (d == 0) throw DimensionError("no parameters");
  if (n < 10 * d) throw DomainError("too few samples for a covariance estimate");
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  const Eigen::MatrixXd c = samples.rowwise() - mean;
  Eigen::MatrixXd cov = (c.transpose() * c) / static_cast<double>(n - 1);
  cov = 0.5 * (cov + cov.transpose()).eval();
  cov.diagonal().array() += 1e-8;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(1e-10);
  Eigen::MatrixXd out = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace uwb
