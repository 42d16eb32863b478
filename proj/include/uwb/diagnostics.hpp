#pragma once

// Convergence and efficiency diagnostics over traces, and the point and
// interval estimators built from them.

#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "uwb/posterior.hpp"
#include "uwb/trace_store.hpp"

namespace uwb {

struct DiagnosticError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Multivariate potential scale reduction factor over m >= 2 runs of equal
/// length n (rows are samples). Uses every row passed in.
double mpsrf(const std::vector<Eigen::MatrixXd>& runs);

struct MpsrfPoint {
  long iteration = 0;  // samples per run seen so far
  double value = 0.0;
};

/// MPSRF after every `step` samples, each time over the second half of the
/// samples seen so far. Points with fewer than 2*d retained rows are skipped.
std::vector<MpsrfPoint> mpsrf_curve(const std::vector<Eigen::MatrixXd>& runs, long step);

/// Biased autocorrelation estimate rho(0..max_lag).
std::vector<double> acf(const std::vector<double>& series, std::size_t max_lag);

/// Integrated autocorrelation time with Geyer's initial positive sequence.
double act(const std::vector<double>& series);

/// Column means after dropping the first floor(burn_in_fraction * n) rows.
Eigen::VectorXd mmse_estimate(const Eigen::MatrixXd& samples, double burn_in_fraction = 0.0);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double p);

/// Equal-tailed interval per column.
std::vector<Interval> credibility_interval(const Eigen::MatrixXd& samples, double level = 0.95);

/// Objective for box-constrained ascent: returns f(x); fills the gradient and,
/// when `curvature` is non-null, a positive definite approximation to -Hessian
/// (left empty to request plain gradient steps).
using AscentObjective =
    std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad, Eigen::MatrixXd* curvature)>;

struct AscentOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-6;
  double armijo = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 60;
};

struct AscentResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;  // projected, infinity norm
  bool converged = false;      // gradient tolerance met
};

/// Projected (optionally curvature-preconditioned) gradient ascent on the box
/// [lower, upper] with Armijo backtracking.
AscentResult projected_ascent(const AscentObjective& f, const Eigen::VectorXd& x0,
                              const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                              const AscentOptions& opts = {});

struct MapResult {
  ModelState state;
  double log_posterior = 0.0;
  int iterations = 0;
  bool converged = false;
  std::size_t start_row = 0;
};

/// Local MAP search from `start`: closed-form sigma_v^2 and gamma updates
/// alternate with preconditioned projected ascent over normalized theta.
MapResult map_refine(const PosteriorModel& model, const ModelState& start,
                     const AscentOptions& opts = {});

/// Starts at the row of `trace` with the highest finite log-posterior
/// (falling back to the next best if refinement fails).
MapResult map_estimate(const PosteriorModel& model, const TraceStore& trace, std::size_t level = 0,
                       int stage = 0, const AscentOptions& opts = {});

struct EstimateReport {
  Eigen::VectorXd mmse;
  Eigen::VectorXd map;
  std::vector<Interval> intervals;
  double level = 0.95;
  double map_log_posterior = 0.0;
};

/// MMSE, MAP and equal-tailed intervals over every trace column of one level
/// and stage.
EstimateReport estimate_report(const PosteriorModel& model, const TraceStore& trace,
                               std::size_t level, int stage, double burn_in_fraction = 0.0,
                               double credibility = 0.95, const AscentOptions& opts = {});

}  // namespace uwb
