#pragma once

// Fisher information of the blind measurement model, Cramer-Rao bounds and
// the empirical N-RMSE harness.

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "uwb/em_forward.hpp"

namespace uwb {

/// d s_n / d phi with phi = (theta, gamma) and s = diag(B gamma) x(theta);
/// B is the N x L pulse map F_Q A.
Eigen::MatrixXcd signal_jacobian(const ReflectivityModel& forward, const Eigen::MatrixXcd& pulse_map,
                                 const Eigen::VectorXd& theta, const Eigen::VectorXd& gamma);

struct FisherMatrix {
  Eigen::MatrixXd info;
  double sigma_v2 = 0.0;
  Eigen::MatrixXcd jacobian;
};

/// (2 / sigma_v2) Re{J^H J}.
FisherMatrix fisher(const Eigen::MatrixXcd& jacobian, double sigma_v2);
FisherMatrix fisher(const ReflectivityModel& forward, const Eigen::MatrixXcd& pulse_map,
                    const Eigen::VectorXd& theta, const Eigen::VectorXd& gamma, double sigma_v2);

struct CrlbReport {
  Eigen::VectorXd variance;     // diagonal of the (pseudo-)inverse
  Eigen::VectorXd nrmse_bound;  // sqrt(variance) / |phi|
  double snr_db = 0.0;
  double condition_number = 0.0;
  bool pseudo_inverse = false;
  std::vector<bool> flagged;  // parameters touching floored eigen-directions
};

/// Inverts the unit-diagonal (Jacobi-scaled) Fisher matrix. Eigenvalues below
/// 1e-12 * lambda_max are dropped from the inverse and the parameters they
/// involve are flagged. condition_number refers to the scaled matrix.
CrlbReport crlb(const FisherMatrix& f, const Eigen::VectorXd& phi_true, double snr_db = 0.0);

struct NrmseResult {
  Eigen::VectorXd nrmse;  // per parameter
  int completed = 0;
  int failed = 0;
  std::vector<Eigen::VectorXd> estimates;
};

/// Runs `estimator(trial)` for trial = 0..trials-1 on up to `workers`
/// threads and reports sqrt(mean (est - truth)^2) / |truth| per component.
/// Trials that throw are counted as failed and excluded.
NrmseResult nrmse_harness(const Eigen::VectorXd& truth,
                          const std::function<Eigen::VectorXd(int)>& estimator, int trials,
                          int workers = 1);

}  // namespace uwb
