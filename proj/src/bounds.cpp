#include "uwb/bounds.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "uwb/parallel.hpp"

namespace uwb {

Eigen::MatrixXcd signal_jacobian(const ReflectivityModel& forward, const Eigen::MatrixXcd& pulse_map,
                                 const Eigen::VectorXd& theta, const Eigen::VectorXd& gamma) {
  if (pulse_map.cols() != gamma.size()) throw DimensionError("gamma length mismatch");
  if (pulse_map.rows() != static_cast<Eigen::Index>(forward.grid().size()))
    throw DimensionError("pulse map rows must match grid");
  Eigen::VectorXcd x;
  Eigen::MatrixXcd jx;
  forward.evaluate(theta, x, jx);
  const Eigen::VectorXcd spectrum = pulse_map * gamma.cast<Complex>();
  const Eigen::Index p = theta.size();
  const Eigen::Index l = gamma.size();
  Eigen::MatrixXcd j(x.size(), p + l);
  j.leftCols(p) = spectrum.asDiagonal() * jx;
  j.rightCols(l) = x.asDiagonal() * pulse_map;
  return j;
}

FisherMatrix fisher(const Eigen::MatrixXcd& jacobian, double sigma_v2) {
  if (!(sigma_v2 > 0.0)) throw DomainError("noise variance must be positive");
  FisherMatrix f;
  f.sigma_v2 = sigma_v2;
  f.jacobian = jacobian;
  f.info = (2.0 / sigma_v2) * (jacobian.adjoint() * jacobian).real();
  f.info = 0.5 * (f.info + f.info.transpose()).eval();
  return f;
}

FisherMatrix fisher(const ReflectivityModel& forward, const Eigen::MatrixXcd& pulse_map,
                    const Eigen::VectorXd& theta, const Eigen::VectorXd& gamma, double sigma_v2) {
  return fisher(signal_jacobian(forward, pulse_map, theta, gamma), sigma_v2);
}

CrlbReport crlb(const FisherMatrix& f, const Eigen::VectorXd& phi_true, double snr_db) {
  const Eigen::Index n = f.info.rows();
  if (phi_true.size() != n) throw DimensionError("parameter vector does not match Fisher size");
  // Jacobi equilibration makes the eigenvalue floor independent of parameter units.
  Eigen::VectorXd scale(n);
  for (Eigen::Index i = 0; i < n; ++i)
    scale[i] = f.info(i, i) > 0.0 ? 1.0 / std::sqrt(f.info(i, i)) : 1.0;
  const Eigen::MatrixXd g = scale.asDiagonal() * f.info * scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (g + g.transpose()));
  if (es.info() != Eigen::Success) throw std::runtime_error("Fisher eigen-decomposition failed");
  const Eigen::VectorXd ev = es.eigenvalues();
  const Eigen::MatrixXd& v = es.eigenvectors();
  const double lmax = ev.maxCoeff();
  const double floor = 1e-12 * lmax;

  CrlbReport r;
  r.snr_db = snr_db;
  r.flagged.assign(static_cast<std::size_t>(n), false);
  r.condition_number = ev.minCoeff() > 0.0 ? lmax / ev.minCoeff() : HUGE_VAL;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (ev[k] > floor) {
      inv[k] = 1.0 / ev[k];
    } else {
      r.pseudo_inverse = true;
      for (Eigen::Index i = 0; i < n; ++i)
        if (v(i, k) * v(i, k) > 1e-6) r.flagged[static_cast<std::size_t>(i)] = true;
    }
  }
  r.variance = (v * inv.asDiagonal() * v.transpose()).diagonal().cwiseProduct(scale.cwiseAbs2());
  r.nrmse_bound = r.variance.cwiseSqrt().cwiseQuotient(phi_true.cwiseAbs());
  return r;
}

NrmseResult nrmse_harness(const Eigen::VectorXd& truth,
                          const std::function<Eigen::VectorXd(int)>& estimator, int trials,
                          int workers) {
  if (trials < 1) throw DomainError("need at least one trial");
  std::vector<Eigen::VectorXd> est(static_cast<std::size_t>(trials));
  std::vector<char> ok(static_cast<std::size_t>(trials), 0);
  WorkerPool pool(workers);
  pool.run(static_cast<std::size_t>(trials), [&](std::size_t t) {
    try {
      Eigen::VectorXd e = estimator(static_cast<int>(t));
      if (e.size() == truth.size() && e.allFinite()) {
        est[t] = std::move(e);
        ok[t] = 1;
      }
    } catch (const std::exception&) {
    }
  });
  NrmseResult r;
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(truth.size());
  for (std::size_t t = 0; t < est.size(); ++t) {
    if (!ok[t]) {
      ++r.failed;
      continue;
    }
    ++r.completed;
    sq += (est[t] - truth).cwiseAbs2();
    r.estimates.push_back(est[t]);
  }
  if (r.completed == 0) {
    r.nrmse = Eigen::VectorXd::Constant(truth.size(), std::nan(""));
  } else {
    r.nrmse = (sq / r.completed).cwiseSqrt().cwiseQuotient(truth.cwiseAbs());
  }
  return r;
}

}  // namespace uwb
