#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "uwb/bounds.hpp"

using namespace uwb;

namespace {

struct Setup {
  Experiment e = build_experiment(fixture::desk_config(64));
  PosteriorModel model = e.model(e.simulate(40.0, 1));
};

Eigen::VectorXcd signal(const PosteriorModel& m, const Eigen::VectorXd& phi) {
  const Eigen::Index p = static_cast<Eigen::Index>(m.theta_size());
  Eigen::VectorXcd x;
  m.forward().evaluate(phi.head(p), x);
  const Eigen::VectorXcd h = m.pulse_map() * phi.tail(phi.size() - p).cast<Complex>();
  return x.cwiseProduct(h);
}

}  // namespace

TEST_CASE("Fisher information matches an extrapolated-difference Jacobian") {
  const Setup s;
  const Eigen::VectorXd phi = s.e.phi_true();
  const double v = s.e.noise_variance(40.0);
  const FisherMatrix f = fisher(s.model.forward(), s.model.pulse_map(), s.e.truth.theta(), s.e.gamma_true, v);
  Eigen::MatrixXcd j(s.model.data_size(), phi.size());
  for (Eigen::Index k = 0; k < phi.size(); ++k) {
    const double h = 1e-4 * std::max(std::abs(phi[k]), 1e-3);
    Eigen::VectorXd a = phi, b = phi, c = phi, d = phi;
    a[k] += h;
    b[k] -= h;
    c[k] += 2 * h;
    d[k] -= 2 * h;
    j.col(k) = (8.0 * (signal(s.model, a) - signal(s.model, b)) - (signal(s.model, c) - signal(s.model, d))) /
               (12.0 * h);
  }
  const Eigen::MatrixXd ref = (2.0 / v) * (j.adjoint() * j).real();
  for (Eigen::Index r = 0; r < ref.rows(); ++r)
    for (Eigen::Index c = 0; c < ref.cols(); ++c)
      CHECK(std::abs(f.info(r, c) - ref(r, c)) <=
            1e-4 * std::sqrt(std::abs(ref(r, r) * ref(c, c))) + 1e-300);
  CHECK((f.info - f.info.transpose()).norm() == 0.0);
}

TEST_CASE("CRLB scales with noise variance") {
  const Setup s;
  const Eigen::VectorXd phi = s.e.phi_true();
  const Eigen::MatrixXcd jac =
      signal_jacobian(s.model.forward(), s.model.pulse_map(), s.e.truth.theta(), s.e.gamma_true);
  const CrlbReport lo = crlb(fisher(jac, s.e.noise_variance(20.0)), phi, 20.0);
  const CrlbReport hi = crlb(fisher(jac, s.e.noise_variance(40.0)), phi, 40.0);
  for (Eigen::Index k = 0; k < phi.size(); ++k) {
    CHECK(hi.variance[k] < lo.variance[k]);
    CHECK(lo.variance[k] / hi.variance[k] == doctest::Approx(100.0).epsilon(1e-4));
  }
  CHECK(hi.condition_number > 1.0);
}

TEST_CASE("rank-deficient Fisher matrices are flagged") {
  Eigen::MatrixXcd j(4, 3);
  j << 1.0, 2.0, 0.0, 0.5, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 2.0, 0.0;
  const CrlbReport r = crlb(fisher(j, 1.0), Eigen::Vector3d(1.0, 1.0, 1.0));
  CHECK(r.pseudo_inverse);
  CHECK(r.flagged[0]);
  CHECK(r.flagged[1]);
  CHECK_FALSE(r.flagged[2]);
  CHECK(r.variance[2] == doctest::Approx(0.5));
  CHECK_THROWS(fisher(j, 0.0));
  CHECK_THROWS(crlb(fisher(j, 1.0), Eigen::Vector2d(1.0, 1.0)));
}

TEST_CASE("N-RMSE harness") {
  const Eigen::Vector2d truth(2.0, -4.0);
  const NrmseResult r = nrmse_harness(
      truth,
      [&](int t) -> Eigen::VectorXd {
        if (t == 3) throw std::runtime_error("diverged");
        return truth + Eigen::Vector2d(t % 2 ? 0.2 : -0.2, 0.0);
      },
      6, 2);
  CHECK(r.completed == 5);
  CHECK(r.failed == 1);
  CHECK(r.nrmse[0] == doctest::Approx(0.1));
  CHECK(r.nrmse[1] == 0.0);
}

TEST_CASE("a vanishing lossless interface costs the thickness above it") {
  ExperimentConfig cfg = fixture::desk_config(64);
  cfg.preset = "lung_deflated";
  cfg.pipeline.stage2_length = 200;
  const Experiment e = build_experiment(cfg);
  const PosteriorModel model = e.model(e.simulate(40.0, 1));
  const int m = static_cast<int>(e.truth.layers());
  const double v = e.noise_variance(40.0);
  auto bounds = [&](double eps_last) {
    Eigen::VectorXd theta = e.truth.theta();
    theta[m - 1] = eps_last;
    theta[2 * m - 2] = 0.0;
    theta[2 * m - 1] = 0.0;
    Eigen::VectorXd phi = e.phi_true();
    phi.head(theta.size()) = theta;
    return crlb(fisher(model.forward(), model.pulse_map(), theta, e.gamma_true, v), phi, 40.0).variance;
  };
  const double eps_prev = e.truth.theta()[m - 2];
  const Eigen::VectorXd near = bounds(eps_prev * (1.0 + 1e-3));
  const Eigen::VectorXd far = bounds(2.0 * eps_prev);
  MESSAGE("d ratio " << near[3 * m - 1] / far[3 * m - 1] << ", eps ratio " << near[m - 1] / far[m - 1]);
  CHECK(near[3 * m - 1] >= 10.0 * far[3 * m - 1]);
  CHECK(near[m - 1] <= 2.0 * far[m - 1]);
}
