#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "uwb/samplers.hpp"

using namespace uwb;

namespace {

// U = (x - mu)^T P (x - mu) / 2 on the unit cube.
PotentialFn quadratic(const Eigen::VectorXd& mu, const Eigen::MatrixXd& prec) {
  return [=](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    if ((x.array() <= 0.0).any() || (x.array() >= 1.0).any()) {
      g = Eigen::VectorXd::Zero(x.size());
      return std::numeric_limits<double>::infinity();
    }
    const Eigen::VectorXd d = x - mu;
    g = prec * d;
    return 0.5 * d.dot(g);
  };
}

}  // namespace

TEST_CASE("kernel names round trip") {
  for (KernelKind k : {KernelKind::Slice, KernelKind::Hmc, KernelKind::Mh})
    CHECK(kernel_from_string(to_string(k)) == k);
  CHECK_THROWS(kernel_from_string("nuts"));
}

TEST_CASE("slice sampler reproduces a truncated normal") {
  Rng rng(3);
  KernelStats st;
  SliceConfig cfg;
  cfg.width = 0.2;
  double x = 0.5, s1 = 0.0, s2 = 0.0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    x = slice_update(x, [](double v) { return -0.5 * (v - 0.3) * (v - 0.3) / 0.01; }, 0.0, 1.0, cfg,
                     rng, &st);
    CHECK((x > 0.0 && x < 1.0));
    s1 += x;
    s2 += x * x;
  }
  const double mean = s1 / n, var = s2 / n - mean * mean;
  CHECK(mean == doctest::Approx(0.3).epsilon(0.02));
  CHECK(var == doctest::Approx(0.01).epsilon(0.05));
  CHECK(st.proposals == n);
  CHECK(st.acceptances == n);
  CHECK(st.shrinks > 0);
}

TEST_CASE("slice sampler never leaves the support") {
  Rng rng(4);
  SliceConfig cfg;
  cfg.width = 5.0;
  double x = 0.99;
  for (int i = 0; i < 2000; ++i) {
    x = slice_update(x, [](double v) { return 40.0 * v; }, 0.0, 1.0, cfg, rng);
    REQUIRE((x > 0.0 && x < 1.0));
  }
}

TEST_CASE("mass matrix conventions") {
  Eigen::Matrix2d sigma;
  sigma << 2.0, 0.6, 0.6, 0.5;
  const MassMatrix m = MassMatrix::from_inverse(sigma);
  CHECK_FALSE(m.diagonal());
  CHECK((m.mass() * sigma - Eigen::Matrix2d::Identity()).norm() < 1e-12);
  const Eigen::Vector2d p(0.3, -1.2);
  CHECK(m.kinetic(p) == doctest::Approx(0.5 * p.dot(sigma * p)));
  CHECK((m.velocity(p) - sigma * p).norm() < 1e-15);
  Rng rng(8);
  Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd q = m.draw_momentum(rng);
    acc += q * q.transpose();
  }
  CHECK(((acc / n) - m.mass()).cwiseAbs().maxCoeff() < 0.05 * m.mass().cwiseAbs().maxCoeff());
  CHECK(MassMatrix::identity(3).diagonal());
}

TEST_CASE("leapfrog is reversible and nearly conserves energy") {
  Eigen::Vector2d mu(0.5, 0.5);
  Eigen::Matrix2d prec;
  prec << 100.0, 30.0, 30.0, 50.0;
  const PotentialFn u = quadratic(mu, prec);
  const MassMatrix m = MassMatrix::identity(2);
  Eigen::VectorXd th = Eigen::Vector2d(0.45, 0.55), p = Eigen::Vector2d(0.3, -0.2);
  Eigen::VectorXd g;
  const double h0 = u(th, g) + m.kinetic(p);
  PhasePoint z{th, p};
  for (int i = 0; i < 20; ++i) z = leapfrog_step(z.theta, z.p, 0.01, m, u);
  const double h1 = u(z.theta, g) + m.kinetic(z.p);
  CHECK(std::abs(h1 - h0) < 1e-3);
  PhasePoint back{z.theta, -z.p};
  for (int i = 0; i < 20; ++i) back = leapfrog_step(back.theta, back.p, 0.01, m, u);
  CHECK((back.theta - th).norm() < 1e-12);
  CHECK((back.p + p).norm() < 1e-12);
}

TEST_CASE("reflective HMC stays in the box and samples a boundary-heavy target") {
  Rng rng(9);
  const Eigen::VectorXd lo = Eigen::VectorXd::Zero(2), hi = Eigen::VectorXd::Ones(2);
  // flat target: uniform on the square
  const PotentialFn flat = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = Eigen::VectorXd::Zero(x.size());
    if ((x.array() <= 0.0).any() || (x.array() >= 1.0).any()) return std::numeric_limits<double>::infinity();
    return 0.0;
  };
  HmcConfig cfg;
  cfg.step_size = 0.2;
  cfg.leapfrog_steps = 10;
  cfg.mass = MassMatrix::identity(2);
  KernelStats st;
  Eigen::VectorXd x = Eigen::Vector2d(0.5, 0.5);
  double s = 0.0, s2 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    x = hmc_update(x, flat, cfg, lo, hi, rng, &st).theta;
    REQUIRE(((x.array() > 0.0).all() && (x.array() < 1.0).all()));
    s += x[0];
    s2 += x[0] * x[0];
  }
  CHECK(st.reflections > 0);
  CHECK(s / n == doctest::Approx(0.5).epsilon(0.03));
  CHECK(s2 / n - (s / n) * (s / n) == doctest::Approx(1.0 / 12.0).epsilon(0.06));
}

TEST_CASE("HMC rejects non-finite energies") {
  Rng rng(10);
  const PotentialFn bad = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = Eigen::VectorXd::Constant(x.size(), std::nan(""));
    return 0.0;
  };
  HmcConfig cfg;
  cfg.mass = MassMatrix::identity(2);
  const Eigen::VectorXd x0 = Eigen::Vector2d(0.4, 0.6);
  const HmcResult r = hmc_update(x0, bad, cfg, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2), rng);
  CHECK_FALSE(r.accepted);
  CHECK(r.theta == x0);
}

TEST_CASE("Beta proposal density integrates to one") {
  Eigen::VectorXd from(1), to(1), conc(1);
  from << 0.2;
  conc << 30.0;
  const double z = oracle::simpson(
      [&](double v) {
        to[0] = v;
        return std::exp(beta_proposal_log_density(from, to, conc));
      },
      1e-12, 1 - 1e-12, 20000);
  CHECK(z == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("MH with Beta proposals targets a Beta density") {
  Rng rng(12);
  MhConfig cfg;
  cfg.concentration = Eigen::VectorXd::Constant(1, 20.0);
  const auto logp = [](const Eigen::VectorXd& x) { return beta_log_density(x[0], 3.0, 5.0); };
  Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.5);
  double s = 0.0;
  KernelStats st;
  const int n = 60000;
  for (int i = 0; i < n; ++i) {
    x = mh_update(x, logp, cfg, rng, &st).theta;
    s += x[0];
  }
  CHECK(s / n == doctest::Approx(3.0 / 8.0).epsilon(0.02));
  CHECK(st.acceptance_ratio() > 0.1);
  CHECK(st.acceptance_ratio() < 1.0);
}

TEST_CASE("Gibbs cycle keeps state consistent and counts proposals") {
  const Experiment e = build_experiment(fixture::desk_config(32));
  const PosteriorModel model = e.model(e.simulate(40.0, 1));
  ChainState c;
  c.replica = make_replica(model, {e.truth.theta(), e.gamma_true, e.noise_variance(40.0)});
  c.sampler.mass = MassMatrix::identity(model.theta_size());
  c.sampler.mh_concentration = Eigen::VectorXd::Constant(model.theta_size(), 100.0);
  Rng rng(2);
  for (KernelKind k : {KernelKind::Slice, KernelKind::Hmc, KernelKind::Mh}) {
    const long before = c.sampler.stats.proposals;
    for (int i = 0; i < 5; ++i) gibbs_cycle(c, model, 2.0, k, GibbsSettings{}, rng);
    CHECK(c.sampler.stats.proposals > before);
    CHECK(model.box().contains_strict(c.replica.state.theta));
    CHECK(c.replica.log_likelihood == doctest::Approx(model.log_likelihood(c.replica.state)));
    CHECK((c.replica.x - model.reflectivity(c.replica.state.theta)).norm() < 1e-12);
  }
}
