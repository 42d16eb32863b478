#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "uwb/posterior.hpp"

using namespace uwb;

namespace {

struct Setup {
  Experiment e;
  PosteriorModel model;
  Setup(double snr = 30.0)
      : e(build_experiment(fixture::desk_config(48, snr))), model(e.model(e.simulate(snr, 3))) {}
  ModelState truth() const { return {e.truth.theta(), e.gamma_true, e.noise_variance(30.0)}; }
};

double log_normal(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, const Eigen::MatrixXd& prec) {
  const Eigen::VectorXd d = x - mean;
  Eigen::LLT<Eigen::MatrixXd> llt(prec);
  const double logdet = 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
  return 0.5 * logdet - 0.5 * static_cast<double>(x.size()) * std::log(2 * std::numbers::pi) -
         0.5 * d.dot(prec * d);
}

}  // namespace

TEST_CASE("Beta densities integrate to one") {
  for (auto [a, b] : {std::pair{1.0, 1.0}, std::pair{2.5, 4.0}, std::pair{31.0, 71.0}}) {
    const double z = oracle::simpson([&](double x) { return std::exp(beta_log_density(x, a, b)); },
                                     1e-12, 1.0 - 1e-12, 20000);
    CHECK(z == doctest::Approx(1.0).epsilon(1e-6));
  }
  CHECK(beta_log_density(0.0, 2.0, 2.0) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("theta prior is a product of Betas on the normalized box") {
  const ParameterBox box = ParameterBox::uniform_ranges(1, 2, 100, 0.005, 3, 0.001, 0.03);
  BetaPriorSpec spec;
  spec.mode = Eigen::VectorXd::Constant(3, 0.3);
  spec.concentration = Eigen::VectorXd::Constant(3, 10.0);
  Eigen::VectorXd theta(3);
  theta << 40.0, 1.0, 0.01;
  const Eigen::VectorXd bar = box.normalize(theta);
  double expect = 0.0;
  for (int i = 0; i < 3; ++i)
    expect += beta_log_density(bar[i], 4.0, 8.0) - std::log(box.width()[i]);
  CHECK(log_prior_theta(theta, box, spec) == doctest::Approx(expect).epsilon(1e-14));
  theta[0] = 100.0;
  CHECK(log_prior_theta(theta, box, spec) == -std::numeric_limits<double>::infinity());
  CHECK((box.denormalize(bar) - Eigen::Vector3d(40.0, 1.0, 0.01)).norm() < 1e-14);
}

TEST_CASE("pulse conditional matches the real-stacked least squares form") {
  const Setup s;
  const ModelState st = s.truth();
  const Eigen::VectorXcd x = s.model.reflectivity(st.theta);
  for (double t : {1.0, 7.5}) {
    const GaussianConditional g = s.model.gamma_conditional(x, st.sigma_v2, t);
    const Eigen::MatrixXcd phi = x.asDiagonal() * s.model.pulse_map();
    const Eigen::Index n = phi.rows();
    Eigen::MatrixXd r(2 * n, phi.cols());
    r << phi.real(), phi.imag();
    Eigen::VectorXd yy(2 * n);
    yy << s.model.y().real(), s.model.y().imag();
    const double c = 2.0 / (t * st.sigma_v2);
    Eigen::MatrixXd prec = c * r.transpose() * r;
    prec.diagonal().array() += 1.0 / 10.0;
    const Eigen::VectorXd mean = prec.ldlt().solve(c * r.transpose() * yy);
    CHECK((g.precision - prec).norm() / prec.norm() < 1e-12);
    CHECK((g.mean - mean).norm() / mean.norm() < 1e-9);
  }
}

TEST_CASE("log-posterior differences equal conditional log-density differences") {
  const Setup s;
  ModelState a = s.truth();
  const Eigen::VectorXcd x = s.model.reflectivity(a.theta);
  const double t = 3.0;
  const GaussianConditional g = s.model.gamma_conditional(x, a.sigma_v2, t);
  ModelState b = a;
  b.gamma = g.mean + 0.01 * Eigen::VectorXd::Ones(g.mean.size());
  a.gamma = g.mean - 0.02 * Eigen::VectorXd::LinSpaced(g.mean.size(), -1, 1);
  const double lhs = s.model.log_posterior(a, t) - s.model.log_posterior(b, t);
  const double rhs = log_normal(a.gamma, g.mean, g.precision) - log_normal(b.gamma, g.mean, g.precision);
  CHECK(std::abs(lhs - rhs) < 1e-8 * std::max(1.0, std::abs(lhs)));

  const double r2 = s.model.residual_norm2(a.theta, a.gamma);
  const InverseGammaParams ig = s.model.noise_conditional(r2, t);
  ModelState c = a, d = a;
  c.sigma_v2 = 0.7 * ig.scale / ig.shape;
  d.sigma_v2 = 1.9 * ig.scale / ig.shape;
  const double lhs2 = s.model.log_posterior(c, t) - s.model.log_posterior(d, t);
  const double rhs2 =
      log_inverse_gamma(c.sigma_v2, ig.shape, ig.scale) - log_inverse_gamma(d.sigma_v2, ig.shape, ig.scale);
  CHECK(std::abs(lhs2 - rhs2) < 1e-8 * std::max(1.0, std::abs(lhs2)));

  const ThetaConditional tc(s.model, a.gamma, a.sigma_v2, t);
  ModelState e = a, f = a;
  e.theta[0] *= 1.01;
  f.theta[3] *= 0.98;
  const double lhs3 = s.model.log_posterior(e, t) - s.model.log_posterior(f, t);
  const double rhs3 = tc.log_density(s.model.box().normalize(e.theta)) -
                      tc.log_density(s.model.box().normalize(f.theta));
  CHECK(std::abs(lhs3 - rhs3) < 1e-8 * std::max(1.0, std::abs(lhs3)));
}

TEST_CASE("conditional draws have the closed-form moments") {
  const Setup s;
  const ModelState st = s.truth();
  const Eigen::VectorXcd x = s.model.reflectivity(st.theta);
  const GaussianConditional g = s.model.gamma_conditional(x, st.sigma_v2, 2.0);
  const Eigen::MatrixXd cov = g.covariance();
  Rng rng(21);
  const int n = 20000;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(g.mean.size());
  for (int i = 0; i < n; ++i) sum += g.draw(rng);
  const Eigen::VectorXd mean = sum / n;
  for (Eigen::Index k = 0; k < mean.size(); ++k)
    CHECK(std::abs(mean[k] - g.mean[k]) < 4.0 * std::sqrt(cov(k, k) / n));

  const double r2 = s.model.residual_norm2(st.theta, st.gamma);
  const auto [m_ig, v_ig] = oracle::inverse_gamma_moments(s.model.noise_conditional(r2, 2.0).shape,
                                                          s.model.noise_conditional(r2, 2.0).scale);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += s.model.sample_noise(r2, 2.0, rng);
  CHECK(std::abs(acc / n - m_ig) < 4.0 * std::sqrt(v_ig / n));
}

TEST_CASE("theta potential gradient agrees with extrapolated differences") {
  const Setup s;
  const ModelState st = s.truth();
  for (bool with_prior : {true, false}) {
    const ThetaConditional tc(s.model, st.gamma, st.sigma_v2, 4.0, with_prior);
    Eigen::VectorXd bar = s.model.box().normalize(st.theta);
    bar.array() += 0.003;
    Eigen::VectorXd grad;
    const double u = tc.potential_and_gradient(bar, grad);
    CHECK(u == doctest::Approx(tc.potential(bar)).epsilon(1e-14));
    if (with_prior) CHECK(u == doctest::Approx(-tc.log_density(bar)).epsilon(1e-12));
    for (Eigen::Index k = 0; k < bar.size(); ++k) {
      const double fd = oracle::richardson_scalar(
          [&](double v) {
            Eigen::VectorXd b = bar;
            b[k] = v;
            return tc.potential(b);
          },
          bar[k], 1e-4);
      CHECK(std::abs(grad[k] - fd) < 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("likelihood is the circular complex Gaussian") {
  const Setup s;
  const ModelState st = s.truth();
  const double r2 = s.model.residual_norm2(st.theta, st.gamma);
  const double n = static_cast<double>(s.model.data_size());
  CHECK(s.model.log_likelihood(st) ==
        doctest::Approx(-n * std::log(std::numbers::pi * st.sigma_v2) - r2 / st.sigma_v2));
  const double full = s.model.log_likelihood(st) / 2.0 + s.model.log_prior_theta(st.theta) +
                      s.model.log_prior_gamma(st.gamma) + s.model.log_prior_noise(st.sigma_v2);
  CHECK(s.model.log_posterior(st, 2.0) == doctest::Approx(full));
}
