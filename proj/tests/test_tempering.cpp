#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "uwb/tempering.hpp"

using namespace uwb;

TEST_CASE("geometric ladder and log-gap round trip") {
  const TemperatureLadder l = TemperatureLadder::geometric(16, 1.0, 1e5);
  CHECK(l.size() == 16);
  CHECK(l[0] == 1.0);
  CHECK(l[15] == doctest::Approx(1e5).epsilon(1e-12));
  CHECK(l[1] / l[0] == doctest::Approx(l[15] / l[14]));
  const TemperatureLadder r = TemperatureLadder::from_log_gaps(1.0, l.log_gaps());
  for (std::size_t i = 0; i < 16; ++i) CHECK(r[i] == doctest::Approx(l[i]).epsilon(1e-12));
  TemperatureLadder bad = l;
  bad.temperatures[3] = bad.temperatures[2];
  CHECK_THROWS(bad.validate());
}

TEST_CASE("swap acceptance arithmetic") {
  CHECK(swap_log_acceptance(-50.0, -50.0, 1.0, 3.0) == 0.0);
  CHECK(std::exp(swap_log_acceptance(-100.0, -110.0, 1.0, 2.0)) ==
        doctest::Approx(6.737946999085467e-3).epsilon(1e-12));
}

TEST_CASE("swapping twice restores the states") {
  std::vector<int> states = {10, 20, 30, 40};
  const std::vector<int> orig = states;
  std::swap(states[1], states[2]);
  std::swap(states[1], states[2]);
  CHECK(states == orig);

  // equal likelihoods always swap
  TemperatureLadder l = TemperatureLadder::geometric(4, 1.0, 8.0);
  SwapLedger ledger(4);
  Rng rng(1);
  std::vector<double> ll = {-5.0, -5.0, -5.0, -5.0};
  for (int i = 0; i < 50; ++i) {
    const SwapOutcome o = decide_swap(ll, l, ledger, rng);
    CHECK(o.accepted);
    CHECK(o.pair < 3);
  }
  long total = 0;
  for (long p : ledger.proposed) total += p;
  CHECK(total == 50);
}

TEST_CASE("single level never proposes swaps") {
  TemperatureLadder l = TemperatureLadder::geometric(1, 1.0, 1.0);
  SwapLedger ledger(1);
  Rng rng(1);
  const SwapOutcome o = decide_swap({-1.0}, l, ledger, rng);
  CHECK_FALSE(o.proposed);
  CHECK(ledger.pairs() == 0);
}

TEST_CASE("controller step and pinning") {
  const std::vector<double> errors = swap_errors({0.2, 0.3, 0.1, 0.1});
  REQUIRE(errors.size() == 4);
  CHECK(errors[0] == doctest::Approx(0.1));
  CHECK(errors[1] == doctest::Approx(-0.2));
  CHECK(errors[2] == doctest::Approx(0.0));
  CHECK(errors[3] == 0.0);
  const std::vector<double> g = step_log_gaps({1.0, 1.0, 1.0, 1.0}, errors, 10.0);
  CHECK(g[0] == doctest::Approx(0.0));
  CHECK(g[1] == doctest::Approx(3.0));
  const std::vector<double> pinned = pin_log_gaps(g, 1.0, 50.0);
  const TemperatureLadder l = TemperatureLadder::from_log_gaps(1.0, pinned);
  CHECK(l.temperatures.back() == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(pinned[1] - pinned[0] == doctest::Approx(3.0));
}

TEST_CASE("equal swap ratios leave the ladder unchanged") {
  TemperatureLadder l = TemperatureLadder::geometric(5, 1.0, 100.0);
  SwapLedger ledger(5);
  for (std::size_t p = 0; p < 4; ++p)
    for (int i = 0; i < 10; ++i) ledger.record(p, i < 3);
  AdaptationConfig cfg;
  const TemperatureLadder next = update_temperatures(l, ledger, cfg);
  for (std::size_t i = 0; i < 5; ++i) CHECK(next[i] == doctest::Approx(l[i]).epsilon(1e-12));
  for (long p : ledger.proposed) CHECK(p == 0);
  for (long p : ledger.total_proposed) CHECK(p == 10);
  l.frozen = true;
  ledger.record(0, true);
  CHECK(update_temperatures(l, ledger, cfg).temperatures == l.temperatures);
}

TEST_CASE("temperature controller equalizes a simulated plant") {
  // Swap ratio of a pair falls with its log temperature ratio; the low end
  // is stiffer, like a likelihood-dominated posterior.
  auto plant = [](const TemperatureLadder& l, std::size_t p) {
    const double r = std::log(l[p + 1] / l[p]);
    const double stiff = 1.0 + 3.0 / (1.0 + std::log(l[p]));
    return std::exp(-1.2 * stiff * r);
  };
  TemperatureLadder l = TemperatureLadder::geometric(8, 1.0, 200.0);
  AdaptationConfig cfg;
  cfg.k_t = 0.8;
  for (int j = 0; j < 50; ++j) {
    SwapLedger ledger(8);
    for (std::size_t p = 0; p < 7; ++p) {
      const long acc = std::lround(1e6 * plant(l, p));
      ledger.proposed[p] = ledger.total_proposed[p] = 1000000;
      ledger.accepted[p] = ledger.total_accepted[p] = acc;
    }
    l = update_temperatures(l, ledger, cfg);
    l.validate();
    CHECK(l[0] == 1.0);
    CHECK(l[7] == doctest::Approx(200.0).epsilon(1e-10));
  }
  double lo = 1.0, hi = 0.0;
  for (std::size_t p = 0; p < 7; ++p) {
    lo = std::min(lo, plant(l, p));
    hi = std::max(hi, plant(l, p));
  }
  CHECK(hi - lo <= 0.04);
}

TEST_CASE("convergence criterion") {
  std::vector<std::vector<double>> h(10, {1.0, 5.0, 9.0});
  CHECK(check_convergence(h, 10));
  for (int i = 0; i < 10; ++i) h[static_cast<std::size_t>(i)][1] = i % 2 ? 20.0 : 10.0;
  CHECK_FALSE(check_convergence(h, 10));
  std::vector<std::vector<double>> drift;
  for (int i = 0; i < 10; ++i) drift.push_back({std::pow(1.01, i), 3.0 * std::pow(0.99, i)});
  CHECK(check_convergence(drift, 10));
  CHECK_FALSE(check_convergence(std::vector<std::vector<double>>(4, {1.0}), 10));
  std::vector<std::vector<double>> with_zero(10, {0.0, 1.0});
  CHECK(check_convergence(with_zero, 10));
}

TEST_CASE("step-size controller") {
  CHECK(update_step_size(0.01, 0.85, 0.85, 0.5) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(update_step_size(0.01, 0.95, 0.85, 0.5) == doctest::Approx(0.01 * std::exp(0.05)));
  // simulated plant: acceptance falls with step size
  double eps = 1e-2;
  AdaptationConfig cfg;
  for (int j = 0; j < 100; ++j) {
    const double acc = std::exp(-std::pow(eps / 0.08, 2.0));
    eps = update_step_sizes({eps}, {acc}, cfg)[0];
  }
  CHECK(std::abs(std::exp(-std::pow(eps / 0.08, 2.0)) - 0.85) < 0.05);
  CHECK(update_mh_concentration(100.0, 0.1, 0.3, 0.5) > 100.0);
}

TEST_CASE("covariance estimate") {
  Rng rng(17);
  const int n = 20000;
  Eigen::MatrixXd x(n, 2);
  for (int i = 0; i < n; ++i) {
    const double a = standard_normal(rng), b = standard_normal(rng);
    x(i, 0) = 0.1 * a;
    x(i, 1) = 0.2 * (0.9 * a + std::sqrt(1 - 0.81) * b);
  }
  const Eigen::MatrixXd c = estimate_covariance(x);
  CHECK(c(0, 0) == doctest::Approx(0.01).epsilon(0.05));
  CHECK(c(1, 1) == doctest::Approx(0.04).epsilon(0.05));
  CHECK(c(0, 1) / std::sqrt(c(0, 0) * c(1, 1)) == doctest::Approx(0.9).epsilon(0.05));
  const Eigen::MatrixXd k = estimate_covariance(Eigen::MatrixXd::Constant(40, 3, 0.4));
  CHECK((k - 1e-8 * Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK_THROWS(estimate_covariance(Eigen::MatrixXd::Zero(10, 3)));
}
