#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "uwb/pulse.hpp"

using namespace uwb;

namespace {

int sign_changes(const Eigen::VectorXd& v) {
  int n = 0;
  double prev = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) < 1e-12) continue;
    if (prev != 0.0 && (v[i] > 0) != (prev > 0)) ++n;
    prev = v[i];
  }
  return n;
}

}  // namespace

TEST_CASE("default basis is orthonormal") {
  const Eigen::MatrixXd a = dps_basis(SubspaceSpec::with_default_bandwidth(23, 8));
  CHECK(a.rows() == 23);
  CHECK(a.cols() == 8);
  CHECK((a.transpose() * a - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-10);
  const Eigen::MatrixXd p = a * a.transpose();
  CHECK((p * p - p).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("k-th sequence has k-1 sign changes") {
  const Eigen::MatrixXd a = dps_basis(SubspaceSpec::with_default_bandwidth(23, 8));
  for (int k = 0; k < 8; ++k) CHECK(sign_changes(a.col(k)) == k);
}

TEST_CASE("tridiagonal and sinc-kernel routes give the same sequences") {
  for (auto [q, l] : {std::pair{23, 8}, std::pair{16, 5}, std::pair{31, 4}}) {
    const SubspaceSpec spec = SubspaceSpec::with_default_bandwidth(q, l);
    const Eigen::MatrixXd a = dps_basis(spec);
    const Eigen::MatrixXd b = oracle::sinc_kernel_dpss(q, l, spec.half_bandwidth);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("energy concentration decreases along the basis") {
  const SubspaceSpec spec = SubspaceSpec::with_default_bandwidth(23, 8);
  const Eigen::MatrixXd a = dps_basis(spec);
  double prev = 2.0;
  for (int k = 0; k < 8; ++k) {
    const double c = band_energy_fraction(a.col(k), spec.half_bandwidth);
    CHECK(c < prev);
    prev = c;
  }
  CHECK(band_energy_fraction(a.col(0), spec.half_bandwidth) >
        band_energy_fraction(a.col(7), spec.half_bandwidth));
}

TEST_CASE("basis is deterministic") {
  const SubspaceSpec spec = SubspaceSpec::with_default_bandwidth(23, 8);
  CHECK(dps_basis(spec) == dps_basis(spec));
}

TEST_CASE("derivative-of-Gaussian pulse") {
  const double dt = (8.0 / 46.0) / 16e9;
  const Eigen::VectorXd h = gaussian_derivative_pulse(4e9, 23, dt);
  CHECK(std::abs(h.sum()) < 1e-12);
  CHECK(h.squaredNorm() == doctest::Approx(1.0).epsilon(1e-12));
  // spectral peak within one bin of fc on the 512-point grid
  const double df = 1.0 / (2.0 * 512 * dt);
  double best = 0.0, f_best = 0.0;
  for (double f = df; f < 1.0 / (2.0 * dt); f += df) {
    const double mag = std::abs(oracle::dtft(h, 2 * std::numbers::pi * f, dt));
    if (mag > best) {
      best = mag;
      f_best = f;
    }
  }
  CHECK(std::abs(f_best - 4e9) <= df);
}

TEST_CASE("projection residuals") {
  const SubspaceSpec spec = SubspaceSpec::with_default_bandwidth(23, 8);
  const Eigen::MatrixXd a = dps_basis(spec);
  const Eigen::VectorXd g = Eigen::VectorXd::LinSpaced(8, 1.0, 2.0);
  const PulseProjection in_span = project_pulse(a * g, a);
  CHECK(in_span.residual_energy < 1e-10);
  CHECK((in_span.gamma - g).norm() < 1e-10);

  const Eigen::MatrixXd full = dps_basis(SubspaceSpec{23, 23, spec.half_bandwidth});
  const PulseProjection orth = project_pulse(full.col(15), a);
  CHECK(orth.gamma.norm() < 1e-10);

  const double dt = spec.half_bandwidth / 16e9;
  const PulseProjection p = project_pulse(gaussian_derivative_pulse(4e9, 23, dt), a);
  CHECK(p.residual_energy < 0.01);
}

TEST_CASE("invalid subspace specs are rejected") {
  CHECK_THROWS_AS(dps_basis(SubspaceSpec{8, 9, 0.2}), DomainError);
  CHECK_THROWS_AS(dps_basis(SubspaceSpec{8, 4, 0.5}), DomainError);
  CHECK_THROWS_AS(SubspaceSpec::with_default_bandwidth(4, 0), DomainError);
}
