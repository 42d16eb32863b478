#include "uwb/pulse.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "uwb/em_forward.hpp"

namespace uwb {

void SubspaceSpec::validate() const {
  if (length < 1) throw DomainError("pulse length must be >= 1");
  if (size < 1 || size > length) throw DomainError("basis size must be in [1, Q]");
  if (!(half_bandwidth > 0.0 && half_bandwidth < 0.5))
    throw DomainError("half bandwidth must lie in (0, 0.5)");
}

SubspaceSpec SubspaceSpec::with_default_bandwidth(int length, int size) {
  SubspaceSpec s{length, size, static_cast<double>(size) / (2.0 * length)};
  s.validate();
  return s;
}

Eigen::MatrixXd dps_basis(const SubspaceSpec& spec) {
  spec.validate();
  const int q = spec.length;
  // Commuting tridiagonal matrix of the Slepian concentration problem.
  Eigen::VectorXd diag(q);
  Eigen::VectorXd off(std::max(q - 1, 0));
  const double c = std::cos(2.0 * std::numbers::pi * spec.half_bandwidth);
  for (int k = 0; k < q; ++k) {
    const double t = (q - 1 - 2.0 * k) / 2.0;
    diag[k] = t * t * c;
  }
  for (int k = 1; k < q; ++k) off[k - 1] = k * (q - k) / 2.0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw std::runtime_error("DPS eigensolver failed");

  // Eigen sorts ascending; the most concentrated sequences come last.
  Eigen::MatrixXd basis(q, spec.size);
  for (int j = 0; j < spec.size; ++j) {
    Eigen::VectorXd v = solver.eigenvectors().col(q - 1 - j);
    v.normalize();
    // even sequences: positive sum; odd sequences: positive first lobe
    double moment = 0.0;
    for (int k = 0; k < q; ++k) moment += (j % 2 == 0 ? 1.0 : (q - 1 - 2.0 * k)) * v[k];
    if (moment < 0.0) v = -v;
    basis.col(j) = v;
  }
  return basis;
}

double sample_interval_for_bandwidth(double half_bandwidth, double bandwidth_hz) {
  if (!(half_bandwidth > 0.0) || !(bandwidth_hz > 0.0))
    throw DomainError("bandwidths must be positive");
  return half_bandwidth / bandwidth_hz;
}

Eigen::VectorXd gaussian_derivative_pulse(double fc_hz, int length, double dt) {
  if (!(fc_hz > 0.0)) throw DomainError("centre frequency must be positive");
  if (length < 1) throw DomainError("pulse length must be >= 1");
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  const double s = 1.0 / (2.0 * std::numbers::pi * fc_hz);
  const double t0 = (length - 1) * dt / 2.0;
  Eigen::VectorXd h(length);
  for (int q = 0; q < length; ++q) {
    const double t = q * dt - t0;
    h[q] = -t * std::exp(-t * t / (2.0 * s * s));
  }
  const double norm = h.norm();
  if (norm > 0.0) h /= norm;
  return h;
}

PulseProjection project_pulse(const Eigen::VectorXd& h, const Eigen::MatrixXd& basis) {
  if (h.size() != basis.rows()) throw DimensionError("pulse length does not match basis rows");
  PulseProjection p;
  p.gamma = basis.transpose() * h;
  p.residual_energy = (h - basis * p.gamma).squaredNorm();
  return p;
}

double band_energy_fraction(const Eigen::VectorXd& h, double half_bandwidth, int samples) {
  // Midpoint rule over f in [-1/2, 1/2).
  double total = 0.0;
  double inside = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double f = -0.5 + (i + 0.5) / samples;
    std::complex<double> acc{0.0, 0.0};
    for (Eigen::Index q = 0; q < h.size(); ++q)
      acc += h[q] * std::polar(1.0, -2.0 * std::numbers::pi * f * static_cast<double>(q));
    const double p = std::norm(acc);
    total += p;
    if (std::abs(f) <= half_bandwidth) inside += p;
  }
  return total > 0.0 ? inside / total : 0.0;
}

}  // namespace uwb
