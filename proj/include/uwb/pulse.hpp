#pragma once

// Pulse subspace (discrete prolate spheroidal sequences) and ground-truth
// waveforms used to simulate measurements.

#include <Eigen/Dense>

namespace uwb {

struct SubspaceSpec {
  int length = 23;            // Q
  int size = 8;               // L
  double half_bandwidth = 0;  // W in cycles/sample, 0 < W < 0.5

  void validate() const;
  /// W = L / (2Q): the first L sequences are the well-concentrated ones.
  static SubspaceSpec with_default_bandwidth(int length, int size);
};

/// Q x L matrix whose columns are the first L Slepian sequences, ordered by
/// descending concentration. Even-order columns have a positive sum, odd-order
/// columns a positive first half.
Eigen::MatrixXd dps_basis(const SubspaceSpec& spec);

/// Sample interval that maps a normalized half-bandwidth onto an analog
/// bandwidth in Hz: dt = W / bandwidth.
double sample_interval_for_bandwidth(double half_bandwidth, double bandwidth_hz);

/// Unit-energy first derivative of a Gaussian whose spectrum peaks at fc,
/// centred in the Q-sample window.
Eigen::VectorXd gaussian_derivative_pulse(double fc_hz, int length, double dt);

struct PulseProjection {
  Eigen::VectorXd gamma;
  double residual_energy = 0.0;  // ||h - A gamma||^2
};

PulseProjection project_pulse(const Eigen::VectorXd& h, const Eigen::MatrixXd& basis);

/// Fraction of a sequence's energy inside |f| <= W, by numerical integration
/// of its discrete-time Fourier transform.
double band_energy_fraction(const Eigen::VectorXd& h, double half_bandwidth, int samples = 4096);

}  // namespace uwb
