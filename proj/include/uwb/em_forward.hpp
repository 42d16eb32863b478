#pragma once

// Plane-wave reflectivity of a stratified lossy medium at normal incidence,
// its parameter Jacobian, and synthesis of blind radar measurements.

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace uwb {

using Complex = std::complex<double>;

namespace constants {
/// Vacuum permeability, H/m.
inline constexpr double kMu0 = 4.0e-7 * std::numbers::pi;
/// Vacuum permittivity, F/m.
inline constexpr double kEps0 = 8.8541878128e-12;
}  // namespace constants

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Per-layer unknowns of an M-layer structure plus the known first medium.
///
/// d[0] is the standoff between the transmitter and the first interface;
/// d[i] (1 <= i < M) is the thickness of layer i. Layer M is semi-infinite.
struct LayerProfile {
  std::vector<double> eps;
  std::vector<double> sigma;
  std::vector<double> d;
  double eps_medium = 1.0;
  double sigma_medium = 0.0;

  std::size_t layers() const { return eps.size(); }
  std::size_t parameter_count() const { return 3 * eps.size(); }

  /// Throws DomainError when lengths disagree or any entry is not finite and
  /// strictly positive (the first-medium conductivity may be zero).
  void validate() const;

  /// Packs [eps_1..eps_M, sigma_1..sigma_M, d_0..d_{M-1}].
  Eigen::VectorXd theta() const;
  static LayerProfile from_theta(const Eigen::VectorXd& theta,
                                 double eps_medium = 1.0,
                                 double sigma_medium = 0.0);
};

/// Index helpers into the packed parameter vector. Layers are 1-based.
inline std::size_t eps_index(std::size_t /*layers*/, std::size_t layer) { return layer - 1; }
inline std::size_t sigma_index(std::size_t layers, std::size_t layer) { return layers + layer - 1; }
inline std::size_t thickness_index(std::size_t layers, std::size_t i) { return 2 * layers + i; }

/// "eps1", "sigma1", "d0", ...
std::vector<std::string> parameter_names(std::size_t layers);

struct FrequencyGrid {
  std::vector<double> omega;  // rad/s, strictly increasing, > 0
  double dt = 0.0;            // pulse sample interval, s
  int pulse_length = 0;       // Q

  std::size_t size() const { return omega.size(); }
  void validate() const;

  /// omega_n = 2*pi*n*df, n = 1..N, df = 1/(2*N*dt).
  static FrequencyGrid regular(int n_freq, double dt, int pulse_length);
};

struct LayerWaveParams {
  Complex eta;
  Complex r;
  double alpha = 0.0;
  double beta = 0.0;
  double zeta = 1.0;
};

/// Principal root of j*omega*mu0 / (sigma + j*omega*eps0*eps).
Complex intrinsic_impedance(double eps, double sigma, double omega);

/// Complex propagation constant alpha + j*beta of a medium.
Complex propagation_constant(double eps, double sigma, double omega);

/// Wave quantities for medium `layer` (1..M) and the interface above it.
LayerWaveParams layer_wave_params(const LayerProfile& profile, std::size_t layer, double omega);

/// X_0(omega_n) for every grid frequency.
Eigen::VectorXcd reflectivity(const LayerProfile& profile, const FrequencyGrid& grid);

struct ReflectivityWithGradient {
  Eigen::VectorXcd x;
  Eigen::MatrixXcd jac;  // N x 3M, d X_0(omega_n) / d theta_k
};

ReflectivityWithGradient reflectivity_gradient(const LayerProfile& profile,
                                               const FrequencyGrid& grid);

/// Reusable evaluator bound to one grid and first medium. Holds only
/// per-frequency constants, so a const instance may be shared across threads.
class ReflectivityModel {
 public:
  ReflectivityModel(FrequencyGrid grid, std::size_t layers, double eps_medium = 1.0,
                    double sigma_medium = 0.0);

  const FrequencyGrid& grid() const { return grid_; }
  std::size_t layers() const { return layers_; }
  std::size_t parameter_count() const { return 3 * layers_; }
  double eps_medium() const { return eps_medium_; }
  double sigma_medium() const { return sigma_medium_; }

  /// theta in physical units; out is resized to N.
  void evaluate(const Eigen::VectorXd& theta, Eigen::VectorXcd& out) const;
  void evaluate(const Eigen::VectorXd& theta, Eigen::VectorXcd& out,
                Eigen::MatrixXcd& jac) const;

 private:
  FrequencyGrid grid_;
  std::size_t layers_;
  double eps_medium_;
  double sigma_medium_;
  std::vector<double> omega_mu0_;       // omega * mu0
  std::vector<double> omega2_mu0eps0_;  // omega^2 * mu0 * eps0
  std::vector<Complex> kappa_medium_;
};

/// N x Q matrix with entries exp(-j * omega_n * q * dt).
Eigen::MatrixXcd partial_dft(const FrequencyGrid& grid);

struct Measurement {
  FrequencyGrid grid;
  Eigen::VectorXcd y;
};

/// Mean per-sample power (1/N) sum |s_n|^2.
double signal_power(const Eigen::VectorXcd& s);
/// sigma_v^2 giving the requested SNR in dB for the noise-free signal s.
double noise_variance_for_snr(const Eigen::VectorXcd& s, double snr_db);
double snr_db(const Eigen::VectorXcd& s, double sigma_v2);

/// Noise-free signal diag(F_Q A gamma) x.
Eigen::VectorXcd noise_free_signal(const LayerProfile& profile, const Eigen::VectorXd& gamma,
                                   const Eigen::MatrixXd& subspace, const FrequencyGrid& grid);

/// y = diag(F_Q A gamma) x + v with v circular complex Gaussian of variance
/// sigma_v2 per sample.
Measurement synthesize_measurement(const LayerProfile& profile, const Eigen::VectorXd& gamma,
                                   const Eigen::MatrixXd& subspace, const FrequencyGrid& grid,
                                   double sigma_v2, std::uint64_t seed);

}  // namespace uwb
