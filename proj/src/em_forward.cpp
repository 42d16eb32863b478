#include "uwb/em_forward.hpp"

#include <cmath>
#include <utility>

#include "uwb/rng.hpp"

namespace uwb {

using constants::kEps0;
using constants::kMu0;

namespace {

constexpr Complex kJ{0.0, 1.0};

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void check_medium(double eps, double sigma, double omega) {
  if (!positive_finite(omega)) throw DomainError("angular frequency must be positive");
  if (!positive_finite(eps)) throw DomainError("relative permittivity must be positive");
  if (!(std::isfinite(sigma) && sigma >= 0.0)) throw DomainError("conductivity must be >= 0");
}

// (k_prev - k) / (k_prev + k) equals (eta - eta_prev) / (eta + eta_prev)
// because eta = j omega mu0 / k.
Complex interface_coefficient(Complex k_prev, Complex k) { return (k_prev - k) / (k_prev + k); }

Complex mobius(Complex r, Complex z) { return (r + z) / (1.0 + r * z); }

}  // namespace

void LayerProfile::validate() const {
  const std::size_t m = eps.size();
  if (m == 0) throw DomainError("profile needs at least one layer");
  if (sigma.size() != m || d.size() != m)
    throw DomainError("eps, sigma and d must all have M entries");
  for (std::size_t i = 0; i < m; ++i) {
    if (!positive_finite(eps[i]) || !positive_finite(sigma[i]) || !positive_finite(d[i]))
      throw DomainError("profile entries must be finite and strictly positive");
  }
  if (!positive_finite(eps_medium) || !(std::isfinite(sigma_medium) && sigma_medium >= 0.0))
    throw DomainError("invalid first-medium constants");
}

Eigen::VectorXd LayerProfile::theta() const {
  const std::size_t m = layers();
  Eigen::VectorXd t(3 * m);
  for (std::size_t i = 0; i < m; ++i) {
    t[i] = eps[i];
    t[m + i] = sigma[i];
    t[2 * m + i] = d[i];
  }
  return t;
}

LayerProfile LayerProfile::from_theta(const Eigen::VectorXd& theta, double eps_medium,
                                      double sigma_medium) {
  if (theta.size() == 0 || theta.size() % 3 != 0)
    throw DimensionError("theta length must be a positive multiple of 3");
  const std::size_t m = static_cast<std::size_t>(theta.size()) / 3;
  LayerProfile p;
  p.eps.resize(m);
  p.sigma.resize(m);
  p.d.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    p.eps[i] = theta[i];
    p.sigma[i] = theta[m + i];
    p.d[i] = theta[2 * m + i];
  }
  p.eps_medium = eps_medium;
  p.sigma_medium = sigma_medium;
  return p;
}

std::vector<std::string> parameter_names(std::size_t layers) {
  std::vector<std::string> names;
  names.reserve(3 * layers);
  for (std::size_t i = 1; i <= layers; ++i) names.push_back("eps" + std::to_string(i));
  for (std::size_t i = 1; i <= layers; ++i) names.push_back("sigma" + std::to_string(i));
  for (std::size_t i = 0; i < layers; ++i) names.push_back("d" + std::to_string(i));
  return names;
}

void FrequencyGrid::validate() const {
  if (omega.empty()) throw DomainError("frequency grid is empty");
  if (!positive_finite(dt)) throw DomainError("dt must be positive");
  if (pulse_length < 1) throw DomainError("pulse length must be >= 1");
  for (std::size_t n = 0; n < omega.size(); ++n) {
    if (!positive_finite(omega[n])) throw DomainError("grid frequencies must be positive");
    if (n > 0 && !(omega[n] > omega[n - 1]))
      throw DomainError("grid frequencies must be strictly increasing");
  }
}

FrequencyGrid FrequencyGrid::regular(int n_freq, double dt, int pulse_length) {
  if (n_freq < 1) throw DomainError("grid needs at least one frequency");
  if (!positive_finite(dt)) throw DomainError("dt must be positive");
  FrequencyGrid g;
  g.dt = dt;
  g.pulse_length = pulse_length;
  const double df = 1.0 / (2.0 * n_freq * dt);
  g.omega.resize(static_cast<std::size_t>(n_freq));
  for (int n = 1; n <= n_freq; ++n)
    g.omega[static_cast<std::size_t>(n - 1)] = 2.0 * std::numbers::pi * n * df;
  g.validate();
  return g;
}

Complex intrinsic_impedance(double eps, double sigma, double omega) {
  check_medium(eps, sigma, omega);
  return std::sqrt(kJ * omega * kMu0 / Complex(sigma, omega * kEps0 * eps));
}

Complex propagation_constant(double eps, double sigma, double omega) {
  check_medium(eps, sigma, omega);
  return std::sqrt(Complex(-omega * omega * kMu0 * kEps0 * eps, omega * kMu0 * sigma));
}

LayerWaveParams layer_wave_params(const LayerProfile& profile, std::size_t layer, double omega) {
  const std::size_t m = profile.layers();
  if (layer < 1 || layer > m) throw DomainError("layer index out of range");
  const double eps = profile.eps[layer - 1];
  const double sigma = profile.sigma[layer - 1];
  const double eps_prev = layer == 1 ? profile.eps_medium : profile.eps[layer - 2];
  const double sigma_prev = layer == 1 ? profile.sigma_medium : profile.sigma[layer - 2];

  LayerWaveParams w;
  w.eta = intrinsic_impedance(eps, sigma, omega);
  const Complex eta_prev = intrinsic_impedance(eps_prev, sigma_prev, omega);
  w.r = (w.eta - eta_prev) / (w.eta + eta_prev);
  const double loss = sigma / (omega * kEps0 * eps);
  w.zeta = std::sqrt(1.0 + loss * loss);
  const double base = kMu0 * kEps0 * eps;
  w.alpha = omega * std::sqrt(base * (w.zeta - 1.0) / 2.0);
  w.beta = omega * std::sqrt(base * (w.zeta + 1.0) / 2.0);
  return w;
}

ReflectivityModel::ReflectivityModel(FrequencyGrid grid, std::size_t layers, double eps_medium,
                                     double sigma_medium)
    : grid_(std::move(grid)),
      layers_(layers),
      eps_medium_(eps_medium),
      sigma_medium_(sigma_medium) {
  grid_.validate();
  if (layers_ == 0) throw DomainError("profile needs at least one layer");
  if (!positive_finite(eps_medium_) || !(std::isfinite(sigma_medium_) && sigma_medium_ >= 0.0))
    throw DomainError("invalid first-medium constants");
  const std::size_t n = grid_.size();
  omega_mu0_.resize(n);
  omega2_mu0eps0_.resize(n);
  kappa_medium_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = grid_.omega[i];
    omega_mu0_[i] = w * kMu0;
    omega2_mu0eps0_[i] = w * w * kMu0 * kEps0;
    kappa_medium_[i] = propagation_constant(eps_medium_, sigma_medium_, w);
  }
}

void ReflectivityModel::evaluate(const Eigen::VectorXd& theta, Eigen::VectorXcd& out) const {
  const std::size_t m = layers_;
  if (static_cast<std::size_t>(theta.size()) != 3 * m)
    throw DimensionError("theta length does not match layer count");
  const std::size_t n_freq = grid_.size();
  out.resize(static_cast<Eigen::Index>(n_freq));

  const double* eps = theta.data();
  const double* sigma = theta.data() + m;
  const double* d = theta.data() + 2 * m;

  // kappa[i] for media 0..M, reused across the backward recursion.
  std::vector<Complex> kappa(m + 1);
  for (std::size_t n = 0; n < n_freq; ++n) {
    kappa[0] = kappa_medium_[n];
    for (std::size_t i = 1; i <= m; ++i)
      kappa[i] = std::sqrt(Complex(-omega2_mu0eps0_[n] * eps[i - 1], omega_mu0_[n] * sigma[i - 1]));

    Complex x = interface_coefficient(kappa[m - 1], kappa[m]);
    for (std::size_t i = m - 1; i >= 1; --i) {
      const Complex prop = std::exp(-2.0 * d[i] * kappa[i]);
      x = mobius(interface_coefficient(kappa[i - 1], kappa[i]), x * prop);
    }
    out[static_cast<Eigen::Index>(n)] = x * std::exp(-2.0 * d[0] * kappa[0]);
  }
}

void ReflectivityModel::evaluate(const Eigen::VectorXd& theta, Eigen::VectorXcd& out,
                                 Eigen::MatrixXcd& jac) const {
  const std::size_t m = layers_;
  if (static_cast<std::size_t>(theta.size()) != 3 * m)
    throw DimensionError("theta length does not match layer count");
  const std::size_t n_freq = grid_.size();
  out.resize(static_cast<Eigen::Index>(n_freq));
  jac.resize(static_cast<Eigen::Index>(n_freq), static_cast<Eigen::Index>(3 * m));

  const double* eps = theta.data();
  const double* sigma = theta.data() + m;
  const double* d = theta.data() + 2 * m;

  std::vector<Complex> kappa(m + 1), r(m + 1), prop(m), x(m + 1);
  std::vector<Complex> dx_dr(m + 1), dx_dz(m + 1), sens(m + 1), dx0_dprop(m), dx0_dr(m + 1);

  for (std::size_t n = 0; n < n_freq; ++n) {
    const auto row = static_cast<Eigen::Index>(n);
    kappa[0] = kappa_medium_[n];
    for (std::size_t i = 1; i <= m; ++i) {
      kappa[i] = std::sqrt(Complex(-omega2_mu0eps0_[n] * eps[i - 1], omega_mu0_[n] * sigma[i - 1]));
      r[i] = interface_coefficient(kappa[i - 1], kappa[i]);
    }
    for (std::size_t i = 0; i < m; ++i) prop[i] = std::exp(-2.0 * d[i] * kappa[i]);

    // Forward pass: X_M = r_M, X_i = f(r_i, X_{i+1} P_i).
    x[m] = r[m];
    for (std::size_t i = m - 1; i >= 1; --i) {
      const Complex z = x[i + 1] * prop[i];
      const Complex den = 1.0 + r[i] * z;
      const Complex den2 = den * den;
      x[i] = (r[i] + z) / den;
      dx_dr[i] = (1.0 - z * z) / den2;
      dx_dz[i] = (1.0 - r[i] * r[i]) / den2;
    }
    out[row] = x[1] * prop[0];

    // sens[i] = dX_0 / dX_i, propagated down the stack.
    sens[1] = prop[0];
    for (std::size_t i = 1; i < m; ++i) sens[i + 1] = sens[i] * dx_dz[i] * prop[i];

    for (std::size_t i = 1; i < m; ++i) dx0_dr[i] = sens[i] * dx_dr[i];
    dx0_dr[m] = sens[m];
    dx0_dprop[0] = x[1];
    for (std::size_t i = 1; i < m; ++i) dx0_dprop[i] = sens[i] * dx_dz[i] * x[i + 1];

    for (std::size_t i = 1; i <= m; ++i) {
      const Complex sum = kappa[i - 1] + kappa[i];
      const Complex sum2 = sum * sum;
      // Medium i enters r_i, r_{i+1} and (for i < M) its own propagation factor.
      Complex dx0_dkappa = dx0_dr[i] * (-2.0 * kappa[i - 1] / sum2);
      if (i < m) {
        const Complex next = kappa[i] + kappa[i + 1];
        dx0_dkappa += dx0_dr[i + 1] * (2.0 * kappa[i + 1] / (next * next));
        dx0_dkappa += dx0_dprop[i] * (-2.0 * d[i] * prop[i]);
      }
      const Complex dkappa_deps = -omega2_mu0eps0_[n] / (2.0 * kappa[i]);
      const Complex dkappa_dsigma = kJ * omega_mu0_[n] / (2.0 * kappa[i]);
      jac(row, static_cast<Eigen::Index>(i - 1)) = dx0_dkappa * dkappa_deps;
      jac(row, static_cast<Eigen::Index>(m + i - 1)) = dx0_dkappa * dkappa_dsigma;
    }
    for (std::size_t i = 0; i < m; ++i)
      jac(row, static_cast<Eigen::Index>(2 * m + i)) = dx0_dprop[i] * (-2.0 * kappa[i] * prop[i]);
  }
}

Eigen::VectorXcd reflectivity(const LayerProfile& profile, const FrequencyGrid& grid) {
  profile.validate();
  const ReflectivityModel model(grid, profile.layers(), profile.eps_medium, profile.sigma_medium);
  Eigen::VectorXcd x;
  model.evaluate(profile.theta(), x);
  return x;
}

ReflectivityWithGradient reflectivity_gradient(const LayerProfile& profile,
                                               const FrequencyGrid& grid) {
  profile.validate();
  const ReflectivityModel model(grid, profile.layers(), profile.eps_medium, profile.sigma_medium);
  ReflectivityWithGradient out;
  model.evaluate(profile.theta(), out.x, out.jac);
  return out;
}

Eigen::MatrixXcd partial_dft(const FrequencyGrid& grid) {
  grid.validate();
  const auto n = static_cast<Eigen::Index>(grid.size());
  const Eigen::Index q = grid.pulse_length;
  Eigen::MatrixXcd f(n, q);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < q; ++k)
      f(i, k) = std::polar(1.0, -grid.omega[static_cast<std::size_t>(i)] * static_cast<double>(k) * grid.dt);
  return f;
}

double signal_power(const Eigen::VectorXcd& s) {
  if (s.size() == 0) return 0.0;
  return s.squaredNorm() / static_cast<double>(s.size());
}

double noise_variance_for_snr(const Eigen::VectorXcd& s, double snr_db) {
  return signal_power(s) / std::pow(10.0, snr_db / 10.0);
}

double snr_db(const Eigen::VectorXcd& s, double sigma_v2) {
  return 10.0 * std::log10(signal_power(s) / sigma_v2);
}

Eigen::VectorXcd noise_free_signal(const LayerProfile& profile, const Eigen::VectorXd& gamma,
                                   const Eigen::MatrixXd& subspace, const FrequencyGrid& grid) {
  if (subspace.rows() != grid.pulse_length)
    throw DimensionError("subspace rows must equal the pulse length Q");
  if (subspace.cols() != gamma.size())
    throw DimensionError("subspace columns must equal the coefficient count L");
  const Eigen::VectorXcd pulse_spectrum = partial_dft(grid) * (subspace * gamma).cast<Complex>();
  return pulse_spectrum.cwiseProduct(reflectivity(profile, grid));
}

Measurement synthesize_measurement(const LayerProfile& profile, const Eigen::VectorXd& gamma,
                                   const Eigen::MatrixXd& subspace, const FrequencyGrid& grid,
                                   double sigma_v2, std::uint64_t seed) {
  if (!(sigma_v2 >= 0.0)) throw DomainError("noise variance must be >= 0");
  Measurement m;
  m.grid = grid;
  m.y = noise_free_signal(profile, gamma, subspace, grid);
  if (sigma_v2 > 0.0) {
    Rng rng(seed);
    const double sd = std::sqrt(sigma_v2 / 2.0);
    for (Eigen::Index n = 0; n < m.y.size(); ++n) {
      const double re = standard_normal(rng);
      const double im = standard_normal(rng);
      m.y[n] += Complex(sd * re, sd * im);
    }
  }
  return m;
}

}  // namespace uwb
