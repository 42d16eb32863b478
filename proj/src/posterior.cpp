#include "uwb/posterior.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

namespace uwb {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

ParameterBox ParameterBox::uniform_ranges(std::size_t layers, double eps_min, double eps_max,
                                          double sigma_min, double sigma_max, double d_min,
                                          double d_max) {
  const auto m = static_cast<Eigen::Index>(layers);
  ParameterBox box;
  box.lower.resize(3 * m);
  box.upper.resize(3 * m);
  box.lower.segment(0, m).setConstant(eps_min);
  box.upper.segment(0, m).setConstant(eps_max);
  box.lower.segment(m, m).setConstant(sigma_min);
  box.upper.segment(m, m).setConstant(sigma_max);
  box.lower.segment(2 * m, m).setConstant(d_min);
  box.upper.segment(2 * m, m).setConstant(d_max);
  box.validate();
  return box;
}

void ParameterBox::validate() const {
  if (lower.size() != upper.size() || lower.size() == 0)
    throw DimensionError("box bounds must be nonempty and of equal length");
  for (Eigen::Index i = 0; i < lower.size(); ++i)
    if (!(std::isfinite(lower[i]) && std::isfinite(upper[i]) && lower[i] < upper[i]))
      throw DomainError("box requires finite lower < upper componentwise");
}

Eigen::VectorXd ParameterBox::normalize(const Eigen::VectorXd& theta) const {
  return (theta - lower).cwiseQuotient(upper - lower);
}

Eigen::VectorXd ParameterBox::denormalize(const Eigen::VectorXd& theta_bar) const {
  return lower + theta_bar.cwiseProduct(upper - lower);
}

bool ParameterBox::contains_strict(const Eigen::VectorXd& theta) const {
  if (theta.size() != lower.size()) return false;
  for (Eigen::Index i = 0; i < theta.size(); ++i)
    if (!(theta[i] > lower[i] && theta[i] < upper[i])) return false;
  return true;
}

BetaPriorSpec BetaPriorSpec::flat(Eigen::Index n) {
  return {Eigen::VectorXd::Constant(n, 0.5), Eigen::VectorXd::Zero(n)};
}

void BetaPriorSpec::validate(Eigen::Index n) const {
  if (mode.size() != n || concentration.size() != n)
    throw DimensionError("prior spec length does not match parameter count");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(mode[i] >= 0.0 && mode[i] <= 1.0)) throw DomainError("prior mode must lie in [0, 1]");
    if (!(concentration[i] >= 0.0 && std::isfinite(concentration[i])))
      throw DomainError("prior concentration must be >= 0");
  }
}

double beta_log_density(double x, double a, double b) {
  if (!(x > 0.0 && x < 1.0)) return kNegInf;
  double v = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  if (a != 1.0) v += (a - 1.0) * std::log(x);
  if (b != 1.0) v += (b - 1.0) * std::log1p(-x);
  return v;
}

double log_prior_theta(const Eigen::VectorXd& theta, const ParameterBox& box,
                       const BetaPriorSpec& spec) {
  if (!box.contains_strict(theta)) return kNegInf;
  const Eigen::VectorXd bar = box.normalize(theta);
  const Eigen::VectorXd w = box.width();
  double v = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i)
    v += beta_log_density(bar[i], spec.a(i), spec.b(i)) - std::log(w[i]);
  return v;
}

double log_prior_gamma(const Eigen::VectorXd& gamma, double sigma_gamma2) {
  const double n = static_cast<double>(gamma.size());
  return -0.5 * gamma.squaredNorm() / sigma_gamma2 -
         0.5 * n * std::log(2.0 * std::numbers::pi * sigma_gamma2);
}

double log_inverse_gamma(double x, double shape, double scale) {
  if (!(x > 0.0)) return kNegInf;
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

Eigen::MatrixXd GaussianConditional::covariance() const {
  return precision_factor.solve(Eigen::MatrixXd::Identity(mean.size(), mean.size()));
}

Eigen::VectorXd GaussianConditional::draw(Rng& rng) const {
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = standard_normal(rng);
  // precision = L L^T, so L^{-T} z has covariance precision^{-1}.
  return mean + precision_factor.matrixU().solve(z);
}

PosteriorModel::PosteriorModel(Measurement measurement, std::size_t layers, double eps_medium,
                               double sigma_medium, ParameterBox box, BetaPriorSpec theta_prior,
                               PulsePriorSpec pulse_prior, NoisePriorSpec noise_prior)
    : measurement_(std::move(measurement)),
      forward_(measurement_.grid, layers, eps_medium, sigma_medium),
      box_(std::move(box)),
      theta_prior_(std::move(theta_prior)),
      pulse_prior_(std::move(pulse_prior)),
      noise_prior_(noise_prior) {
  if (measurement_.y.size() != static_cast<Eigen::Index>(measurement_.grid.size()))
    throw DimensionError("measurement length does not match grid");
  box_.validate();
  if (box_.size() != static_cast<Eigen::Index>(3 * layers))
    throw DimensionError("box size must be 3M");
  theta_prior_.validate(box_.size());
  if (!(pulse_prior_.sigma_gamma2 > 0.0)) throw DomainError("sigma_gamma2 must be positive");
  if (pulse_prior_.basis.rows() != measurement_.grid.pulse_length)
    throw DimensionError("pulse basis rows must equal Q");
  if (!(noise_prior_.alpha_v > 0.0 && noise_prior_.beta_v > 0.0))
    throw DomainError("inverse-gamma prior parameters must be positive");
  pulse_map_ = partial_dft(measurement_.grid) * pulse_prior_.basis.cast<Complex>();
}

Eigen::VectorXcd PosteriorModel::reflectivity(const Eigen::VectorXd& theta) const {
  Eigen::VectorXcd x;
  forward_.evaluate(theta, x);
  return x;
}

Eigen::VectorXcd PosteriorModel::pulse_spectrum(const Eigen::VectorXd& gamma) const {
  return pulse_map_ * gamma.cast<Complex>();
}

double PosteriorModel::residual_norm2(const Eigen::VectorXcd& x,
                                      const Eigen::VectorXcd& spectrum) const {
  return (measurement_.y - spectrum.cwiseProduct(x)).squaredNorm();
}

double PosteriorModel::residual_norm2(const Eigen::VectorXd& theta,
                                      const Eigen::VectorXd& gamma) const {
  return residual_norm2(reflectivity(theta), pulse_spectrum(gamma));
}

double PosteriorModel::log_likelihood_from_residual(double r2, double sigma_v2) const {
  const double n = static_cast<double>(data_size());
  return -n * std::log(std::numbers::pi * sigma_v2) - r2 / sigma_v2;
}

double PosteriorModel::log_likelihood(const ModelState& state) const {
  return log_likelihood_from_residual(residual_norm2(state.theta, state.gamma), state.sigma_v2);
}

double PosteriorModel::log_prior_theta(const Eigen::VectorXd& theta) const {
  return uwb::log_prior_theta(theta, box_, theta_prior_);
}

double PosteriorModel::log_prior_gamma(const Eigen::VectorXd& gamma) const {
  return uwb::log_prior_gamma(gamma, pulse_prior_.sigma_gamma2);
}

double PosteriorModel::log_prior_noise(double sigma_v2) const {
  return log_inverse_gamma(sigma_v2, noise_prior_.alpha_v, noise_prior_.beta_v);
}

double PosteriorModel::log_posterior(const ModelState& state, double temperature) const {
  const double lp_theta = log_prior_theta(state.theta);
  if (!std::isfinite(lp_theta) || !(state.sigma_v2 > 0.0)) return kNegInf;
  return log_likelihood(state) / temperature + lp_theta + log_prior_gamma(state.gamma) +
         log_prior_noise(state.sigma_v2);
}

InverseGammaParams PosteriorModel::noise_conditional(double r2, double temperature) const {
  return {noise_prior_.alpha_v + static_cast<double>(data_size()) / temperature,
          noise_prior_.beta_v + r2 / temperature};
}

double PosteriorModel::sample_noise(double r2, double temperature, Rng& rng) const {
  const InverseGammaParams p = noise_conditional(r2, temperature);
  double g = 0.0;
  while (!(g > 0.0)) g = gamma_draw(rng, p.shape);
  return p.scale / g;
}

GaussianConditional PosteriorModel::gamma_conditional(const Eigen::VectorXcd& x, double sigma_v2,
                                                      double temperature) const {
  const double c = 2.0 / (temperature * sigma_v2);
  // C = diag(x) B; Re{C^H C} = Re{B^H diag(|x|^2) B}, Re{C^H y} = Re{B^H (conj(x) y)}.
  const Eigen::MatrixXcd weighted = x.cwiseAbs2().cast<Complex>().asDiagonal() * pulse_map_;
  GaussianConditional g;
  g.precision = c * (pulse_map_.adjoint() * weighted).real();
  g.precision.diagonal().array() += 1.0 / pulse_prior_.sigma_gamma2;
  g.precision = 0.5 * (g.precision + g.precision.transpose()).eval();
  const Eigen::VectorXd rhs =
      c * (pulse_map_.adjoint() * x.conjugate().cwiseProduct(measurement_.y)).real();
  g.precision_factor.compute(g.precision);
  if (g.precision_factor.info() != Eigen::Success)
    throw std::runtime_error("pulse conditional precision is not positive definite");
  g.mean = g.precision_factor.solve(rhs);
  return g;
}

ThetaConditional::ThetaConditional(const PosteriorModel& model, const Eigen::VectorXd& gamma,
                                   double sigma_v2, double temperature, bool prior_in_potential)
    : model_(&model),
      spectrum_(model.pulse_spectrum(gamma)),
      scale_(1.0 / (temperature * sigma_v2)),
      prior_in_potential_(prior_in_potential) {}

double ThetaConditional::log_prior_normalized(const Eigen::VectorXd& theta_bar) const {
  const BetaPriorSpec& p = model_->theta_prior();
  double v = 0.0;
  for (Eigen::Index i = 0; i < theta_bar.size(); ++i) {
    const double t = theta_bar[i];
    if (!(t > 0.0 && t < 1.0)) return kNegInf;
    const double a = p.a(i);
    const double b = p.b(i);
    if (a != 1.0) v += (a - 1.0) * std::log(t);
    if (b != 1.0) v += (b - 1.0) * std::log1p(-t);
  }
  return v;
}

double ThetaConditional::log_density(const Eigen::VectorXd& theta_bar) const {
  Eigen::VectorXcd x;
  return log_density(theta_bar, x);
}

double ThetaConditional::log_density(const Eigen::VectorXd& theta_bar, Eigen::VectorXcd& x) const {
  const double lp = log_prior_normalized(theta_bar);
  if (!std::isfinite(lp)) return kNegInf;
  model_->forward().evaluate(model_->box().denormalize(theta_bar), x);
  return lp - scale_ * model_->residual_norm2(x, spectrum_);
}

double ThetaConditional::potential(const Eigen::VectorXd& theta_bar) const {
  const double lp = prior_in_potential_ ? log_prior_normalized(theta_bar) : 0.0;
  for (Eigen::Index i = 0; i < theta_bar.size(); ++i)
    if (!(theta_bar[i] > 0.0 && theta_bar[i] < 1.0))
      return std::numeric_limits<double>::infinity();
  Eigen::VectorXcd x;
  model_->forward().evaluate(model_->box().denormalize(theta_bar), x);
  return scale_ * model_->residual_norm2(x, spectrum_) - lp;
}

double ThetaConditional::potential_and_gradient(const Eigen::VectorXd& theta_bar,
                                                Eigen::VectorXd& grad) const {
  const Eigen::Index dim = theta_bar.size();
  grad.resize(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (!(theta_bar[i] > 0.0 && theta_bar[i] < 1.0)) {
      grad.setConstant(std::numeric_limits<double>::quiet_NaN());
      return std::numeric_limits<double>::infinity();
    }
  }
  Eigen::VectorXcd x;
  Eigen::MatrixXcd jac;
  model_->forward().evaluate(model_->box().denormalize(theta_bar), x, jac);
  const Eigen::VectorXcd residual = model_->y() - spectrum_.cwiseProduct(x);
  // dU/dtheta = -2/(T s2) Re{ r^H D dx/dtheta }, D = diag(B gamma).
  const Eigen::VectorXcd weights = residual.conjugate().cwiseProduct(spectrum_);
  const Eigen::VectorXd dtheta = -2.0 * scale_ * (jac.transpose() * weights).real();
  grad = dtheta.cwiseProduct(model_->box().width());
  double u = scale_ * residual.squaredNorm();
  if (prior_in_potential_) {
    const BetaPriorSpec& p = model_->theta_prior();
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double t = theta_bar[i];
      const double a = p.a(i);
      const double b = p.b(i);
      if (a != 1.0) {
        u -= (a - 1.0) * std::log(t);
        grad[i] -= (a - 1.0) / t;
      }
      if (b != 1.0) {
        u -= (b - 1.0) * std::log1p(-t);
        grad[i] += (b - 1.0) / (1.0 - t);
      }
    }
  }
  return u;
}

}  // namespace uwb
