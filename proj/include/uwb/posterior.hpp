#pragma once

// Priors, the (tempered) likelihood, the joint log-posterior and the two
// conjugate conditionals of the blind layered-medium model.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "uwb/em_forward.hpp"
#include "uwb/rng.hpp"

namespace uwb {

/// Axis-aligned bounds on theta and the map to the unit cube.
struct ParameterBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  /// Same eps/sigma/d ranges for every layer.
  static ParameterBox uniform_ranges(std::size_t layers, double eps_min, double eps_max,
                                     double sigma_min, double sigma_max, double d_min,
                                     double d_max);

  Eigen::Index size() const { return lower.size(); }
  Eigen::VectorXd width() const { return upper - lower; }
  void validate() const;

  Eigen::VectorXd normalize(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd denormalize(const Eigen::VectorXd& theta_bar) const;
  bool contains_strict(const Eigen::VectorXd& theta) const;
};

/// Beta priors on normalized parameters, parametrized by mode and
/// concentration: a = mode*kappa + 1, b = (1 - mode)*kappa + 1.
struct BetaPriorSpec {
  Eigen::VectorXd mode;
  Eigen::VectorXd concentration;

  static BetaPriorSpec flat(Eigen::Index n);
  void validate(Eigen::Index n) const;
  double a(Eigen::Index i) const { return mode[i] * concentration[i] + 1.0; }
  double b(Eigen::Index i) const { return (1.0 - mode[i]) * concentration[i] + 1.0; }
};

struct PulsePriorSpec {
  double sigma_gamma2 = 10.0;
  Eigen::MatrixXd basis;  // Q x L, orthonormal columns
};

struct NoisePriorSpec {
  double alpha_v = 1e-3;
  double beta_v = 1e-3;
};

struct ModelState {
  Eigen::VectorXd theta;  // physical units
  Eigen::VectorXd gamma;
  double sigma_v2 = 1.0;
};

/// log Beta(x; a, b) including the normalizer; -inf outside (0, 1).
double beta_log_density(double x, double a, double b);

/// Sum of Beta log-densities of the normalized components minus the log box
/// widths (density with respect to theta). -inf unless strictly inside.
double log_prior_theta(const Eigen::VectorXd& theta, const ParameterBox& box,
                       const BetaPriorSpec& spec);

double log_prior_gamma(const Eigen::VectorXd& gamma, double sigma_gamma2);
double log_inverse_gamma(double x, double shape, double scale);

struct InverseGammaParams {
  double shape = 0.0;
  double scale = 0.0;
};

struct GaussianConditional {
  Eigen::VectorXd mean;
  Eigen::MatrixXd precision;
  Eigen::LLT<Eigen::MatrixXd> precision_factor;

  Eigen::MatrixXd covariance() const;
  Eigen::VectorXd draw(Rng& rng) const;
};

class PosteriorModel {
 public:
  PosteriorModel(Measurement measurement, std::size_t layers, double eps_medium,
                 double sigma_medium, ParameterBox box, BetaPriorSpec theta_prior,
                 PulsePriorSpec pulse_prior, NoisePriorSpec noise_prior);

  const ReflectivityModel& forward() const { return forward_; }
  const Measurement& measurement() const { return measurement_; }
  const Eigen::VectorXcd& y() const { return measurement_.y; }
  const Eigen::MatrixXcd& pulse_map() const { return pulse_map_; }  // B = F_Q A
  const ParameterBox& box() const { return box_; }
  const BetaPriorSpec& theta_prior() const { return theta_prior_; }
  const PulsePriorSpec& pulse_prior() const { return pulse_prior_; }
  const NoisePriorSpec& noise_prior() const { return noise_prior_; }

  std::size_t layers() const { return forward_.layers(); }
  Eigen::Index theta_size() const { return static_cast<Eigen::Index>(forward_.parameter_count()); }
  Eigen::Index gamma_size() const { return pulse_map_.cols(); }
  Eigen::Index data_size() const { return measurement_.y.size(); }

  Eigen::VectorXcd reflectivity(const Eigen::VectorXd& theta) const;
  Eigen::VectorXcd pulse_spectrum(const Eigen::VectorXd& gamma) const;

  /// ||y - diag(B gamma) x||^2.
  double residual_norm2(const Eigen::VectorXcd& x, const Eigen::VectorXcd& pulse_spectrum) const;
  double residual_norm2(const Eigen::VectorXd& theta, const Eigen::VectorXd& gamma) const;

  double log_likelihood_from_residual(double residual_norm2, double sigma_v2) const;
  double log_likelihood(const ModelState& state) const;

  double log_prior_theta(const Eigen::VectorXd& theta) const;
  double log_prior_gamma(const Eigen::VectorXd& gamma) const;
  double log_prior_noise(double sigma_v2) const;

  /// (1/T) log p(y|.) + log p(theta) + log p(gamma) + log p(sigma_v2).
  double log_posterior(const ModelState& state, double temperature = 1.0) const;

  InverseGammaParams noise_conditional(double residual_norm2, double temperature) const;
  double sample_noise(double residual_norm2, double temperature, Rng& rng) const;

  GaussianConditional gamma_conditional(const Eigen::VectorXcd& x, double sigma_v2,
                                        double temperature) const;

 private:
  Measurement measurement_;
  ReflectivityModel forward_;
  ParameterBox box_;
  BetaPriorSpec theta_prior_;
  PulsePriorSpec pulse_prior_;
  NoisePriorSpec noise_prior_;
  Eigen::MatrixXcd pulse_map_;
};

/// p(theta | y, gamma, sigma_v2; T) expressed over normalized coordinates
/// theta_bar in (0,1)^{3M}. The Jacobian of the normalization is constant
/// and dropped.
class ThetaConditional {
 public:
  ThetaConditional(const PosteriorModel& model, const Eigen::VectorXd& gamma, double sigma_v2,
                   double temperature, bool prior_in_potential = true);

  Eigen::Index dimension() const { return model_->theta_size(); }

  /// log target; -inf outside the open unit cube.
  double log_density(const Eigen::VectorXd& theta_bar) const;
  /// Same, also returning x(theta) for reuse.
  double log_density(const Eigen::VectorXd& theta_bar, Eigen::VectorXcd& x) const;

  /// HMC potential U and its gradient in normalized coordinates. When the
  /// prior is excluded, U is the tempered data misfit alone.
  double potential(const Eigen::VectorXd& theta_bar) const;
  double potential_and_gradient(const Eigen::VectorXd& theta_bar, Eigen::VectorXd& grad) const;

  double misfit_scale() const { return scale_; }

 private:
  double log_prior_normalized(const Eigen::VectorXd& theta_bar) const;

  const PosteriorModel* model_;
  Eigen::VectorXcd spectrum_;
  double scale_;  // 1 / (T sigma_v2)
  bool prior_in_potential_;
};

}  // namespace uwb
