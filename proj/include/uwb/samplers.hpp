#pragma once

// Within-Gibbs kernels for the layer parameters and the per-chain Gibbs
// cycle (noise variance, pulse coefficients, layer parameters).

#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "uwb/posterior.hpp"
#include "uwb/rng.hpp"

namespace uwb {

struct SamplerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class KernelKind { Slice, Hmc, Mh };

std::string to_string(KernelKind k);
KernelKind kernel_from_string(const std::string& s);

struct KernelStats {
  long proposals = 0;
  long acceptances = 0;
  long stepouts = 0;
  long shrinks = 0;
  long reflections = 0;
  long livelocks = 0;

  double acceptance_ratio() const {
    return proposals > 0 ? static_cast<double>(acceptances) / static_cast<double>(proposals) : 0.0;
  }
  KernelStats& operator+=(const KernelStats& o);
};

struct SliceConfig {
  double width = 1.0;  // in normalized units; 1.0 spans the full parameter range
  int max_stepout = 100;
  int max_shrink = 1000;
  bool random_scan = false;
};

/// One univariate slice-sampling update (stepping out, then shrinkage) of a
/// point x0 under an unnormalized log density supported inside [lower, upper].
double slice_update(double x0, const std::function<double(double)>& log_density, double lower,
                    double upper, const SliceConfig& cfg, Rng& rng, KernelStats* stats = nullptr);

/// Kinetic energy K(p) = p^T M^{-1} p / 2 with momentum p ~ N(0, M). Built
/// from M^{-1}, which the adaptive sampler sets to an estimated posterior
/// covariance.
class MassMatrix {
 public:
  MassMatrix() = default;
  static MassMatrix identity(Eigen::Index dim);
  static MassMatrix from_inverse(const Eigen::MatrixXd& inverse_mass);

  Eigen::Index dimension() const { return inverse_mass_.rows(); }
  const Eigen::MatrixXd& inverse_mass() const { return inverse_mass_; }
  Eigen::MatrixXd mass() const;
  bool diagonal() const { return diagonal_; }

  double kinetic(const Eigen::VectorXd& p) const { return 0.5 * p.dot(inverse_mass_ * p); }
  Eigen::VectorXd velocity(const Eigen::VectorXd& p) const { return inverse_mass_ * p; }
  Eigen::VectorXd draw_momentum(Rng& rng) const;

 private:
  Eigen::MatrixXd inverse_mass_;
  Eigen::MatrixXd mass_factor_;  // lower Cholesky factor of M
  bool diagonal_ = true;
};

/// U(theta) with gradient; returns +inf (and any gradient) outside the support.
using PotentialFn = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct PhasePoint {
  Eigen::VectorXd theta;
  Eigen::VectorXd p;
};

/// One leapfrog step: half kick, drift, half kick.
PhasePoint leapfrog_step(const Eigen::VectorXd& theta, const Eigen::VectorXd& p, double epsilon,
                         const MassMatrix& mass, const PotentialFn& potential);

struct HmcConfig {
  double step_size = 1e-2;
  int leapfrog_steps = 10;
  MassMatrix mass;
};

struct HmcResult {
  Eigen::VectorXd theta;
  bool accepted = false;
  double delta_h = 0.0;  // H(end) - H(start)
  long reflections = 0;
};

/// Reflective HMC inside [lower, upper]: when a leapfrog step leaves the box
/// it is undone, the momenta of the violated coordinates are negated and the
/// step is redone.
HmcResult hmc_update(const Eigen::VectorXd& theta, const PotentialFn& potential,
                     const HmcConfig& cfg, const Eigen::VectorXd& lower,
                     const Eigen::VectorXd& upper, Rng& rng, KernelStats* stats = nullptr);

struct MhConfig {
  Eigen::VectorXd concentration;
};

struct MhResult {
  Eigen::VectorXd theta;
  bool accepted = false;
};

/// Metropolis-Hastings on the unit cube with independent Beta proposals whose
/// modes sit at the current point.
MhResult mh_update(const Eigen::VectorXd& theta_bar,
                   const std::function<double(const Eigen::VectorXd&)>& log_density,
                   const MhConfig& cfg, Rng& rng, KernelStats* stats = nullptr);

/// Log density of the MH Beta proposal from `from` to `to`.
double beta_proposal_log_density(const Eigen::VectorXd& from, const Eigen::VectorXd& to,
                                 const Eigen::VectorXd& concentration);

/// The exchangeable part of a chain: swapped wholesale between levels.
struct Replica {
  ModelState state;
  Eigen::VectorXcd x;  // reflectivity at state.theta
  double log_likelihood = 0.0;
};

/// Level-bound sampler settings; stay with the temperature level on swaps.
struct LevelSampler {
  double step_size = 1e-2;
  MassMatrix mass;
  Eigen::VectorXd mh_concentration;
  KernelStats stats;   // cumulative
  KernelStats window;  // since the last adaptation
};

struct ChainState {
  Replica replica;
  LevelSampler sampler;
};

struct GibbsSettings {
  SliceConfig slice;
  int leapfrog_steps = 10;
  bool prior_in_potential = true;
};

/// Builds a replica (x, log-likelihood) for a given state.
Replica make_replica(const PosteriorModel& model, ModelState state);

/// Step 1 draws sigma_v^2, Step 2 draws gamma, Step 3 updates theta with the
/// selected kernel, all at temperature T.
void gibbs_cycle(ChainState& chain, const PosteriorModel& model, double temperature,
                 KernelKind kernel, const GibbsSettings& settings, Rng& rng);

}  // namespace uwb
