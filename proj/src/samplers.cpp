#include "uwb/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

namespace uwb {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string to_string(KernelKind k) {
  switch (k) {
    case KernelKind::Slice: return "slice";
    case KernelKind::Hmc: return "hmc";
    case KernelKind::Mh: return "mh";
  }
  return "unknown";
}

KernelKind kernel_from_string(const std::string& s) {
  if (s == "slice") return KernelKind::Slice;
  if (s == "hmc") return KernelKind::Hmc;
  if (s == "mh") return KernelKind::Mh;
  throw std::invalid_argument("unknown kernel '" + s + "'");
}

KernelStats& KernelStats::operator+=(const KernelStats& o) {
  proposals += o.proposals;
  acceptances += o.acceptances;
  stepouts += o.stepouts;
  shrinks += o.shrinks;
  reflections += o.reflections;
  livelocks += o.livelocks;
  return *this;
}

double slice_update(double x0, const std::function<double(double)>& log_density, double lower,
                    double upper, const SliceConfig& cfg, Rng& rng, KernelStats* stats) {
  if (!(cfg.width > 0.0)) throw SamplerError("slice width must be positive");
  const double f0 = log_density(x0);
  if (!std::isfinite(f0)) throw SamplerError("slice sampler started at a point of zero density");
  // Height in log space: log(u * p(x0)) with u ~ U(0, 1].
  const double level = f0 + std::log(uniform_open01(rng));

  double left = x0 - cfg.width * uniform01(rng);
  double right = left + cfg.width;
  long stepouts = 0;
  // Every step-out is clipped to the box; the density is zero outside.
  while (left > lower && log_density(left) > level) {
    if (++stepouts > cfg.max_stepout) throw SamplerError("slice step-out cap exceeded");
    left -= cfg.width;
  }
  while (right < upper && log_density(right) > level) {
    if (++stepouts > cfg.max_stepout) throw SamplerError("slice step-out cap exceeded");
    right += cfg.width;
  }
  left = std::max(left, lower);
  right = std::min(right, upper);

  long shrinks = 0;
  for (;;) {
    const double x1 = left + (right - left) * uniform01(rng);
    const double f1 = (x1 > lower && x1 < upper) ? log_density(x1) : -kInf;
    if (f1 > level) {
      if (stats) {
        ++stats->proposals;
        ++stats->acceptances;
        stats->stepouts += stepouts;
        stats->shrinks += shrinks;
      }
      return x1;
    }
    if (++shrinks > cfg.max_shrink) throw SamplerError("slice shrinkage cap exceeded");
    if (x1 < x0)
      left = x1;
    else
      right = x1;
  }
}

MassMatrix MassMatrix::identity(Eigen::Index dim) {
  return from_inverse(Eigen::MatrixXd::Identity(dim, dim));
}

MassMatrix MassMatrix::from_inverse(const Eigen::MatrixXd& inverse_mass) {
  if (inverse_mass.rows() != inverse_mass.cols() || inverse_mass.rows() == 0)
    throw DimensionError("mass matrix must be square and nonempty");
  MassMatrix m;
  m.inverse_mass_ = 0.5 * (inverse_mass + inverse_mass.transpose());
  const Eigen::Index n = m.inverse_mass_.rows();
  m.diagonal_ = (m.inverse_mass_ - Eigen::MatrixXd(m.inverse_mass_.diagonal().asDiagonal()))
                    .cwiseAbs()
                    .maxCoeff() == 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt(m.inverse_mass_);
  if (llt.info() != Eigen::Success) throw DomainError("inverse mass matrix is not positive definite");
  const Eigen::MatrixXd mass = llt.solve(Eigen::MatrixXd::Identity(n, n));
  Eigen::LLT<Eigen::MatrixXd> mass_llt(0.5 * (mass + mass.transpose()));
  if (mass_llt.info() != Eigen::Success) throw DomainError("mass matrix is not positive definite");
  m.mass_factor_ = mass_llt.matrixL();
  return m;
}

Eigen::MatrixXd MassMatrix::mass() const { return mass_factor_ * mass_factor_.transpose(); }

Eigen::VectorXd MassMatrix::draw_momentum(Rng& rng) const {
  Eigen::VectorXd z(dimension());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = standard_normal(rng);
  return mass_factor_ * z;
}

PhasePoint leapfrog_step(const Eigen::VectorXd& theta, const Eigen::VectorXd& p, double epsilon,
                         const MassMatrix& mass, const PotentialFn& potential) {
  Eigen::VectorXd g;
  potential(theta, g);
  PhasePoint out;
  out.p = p - 0.5 * epsilon * g;
  out.theta = theta + epsilon * mass.velocity(out.p);
  potential(out.theta, g);
  out.p -= 0.5 * epsilon * g;
  return out;
}

HmcResult hmc_update(const Eigen::VectorXd& theta, const PotentialFn& potential,
                     const HmcConfig& cfg, const Eigen::VectorXd& lower,
                     const Eigen::VectorXd& upper, Rng& rng, KernelStats* stats) {
  const Eigen::Index dim = theta.size();
  if (cfg.mass.dimension() != dim) throw DimensionError("mass matrix dimension mismatch");
  if (!(cfg.step_size > 0.0) || cfg.leapfrog_steps < 1)
    throw DomainError("HMC needs a positive step size and at least one leapfrog step");

  HmcResult res;
  res.theta = theta;
  if (stats) ++stats->proposals;

  Eigen::VectorXd grad;
  const double u0 = potential(theta, grad);
  if (!std::isfinite(u0) || !grad.allFinite()) return res;
  Eigen::VectorXd p = cfg.mass.draw_momentum(rng);
  const double h0 = u0 + cfg.mass.kinetic(p);

  const double eps = cfg.step_size;
  const long cap = 3 * dim;
  Eigen::VectorXd q = theta;
  Eigen::VectorXd q_new(dim);
  Eigen::VectorXd p_half(dim);
  Eigen::VectorXd grad_new(dim);
  double u = u0;

  for (int step = 0; step < cfg.leapfrog_steps; ++step) {
    long reflections = 0;
    for (;;) {
      p_half = p - 0.5 * eps * grad;
      q_new = q + eps * cfg.mass.velocity(p_half);
      bool violated = false;
      for (Eigen::Index i = 0; i < dim; ++i) {
        if (!(q_new[i] > lower[i] && q_new[i] < upper[i])) {
          p[i] = -p[i];
          violated = true;
          ++reflections;
        }
      }
      if (!violated) break;
      if (reflections > cap) {
        res.reflections += reflections;
        if (stats) {
          stats->reflections += reflections;
          ++stats->livelocks;
        }
        return res;
      }
    }
    res.reflections += reflections;
    u = potential(q_new, grad_new);
    if (!std::isfinite(u) || !grad_new.allFinite()) {
      if (stats) stats->reflections += res.reflections;
      return res;
    }
    p = p_half - 0.5 * eps * grad_new;
    q.swap(q_new);
    grad.swap(grad_new);
  }

  const double h1 = u + cfg.mass.kinetic(p);
  res.delta_h = h1 - h0;
  if (stats) stats->reflections += res.reflections;
  if (std::isfinite(h1) && std::log(uniform_open01(rng)) < h0 - h1) {
    res.theta = q;
    res.accepted = true;
    if (stats) ++stats->acceptances;
  }
  return res;
}

double beta_proposal_log_density(const Eigen::VectorXd& from, const Eigen::VectorXd& to,
                                 const Eigen::VectorXd& concentration) {
  double v = 0.0;
  for (Eigen::Index i = 0; i < from.size(); ++i) {
    const double c = concentration[i];
    v += beta_log_density(to[i], from[i] * c + 1.0, (1.0 - from[i]) * c + 1.0);
  }
  return v;
}

MhResult mh_update(const Eigen::VectorXd& theta_bar,
                   const std::function<double(const Eigen::VectorXd&)>& log_density,
                   const MhConfig& cfg, Rng& rng, KernelStats* stats) {
  const Eigen::Index dim = theta_bar.size();
  if (cfg.concentration.size() != dim) throw DimensionError("MH concentration length mismatch");
  MhResult res{theta_bar, false};
  if (stats) ++stats->proposals;
  Eigen::VectorXd prop(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double c = cfg.concentration[i];
    prop[i] = beta_draw(rng, theta_bar[i] * c + 1.0, (1.0 - theta_bar[i]) * c + 1.0);
  }
  const double f1 = log_density(prop);
  if (!std::isfinite(f1)) return res;
  const double f0 = log_density(theta_bar);
  const double log_ratio = f1 - f0 + beta_proposal_log_density(prop, theta_bar, cfg.concentration) -
                           beta_proposal_log_density(theta_bar, prop, cfg.concentration);
  if (std::log(uniform_open01(rng)) < log_ratio) {
    res.theta = prop;
    res.accepted = true;
    if (stats) ++stats->acceptances;
  }
  return res;
}

Replica make_replica(const PosteriorModel& model, ModelState state) {
  Replica r;
  r.x = model.reflectivity(state.theta);
  r.log_likelihood = model.log_likelihood_from_residual(
      model.residual_norm2(r.x, model.pulse_spectrum(state.gamma)), state.sigma_v2);
  r.state = std::move(state);
  return r;
}

void gibbs_cycle(ChainState& chain, const PosteriorModel& model, double temperature,
                 KernelKind kernel, const GibbsSettings& settings, Rng& rng) {
  Replica& rep = chain.replica;
  LevelSampler& ls = chain.sampler;
  ModelState& s = rep.state;

  // Step 1: noise variance.
  const double r2 = model.residual_norm2(rep.x, model.pulse_spectrum(s.gamma));
  s.sigma_v2 = model.sample_noise(r2, temperature, rng);

  // Step 2: pulse coefficients.
  s.gamma = model.gamma_conditional(rep.x, s.sigma_v2, temperature).draw(rng);

  // Step 3: layer parameters in normalized coordinates.
  const ThetaConditional target(model, s.gamma, s.sigma_v2, temperature,
                                settings.prior_in_potential);
  Eigen::VectorXd bar = model.box().normalize(s.theta);
  const Eigen::Index dim = bar.size();
  KernelStats step;

  switch (kernel) {
    case KernelKind::Slice: {
      std::vector<Eigen::Index> order(static_cast<std::size_t>(dim));
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      if (settings.slice.random_scan) std::shuffle(order.begin(), order.end(), rng);
      Eigen::VectorXd work = bar;
      for (Eigen::Index i : order) {
        auto f = [&](double v) {
          work[i] = v;
          return target.log_density(work);
        };
        const double old = bar[i];
        bar[i] = slice_update(old, f, 0.0, 1.0, settings.slice, rng, &step);
        work[i] = bar[i];
      }
      break;
    }
    case KernelKind::Hmc: {
      HmcConfig cfg{ls.step_size, settings.leapfrog_steps, ls.mass};
      const PotentialFn pot = [&](const Eigen::VectorXd& t, Eigen::VectorXd& g) {
        return target.potential_and_gradient(t, g);
      };
      const HmcResult r = hmc_update(bar, pot, cfg, Eigen::VectorXd::Zero(dim),
                                     Eigen::VectorXd::Ones(dim), rng, &step);
      bar = r.theta;
      break;
    }
    case KernelKind::Mh: {
      const MhConfig cfg{ls.mh_concentration};
      const auto f = [&](const Eigen::VectorXd& t) { return target.log_density(t); };
      bar = mh_update(bar, f, cfg, rng, &step).theta;
      break;
    }
  }
  ls.stats += step;
  ls.window += step;

  s.theta = model.box().denormalize(bar);
  model.forward().evaluate(s.theta, rep.x);
  rep.log_likelihood = model.log_likelihood_from_residual(
      model.residual_norm2(rep.x, model.pulse_spectrum(s.gamma)), s.sigma_v2);
}

}  // namespace uwb
