#include "uwb/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace uwb {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
  return (c.transpose() * c) / static_cast<double>(x.rows() - 1);
}
}  // namespace

double mpsrf(const std::vector<Eigen::MatrixXd>& runs) {
  const std::size_t m = runs.size();
  if (m < 2) throw DiagnosticError("MPSRF needs at least two runs");
  const Eigen::Index n = runs[0].rows();
  const Eigen::Index d = runs[0].cols();
  if (n < 2 || d < 1) throw DiagnosticError("MPSRF needs at least two samples per run");
  for (const auto& r : runs)
    if (r.rows() != n || r.cols() != d) throw DiagnosticError("runs must share shape");

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd means(static_cast<Eigen::Index>(m), d);
  for (std::size_t j = 0; j < m; ++j) {
    w += sample_covariance(runs[j]);
    means.row(static_cast<Eigen::Index>(j)) = runs[j].colwise().mean();
  }
  w /= static_cast<double>(m);
  w = 0.5 * (w + w.transpose()).eval();
  Eigen::MatrixXd b_over_n = sample_covariance(means);
  b_over_n = 0.5 * (b_over_n + b_over_n.transpose()).eval();

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges;
  for (int attempt = 0; attempt < 2; ++attempt) {
    Eigen::LLT<Eigen::MatrixXd> llt(w);
    if (llt.info() == Eigen::Success) {
      ges.compute(b_over_n, w, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
      if (ges.info() == Eigen::Success) break;
    }
    if (attempt == 1) throw DiagnosticError("within-run covariance is singular");
    w.diagonal().array() += 1e-10;
  }
  const double lambda = std::max(ges.eigenvalues().maxCoeff(), 0.0);
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  return (nd - 1.0) / nd + (md + 1.0) / md * lambda;
}

std::vector<MpsrfPoint> mpsrf_curve(const std::vector<Eigen::MatrixXd>& runs, long step) {
  if (runs.empty()) return {};
  if (step < 1) throw DiagnosticError("step must be positive");
  Eigen::Index n = runs[0].rows();
  for (const auto& r : runs) n = std::min(n, r.rows());
  const Eigen::Index d = runs[0].cols();
  std::vector<MpsrfPoint> out;
  for (Eigen::Index t = step; t <= n; t += step) {
    const Eigen::Index half = t / 2;
    const Eigen::Index kept = t - half;
    if (kept < 2 * d) continue;
    std::vector<Eigen::MatrixXd> windows;
    for (const auto& r : runs) windows.push_back(r.middleRows(half, kept));
    out.push_back({static_cast<long>(t), mpsrf(windows)});
  }
  return out;
}

namespace {

struct Autocov {
  const std::vector<double>& x;
  double mean = 0.0;
  double c0 = 0.0;

  explicit Autocov(const std::vector<double>& s) : x(s) {
    if (s.size() < 2) throw DiagnosticError("series too short");
    mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    c0 = at(0);
    if (!(c0 > 0.0)) throw DiagnosticError("series has zero variance");
  }

  double at(std::size_t k) const {
    const std::size_t n = x.size();
    double acc = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) acc += (x[i] - mean) * (x[i + k] - mean);
    return acc / static_cast<double>(n);
  }
  double rho(std::size_t k) const { return at(k) / c0; }
};

}  // namespace

std::vector<double> acf(const std::vector<double>& series, std::size_t max_lag) {
  if (series.size() <= max_lag) throw DiagnosticError("series length must exceed max_lag");
  const Autocov ac(series);
  std::vector<double> r(max_lag + 1);
  r[0] = 1.0;
  for (std::size_t k = 1; k <= max_lag; ++k) r[k] = ac.rho(k);
  return r;
}

double act(const std::vector<double>& series) {
  const Autocov ac(series);
  const std::size_t n = series.size();
  double sum = 0.0;
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    const double pair = (k == 0 ? 1.0 : ac.rho(2 * k)) + ac.rho(2 * k + 1);
    if (!(pair > 0.0)) break;
    sum += pair;
  }
  return -1.0 + 2.0 * sum;
}

Eigen::VectorXd mmse_estimate(const Eigen::MatrixXd& samples, double burn_in_fraction) {
  if (!(burn_in_fraction >= 0.0 && burn_in_fraction <= 1.0))
    throw DiagnosticError("burn-in fraction must lie in [0, 1]");
  const auto drop = static_cast<Eigen::Index>(std::floor(burn_in_fraction * samples.rows()));
  const Eigen::Index kept = samples.rows() - drop;
  if (kept <= 0) throw DiagnosticError("no samples left after burn-in");
  return samples.bottomRows(kept).colwise().mean().transpose();
}

double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw DiagnosticError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw DiagnosticError("probability must lie in [0, 1]");
  std::sort(v.begin(), v.end());
  const double h = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<Interval> credibility_interval(const Eigen::MatrixXd& samples, double level) {
  if (samples.rows() == 0) throw DiagnosticError("empty trace");
  if (!(level > 0.0 && level < 1.0)) throw DiagnosticError("level must lie in (0, 1)");
  const double tail = (1.0 - level) / 2.0;
  std::vector<Interval> out;
  for (Eigen::Index c = 0; c < samples.cols(); ++c) {
    std::vector<double> col(samples.col(c).data(), samples.col(c).data() + samples.rows());
    out.push_back({quantile(col, tail), quantile(col, 1.0 - tail)});
  }
  return out;
}

AscentResult projected_ascent(const AscentObjective& f, const Eigen::VectorXd& x0,
                              const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                              const AscentOptions& opts) {
  const Eigen::Index n = x0.size();
  auto clamp = [&](const Eigen::VectorXd& v) { return v.cwiseMax(lower).cwiseMin(upper); };
  auto projected = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& g) {
    Eigen::VectorXd p = g;
    for (Eigen::Index i = 0; i < n; ++i)
      if ((x[i] <= lower[i] && g[i] < 0.0) || (x[i] >= upper[i] && g[i] > 0.0)) p[i] = 0.0;
    return p;
  };

  AscentResult res;
  res.x = clamp(x0);
  Eigen::VectorXd g;
  Eigen::MatrixXd curv;
  res.value = f(res.x, &g, &curv);
  if (!std::isfinite(res.value)) throw DiagnosticError("ascent started at a non-finite value");

  for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
    const Eigen::VectorXd pg = projected(res.x, g);
    res.gradient_norm = pg.cwiseAbs().maxCoeff();
    if (res.gradient_norm < opts.gradient_tolerance) {
      res.converged = true;
      break;
    }

    std::vector<Eigen::VectorXd> directions;
    if (curv.rows() == n) {
      // Newton-type step on the free variables only.
      std::vector<Eigen::Index> free;
      for (Eigen::Index i = 0; i < n; ++i)
        if (pg[i] != 0.0 || (res.x[i] > lower[i] && res.x[i] < upper[i])) free.push_back(i);
      const auto k = static_cast<Eigen::Index>(free.size());
      Eigen::MatrixXd cf(k, k);
      Eigen::VectorXd gf(k);
      for (Eigen::Index a = 0; a < k; ++a) {
        gf[a] = g[free[a]];
        for (Eigen::Index b = 0; b < k; ++b) cf(a, b) = curv(free[a], free[b]);
      }
      Eigen::LDLT<Eigen::MatrixXd> ldlt(cf);
      if (ldlt.info() == Eigen::Success) {
        const Eigen::VectorXd df = ldlt.solve(gf);
        if (df.allFinite() && df.dot(gf) > 0.0) {
          Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
          for (Eigen::Index a = 0; a < k; ++a) d[free[a]] = df[a];
          directions.push_back(d);
        }
      }
    }
    directions.push_back(pg);

    bool moved = false;
    for (const Eigen::VectorXd& d : directions) {
      double alpha = 1.0;
      for (int bt = 0; bt < opts.max_backtracks; ++bt, alpha *= opts.shrink) {
        const Eigen::VectorXd xn = clamp(res.x + alpha * d);
        if (xn == res.x) break;
        const double fn = f(xn, nullptr, nullptr);
        if (std::isfinite(fn) && fn >= res.value + opts.armijo * g.dot(xn - res.x) &&
            fn > res.value) {
          res.x = xn;
          res.value = f(res.x, &g, &curv);
          moved = true;
          break;
        }
      }
      if (moved) break;
    }
    if (!moved) break;
  }
  const Eigen::VectorXd pg = projected(res.x, g);
  res.gradient_norm = pg.cwiseAbs().maxCoeff();
  res.converged = res.converged || res.gradient_norm < opts.gradient_tolerance;
  return res;
}

namespace {

/// log p(theta, gamma, sigma_v2 | y) over normalized theta with gamma at its
/// conditional maximizer; constants independent of the arguments dropped.
class ProfileObjective {
 public:
  ProfileObjective(const PosteriorModel& model, double sigma_v2)
      : model_(model), sigma_v2_(sigma_v2) {}

  double operator()(const Eigen::VectorXd& bar, Eigen::VectorXd* grad, Eigen::MatrixXd* curv) {
    const ParameterBox& box = model_.box();
    const BetaPriorSpec& prior = model_.theta_prior();
    const Eigen::Index p = bar.size();
    double lp = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) {
      const double t = bar[i];
      if (!(t > 0.0 && t < 1.0)) return kNegInf;
      if (prior.a(i) != 1.0) lp += (prior.a(i) - 1.0) * std::log(t);
      if (prior.b(i) != 1.0) lp += (prior.b(i) - 1.0) * std::log1p(-t);
    }
    const Eigen::VectorXd theta = box.denormalize(bar);
    Eigen::VectorXcd x;
    Eigen::MatrixXcd jac;
    if (grad)
      model_.forward().evaluate(theta, x, jac);
    else
      model_.forward().evaluate(theta, x);
    const GaussianConditional gc = model_.gamma_conditional(x, sigma_v2_, 1.0);
    gamma_ = gc.mean;
    const Eigen::VectorXcd spectrum = model_.pulse_spectrum(gamma_);
    const Eigen::VectorXcd r = model_.y() - spectrum.cwiseProduct(x);
    const double value = -r.squaredNorm() / sigma_v2_ -
                         0.5 * gamma_.squaredNorm() / model_.pulse_prior().sigma_gamma2 + lp;
    if (!grad) return value;

    const double c = 2.0 / sigma_v2_;
    const Eigen::MatrixXcd js =
        spectrum.asDiagonal() * jac * box.width().cast<Complex>().asDiagonal();
    *grad = c * (js.adjoint() * r).real();
    Eigen::VectorXd prior_curv(p);
    for (Eigen::Index i = 0; i < p; ++i) {
      const double t = bar[i];
      const double a1 = prior.a(i) - 1.0;
      const double b1 = prior.b(i) - 1.0;
      (*grad)[i] += a1 / t - b1 / (1.0 - t);
      prior_curv[i] = a1 / (t * t) + b1 / ((1.0 - t) * (1.0 - t));
    }
    if (curv) {
      const Eigen::MatrixXcd jg = x.asDiagonal() * model_.pulse_map();
      Eigen::MatrixXd ctt = c * (js.adjoint() * js).real();
      ctt.diagonal() += prior_curv;
      const Eigen::MatrixXd ctg = c * (js.adjoint() * jg).real();
      *curv = ctt - ctg * gc.precision_factor.solve(ctg.transpose());
      *curv = 0.5 * (*curv + curv->transpose()).eval();
      // Keep the preconditioner positive definite.
      const double scale = std::max(curv->diagonal().cwiseAbs().maxCoeff(), 1e-300);
      curv->diagonal().array() += 1e-12 * scale;
    }
    return value;
  }

  const Eigen::VectorXd& gamma() const { return gamma_; }

 private:
  const PosteriorModel& model_;
  double sigma_v2_;
  Eigen::VectorXd gamma_;
};

double map_sigma(const PosteriorModel& model, const ModelState& s) {
  const InverseGammaParams ig = model.noise_conditional(model.residual_norm2(s.theta, s.gamma), 1.0);
  return ig.scale / (ig.shape + 1.0);
}

}  // namespace

MapResult map_refine(const PosteriorModel& model, const ModelState& start,
                     const AscentOptions& opts) {
  MapResult res;
  res.state = start;
  res.log_posterior = model.log_posterior(res.state);
  if (!std::isfinite(res.log_posterior)) throw DiagnosticError("non-finite posterior at MAP start");
  const Eigen::Index p = model.theta_size();
  const double margin = 1e-12;
  const Eigen::VectorXd lo = Eigen::VectorXd::Constant(p, margin);
  const Eigen::VectorXd hi = Eigen::VectorXd::Constant(p, 1.0 - margin);

  int used = 0;
  for (int outer = 0; outer < 50 && used < opts.max_iterations; ++outer) {
    res.state.sigma_v2 = map_sigma(model, res.state);
    ProfileObjective obj(model, res.state.sigma_v2);
    AscentOptions inner = opts;
    inner.max_iterations = opts.max_iterations - used;
    const AscentObjective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g,
                                  Eigen::MatrixXd* c) { return obj(x, g, c); };
    const AscentResult a =
        projected_ascent(f, model.box().normalize(res.state.theta), lo, hi, inner);
    used += std::max(a.iterations, 1);
    obj(a.x, nullptr, nullptr);
    ModelState next{model.box().denormalize(a.x), obj.gamma(), res.state.sigma_v2};
    next.sigma_v2 = map_sigma(model, next);
    const double lp = model.log_posterior(next);
    const bool improved = std::isfinite(lp) && lp >= res.log_posterior;
    if (improved) {
      const double gain = lp - res.log_posterior;
      res.state = next;
      res.log_posterior = lp;
      res.converged = a.converged;
      if (gain <= 1e-13 * std::max(1.0, std::abs(lp))) break;
    } else {
      break;
    }
  }
  res.iterations = used;
  return res;
}

MapResult map_estimate(const PosteriorModel& model, const TraceStore& trace, std::size_t level,
                       int stage, const AscentOptions& opts) {
  const LevelTrace& t = trace.levels.at(level);
  std::vector<std::size_t> rows = t.rows_in_stage(stage);
  if (rows.empty()) throw DiagnosticError("empty trace");
  std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
    const double la = std::isfinite(t.log_posterior(a)) ? t.log_posterior(a) : kNegInf;
    const double lb = std::isfinite(t.log_posterior(b)) ? t.log_posterior(b) : kNegInf;
    return la > lb;
  });
  const auto p = trace.theta_size;
  const auto l = trace.gamma_size;
  for (std::size_t row : rows) {
    ModelState s;
    s.theta.resize(static_cast<Eigen::Index>(p));
    s.gamma.resize(static_cast<Eigen::Index>(l));
    for (std::size_t k = 0; k < p; ++k) s.theta[static_cast<Eigen::Index>(k)] = t.value(row, k);
    for (std::size_t k = 0; k < l; ++k) s.gamma[static_cast<Eigen::Index>(k)] = t.value(row, p + k);
    s.sigma_v2 = t.value(row, p + l);
    if (!std::isfinite(model.log_posterior(s))) continue;
    try {
      MapResult r = map_refine(model, s, opts);
      r.start_row = row;
      return r;
    } catch (const DiagnosticError&) {
      continue;
    }
  }
  throw DiagnosticError("no trace row has a finite posterior");
}

EstimateReport estimate_report(const PosteriorModel& model, const TraceStore& trace,
                               std::size_t level, int stage, double burn_in_fraction,
                               double credibility, const AscentOptions& opts) {
  const LevelTrace& t = trace.levels.at(level);
  const Eigen::MatrixXd all = t.matrix(0, t.width(), stage);
  if (all.rows() == 0) throw DiagnosticError("empty trace");
  const auto skip = static_cast<Eigen::Index>(std::floor(burn_in_fraction * all.rows()));
  const Eigen::MatrixXd kept = all.bottomRows(all.rows() - skip);
  EstimateReport r;
  r.level = credibility;
  r.mmse = mmse_estimate(kept);
  r.intervals = credibility_interval(kept, credibility);
  const MapResult m = map_estimate(model, trace, level, stage, opts);
  r.map.resize(all.cols());
  r.map << m.state.theta, m.state.gamma, m.state.sigma_v2;
  r.map_log_posterior = m.log_posterior;
  return r;
}

}  // namespace uwb
