#pragma once

// Unknown noise and prior variances with Inverse-Gamma hyperpriors:
// JMAP and mean-field VBA inner fits, and the outer sweep over the
// noise-variance mean E_eps.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bayesid/errors.hpp"
#include "bayesid/gauss_bayes.hpp"
#include "bayesid/metrics.hpp"
#include "bayesid/types.hpp"

namespace bayesid {

/// Inverse-Gamma(alpha, beta): shape alpha, scale beta.
struct IGParams {
  double alpha = 3.0;
  double beta = 2.0;

  IGParams() = default;
  IGParams(double a, double b) : alpha(a), beta(b) {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
      throw InvalidArgument("IGParams: alpha and beta must be finite and positive");
    }
  }

  /// Parameters with shape `alpha` and mean `mean` (alpha > 1).
  static IGParams from_mean(double alpha, double mean) {
    if (!(alpha > 1.0)) throw InvalidArgument("IGParams::from_mean: alpha must exceed 1");
    return {alpha, mean * (alpha - 1.0)};
  }

  std::optional<double> mean() const {
    if (alpha > 1.0) return beta / (alpha - 1.0);
    return std::nullopt;
  }
  std::optional<double> variance() const {
    if (alpha > 2.0) return beta * beta / ((alpha - 1.0) * (alpha - 1.0) * (alpha - 2.0));
    return std::nullopt;
  }
};

enum class Breakdown : std::uint8_t {
  negative_posterior_diagonal = 1,
  factorization_failure = 2,
  non_convergence = 4,
};

class BreakdownFlags {
 public:
  void set(Breakdown b) { bits_ |= static_cast<std::uint8_t>(b); }
  bool has(Breakdown b) const { return (bits_ & static_cast<std::uint8_t>(b)) != 0; }
  bool any() const { return bits_ != 0; }
  /// Breakdowns that invalidate the fit (non-convergence alone does not).
  bool numerical() const {
    return has(Breakdown::negative_posterior_diagonal) || has(Breakdown::factorization_failure);
  }
  BreakdownFlags& operator|=(BreakdownFlags o) {
    bits_ |= o.bits_;
    return *this;
  }

  /// "negdiag|factor|nonconv" subset, empty when clear.
  std::string str() const {
    std::string s;
    auto add = [&s](std::string_view name) {
      if (!s.empty()) s += '|';
      s += name;
    };
    if (has(Breakdown::negative_posterior_diagonal)) add("negdiag");
    if (has(Breakdown::factorization_failure)) add("factor");
    if (has(Breakdown::non_convergence)) add("nonconv");
    return s;
  }

  friend bool operator==(BreakdownFlags, BreakdownFlags) = default;

 private:
  std::uint8_t bits_ = 0;
};

struct FitState {
  Vector xi;
  GaussianBelief post;
  Vector v_eps;  // reported variance estimates
  Vector v_xi;
  Vector w_eps;  // working variances defining `post`
  Vector w_xi;
  double logdet_precision = std::numeric_limits<double>::quiet_NaN();
  double rcond = std::numeric_limits<double>::quiet_NaN();
  int inner_iterations = 0;
  int jitter_count = 0;
  bool converged = false;
  BreakdownFlags flags;
};

struct FitOptions {
  double tol = 1e-6;
  int max_iter = 200;
  /// Drops the posterior-covariance terms from the VBA variance updates.
  bool vba_ignore_covariance = false;
};

enum class HyperAlgorithm { jmap, vba };

namespace detail {

inline void check_fit_inputs(const Matrix& H, const Vector& y, const char* who) {
  if (H.rows() < 1 || H.cols() < 1) throw InvalidArgument(std::string(who) + ": empty H");
  if (y.size() != H.rows()) throw InvalidArgument(std::string(who) + ": y does not match H");
  if (!H.allFinite() || !y.allFinite()) throw InvalidArgument(std::string(who) + ": non-finite input");
}

inline Vector initial_variance(const FitState* init, bool eps, Eigen::Index n, const IGParams& ig) {
  if (init != nullptr) {
    const Vector& w = eps ? init->w_eps : init->w_xi;
    if (w.size() == n && w.allFinite() && (w.array() > 0.0).all()) return w;
  }
  return Vector::Constant(n, ig.mean().value_or(ig.beta / (ig.alpha + 1.0)));
}

// Posterior under working variances (w_eps, w_xi); fills state or flags it.
inline std::optional<SpdFactor> factor_precision(const Matrix& H, const Vector& w_eps,
                                                 const Vector& w_xi, FitState& state) {
  if (!w_eps.allFinite() || !w_xi.allFinite()) {
    state.flags.set(Breakdown::factorization_failure);
    return std::nullopt;
  }
  auto F = try_factor_spd(posterior_precision(H, w_eps, w_xi));
  if (!F) {
    state.flags.set(Breakdown::factorization_failure);
    return std::nullopt;
  }
  if (F->jittered) ++state.jitter_count;
  return F;
}

inline void finalize(const Matrix& H, const Vector& y, const SpdFactor& F, FitState& s) {
  s.xi = F.solve(H.transpose() * y.cwiseQuotient(s.w_eps));
  s.post.mean = s.xi;
  s.post.cov = F.inverse();
  s.logdet_precision = F.logdet;
  s.rcond = F.rcond;
  if (!(F.rcond >= std::numeric_limits<double>::epsilon())) {
    s.flags.set(Breakdown::factorization_failure);
  }
  const auto d = s.post.cov.diagonal();
  if (!d.allFinite() || (d.array() <= 0.0).any()) {
    s.flags.set(Breakdown::negative_posterior_diagonal);
  }
}

inline void fail_state(Eigen::Index c, FitState& s) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  s.xi = Vector::Constant(c, nan);
  s.post.mean = s.xi;
  s.post.cov = Matrix::Constant(c, c, nan);
}

inline bool logdet_settled(double prev, double next, double tol) {
  return std::abs(next - prev) < tol * std::max(std::abs(prev), 1.0);
}

// Shared driver: `update` maps (mu, F, w_eps, w_xi) to new working variances.
template <class Update>
FitState iterate_fit(const Matrix& H, const Vector& y, Vector w_eps, Vector w_xi,
                     const FitOptions& opt, Update&& update) {
  FitState s;
  s.w_eps = w_eps;
  s.w_xi = w_xi;
  auto F = factor_precision(H, w_eps, w_xi, s);
  if (!F) {
    fail_state(H.cols(), s);
    return s;
  }
  // Invariant: F factors the precision built from (s.w_eps, s.w_xi).
  for (int it = 1; it <= opt.max_iter; ++it) {
    s.inner_iterations = it;
    const Vector mu = F->solve(H.transpose() * y.cwiseQuotient(w_eps));
    update(mu, *F, w_eps, w_xi);
    auto next = factor_precision(H, w_eps, w_xi, s);
    if (!next) break;  // keep the last good posterior
    const bool settled = logdet_settled(F->logdet, next->logdet, opt.tol);
    F = std::move(next);
    s.w_eps = w_eps;
    s.w_xi = w_xi;
    if (settled) {
      s.converged = true;
      break;
    }
  }
  if (!s.converged) s.flags.set(Breakdown::non_convergence);
  finalize(H, y, *F, s);
  return s;
}

}  // namespace detail

/// Joint MAP: alternate the posterior mean with the conditional IG modes
///   v_eps_i = (beta_eps + r_i^2 / 2) / (alpha_eps + 3/2),
///   v_xi_l  = (beta_xi + xi_l^2 / 2) / (alpha_xi + 3/2),
/// until ln det of the posterior precision settles.
inline FitState jmap_fit(const Matrix& H, const Vector& y, const IGParams& ig_eps,
                         const IGParams& ig_xi, const FitState* init = nullptr,
                         const FitOptions& opt = {}) {
  detail::check_fit_inputs(H, y, "jmap_fit");
  const double de = ig_eps.alpha + 1.5, dx = ig_xi.alpha + 1.5;
  FitState s = detail::iterate_fit(
      H, y, detail::initial_variance(init, true, H.rows(), ig_eps),
      detail::initial_variance(init, false, H.cols(), ig_xi), opt,
      [&](const Vector& mu, const SpdFactor&, Vector& w_eps, Vector& w_xi) {
        const Vector r = y - H * mu;
        w_eps = ((ig_eps.beta + 0.5 * r.array().square()) / de).matrix();
        w_xi = ((ig_xi.beta + 0.5 * mu.array().square()) / dx).matrix();
      });
  s.v_eps = s.w_eps;
  s.v_xi = s.w_xi;
  return s;
}

/// Mean-field VBA with q(xi) Gaussian and IG factors for each variance.
/// q(xi) uses the working variances rate/shape (inverse of E[1/v]); the
/// reported variances are the IG means rate/(shape - 1).
inline FitState vba_fit(const Matrix& H, const Vector& y, const IGParams& ig_eps,
                        const IGParams& ig_xi, const FitState* init = nullptr,
                        const FitOptions& opt = {}) {
  detail::check_fit_inputs(H, y, "vba_fit");
  const double shape_eps = ig_eps.alpha + 0.5, shape_xi = ig_xi.alpha + 0.5;
  FitState s = detail::iterate_fit(
      H, y, detail::initial_variance(init, true, H.rows(), ig_eps),
      detail::initial_variance(init, false, H.cols(), ig_xi), opt,
      [&](const Vector& mu, const SpdFactor& F, Vector& w_eps, Vector& w_xi) {
        const Vector r = y - H * mu;
        Vector q = Vector::Zero(H.rows());
        Vector sigma_diag = Vector::Zero(H.cols());
        if (!opt.vba_ignore_covariance) {
          const Matrix Sigma = F.inverse();
          q = (H * Sigma).cwiseProduct(H).rowwise().sum();
          sigma_diag = Sigma.diagonal();
        }
        w_eps = ((ig_eps.beta + 0.5 * (r.array().square() + q.array())) / shape_eps).matrix();
        w_xi = ((ig_xi.beta + 0.5 * (mu.array().square() + sigma_diag.array())) / shape_xi).matrix();
      });
  const double ke = shape_eps > 1.0 ? shape_eps / (shape_eps - 1.0) : 1.0;
  const double kx = shape_xi > 1.0 ? shape_xi / (shape_xi - 1.0) : 1.0;
  s.v_eps = s.w_eps * ke;
  s.v_xi = s.w_xi * kx;
  return s;
}

inline FitState fit(HyperAlgorithm algo, const Matrix& H, const Vector& y, const IGParams& ig_eps,
                    const IGParams& ig_xi, const FitState* init = nullptr,
                    const FitOptions& opt = {}) {
  return algo == HyperAlgorithm::jmap ? jmap_fit(H, y, ig_eps, ig_xi, init, opt)
                                      : vba_fit(H, y, ig_eps, ig_xi, init, opt);
}

/// Gaussian norms of one outer iteration. `lik` and `prior` are taken at the
/// fitted estimate; `post` and the identity-based evidence at the evaluation
/// point p, using lik_at_eval and prior_at_eval.
struct GaussianNorms {
  double lik = std::numeric_limits<double>::quiet_NaN();
  double prior = std::numeric_limits<double>::quiet_NaN();
  double post = std::numeric_limits<double>::quiet_NaN();
  double evid_direct = std::numeric_limits<double>::quiet_NaN();
  double evid_bayes = std::numeric_limits<double>::quiet_NaN();
  double lik_at_eval = std::numeric_limits<double>::quiet_NaN();
  double prior_at_eval = std::numeric_limits<double>::quiet_NaN();
};

struct SweepRecord {
  std::size_t k = 0;
  double hyper = 0.0;  // E_eps, or the baseline's theta / kappa / lambda
  double residual2 = 0.0;
  double reg2 = 0.0;
  double psi = 0.0;
  double objective = 0.0;
  GaussianNorms norms;
  MetricSet metrics;
  Vector xi;
  Vector sigma;  // sqrt of posterior variances; empty for baselines
  double mean_v_eps = std::numeric_limits<double>::quiet_NaN();
  int inner_iterations = 0;
  bool converged = true;
  BreakdownFlags flags;
};

struct SweepTrace {
  std::vector<SweepRecord> records;
  std::size_t optimum = 0;
};

struct SweepOptions {
  double alpha_eps = 3.0;
  FitOptions fit;
  /// Problems with more rows use the Woodbury-reduced evidence norm.
  Eigen::Index dense_evidence_limit = 4096;
};

/// y^T (H diag(w_xi) H^T + diag(w_eps))^{-1} y. For large m this uses
/// min_xi ||y - H xi||^2_{W_eps^-1} + ||xi||^2_{W_xi^-1}, the same quantity by
/// the matrix inversion lemma.
inline double evidence_norm(const Matrix& H, const Vector& y, const Vector& w_eps,
                            const Vector& w_xi, Eigen::Index dense_limit = 4096) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (H.rows() <= dense_limit) {
    Matrix Omega = H * w_xi.asDiagonal() * H.transpose();
    Omega.diagonal() += w_eps;
    auto F = try_factor_spd(Omega);
    return F ? F->inverse_norm(y) : nan;
  }
  auto F = try_factor_spd(posterior_precision(H, w_eps, w_xi));
  if (!F) return nan;
  const Vector mu = F->solve(H.transpose() * y.cwiseQuotient(w_eps));
  return gaussian_norm_diag(y - H * mu, w_eps) + gaussian_norm_diag(mu, w_xi);
}

namespace detail {

inline std::size_t argmin_finite(const std::vector<SweepRecord>& recs, double GaussianNorms::*field) {
  std::size_t best = 0;
  double best_v = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < recs.size(); ++k) {
    const double v = recs[k].norms.*field;
    if (std::isfinite(v) && v < best_v) {
      best_v = v;
      best = k;
    }
  }
  return best;
}

}  // namespace detail

/// Fills the norms and metrics of a Bayesian record from its fit.
inline SweepRecord make_record(const Matrix& H, const Vector& y, const FitState& s,
                               const std::optional<Vector>& eval_point, Eigen::Index dense_limit) {
  SweepRecord rec;
  const auto m = static_cast<double>(H.rows()), c = static_cast<double>(H.cols());
  rec.xi = s.xi;
  rec.sigma = s.post.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  rec.inner_iterations = s.inner_iterations;
  rec.converged = s.converged;
  rec.flags = s.flags;
  rec.mean_v_eps = s.v_eps.mean();
  const Vector r = y - H * s.xi;
  rec.residual2 = r.squaredNorm();
  rec.reg2 = s.xi.squaredNorm();
  rec.psi = s.v_eps.mean() / s.v_xi.maxCoeff();
  rec.objective = rec.residual2 + rec.psi * rec.reg2;

  if (!s.xi.allFinite()) return rec;
  const Vector p = eval_point.value_or(s.xi);
  auto& n = rec.norms;
  n.lik = gaussian_norm_diag(r, s.w_eps);
  n.prior = gaussian_norm_diag(s.xi, s.w_xi);
  n.lik_at_eval = gaussian_norm_diag(y - H * p, s.w_eps);
  n.prior_at_eval = gaussian_norm_diag(p, s.w_xi);
  const Vector d = p - s.xi;
  n.post = d.dot(posterior_precision(H, s.w_eps, s.w_xi) * d);
  n.evid_bayes = n.lik_at_eval + n.prior_at_eval - n.post;
  n.evid_direct = evidence_norm(H, y, s.w_eps, s.w_xi, dense_limit);

  const double loglik = gaussian_loglik(r, s.w_eps);
  const auto ic = information_criteria(loglik, m, c);
  rec.metrics.aic = ic.aic;
  rec.metrics.bic = ic.bic;
  rec.metrics.aicc = ic.aicc;
  const auto ic2 = information_criteria_2norm(rec.residual2, m, c);
  rec.metrics.aic2 = ic2.aic;
  rec.metrics.bic2 = ic2.bic;
  rec.metrics.aicc2 = ic2.aicc;
  rec.metrics.eb = error_bar(s.post, s.xi);
  rec.metrics.log_por_absolute = -0.5 * n.post;
  return rec;
}

/// Sweeps E_eps over the strictly descending `grid`, warm-starting each inner
/// fit from the previous one. With an evaluation point the optimum is the
/// posterior-norm argmin; without one (estimate mode) that norm vanishes and
/// the likelihood-norm argmin is used.
inline SweepTrace outer_sweep(const Matrix& H, const Vector& y, HyperAlgorithm algo,
                              const std::vector<double>& grid, const IGParams& ig_xi,
                              const std::optional<Vector>& eval_point,
                              const SweepOptions& opt = {}) {
  if (grid.empty()) throw InvalidArgument("outer_sweep: empty grid");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] > 0.0) || !std::isfinite(grid[k])) {
      throw InvalidArgument("outer_sweep: grid values must be positive and finite");
    }
    if (k > 0 && !(grid[k] < grid[k - 1])) {
      throw InvalidArgument("outer_sweep: grid must be strictly descending");
    }
  }
  if (eval_point && eval_point->size() != H.cols()) {
    throw InvalidArgument("outer_sweep: evaluation point does not match H");
  }
  SweepTrace trace;
  std::optional<FitState> prev;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto ig_eps = IGParams::from_mean(opt.alpha_eps, grid[k]);
    FitState s = fit(algo, H, y, ig_eps, ig_xi, prev ? &*prev : nullptr, opt.fit);
    SweepRecord rec = make_record(H, y, s, eval_point, opt.dense_evidence_limit);
    rec.k = k;
    rec.hyper = grid[k];
    trace.records.push_back(std::move(rec));
    if (s.xi.allFinite()) prev = std::move(s);
  }
  trace.optimum = eval_point ? detail::argmin_finite(trace.records, &GaussianNorms::post)
                             : detail::argmin_finite(trace.records, &GaussianNorms::lik);
  return trace;
}

}  // namespace bayesid
