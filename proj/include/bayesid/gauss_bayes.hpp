#pragma once

// Closed-form Gaussian machinery for y = H xi + e with e ~ N(0, V_eps) and
// prior xi ~ N(mu, V_xi): posterior, evidence, Mahalanobis ("Gaussian")
// norms, log-densities and the negative log-posterior objective.

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bayesid/errors.hpp"
#include "bayesid/types.hpp"

namespace bayesid {

struct GaussianBelief {
  Vector mean;
  Matrix cov;

  Eigen::Index dim() const { return mean.size(); }
};

/// Diagonal noise covariance V_eps = diag(variances).
struct NoiseCov {
  Vector variances;

  static NoiseCov isotropic(Eigen::Index m, double variance) {
    return {Vector::Constant(m, variance)};
  }
};

inline const double kLog2Pi = std::log(2.0 * std::numbers::pi);

/// Cholesky factor of a symmetric positive-definite matrix, with its log
/// determinant and reciprocal condition estimate.
struct SpdFactor {
  Eigen::LLT<Matrix> llt;
  double logdet = 0.0;
  double rcond = 0.0;
  bool jittered = false;

  Vector solve(const Vector& b) const { return llt.solve(b); }
  Matrix inverse() const {
    return llt.solve(Matrix::Identity(llt.rows(), llt.rows()));
  }
  /// v^T A^{-1} v without forming the inverse.
  double inverse_norm(const Vector& v) const {
    return llt.matrixL().solve(v).squaredNorm();
  }
};

namespace detail {

inline std::optional<SpdFactor> llt_once(const Matrix& A) {
  SpdFactor f;
  f.llt.compute(A);
  if (f.llt.info() != Eigen::Success) return std::nullopt;
  const auto diag = f.llt.matrixLLT().diagonal();
  if (!diag.allFinite() || (diag.array() <= 0.0).any()) return std::nullopt;
  f.logdet = 2.0 * diag.array().log().sum();
  f.rcond = f.llt.rcond();
  return f;
}

// log|det A| from a pivoted LDL^T, only used to report a failed factorization.
inline double signed_logdet_estimate(const Matrix& A) {
  if (!A.allFinite()) return std::numeric_limits<double>::quiet_NaN();
  Eigen::LDLT<Matrix> ldlt(A);
  return ldlt.vectorD().array().abs().log().sum();
}

inline void check_square(const Matrix& A, const char* who) {
  if (A.rows() != A.cols()) {
    throw InvalidArgument(std::string(who) + ": matrix must be square");
  }
}

}  // namespace detail

/// Cholesky with one retry at A + 1e-12 * mean(diag A) * I; nullopt if both fail.
inline std::optional<SpdFactor> try_factor_spd(const Matrix& A) {
  if (A.rows() == 0 || !A.allFinite()) return std::nullopt;
  if (auto f = detail::llt_once(A)) return f;
  const double jitter = 1e-12 * A.diagonal().mean();
  if (!(jitter > 0.0)) return std::nullopt;
  Matrix B = A;
  B.diagonal().array() += jitter;
  auto f = detail::llt_once(B);
  if (f) f->jittered = true;
  return f;
}

inline SpdFactor factor_spd(const Matrix& A, const std::string& who) {
  detail::check_square(A, who.c_str());
  if (auto f = try_factor_spd(A)) return std::move(*f);
  throw NumericalBreakdown(who + ": matrix is not positive definite",
                           detail::signed_logdet_estimate(A));
}

/// v^T M v.
inline double gaussian_norm(const Vector& v, const Matrix& precision) {
  detail::check_square(precision, "gaussian_norm");
  if (precision.rows() != v.size()) {
    throw InvalidArgument("gaussian_norm: vector of size " + std::to_string(v.size()) +
                          " against a " + std::to_string(precision.rows()) + "-dim matrix");
  }
  return v.dot(precision * v);
}

/// v^T diag(variances)^{-1} v.
inline double gaussian_norm_diag(const Vector& v, const Vector& variances) {
  if (v.size() != variances.size()) {
    throw InvalidArgument("gaussian_norm_diag: dimension mismatch");
  }
  return (v.array().square() / variances.array()).sum();
}

namespace detail {

inline void check_model(const Matrix& H, const NoiseCov& noise, const GaussianBelief& prior,
                        const char* who) {
  if (noise.variances.size() != H.rows()) {
    throw InvalidArgument(std::string(who) + ": noise has " +
                          std::to_string(noise.variances.size()) + " variances for " +
                          std::to_string(H.rows()) + " rows");
  }
  if (prior.mean.size() != H.cols() || prior.cov.rows() != H.cols() ||
      prior.cov.cols() != H.cols()) {
    throw InvalidArgument(std::string(who) + ": prior dimension does not match H");
  }
  if (!(noise.variances.array() > 0.0).all()) {
    throw InvalidArgument(std::string(who) + ": noise variances must be positive");
  }
}

inline bool is_diagonal(const Matrix& A) {
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    for (Eigen::Index i = 0; i < A.rows(); ++i)
      if (i != j && A(i, j) != 0.0) return false;
  return true;
}

// Prior precision V_xi^{-1}; elementwise for diagonal priors.
inline Matrix prior_precision(const Matrix& cov) {
  if (is_diagonal(cov)) {
    if (!(cov.diagonal().array() > 0.0).all()) {
      throw NumericalBreakdown("prior covariance has a nonpositive diagonal",
                               std::numeric_limits<double>::quiet_NaN());
    }
    return cov.diagonal().cwiseInverse().asDiagonal();
  }
  return factor_spd(cov, "prior covariance").inverse();
}

}  // namespace detail

/// H^T diag(w)^{-1} H + diag(v)^{-1}.
inline Matrix posterior_precision(const Matrix& H, const Vector& w_eps, const Vector& w_xi) {
  Matrix P = H.transpose() * (w_eps.cwiseInverse().asDiagonal() * H);
  P.diagonal() += w_xi.cwiseInverse();
  return P;
}

inline GaussianBelief posterior(const Matrix& H, const Vector& y, const NoiseCov& noise,
                                const GaussianBelief& prior) {
  detail::check_model(H, noise, prior, "posterior");
  if (y.size() != H.rows()) throw InvalidArgument("posterior: y does not match H");
  const Matrix prior_prec = detail::prior_precision(prior.cov);
  const Vector inv_v = noise.variances.cwiseInverse();
  Matrix P = H.transpose() * (inv_v.asDiagonal() * H) + prior_prec;
  const SpdFactor F = factor_spd(P, "posterior precision");
  GaussianBelief post;
  post.mean = F.solve(H.transpose() * inv_v.cwiseProduct(y) + prior_prec * prior.mean);
  post.cov = F.inverse();
  return post;
}

inline GaussianBelief evidence(const Matrix& H, const NoiseCov& noise,
                               const GaussianBelief& prior) {
  detail::check_model(H, noise, prior, "evidence");
  GaussianBelief ev;
  ev.mean = H * prior.mean;
  ev.cov = H * prior.cov * H.transpose();
  ev.cov.diagonal() += noise.variances;
  return ev;
}

inline double log_density(const GaussianBelief& belief, const Vector& point) {
  if (point.size() != belief.mean.size() || belief.cov.rows() != belief.mean.size()) {
    throw InvalidArgument("log_density: dimension mismatch");
  }
  const SpdFactor F = factor_spd(belief.cov, "log_density covariance");
  const auto k = static_cast<double>(point.size());
  return -0.5 * F.inverse_norm(point - belief.mean) - 0.5 * F.logdet - 0.5 * k * kLog2Pi;
}

/// Full negative log-posterior -ln p(xi | y) written as
/// -ln p(y | xi) - ln p(xi) + ln p(y).
inline double map_objective(const Vector& xi, const Matrix& H, const Vector& y,
                            const NoiseCov& noise, const GaussianBelief& prior) {
  detail::check_model(H, noise, prior, "map_objective");
  if (xi.size() != H.cols() || y.size() != H.rows()) {
    throw InvalidArgument("map_objective: dimension mismatch");
  }
  const auto m = static_cast<double>(H.rows());
  const double neg_log_lik = 0.5 * gaussian_norm_diag(y - H * xi, noise.variances) +
                             0.5 * noise.variances.array().log().sum() + 0.5 * m * kLog2Pi;
  const double neg_log_prior = -log_density(prior, xi);
  const double log_evidence = log_density(evidence(H, noise, prior), y);
  return neg_log_lik + neg_log_prior + log_evidence;
}

/// Gamma(alpha, beta) prior (shape, rate) on the Laplace rate zeta, updated
/// by iid samples with known location mu: (alpha + n, beta + sum |x - mu|).
inline std::pair<double, double> gamma_laplace_update(double alpha, double beta,
                                                      const std::vector<double>& samples,
                                                      double mu) {
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw InvalidArgument("gamma_laplace_update: alpha and beta must be positive");
  }
  double s = 0.0;
  for (double x : samples) s += std::abs(x - mu);
  return {alpha + static_cast<double>(samples.size()), beta + s};
}

/// ln of the Gamma(shape, rate) density at zeta > 0.
inline double gamma_log_pdf(double shape, double rate, double zeta) {
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(zeta) -
         rate * zeta;
}

}  // namespace bayesid
