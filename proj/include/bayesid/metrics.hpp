#pragma once

// Information criteria, the error-bar metric and posterior odds ratios.

#include <cmath>
#include <limits>
#include <optional>

#include "bayesid/errors.hpp"
#include "bayesid/gauss_bayes.hpp"
#include "bayesid/types.hpp"

namespace bayesid {

struct InformationCriteria {
  double aic = 0.0;
  double bic = 0.0;
  std::optional<double> aicc;  // undefined unless m > c + 2
};

struct MetricSet {
  double aic = std::numeric_limits<double>::quiet_NaN();
  double bic = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> aicc;
  double aic2 = std::numeric_limits<double>::quiet_NaN();
  double bic2 = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> aicc2;
  std::optional<double> eb;
  double log_por_absolute = std::numeric_limits<double>::quiet_NaN();
};

inline InformationCriteria information_criteria(double loglik, double m, double c) {
  InformationCriteria ic;
  ic.aic = -2.0 * loglik + 2.0 * c;
  ic.bic = -2.0 * loglik + c * std::log(m);
  if (m > c + 2.0) ic.aicc = ic.aic + 2.0 * (c + 1.0) * (c + 2.0) / (m - c - 2.0);
  return ic;
}

/// Same criteria with ln p replaced by -(m/2) ln(rss/m). rss = 0 yields -inf
/// for every criterion rather than an error.
inline InformationCriteria information_criteria_2norm(double rss, double m, double c) {
  if (rss < 0.0 || std::isnan(rss)) {
    throw InvalidArgument("information_criteria_2norm: rss must be >= 0");
  }
  if (rss == 0.0) {
    const double ninf = -std::numeric_limits<double>::infinity();
    InformationCriteria ic{ninf, ninf, std::nullopt};
    if (m > c + 2.0) ic.aicc = ninf;
    return ic;
  }
  return information_criteria(-0.5 * m * std::log(rss / m), m, c);
}

/// Gaussian log-likelihood of residual r under diagonal variances w.
inline double gaussian_loglik(const Vector& r, const Vector& w) {
  const auto m = static_cast<double>(r.size());
  return -0.5 * gaussian_norm_diag(r, w) - 0.5 * w.array().log().sum() - 0.5 * m * kLog2Pi;
}

/// Sum of Delta_ll / xi_l^2 over coefficients with |xi_l| > 1e-12 max|xi|;
/// nullopt when xi is identically zero.
inline std::optional<double> error_bar(const GaussianBelief& post, const Vector& xi) {
  if (post.cov.rows() != xi.size()) throw InvalidArgument("error_bar: dimension mismatch");
  if (xi.size() == 0) return std::nullopt;
  const double peak = xi.cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) return std::nullopt;
  double eb = 0.0;
  for (Eigen::Index l = 0; l < xi.size(); ++l) {
    if (std::abs(xi[l]) > 1e-12 * peak) eb += post.cov(l, l) / (xi[l] * xi[l]);
  }
  return eb;
}

namespace detail {
inline double posterior_norm_at(const GaussianBelief& post, const Vector& at) {
  if (at.size() != post.mean.size()) throw InvalidArgument("log_por: dimension mismatch");
  return factor_spd(post.cov, "log_por covariance").inverse_norm(at - post.mean);
}
}  // namespace detail

inline double log_por(const GaussianBelief& post1, const GaussianBelief& post2, const Vector& at) {
  return -0.5 * (detail::posterior_norm_at(post1, at) - detail::posterior_norm_at(post2, at));
}

inline double log_por_absolute(const GaussianBelief& post, const Vector& at) {
  return -0.5 * detail::posterior_norm_at(post, at);
}

}  // namespace bayesid
