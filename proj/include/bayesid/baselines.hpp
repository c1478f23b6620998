#pragma once

// Classical solvers for one column of y = H xi: least squares, ridge,
// LASSO (cyclic coordinate descent) and sequentially thresholded least
// squares (STLSQ).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "bayesid/errors.hpp"
#include "bayesid/types.hpp"

namespace bayesid {

struct BaselineResult {
  Vector xi;
  double residual2 = 0.0;   // ||y - H xi||_2^2
  double reg_term = 0.0;    // value of the regularizer (||xi||_2^2 or ||xi||_1)
  double multiplier = 0.0;  // weight applied to reg_term in the objective
  double objective = 0.0;   // residual2 + multiplier * reg_term
  std::vector<Eigen::Index> support;
  int iterations = 0;
  bool converged = true;
  bool degenerate = false;  // STLSQ thresholded everything away
  double optimality = 0.0;  // LASSO scaled subgradient residual
};

namespace detail {

inline void check_problem(const Matrix& H, const Vector& y, const char* who) {
  if (H.rows() < 1 || H.cols() < 1) {
    throw InvalidArgument(std::string(who) + ": H must be non-empty");
  }
  if (H.rows() != y.size()) {
    throw InvalidArgument(std::string(who) + ": H has " + std::to_string(H.rows()) +
                          " rows but y has " + std::to_string(y.size()) + " entries");
  }
  if (!H.allFinite() || !y.allFinite()) {
    throw InvalidArgument(std::string(who) + ": non-finite input");
  }
}

inline std::vector<Eigen::Index> nonzero_support(const Vector& xi) {
  std::vector<Eigen::Index> s;
  for (Eigen::Index l = 0; l < xi.size(); ++l)
    if (xi[l] != 0.0) s.push_back(l);
  return s;
}

inline void finish(BaselineResult& r, const Matrix& H, const Vector& y) {
  r.residual2 = (y - H * r.xi).squaredNorm();
  r.objective = r.residual2 + r.multiplier * r.reg_term;
  r.support = nonzero_support(r.xi);
}

// Minimum-norm least squares via complete orthogonal decomposition
// (column-pivoted QR followed by an RZ step).
inline Vector min_norm_solve(const Matrix& A, const Vector& b) {
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A);
  return cod.solve(b);
}

}  // namespace detail

inline BaselineResult least_squares(const Matrix& H, const Vector& y) {
  detail::check_problem(H, y, "least_squares");
  BaselineResult r;
  r.xi = detail::min_norm_solve(H, y);
  r.iterations = 1;
  detail::finish(r, H, y);
  return r;
}

/// xi = (H^T H + theta I)^{-1} H^T y, solved as the stacked least-squares
/// problem [H; sqrt(theta) I] xi = [y; 0].
inline BaselineResult ridge(const Matrix& H, const Vector& y, double theta) {
  detail::check_problem(H, y, "ridge");
  if (!(theta >= 0.0) || !std::isfinite(theta)) {
    throw InvalidArgument("ridge: theta must be finite and >= 0");
  }
  if (theta == 0.0) return least_squares(H, y);
  const Eigen::Index m = H.rows(), c = H.cols();
  Matrix A(m + c, c);
  A.topRows(m) = H;
  A.bottomRows(c) = std::sqrt(theta) * Matrix::Identity(c, c);
  Vector b = Vector::Zero(m + c);
  b.head(m) = y;
  BaselineResult r;
  r.xi = Eigen::HouseholderQR<Matrix>(A).solve(b);
  r.multiplier = theta;
  r.reg_term = r.xi.squaredNorm();
  r.iterations = 1;
  detail::finish(r, H, y);
  return r;
}

/// Scaled subgradient violation of ||y - H xi||^2 + kappa ||xi||_1.
/// Zero iff xi is optimal; scaled by max(1, 2 ||H^T y||_inf).
inline double lasso_optimality(const Matrix& H, const Vector& y, const Vector& xi, double kappa) {
  const Vector grad = -2.0 * H.transpose() * (y - H * xi);
  double worst = 0.0;
  for (Eigen::Index l = 0; l < xi.size(); ++l) {
    double v;
    if (xi[l] != 0.0) {
      v = std::abs(grad[l] + kappa * (xi[l] > 0.0 ? 1.0 : -1.0));
    } else {
      v = std::max(0.0, std::abs(grad[l]) - kappa);
    }
    worst = std::max(worst, v);
  }
  const double scale = std::max(1.0, 2.0 * (H.transpose() * y).cwiseAbs().maxCoeff());
  return worst / scale;
}

/// Minimizes ||y - H xi||^2 + kappa ||xi||_1 by cyclic coordinate descent
/// on the Gram matrix. Stops when lasso_optimality() <= tol. Not converging
/// within max_iter sweeps is reported, not thrown.
inline BaselineResult lasso(const Matrix& H, const Vector& y, double kappa, double tol = 1e-10,
                            int max_iter = 100'000) {
  detail::check_problem(H, y, "lasso");
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
    throw InvalidArgument("lasso: kappa must be finite and >= 0");
  }
  const Eigen::Index c = H.cols();
  const Matrix G = H.transpose() * H;
  const Vector b = H.transpose() * y;
  Vector xi = Vector::Zero(c);
  Vector g = Vector::Zero(c);  // G * xi, kept in sync
  const double half_kappa = 0.5 * kappa;

  BaselineResult r;
  r.multiplier = kappa;
  r.converged = false;
  int sweep = 0;
  for (; sweep < max_iter; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index l = 0; l < c; ++l) {
      if (G(l, l) <= 0.0) continue;  // all-zero column
      const double rho = b[l] - (g[l] - G(l, l) * xi[l]);
      double next = 0.0;
      if (rho > half_kappa) {
        next = (rho - half_kappa) / G(l, l);
      } else if (rho < -half_kappa) {
        next = (rho + half_kappa) / G(l, l);
      }
      const double delta = next - xi[l];
      if (delta != 0.0) {
        g += delta * G.col(l);
        xi[l] = next;
        max_change = std::max(max_change, std::abs(delta) * std::sqrt(G(l, l)));
      }
    }
    // Full optimality check only when the sweep has settled.
    if (max_change <= tol * std::max(1.0, std::sqrt(y.squaredNorm())) || sweep % 50 == 49) {
      if (lasso_optimality(H, y, xi, kappa) <= tol) {
        r.converged = true;
        ++sweep;
        break;
      }
      if (max_change == 0.0) break;  // stalled at floating-point resolution
    }
  }
  r.xi = xi;
  r.iterations = sweep;
  r.reg_term = xi.lpNorm<1>();
  r.optimality = lasso_optimality(H, y, xi, kappa);
  if (r.optimality <= tol) r.converged = true;
  detail::finish(r, H, y);
  return r;
}

/// Sequentially thresholded least squares: least squares on the active set,
/// then zero every coefficient with |xi| < lambda, until the active set stops
/// changing or max_iter refits. Objective uses lambda * ||xi||_2^2.
inline BaselineResult stlsq(const Matrix& H, const Vector& y, double lambda, int max_iter = 100) {
  detail::check_problem(H, y, "stlsq");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("stlsq: lambda must be finite and >= 0");
  }
  const Eigen::Index c = H.cols();
  BaselineResult r;
  r.multiplier = lambda;
  r.xi = detail::min_norm_solve(H, y);
  std::vector<bool> active(static_cast<std::size_t>(c), true);
  r.converged = false;
  int it = 0;
  for (; it < max_iter; ++it) {
    std::vector<bool> next(static_cast<std::size_t>(c));
    std::vector<Eigen::Index> cols;
    for (Eigen::Index l = 0; l < c; ++l) {
      next[static_cast<std::size_t>(l)] =
          active[static_cast<std::size_t>(l)] && std::abs(r.xi[l]) >= lambda;
      if (next[static_cast<std::size_t>(l)]) cols.push_back(l);
    }
    if (cols.empty()) {
      r.xi.setZero();
      r.degenerate = true;
      r.converged = true;
      break;
    }
    if (next == active && it > 0) {
      r.converged = true;
      break;
    }
    active = next;
    Matrix Hs(H.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) Hs.col(static_cast<Eigen::Index>(k)) = H.col(cols[k]);
    const Vector sub = detail::min_norm_solve(Hs, y);
    r.xi.setZero();
    for (std::size_t k = 0; k < cols.size(); ++k) r.xi[cols[k]] = sub[static_cast<Eigen::Index>(k)];
  }
  r.iterations = it + 1;
  r.reg_term = r.xi.squaredNorm();
  detail::finish(r, H, y);
  return r;
}

}  // namespace bayesid
