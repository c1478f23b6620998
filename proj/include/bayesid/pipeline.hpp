#pragma once

// End-to-end identification: simulate noisy data, build the library, run one
// algorithm column by column over its hyperparameter grid, select an optimum
// per column, and re-simulate the identified model.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bayesid/baselines.hpp"
#include "bayesid/errors.hpp"
#include "bayesid/features.hpp"
#include "bayesid/hyper_est.hpp"
#include "bayesid/integrator.hpp"
#include "bayesid/metrics.hpp"
#include "bayesid/systems.hpp"
#include "bayesid/types.hpp"

namespace bayesid {

enum class Algorithm { ls, ridge, lasso, stlsq, jmap, vba };
enum class EvalPoint { truth, estimate };

inline std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::ls: return "ls";
    case Algorithm::ridge: return "ridge";
    case Algorithm::lasso: return "lasso";
    case Algorithm::stlsq: return "stlsq";
    case Algorithm::jmap: return "jmap";
    case Algorithm::vba: return "vba";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view s) {
  for (auto a : {Algorithm::ls, Algorithm::ridge, Algorithm::lasso, Algorithm::stlsq,
                 Algorithm::jmap, Algorithm::vba}) {
    if (algorithm_name(a) == s) return a;
  }
  throw InvalidArgument("unknown algorithm '" + std::string(s) + "'");
}

inline bool is_bayesian(Algorithm a) { return a == Algorithm::jmap || a == Algorithm::vba; }

inline std::string_view eval_point_name(EvalPoint e) {
  return e == EvalPoint::truth ? "truth" : "estimate";
}

inline EvalPoint parse_eval_point(std::string_view s) {
  if (s == "truth") return EvalPoint::truth;
  if (s == "estimate") return EvalPoint::estimate;
  throw InvalidArgument("unknown eval point '" + std::string(s) + "'");
}

/// poly1, poly2, poly3 and the constant-column variants poly2c, poly3c.
inline LibrarySpec parse_alphabet(std::string_view s) {
  LibrarySpec spec;
  if (s == "poly1") spec.degree = 1;
  else if (s == "poly2") spec.degree = 2;
  else if (s == "poly2c") spec = {true, 2, {}};
  else if (s == "poly3") spec.degree = 3;
  else if (s == "poly3c") spec = {true, 3, {}};
  else throw InvalidArgument("unknown alphabet '" + std::string(s) + "'");
  return spec;
}

inline std::string alphabet_name(const LibrarySpec& spec) {
  return "poly" + std::to_string(spec.degree) + (spec.include_constant ? "c" : "");
}

/// `count` log-spaced values from `start` to `stop` inclusive.
inline std::vector<double> log_grid(double start, double stop, int count) {
  if (!(start > 0.0) || !(stop > 0.0) || count < 1) {
    throw InvalidArgument("log_grid: endpoints must be positive and count >= 1");
  }
  std::vector<double> g(static_cast<std::size_t>(count));
  const double a = std::log10(start), b = std::log10(stop);
  for (int k = 0; k < count; ++k) {
    const double f = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
    g[static_cast<std::size_t>(k)] = std::pow(10.0, a + (b - a) * f);
  }
  return g;
}

inline std::vector<double> default_grid(Algorithm a) {
  switch (a) {
    case Algorithm::ls: return {0.0};
    case Algorithm::stlsq: return log_grid(1e2, 1e-3, 20);
    case Algorithm::ridge:
    case Algorithm::lasso:
    case Algorithm::jmap:
    case Algorithm::vba: return log_grid(1e4, 1e-12, 25);
  }
  return {};
}

struct RunConfig {
  SystemId system = SystemId::lorenz;
  SystemParams params = LorenzParams{};
  Vector x0 = default_initial_state(SystemId::lorenz);
  double T = 10.0;
  double dt = 0.01;
  NoiseSpec noise{NoiseFamily::gaussian, 0.2, 1};
  LibrarySpec library{};
  Algorithm algo = Algorithm::jmap;
  std::vector<double> grid;  // empty selects default_grid(algo)
  EvalPoint eval = EvalPoint::truth;
  IntegratorOptions integrator{};
  double alpha_eps = 3.0;
  double alpha_xi = 3.0;
  double e_xi = 1e3;
  FitOptions fit{};
  double lasso_tol = 1e-10;
  int lasso_max_iter = 100'000;
  int stlsq_max_iter = 100;
  /// Forces the selected grid index in every column.
  std::optional<std::size_t> select_index;

  std::vector<double> resolved_grid() const { return grid.empty() ? default_grid(algo) : grid; }

  /// Switches system and resets parameters and initial state to its defaults.
  void set_system(SystemId id) {
    system = id;
    params = default_params(id);
    x0 = default_initial_state(id);
  }

  void validate() const {
    if (system_id(params) != system) throw InvalidArgument("config: parameters belong to another system");
    if (x0.size() != 3) throw InvalidArgument("config: x0 must have 3 entries");
    const auto g = resolved_grid();
    if (g.empty()) throw InvalidArgument("config: empty hyperparameter grid");
    if (algo == Algorithm::ls && g.size() != 1) {
      throw InvalidArgument("config: least squares takes no hyperparameter grid");
    }
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (!std::isfinite(g[k]) || g[k] < 0.0) throw InvalidArgument("config: grid values must be finite and >= 0");
      if (is_bayesian(algo) && !(g[k] > 0.0)) throw InvalidArgument("config: E_eps grid must be positive");
      if (k > 0 && !(g[k] < g[k - 1])) throw InvalidArgument("config: grid must be strictly descending");
    }
    if (select_index && *select_index >= g.size()) throw InvalidArgument("config: select index out of range");
  }
};

struct SyntheticData {
  TimeSeries clean;    // X without noise
  Matrix X_noisy;
  Matrix Xdot;         // derivatives from the noisy states
  LibraryMatrix library;
  Matrix xi_true;      // c x n
};

inline SyntheticData generate_data(const RunConfig& cfg) {
  cfg.validate();
  SyntheticData d;
  d.clean = integrate(cfg.params, cfg.x0, cfg.T, cfg.dt, cfg.integrator);
  d.X_noisy = add_noise(d.clean.X, cfg.noise);
  d.Xdot = derivatives_from_noisy(cfg.params, d.X_noisy);
  d.library = build_library(d.X_noisy, cfg.library);
  d.xi_true = true_coefficients(cfg.params, cfg.library);
  return d;
}

/// Turning point of a curve sampled on a log-spaced hyperparameter grid: the
/// index maximizing the discrete second difference of log(values) over
/// log(hyper). Short or degenerate curves fall back to the smallest value.
inline std::size_t turning_point(const std::vector<double>& hyper, const std::vector<double>& values) {
  const std::size_t K = values.size();
  auto argmin = [&] {
    std::size_t best = 0;
    for (std::size_t k = 1; k < K; ++k)
      if (values[k] < values[best]) best = k;
    return best;
  };
  if (K < 3) return argmin();
  const double tiny = std::numeric_limits<double>::min();
  std::vector<double> lx(K), ly(K);
  for (std::size_t k = 0; k < K; ++k) {
    if (!(hyper[k] > 0.0)) return argmin();
    lx[k] = std::log(hyper[k]);
    ly[k] = std::log(std::max(values[k], tiny));
  }
  std::size_t best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k + 1 < K; ++k) {
    const double h1 = lx[k] - lx[k - 1], h2 = lx[k + 1] - lx[k];
    const double d2 = 2.0 * ((ly[k + 1] - ly[k]) / h2 - (ly[k] - ly[k - 1]) / h1) / (h1 + h2);
    // Grid runs high to low, so the sign of d2 matches the curvature in log(hyper).
    if (std::isfinite(d2) && d2 > best_v) {
      best_v = d2;
      best = k;
    }
  }
  return std::isfinite(best_v) ? best : argmin();
}

struct ColumnResult {
  SweepTrace trace;
  bool flagged = false;  // numerical breakdown at the selected record
};

namespace detail {

inline SweepRecord baseline_record(const BaselineResult& r, double m) {
  SweepRecord rec;
  rec.xi = r.xi;
  rec.residual2 = r.residual2;
  rec.reg2 = r.reg_term;
  rec.psi = r.multiplier;
  rec.objective = r.objective;
  rec.inner_iterations = r.iterations;
  rec.converged = r.converged;
  if (!r.converged) rec.flags.set(Breakdown::non_convergence);
  const auto ic2 = information_criteria_2norm(r.residual2, m, static_cast<double>(r.support.size()));
  rec.metrics.aic2 = ic2.aic;
  rec.metrics.bic2 = ic2.bic;
  rec.metrics.aicc2 = ic2.aicc;
  return rec;
}

}  // namespace detail

/// Runs `cfg.algo` on y = H xi over the grid and selects the optimum.
/// `truth` is used as the Gaussian-norm evaluation point in truth mode.
inline ColumnResult identify_column(const RunConfig& cfg, const Matrix& H, const Vector& y,
                                   const std::optional<Vector>& truth) {
  const auto grid = cfg.resolved_grid();
  const auto m = static_cast<double>(H.rows());
  ColumnResult col;
  auto& trace = col.trace;
  if (is_bayesian(cfg.algo)) {
    SweepOptions so;
    so.alpha_eps = cfg.alpha_eps;
    so.fit = cfg.fit;
    const auto ig_xi = IGParams::from_mean(cfg.alpha_xi, cfg.e_xi);
    const std::optional<Vector> eval = cfg.eval == EvalPoint::truth ? truth : std::nullopt;
    const auto algo = cfg.algo == Algorithm::jmap ? HyperAlgorithm::jmap : HyperAlgorithm::vba;
    trace = outer_sweep(H, y, algo, grid, ig_xi, eval, so);
  } else {
    std::vector<double> curve;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      BaselineResult r;
      switch (cfg.algo) {
        case Algorithm::ls: r = least_squares(H, y); break;
        case Algorithm::ridge: r = ridge(H, y, grid[k]); break;
        case Algorithm::lasso: r = lasso(H, y, grid[k], cfg.lasso_tol, cfg.lasso_max_iter); break;
        case Algorithm::stlsq: r = stlsq(H, y, grid[k], cfg.stlsq_max_iter); break;
        default: break;
      }
      SweepRecord rec = detail::baseline_record(r, m);
      rec.k = k;
      rec.hyper = grid[k];
      curve.push_back(cfg.algo == Algorithm::lasso ? rec.objective : rec.residual2);
      trace.records.push_back(std::move(rec));
    }
    trace.optimum = turning_point(grid, curve);
  }
  if (cfg.select_index) trace.optimum = *cfg.select_index;
  col.flagged = trace.records[trace.optimum].flags.numerical() ||
                !trace.records[trace.optimum].xi.allFinite();
  return col;
}

struct IdentifiedModel {
  Matrix xi;                    // c x n
  std::optional<Matrix> sigma;  // c x n, Bayesian algorithms only
  std::vector<std::string> labels;
  LibrarySpec library;
  std::vector<SweepTrace> traces;
  std::vector<double> chosen_hyper;
  std::vector<bool> flagged;

  std::size_t columns() const { return static_cast<std::size_t>(xi.cols()); }
};

/// Identification on given data. `xi_true` (c x n) supplies evaluation points
/// in truth mode; without it the estimate is used.
inline IdentifiedModel identify(const RunConfig& cfg, const LibraryMatrix& lib, const Matrix& Xdot,
                                const std::optional<Matrix>& xi_true = std::nullopt) {
  cfg.validate();
  if (Xdot.rows() != lib.H.rows()) throw InvalidArgument("identify: data and library row counts differ");
  const Eigen::Index c = lib.H.cols(), n = Xdot.cols();
  IdentifiedModel model;
  model.labels = lib.labels;
  model.library = lib.spec;
  model.xi = Matrix::Zero(c, n);
  if (is_bayesian(cfg.algo)) model.sigma = Matrix::Zero(c, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    std::optional<Vector> truth;
    if (xi_true) truth = xi_true->col(j);
    ColumnResult col = identify_column(cfg, lib.H, Xdot.col(j), truth);
    const auto& rec = col.trace.records[col.trace.optimum];
    model.xi.col(j) = rec.xi;
    if (model.sigma) model.sigma->col(j) = rec.sigma;
    model.chosen_hyper.push_back(rec.hyper);
    model.flagged.push_back(col.flagged);
    model.traces.push_back(std::move(col.trace));
  }
  return model;
}

struct RunResult {
  SyntheticData data;
  IdentifiedModel model;
};

inline RunResult identify(const RunConfig& cfg) {
  RunResult out;
  out.data = generate_data(cfg);
  out.model = identify(cfg, out.data.library, out.data.Xdot, out.data.xi_true);
  return out;
}

struct Resimulation {
  TimeSeries series;  // rows past the blow-up are NaN
  bool blew_up = false;
  double blowup_time = std::numeric_limits<double>::quiet_NaN();
};

/// Integrates x' = library_row(x) * Xi_hat, stopping once |x| exceeds `limit`.
inline Resimulation resimulate(const IdentifiedModel& model, const Vector& x0, double T, double dt,
                               IntegratorOptions opt = {}, double limit = 1e6) {
  if (x0.size() != 3) throw InvalidArgument("resimulate: initial state must be a 3-vector");
  if (!model.xi.allFinite()) throw InvalidArgument("resimulate: model has non-finite coefficients");
  const auto monomials = library_monomials(model.library, static_cast<std::size_t>(x0.size()));
  const Matrix xi_t = model.xi.transpose();
  opt.blowup_threshold = limit;
  Resimulation out;
  out.series.t = uniform_grid(T, dt);
  auto res = integrate_dopri5(
      [&](const Vector& x) -> Vector { return xi_t * library_row(model.library, monomials, x); }, x0,
      std::span<const double>(out.series.t.data(), out.series.t.size()), opt);
  out.series.X = std::move(res.states);
  out.blew_up = res.blew_up;
  out.blowup_time = res.blowup_time;
  return out;
}

/// First time the max-abs state difference exceeds frac * (per-component range
/// of `truth`); the end time when it never does.
inline double divergence_time(const TimeSeries& truth, const TimeSeries& pred, double frac) {
  if (!(frac > 0.0 && frac < 1.0)) throw InvalidArgument("divergence_time: frac must be in (0, 1)");
  if (truth.t.size() != pred.t.size() || truth.X.rows() != pred.X.rows() ||
      truth.X.cols() != pred.X.cols()) {
    throw InvalidArgument("divergence_time: grids differ");
  }
  for (Eigen::Index i = 0; i < truth.t.size(); ++i) {
    if (std::abs(truth.t[i] - pred.t[i]) > 1e-12 * std::max(1.0, std::abs(truth.t[i]))) {
      throw InvalidArgument("divergence_time: grids differ");
    }
  }
  const Vector range = truth.X.colwise().maxCoeff() - truth.X.colwise().minCoeff();
  for (Eigen::Index i = 0; i < truth.t.size(); ++i) {
    for (Eigen::Index j = 0; j < truth.X.cols(); ++j) {
      const double diff = std::abs(truth.X(i, j) - pred.X(i, j));
      if (!(diff <= frac * range[j])) return truth.t[i];  // NaN counts as diverged
    }
  }
  return truth.t[truth.t.size() - 1];
}

}  // namespace bayesid
