#pragma once

// Benchmark chaotic systems, trajectory generation on a uniform grid,
// additive measurement noise and noise-moderated derivative data.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bayesid/errors.hpp"
#include "bayesid/features.hpp"
#include "bayesid/integrator.hpp"
#include "bayesid/rng.hpp"
#include "bayesid/types.hpp"

namespace bayesid {

enum class SystemId { lorenz, vance, shilnikov };

struct LorenzParams {
  double sigma = 10.0;
  double rho = 28.0;
  double beta = 8.0 / 3.0;
};

/// One predator, two prey: x' = (r - alpha x) .* x
struct VanceParams {
  Eigen::Vector3d r{1.0, 1.0, -1.0};
  Eigen::Matrix3d alpha = (Eigen::Matrix3d() << 1.0, 1.0, 10.0,
                                                1.5, 1.0, 1.0,
                                                -5.0, -0.5, 0.0).finished() / 1000.0;
};

/// Cubic modification of Lorenz: x' = y, y' = x(1 - z) - B x^3 - lambda y, z' = -alpha (z - x^2)
struct ShilnikovParams {
  double alpha = 4.0 * std::sqrt(30.0) / 135.0;
  double lambda = 11.0 * std::sqrt(30.0) / 90.0;
  double B = 2.0 / 13.0;
};

using SystemParams = std::variant<LorenzParams, VanceParams, ShilnikovParams>;

inline SystemId system_id(const SystemParams& p) {
  return static_cast<SystemId>(p.index());
}

inline std::string_view system_name(SystemId id) {
  switch (id) {
    case SystemId::lorenz: return "lorenz";
    case SystemId::vance: return "vance";
    case SystemId::shilnikov: return "shilnikov";
  }
  return "?";
}

inline SystemId parse_system(std::string_view name) {
  if (name == "lorenz") return SystemId::lorenz;
  if (name == "vance") return SystemId::vance;
  if (name == "shilnikov") return SystemId::shilnikov;
  throw InvalidArgument("unknown system '" + std::string(name) + "'");
}

inline constexpr std::size_t state_dimension(SystemId) { return 3; }

inline SystemParams default_params(SystemId id) {
  switch (id) {
    case SystemId::lorenz: return LorenzParams{};
    case SystemId::vance: return VanceParams{};
    case SystemId::shilnikov: return ShilnikovParams{};
  }
  throw InvalidArgument("unknown system id");
}

inline Vector default_initial_state(SystemId id) {
  switch (id) {
    case SystemId::lorenz: return Eigen::Vector3d(-8.0, 7.0, 27.0);
    case SystemId::vance: return Eigen::Vector3d(100.0, 100.0, 100.0);
    case SystemId::shilnikov: return Eigen::Vector3d(0.1, 0.1, 0.1);
  }
  throw InvalidArgument("unknown system id");
}

/// Flat parameter vector: lorenz {sigma, rho, beta}; vance {r(3), alpha row-major (9)};
/// shilnikov {alpha, lambda, B}.
inline std::vector<double> params_to_vector(const SystemParams& params) {
  return std::visit(
      [](const auto& p) -> std::vector<double> {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, LorenzParams>) {
          return {p.sigma, p.rho, p.beta};
        } else if constexpr (std::is_same_v<P, VanceParams>) {
          std::vector<double> v{p.r[0], p.r[1], p.r[2]};
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) v.push_back(p.alpha(i, j));
          return v;
        } else {
          return {p.alpha, p.lambda, p.B};
        }
      },
      params);
}

inline SystemParams params_from_vector(SystemId id, std::span<const double> v) {
  const std::size_t expected = id == SystemId::vance ? 12 : 3;
  if (v.size() != expected) {
    throw InvalidArgument(std::string(system_name(id)) + " expects " + std::to_string(expected) +
                          " parameters, got " + std::to_string(v.size()));
  }
  switch (id) {
    case SystemId::lorenz: return LorenzParams{v[0], v[1], v[2]};
    case SystemId::shilnikov: return ShilnikovParams{v[0], v[1], v[2]};
    case SystemId::vance: {
      VanceParams p;
      p.r = Eigen::Vector3d(v[0], v[1], v[2]);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) p.alpha(i, j) = v[3 + 3 * i + j];
      return p;
    }
  }
  throw InvalidArgument("unknown system id");
}

inline Vector rhs(const SystemParams& params, const Vector& x) {
  if (x.size() != 3) {
    throw InvalidArgument("rhs: expected a 3-vector, got size " + std::to_string(x.size()));
  }
  return std::visit(
      [&x](const auto& p) -> Vector {
        using P = std::decay_t<decltype(p)>;
        Vector dx(3);
        if constexpr (std::is_same_v<P, LorenzParams>) {
          dx[0] = p.sigma * (x[1] - x[0]);
          dx[1] = x[0] * (p.rho - x[2]) - x[1];
          dx[2] = x[0] * x[1] - p.beta * x[2];
        } else if constexpr (std::is_same_v<P, VanceParams>) {
          const Eigen::Vector3d s = x.head<3>();
          dx = ((p.r - p.alpha * s).array() * s.array()).matrix();
        } else {
          dx[0] = x[1];
          dx[1] = x[0] * (1.0 - x[2]) - p.B * x[0] * x[0] * x[0] - p.lambda * x[1];
          dx[2] = -p.alpha * (x[2] - x[0] * x[0]);
        }
        return dx;
      },
      params);
}

/// Polynomial form of the right-hand side: for each state component, the
/// (coefficient, exponent tuple) pairs of its nonzero terms.
struct PolyTerm {
  double coefficient;
  Monomial exponents;
};

inline std::vector<std::vector<PolyTerm>> polynomial_form(const SystemParams& params) {
  return std::visit(
      [](const auto& p) -> std::vector<std::vector<PolyTerm>> {
        using P = std::decay_t<decltype(p)>;
        std::vector<std::vector<PolyTerm>> f(3);
        auto add = [&f](int comp, double c, Monomial e) {
          if (c != 0.0) f[static_cast<std::size_t>(comp)].push_back({c, std::move(e)});
        };
        if constexpr (std::is_same_v<P, LorenzParams>) {
          add(0, -p.sigma, {1, 0, 0});
          add(0, p.sigma, {0, 1, 0});
          add(1, p.rho, {1, 0, 0});
          add(1, -1.0, {0, 1, 0});
          add(1, -1.0, {1, 0, 1});
          add(2, 1.0, {1, 1, 0});
          add(2, -p.beta, {0, 0, 1});
        } else if constexpr (std::is_same_v<P, VanceParams>) {
          for (int i = 0; i < 3; ++i) {
            Monomial lin(3, 0);
            lin[static_cast<std::size_t>(i)] = 1;
            add(i, p.r[i], lin);
            for (int k = 0; k < 3; ++k) {
              Monomial quad = lin;
              ++quad[static_cast<std::size_t>(k)];
              add(i, -p.alpha(i, k), quad);
            }
          }
        } else {
          add(0, 1.0, {0, 1, 0});
          add(1, 1.0, {1, 0, 0});
          add(1, -1.0, {1, 0, 1});
          add(1, -p.B, {3, 0, 0});
          add(1, -p.lambda, {0, 1, 0});
          add(2, -p.alpha, {0, 0, 1});
          add(2, p.alpha, {2, 0, 0});
        }
        return f;
      },
      params);
}

/// True coefficient matrix (c x n) of the system in the given library.
/// Throws if the library cannot represent some term of the system.
inline Matrix true_coefficients(const SystemParams& params, const LibrarySpec& spec) {
  const auto monomials = library_monomials(spec, 3);
  const auto c = static_cast<Eigen::Index>(monomials.size() + spec.extra_terms.size());
  Matrix xi = Matrix::Zero(c, 3);
  const auto form = polynomial_form(params);
  for (std::size_t j = 0; j < form.size(); ++j) {
    for (const auto& term : form[j]) {
      Eigen::Index col = -1;
      for (std::size_t l = 0; l < monomials.size(); ++l) {
        if (monomials[l] == term.exponents) col = static_cast<Eigen::Index>(l);
      }
      if (col < 0) {
        throw InvalidArgument("library cannot represent term " + monomial_label(term.exponents) +
                              " of the " + std::string(system_name(system_id(params))) +
                              " system");
      }
      xi(col, static_cast<Eigen::Index>(j)) += term.coefficient;
    }
  }
  return xi;
}

struct TimeSeries {
  Vector t;
  Matrix X;
  std::optional<Matrix> Xdot;

  Eigen::Index samples() const { return t.size(); }
};

/// Uniform output grid t_i = t0 + i * dt, i = 0..round(T/dt).
inline Vector uniform_grid(double T, double dt) {
  if (!(T > 0.0) || !(dt > 0.0)) throw InvalidArgument("grid: T and t_step must be positive");
  const double steps = std::round(T / dt);
  if (steps < 1.0) throw InvalidArgument("grid: T / t_step must be >= 1");
  const auto m = static_cast<Eigen::Index>(steps) + 1;
  Vector t(m);
  for (Eigen::Index i = 0; i < m; ++i) t[i] = static_cast<double>(i) * dt;
  return t;
}

inline TimeSeries integrate(const SystemParams& params, const Vector& x0, double T, double dt,
                            const IntegratorOptions& opt = {}) {
  if (x0.size() != 3) throw InvalidArgument("integrate: initial state must be a 3-vector");
  TimeSeries ts;
  ts.t = uniform_grid(T, dt);
  auto result = integrate_dopri5([&params](const Vector& x) { return rhs(params, x); }, x0,
                                 std::span<const double>(ts.t.data(), ts.t.size()), opt);
  ts.X = std::move(result.states);
  return ts;
}

enum class NoiseFamily { gaussian, laplace };

struct NoiseSpec {
  NoiseFamily family = NoiseFamily::gaussian;
  double scale = 0.0;
  std::uint64_t seed = 1;
};

inline std::string_view noise_name(NoiseFamily f) {
  return f == NoiseFamily::gaussian ? "gaussian" : "laplace";
}

inline NoiseFamily parse_noise(std::string_view name) {
  if (name == "gaussian") return NoiseFamily::gaussian;
  if (name == "laplace") return NoiseFamily::laplace;
  throw InvalidArgument("unknown noise family '" + std::string(name) + "'");
}

/// X + scale * S with unit-variance S drawn row by row from the seeded stream.
inline Matrix add_noise(const Matrix& X, const NoiseSpec& spec) {
  if (!(spec.scale >= 0.0) || !std::isfinite(spec.scale)) {
    throw InvalidArgument("add_noise: scale must be finite and >= 0");
  }
  Matrix out = X;
  if (spec.scale == 0.0) return out;
  rng::Xoshiro256pp gen(spec.seed);
  rng::StandardNormal normal;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      const double s = spec.family == NoiseFamily::gaussian ? normal(gen) : rng::unit_laplace(gen);
      out(i, j) += spec.scale * s;
    }
  }
  return out;
}

/// Row i of the result is rhs(params, row i of X).
inline Matrix derivatives_from_noisy(const SystemParams& params, const Matrix& X) {
  if (X.cols() != 3) {
    throw InvalidArgument("derivatives_from_noisy: expected 3 columns, got " +
                          std::to_string(X.cols()));
  }
  Matrix D(X.rows(), X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const Vector x = X.row(i).transpose();
    if (!x.allFinite()) {
      throw InvalidArgument("derivatives_from_noisy: non-finite state in row " +
                            std::to_string(i));
    }
    D.row(i) = rhs(params, x).transpose();
  }
  return D;
}

}  // namespace bayesid
