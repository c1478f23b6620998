#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <bayesid/rng.hpp>
#include <bayesid/types.hpp>

namespace testutil {

using bayesid::Matrix;
using bayesid::Vector;

/// Seeded source of random test instances.
class Random {
 public:
  explicit Random(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * bayesid::rng::uniform_open(gen_);
  }
  double normal() { return normal_(gen_); }
  int integer(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(uniform() * (hi - lo + 1));
  }
  Vector normal_vector(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }
  Matrix normal_matrix(Eigen::Index r, Eigen::Index c) {
    Matrix M(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) M(i, j) = normal();
    return M;
  }
  /// Positive entries spread over a few decades.
  Vector log_uniform_vector(Eigen::Index n, double lo, double hi) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = std::exp(uniform(std::log(lo), std::log(hi)));
    return v;
  }

 private:
  bayesid::rng::Xoshiro256pp gen_;
  bayesid::rng::StandardNormal normal_;
};

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

/// |a - b| relative to max(|a|, |b|, floor).
inline double rel_diff(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace testutil
