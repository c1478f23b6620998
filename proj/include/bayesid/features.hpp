#pragma once

// Candidate-function libraries: monomials up to degree 3 in the state
// variables, optionally a constant column and unary trig terms.
//
// Column order: constant (if present), then monomials by total degree
// ascending, and within one degree by exponent tuple in descending
// lexicographic order, e.g. for n = 3, d = 2:
//   1, x1, x2, x3, x1^2, x1*x2, x1*x3, x2^2, x2*x3, x3^2
// Trig terms follow the monomials in the order given. Because the order
// within a degree never depends on d, the degree-d library is a prefix of
// the degree-(d+1) library.

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "bayesid/errors.hpp"
#include "bayesid/types.hpp"

namespace bayesid {

struct UnaryTerm {
  enum class Kind { sin, cos };
  Kind kind = Kind::sin;
  int variable = 0;  // zero-based state index

  friend bool operator==(const UnaryTerm&, const UnaryTerm&) = default;
};

struct LibrarySpec {
  bool include_constant = false;
  int degree = 2;
  std::vector<UnaryTerm> extra_terms;

  friend bool operator==(const LibrarySpec&, const LibrarySpec&) = default;
};

/// Exponent tuple of one monomial; all zeros is the constant term.
using Monomial = std::vector<int>;

struct LibraryMatrix {
  Matrix H;
  std::vector<std::string> labels;
  LibrarySpec spec;
  std::vector<Monomial> monomials;  // one per polynomial column, in column order
};

namespace detail {

inline void check_spec(const LibrarySpec& spec, std::size_t n) {
  if (n < 1) throw InvalidArgument("library: state dimension must be >= 1");
  if (spec.degree < 1 || spec.degree > 3) {
    throw InvalidArgument("library: polynomial degree must be 1, 2 or 3 (got " +
                          std::to_string(spec.degree) + ")");
  }
  for (const auto& term : spec.extra_terms) {
    if (term.variable < 0 || static_cast<std::size_t>(term.variable) >= n) {
      throw InvalidArgument("library: trig term refers to a missing state variable");
    }
  }
}

// Exponent tuples of total degree `d` in `n` variables, descending lex order.
inline void append_degree(std::vector<Monomial>& out, std::size_t n, int d) {
  Monomial e(n, 0);
  auto recurse = [&](auto& self, std::size_t var, int remaining) -> void {
    if (var + 1 == n) {
      e[var] = remaining;
      out.push_back(e);
      return;
    }
    for (int p = remaining; p >= 0; --p) {
      e[var] = p;
      self(self, var + 1, remaining - p);
    }
  };
  recurse(recurse, 0, d);
}

}  // namespace detail

inline std::vector<Monomial> library_monomials(const LibrarySpec& spec, std::size_t n) {
  detail::check_spec(spec, n);
  std::vector<Monomial> out;
  if (spec.include_constant) out.emplace_back(n, 0);
  for (int d = 1; d <= spec.degree; ++d) detail::append_degree(out, n, d);
  return out;
}

/// Number of library columns for an n-dimensional state.
inline std::size_t term_count(const LibrarySpec& spec, std::size_t n) {
  return library_monomials(spec, n).size() + spec.extra_terms.size();
}

inline std::string monomial_label(const Monomial& e) {
  std::string label;
  for (std::size_t v = 0; v < e.size(); ++v) {
    if (e[v] == 0) continue;
    if (!label.empty()) label += '*';
    label += 'x' + std::to_string(v + 1);
    if (e[v] > 1) label += '^' + std::to_string(e[v]);
  }
  return label.empty() ? "1" : label;
}

inline std::string unary_label(const UnaryTerm& t) {
  return std::string(t.kind == UnaryTerm::Kind::sin ? "sin" : "cos") + "(x" +
         std::to_string(t.variable + 1) + ")";
}

inline std::vector<std::string> library_labels(const LibrarySpec& spec, std::size_t n) {
  std::vector<std::string> labels;
  for (const auto& m : library_monomials(spec, n)) labels.push_back(monomial_label(m));
  for (const auto& t : spec.extra_terms) labels.push_back(unary_label(t));
  return labels;
}

/// Monomial value by repeated multiplication (no pow) so results are exact
/// products of the inputs.
template <class Row>
double eval_monomial(const Monomial& e, const Row& x) {
  double value = 1.0;
  for (std::size_t v = 0; v < e.size(); ++v) {
    for (int p = 0; p < e[v]; ++p) value *= x[static_cast<Eigen::Index>(v)];
  }
  return value;
}

/// One library row for state `x`; `monomials` from library_monomials().
inline Vector library_row(const LibrarySpec& spec, const std::vector<Monomial>& monomials,
                          const Vector& x) {
  Vector row(static_cast<Eigen::Index>(monomials.size() + spec.extra_terms.size()));
  Eigen::Index col = 0;
  for (const auto& m : monomials) row[col++] = eval_monomial(m, x);
  for (const auto& t : spec.extra_terms) {
    const double xv = x[t.variable];
    row[col++] = t.kind == UnaryTerm::Kind::sin ? std::sin(xv) : std::cos(xv);
  }
  return row;
}

inline LibraryMatrix build_library(const Matrix& X, const LibrarySpec& spec) {
  const auto n = static_cast<std::size_t>(X.cols());
  auto monomials = library_monomials(spec, n);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      if (!std::isfinite(X(i, j))) {
        std::ostringstream msg;
        msg << "build_library: non-finite state at row " << i << ", column " << j;
        throw InvalidArgument(msg.str());
      }
    }
  }
  LibraryMatrix lib;
  lib.spec = spec;
  lib.labels = library_labels(spec, n);
  lib.H.resize(X.rows(), static_cast<Eigen::Index>(lib.labels.size()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const Vector x = X.row(i).transpose();
    lib.H.row(i) = library_row(spec, monomials, x).transpose();
  }
  lib.monomials = std::move(monomials);
  return lib;
}

}  // namespace bayesid
