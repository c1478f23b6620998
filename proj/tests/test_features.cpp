#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include <bayesid/features.hpp>

#include "test_util.hpp"

using namespace bayesid;

namespace {

// Evaluates a label such as "x1^2*x3" or "sin(x2)" on x by parsing the text.
double eval_label(const std::string& label, const Vector& x) {
  if (label == "1") return 1.0;
  if (label.rfind("sin(x", 0) == 0 || label.rfind("cos(x", 0) == 0) {
    const int v = std::stoi(label.substr(5)) - 1;
    return label[0] == 's' ? std::sin(x[v]) : std::cos(x[v]);
  }
  double value = 1.0;
  std::stringstream ss(label);
  std::string factor;
  while (std::getline(ss, factor, '*')) {
    const auto caret = factor.find('^');
    const int v = std::stoi(factor.substr(1, caret == std::string::npos ? std::string::npos : caret - 1)) - 1;
    const int p = caret == std::string::npos ? 1 : std::stoi(factor.substr(caret + 1));
    value *= std::pow(x[v], p);
  }
  return value;
}

}  // namespace

TEST(TermCount, Examples) {
  EXPECT_EQ(term_count({false, 2, {}}, 3), 9u);
  EXPECT_EQ(term_count({true, 2, {}}, 3), 10u);
  EXPECT_EQ(term_count({true, 3, {}}, 3), 20u);
  EXPECT_EQ(term_count({false, 1, {}}, 3), 3u);
}

TEST(TermCount, MatchesBinomialFormula) {
  for (std::size_t n = 1; n <= 5; ++n) {
    for (int d = 1; d <= 3; ++d) {
      // C(n + d, d) monomials of degree <= d, including the constant.
      double binom = 1.0;
      for (int k = 1; k <= d; ++k) binom = binom * static_cast<double>(n + static_cast<std::size_t>(k)) / k;
      EXPECT_EQ(term_count({true, d, {}}, n), static_cast<std::size_t>(std::lround(binom)));
      EXPECT_EQ(term_count({false, d, {}}, n), static_cast<std::size_t>(std::lround(binom)) - 1);
    }
  }
}

TEST(TermCount, UnsupportedDegreeThrows) {
  EXPECT_THROW(term_count({false, 0, {}}, 3), InvalidArgument);
  EXPECT_THROW(term_count({false, 4, {}}, 3), InvalidArgument);
  EXPECT_THROW(term_count({false, 2, {}}, 0), InvalidArgument);
}

TEST(BuildLibrary, DocumentedOrder) {
  Matrix X(1, 3);
  X << 1, 2, 3;
  const auto lib = build_library(X, {true, 2, {}});
  Vector expect(10);
  expect << 1, 1, 2, 3, 1, 2, 3, 4, 6, 9;
  EXPECT_EQ(Vector(lib.H.row(0).transpose()), expect);
  const std::vector<std::string> labels{"1",     "x1",    "x2",    "x3",    "x1^2",
                                        "x1*x2", "x1*x3", "x2^2", "x2*x3", "x3^2"};
  EXPECT_EQ(lib.labels, labels);
}

TEST(BuildLibrary, ZerosWithConstant) {
  const auto lib = build_library(Matrix::Zero(4, 3), {true, 3, {}});
  EXPECT_TRUE((lib.H.col(0).array() == 1.0).all());
  EXPECT_EQ(lib.H.rightCols(lib.H.cols() - 1).cwiseAbs().maxCoeff(), 0.0);
}

TEST(BuildLibrary, Univariate) {
  Matrix X(1, 1);
  X << 1.5;
  const auto lib = build_library(X, {false, 3, {}});
  ASSERT_EQ(lib.H.cols(), 3);
  EXPECT_DOUBLE_EQ(lib.H(0, 0), 1.5);
  EXPECT_DOUBLE_EQ(lib.H(0, 1), 2.25);
  EXPECT_DOUBLE_EQ(lib.H(0, 2), 3.375);
}

TEST(BuildLibrary, NonFiniteNamesPosition) {
  Matrix X = Matrix::Ones(3, 3);
  X(2, 1) = INFINITY;
  try {
    build_library(X, {false, 2, {}});
    FAIL();
  } catch (const InvalidArgument& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row 2"), std::string::npos);
    EXPECT_NE(msg.find("column 1"), std::string::npos);
  }
}

TEST(BuildLibrary, RowPermutation) {
  testutil::Random rnd(1);
  const Matrix X = rnd.normal_matrix(9, 3);
  Eigen::PermutationMatrix<Eigen::Dynamic> P(9);
  P.setIdentity();
  P.applyTranspositionOnTheLeft(0, 7);
  P.applyTranspositionOnTheLeft(2, 5);
  const LibrarySpec spec{true, 3, {}};
  EXPECT_EQ(build_library(P * X, spec).H, P * build_library(X, spec).H);
}

TEST(BuildLibrary, PrefixStability) {
  testutil::Random rnd(2);
  const Matrix X = rnd.normal_matrix(15, 3);
  for (bool constant : {false, true}) {
    for (int d = 1; d <= 2; ++d) {
      const auto lo = build_library(X, {constant, d, {}});
      const auto hi = build_library(X, {constant, d + 1, {}});
      EXPECT_EQ(hi.H.leftCols(lo.H.cols()), lo.H);
      EXPECT_TRUE(std::equal(lo.labels.begin(), lo.labels.end(), hi.labels.begin()));
    }
  }
}

TEST(BuildLibrary, LabelsReevaluate) {
  testutil::Random rnd(3);
  LibrarySpec spec{true, 3, {{UnaryTerm::Kind::sin, 0}, {UnaryTerm::Kind::cos, 2}}};
  const Matrix X = rnd.normal_matrix(6, 3) * 2.0;
  const auto lib = build_library(X, spec);
  ASSERT_EQ(lib.labels.size(), 22u);
  const std::set<std::string> unique(lib.labels.begin(), lib.labels.end());
  EXPECT_EQ(unique.size(), lib.labels.size());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const Vector x = X.row(i).transpose();
    for (std::size_t l = 0; l < lib.labels.size(); ++l) {
      const double want = eval_label(lib.labels[l], x);
      EXPECT_LE(testutil::rel_diff(lib.H(i, static_cast<Eigen::Index>(l)), want, 1e-300), 1e-14)
          << lib.labels[l];
    }
  }
}

TEST(BuildLibrary, TrigTermOutOfRangeThrows) {
  LibrarySpec spec{false, 1, {{UnaryTerm::Kind::sin, 3}}};
  EXPECT_THROW(build_library(Matrix::Ones(2, 3), spec), InvalidArgument);
}
