#include "ilpcm/procrustes.hpp"

#include <doctest.h>

#include <cmath>

using namespace ilpcm;

namespace {

arma::mat normalized(const arma::mat& X) {
  arma::mat C = X.each_row() - arma::mean(X, 0);
  return C / std::sqrt(arma::accu(arma::square(C)));
}

// Grid search over planar rotations and reflections of the best trace.
double brute_correlation_2d(const arma::mat& X, const arma::mat& Y) {
  const arma::mat A = normalized(X), B = normalized(Y);
  double best = 0.0;
  for (int t = 0; t < 200000; ++t) {
    const double th = 2.0 * M_PI * t / 200000.0;
    const double c = std::cos(th), s = std::sin(th);
    const arma::mat R = {{c, -s}, {s, c}};
    const arma::mat F = {{c, s}, {s, -c}};
    best = std::max({best, arma::trace(A.t() * B * R), arma::trace(A.t() * B * F)});
  }
  return best;
}

arma::mat rotation(double th) {
  return {{std::cos(th), -std::sin(th)}, {std::sin(th), std::cos(th)}};
}

}  // namespace

TEST_CASE("similarity transforms give correlation one and exact alignment") {
  arma::arma_rng::set_seed(1);
  const arma::mat X = arma::randn(15, 2);
  arma::mat Y = 3.2 * X * rotation(1.1);
  Y.col(0) += 7.0;
  Y.col(1) *= -1.0;
  CHECK(procrustes_correlation(X, Y) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(arma::approx_equal(procrustes_align(Y, X), X, "absdiff", 1e-10));
  const SimilarityTransform T = procrustes_fit(Y, X);
  CHECK(T.scale == doctest::Approx(1.0 / 3.2));
  CHECK(arma::approx_equal(T.R.t() * T.R, arma::eye(2, 2), "absdiff", 1e-12));
  CHECK(arma::approx_equal(T.apply(Y), X, "absdiff", 1e-10));
}

TEST_CASE("correlation agrees with a rotation grid search and is symmetric") {
  arma::arma_rng::set_seed(2);
  for (int rep = 0; rep < 3; ++rep) {
    const arma::mat X = arma::randn(10, 2);
    const arma::mat Y = X + 0.7 * arma::randn(10, 2);
    const double r = procrustes_correlation(X, Y);
    CHECK(r == doctest::Approx(brute_correlation_2d(X, Y)).epsilon(1e-6));
    CHECK(r == doctest::Approx(procrustes_correlation(Y, X)).epsilon(1e-12));
    CHECK(r >= 0.0);
    CHECK(r <= 1.0 + 1e-12);
  }
}

TEST_CASE("degenerate configurations") {
  const arma::mat X = arma::randn(6, 2);
  const arma::mat flat(6, 2, arma::fill::value(3.0));
  CHECK(procrustes_correlation(X, flat) == 0.0);
}

TEST_CASE("rigid alignment keeps the scale") {
  arma::arma_rng::set_seed(3);
  const arma::mat X = arma::randn(8, 2);
  const arma::mat Y = 2.0 * X * rotation(0.4);
  const arma::mat A = procrustes_align(Y, X, Scaling::rigid);
  const arma::rowvec centre = arma::mean(X, 0);
  arma::mat expected = 2.0 * (X.each_row() - centre);
  expected.each_row() += centre;
  CHECK(arma::approx_equal(A, expected, "absdiff", 1e-10));
}
