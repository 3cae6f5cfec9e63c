#include "ilpcm/procrustes.hpp"

#include "ilpcm/errors.hpp"

#include <algorithm>
#include <cmath>

namespace ilpcm {

namespace {

arma::mat centered(const arma::mat& A) { return A.each_row() - arma::mean(A, 0); }

}  // namespace

double procrustes_correlation(const arma::mat& X, const arma::mat& Y) {
  if (X.n_rows != Y.n_rows || X.n_cols != Y.n_cols) {
    throw UsageError("procrustes: configurations differ in shape");
  }
  const arma::mat Xc = centered(X);
  const arma::mat Yc = centered(Y);
  const double sx = arma::accu(arma::square(Xc));
  const double sy = arma::accu(arma::square(Yc));
  if (!(sx > 0.0) || !(sy > 0.0)) return 0.0;
  arma::vec s = arma::svd(Xc.t() * Yc);
  const double r = arma::accu(s) / std::sqrt(sx * sy);
  return std::clamp(r, 0.0, 1.0);
}

arma::mat SimilarityTransform::apply(const arma::mat& Y) const {
  arma::mat out = scale * (Y.each_row() - from_mean) * R;
  out.each_row() += to_mean;
  return out;
}

SimilarityTransform procrustes_fit(const arma::mat& Y, const arma::mat& X, Scaling scaling) {
  if (X.n_rows != Y.n_rows || X.n_cols != Y.n_cols) {
    throw UsageError("procrustes: configurations differ in shape");
  }
  SimilarityTransform t;
  t.to_mean = arma::mean(X, 0);
  t.from_mean = arma::mean(Y, 0);
  const arma::mat Xc = X.each_row() - t.to_mean;
  const arma::mat Yc = Y.each_row() - t.from_mean;
  arma::mat U, V;
  arma::vec s;
  if (!arma::svd(U, s, V, Yc.t() * Xc)) throw NumericalError("procrustes: SVD failed");
  t.R = U * V.t();
  if (scaling == Scaling::similarity) {
    const double sy = arma::accu(arma::square(Yc));
    t.scale = sy > 0.0 ? arma::accu(s) / sy : 1.0;
  }
  return t;
}

arma::mat procrustes_align(const arma::mat& Y, const arma::mat& X, Scaling scaling) {
  return procrustes_fit(Y, X, scaling).apply(Y);
}

}  // namespace ilpcm
