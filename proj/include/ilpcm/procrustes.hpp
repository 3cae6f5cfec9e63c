#pragma once

#include <armadillo>

namespace ilpcm {

// Similarity of two n x p configurations after optimal translation,
// rotation/reflection and scaling: sqrt(1 - m^2), where m^2 is the minimized
// Procrustes sum of squares of the normalized, centered configurations.
// Symmetric in its arguments; in [0, 1]. Returns 0 if either configuration
// has no spread.
double procrustes_correlation(const arma::mat& X, const arma::mat& Y);

enum class Scaling { rigid, similarity };

// y -> scale * (y - from_mean) * R + to_mean, for row vectors y.
struct SimilarityTransform {
  arma::mat R;  // p x p orthogonal
  double scale = 1.0;
  arma::rowvec from_mean;
  arma::rowvec to_mean;

  arma::mat apply(const arma::mat& Y) const;
};

// Optimal map of Y onto X.
SimilarityTransform procrustes_fit(const arma::mat& Y, const arma::mat& X,
                                   Scaling scaling = Scaling::similarity);

// Y mapped onto the reference X by the optimal translation,
// rotation/reflection and (optionally) isotropic scaling.
arma::mat procrustes_align(const arma::mat& Y, const arma::mat& X,
                           Scaling scaling = Scaling::similarity);

}  // namespace ilpcm
