#pragma once

#include <vector>

#include <Eigen/Core>

#include "ugcqa/image.hpp"

namespace ugcqa {

/// Mean-subtracted contrast-normalized coefficients:
///   (I - mu) / (sigma + C),  C = 1/255,
/// with local mean/std taken under a unit-sum 7x7 Gaussian window
/// (sigma = 7/6) and half-sample symmetric boundary extension.
Eigen::ArrayXXd mscn_coefficients(const ImagePlane& img);

/// Zero-mean generalized Gaussian fit by moment matching: the ratio
/// (E|x|)^2 / E[x^2] is inverted through the gamma-function relation on a
/// precomputed shape grid alpha in [0.2, 10] (step 0.001, nearest lookup).
/// `variance` is the plain second moment. `clamped` reports a ratio that
/// fell outside the grid and was clipped to its edge.
struct GgdFit {
    double shape = 2.0;
    double variance = 1.0;
    bool clamped = false;
};

GgdFit fit_ggd(const Eigen::Ref<const Eigen::ArrayXd>& samples);

/// Asymmetric GGD fit: separate left/right second moments around zero,
/// shape from the skew-adjusted moment ratio on the same grid, and the
/// mean offset derived from the fitted parameters.
struct AggdFit {
    double shape = 2.0;
    double mean = 0.0;
    double left_variance = 1.0;
    double right_variance = 1.0;
    bool clamped = false;
};

AggdFit fit_aggd(const Eigen::Ref<const Eigen::ArrayXd>& samples);

constexpr int kBrisqueDim = 36;

/// 36-dim NSS signature, 18 per scale (original and one 2x reduction):
///   [0]  GGD shape of the MSCN coefficients
///   [1]  GGD variance
///   [2..5]   AGGD (shape, mean, left var, right var) of horizontal pairs
///   [6..9]   vertical pairs
///   [10..13] main-diagonal pairs
///   [14..17] secondary-diagonal pairs
/// Pairwise products use non-wrapping neighbors, so each product map is one
/// row/column smaller than its MSCN plane.
Eigen::VectorXd brisque_features(const ImagePlane& img);

/// Elementwise arithmetic mean across frame feature vectors.
Eigen::VectorXd pool_temporal(const std::vector<Eigen::VectorXd>& frame_features);

}  // namespace ugcqa
