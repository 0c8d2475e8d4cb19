#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "ugcqa/error.hpp"

namespace ugcqa {

using VecRef = Eigen::Ref<const Eigen::VectorXd>;
using IntVecRef = Eigen::Ref<const Eigen::VectorXi>;

/// Average ranks (1-based); tied values share the mean of their positions.
Eigen::VectorXd average_ranks(const VecRef& x);

/// Spearman rank-order correlation: Pearson correlation of average ranks.
/// Requires equal lengths >= 3 and non-constant inputs.
double srcc(const VecRef& x, const VecRef& y);

/// Sample Pearson correlation. Requires equal lengths >= 3 and
/// non-constant inputs. No nonlinear pre-mapping is applied here.
double plcc(const VecRef& x, const VecRef& y);

/// sqrt(mean((x - y)^2)). Requires equal lengths >= 3.
double rmse(const VecRef& x, const VecRef& y);

struct ConfusionCounts {
    std::int64_t tp = 0;
    std::int64_t tn = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;

    std::int64_t total() const { return tp + tn + fp + fn; }
    std::int64_t positives() const { return tp + fn; }   // ground-truth positives
    std::int64_t negatives() const { return tn + fp; }   // ground-truth negatives
};

/// Counts over binary labels in {0,1}; class 1 is positive.
ConfusionCounts confusion(const IntVecRef& predicted, const IntVecRef& truth);

/// (TP+TN)/(P+N).
double accuracy(const ConfusionCounts& c);

/// Fraction of exact matches; works for any label alphabet.
double accuracy(const IntVecRef& predicted, const IntVecRef& truth);

/// (TP/(TP+FN) + TN/(TN+FP)) / 2. Requires both classes present in truth.
double balanced_accuracy(const ConfusionCounts& c);

/// Mean zero-one error over ranks; equals 1 - accuracy.
double mze(const IntVecRef& predicted_ranks, const IntVecRef& true_ranks);

/// Mean absolute rank deviation.
double mae_ordinal(const IntVecRef& predicted_ranks, const IntVecRef& true_ranks);

/// 4-parameter logistic y = b2 + (b1-b2)/(1+exp(-(x-b3)/|b4|)), fitted by
/// damped Gauss-Newton least squares. Used as an optional pre-mapping in
/// front of PLCC for sensitivity checks.
struct Logistic4 {
    double b1 = 1.0, b2 = 0.0, b3 = 0.0, b4 = 1.0;

    double operator()(double x) const;
    Eigen::VectorXd map(const VecRef& x) const;
};

Logistic4 fit_logistic4(const VecRef& x, const VecRef& y);

}  // namespace ugcqa
