#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "ugcqa/error.hpp"

namespace ugcqa {

/// One train/test partition by sample index. Content-disjoint follows from
/// unique content ids: an index appears on exactly one side.
struct SplitRepeat {
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> test;
};

struct SplitPlan {
    std::vector<SplitRepeat> repeats;
    double ratio = 0.8;
    std::uint64_t seed = 0;
    bool stratified = false;
};

/// Seeded, reproducible plan of `repeats` random train/test partitions.
/// Unstratified: round(ratio*n) training samples. Stratified: per class,
/// round((1-ratio)*n_c) test samples (never leaving a class empty on
/// either side), which preserves class proportions within one sample.
/// Requires n >= 10 and, when stratified, every class to have at least 2
/// members. Labels are ignored when stratified is false.
SplitPlan make_splits(Eigen::Index n_samples, const Eigen::Ref<const Eigen::VectorXi>& labels,
                      double ratio, int repeats, bool stratified, std::uint64_t seed);

/// Re-checks disjointness, coverage, and stratification bounds.
void validate(const SplitPlan& plan, Eigen::Index n_samples,
              const Eigen::Ref<const Eigen::VectorXi>& labels);

}  // namespace ugcqa
