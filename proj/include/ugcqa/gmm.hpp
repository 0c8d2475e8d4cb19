#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "ugcqa/error.hpp"

namespace ugcqa {

/// One 1-D mixture component.
struct GmmComponent {
    double weight = 1.0;    // 0 < weight <= 1
    double mean = 0.0;
    double variance = 1.0;  // >= variance floor
};

struct EmConfig {
    int max_iterations = 500;
    // Stop when |ll - ll_prev| <= rel_tol * (|ll| + rel_tol).
    double rel_tol = 1e-8;
    // Floor = factor * (observed score span)^2; prevents component collapse
    // on repeated values.
    double variance_floor_factor = 1e-6;
    // Restart 0 uses the deterministic quantile init; further restarts
    // jitter the initial means (seeded). Best final log-likelihood wins.
    int n_restarts = 1;
    std::uint64_t seed = 0;
};

/// Fitted 1-D Gaussian mixture. Components are sorted ascending by mean.
/// Immutable after fitting; safe to share across threads.
struct GmmModel {
    std::vector<GmmComponent> components;
    double log_likelihood = 0.0;
    int n_iterations = 0;
    bool converged = false;
    // Exact mean-and-variance ties between components after sorting.
    bool degenerate = false;
    // Iterations in which the variance floor clipped a component.
    int variance_floor_hits = 0;
    // Log-likelihood at the start of every EM iteration plus the final
    // value; nondecreasing up to floating-point noise.
    std::vector<double> log_likelihood_trace;
    EmConfig settings;

    int n_components() const { return static_cast<int>(components.size()); }
};

/// Maximum-likelihood EM fit of an n-component mixture to `scores`.
/// Initialization: component n's mean at the (n+0.5)/N sample quantile,
/// variances at (sample variance)/N^2, uniform weights. Deterministic for
/// n_restarts = 1; restarts jitter the means with the seeded generator.
/// Requires at least 10 * n_components scores, not all identical.
GmmModel fit_gmm(const Eigen::Ref<const Eigen::VectorXd>& scores, int n_components,
                 const EmConfig& config = {});

/// Posterior membership probabilities p(component | y), log-space
/// computation. Nonnegative, sum to 1.
Eigen::VectorXd posterior(const GmmModel& model, double y);

/// Argmax-posterior component index per score; ties go to the lower-mean
/// component. Component order equals quality order (means sorted).
Eigen::VectorXi assign_labels(const GmmModel& model,
                              const Eigen::Ref<const Eigen::VectorXd>& scores);

/// Boundary points where the posterior argmax switches between adjacent
/// components: a 10,000-point uniform scan over [lo, hi], each switch
/// refined by bisection to 1e-8. Exactly N-1 boundaries, strictly
/// increasing; any other switch pattern (possible with very unequal
/// variances) raises ComputeError carrying the observed switch count.
std::vector<double> thresholds(const GmmModel& model, double lo, double hi);

/// Mixture density and log-density at y.
double gmm_pdf(const GmmModel& model, double y);
double gmm_log_pdf(const GmmModel& model, double y);

}  // namespace ugcqa
