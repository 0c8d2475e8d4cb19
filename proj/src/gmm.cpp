#include "ugcqa/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ugcqa/rng.hpp"

namespace ugcqa {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

inline double log_normal_pdf(double y, double mean, double variance) {
    const double d = y - mean;
    return -0.5 * (kLog2Pi + std::log(variance) + d * d / variance);
}

/// Linear-interpolation sample quantile (position p * (n - 1)).
double quantile_sorted(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    const double pos = p * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

struct EmRun {
    std::vector<GmmComponent> components;
    std::vector<double> trace;
    double log_likelihood = -std::numeric_limits<double>::infinity();
    int n_iterations = 0;
    bool converged = false;
    int variance_floor_hits = 0;
};

EmRun run_em(const Eigen::Ref<const Eigen::VectorXd>& scores,
             std::vector<GmmComponent> comps, double variance_floor, const EmConfig& cfg) {
    const Eigen::Index m = scores.size();
    const int n = static_cast<int>(comps.size());

    EmRun run;
    Eigen::MatrixXd resp(m, n);
    Eigen::VectorXd log_weight(n), mean(n), variance(n);

    double ll_prev = -std::numeric_limits<double>::infinity();
    bool floor_hit_last_mstep = false;

    int iter = 0;
    for (; iter < cfg.max_iterations; ++iter) {
        for (int k = 0; k < n; ++k) {
            log_weight[k] = std::log(comps[static_cast<std::size_t>(k)].weight);
            mean[k] = comps[static_cast<std::size_t>(k)].mean;
            variance[k] = comps[static_cast<std::size_t>(k)].variance;
        }

        // E-step in log space; accumulates the data log-likelihood.
        double ll = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            double max_l = -std::numeric_limits<double>::infinity();
            for (int k = 0; k < n; ++k) {
                const double l = log_weight[k] + log_normal_pdf(scores[i], mean[k], variance[k]);
                resp(i, k) = l;
                max_l = std::max(max_l, l);
            }
            double sum_e = 0.0;
            for (int k = 0; k < n; ++k) sum_e += std::exp(resp(i, k) - max_l);
            const double lse = max_l + std::log(sum_e);
            ll += lse;
            for (int k = 0; k < n; ++k) resp(i, k) = std::exp(resp(i, k) - lse);
        }
        run.trace.push_back(ll);

        if (iter > 0) {
            const double slack = 1e-10 * (std::abs(ll_prev) + 1.0);
            if (ll < ll_prev - slack && !floor_hit_last_mstep) {
                throw ComputeError("EM log-likelihood decreased from " + std::to_string(ll_prev) +
                                   " to " + std::to_string(ll) + " at iteration " + std::to_string(iter));
            }
            if (std::abs(ll - ll_prev) <= cfg.rel_tol * (std::abs(ll) + cfg.rel_tol)) {
                run.converged = true;
                break;
            }
        }
        ll_prev = ll;

        // M-step: two passes, means first, then centered second moments.
        floor_hit_last_mstep = false;
        double weight_sum = 0.0;
        for (int k = 0; k < n; ++k) {
            const double s = resp.col(k).sum();
            const double sy = resp.col(k).dot(scores);
            const double mu = sy / s;
            double var = 0.0;
            for (Eigen::Index i = 0; i < m; ++i) {
                const double d = scores[i] - mu;
                var += resp(i, k) * d * d;
            }
            var /= s;
            if (var < variance_floor) {
                var = variance_floor;
                floor_hit_last_mstep = true;
            }
            GmmComponent& c = comps[static_cast<std::size_t>(k)];
            c.weight = s / static_cast<double>(m);
            c.mean = mu;
            c.variance = var;
            weight_sum += c.weight;
        }
        for (GmmComponent& c : comps) c.weight /= weight_sum;
        if (floor_hit_last_mstep) ++run.variance_floor_hits;
    }

    if (!run.converged) {
        // Max iterations hit after an M-step: evaluate once more so the
        // reported likelihood matches the returned parameters.
        double ll = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            double max_l = -std::numeric_limits<double>::infinity();
            double sum_e = 0.0;
            Eigen::VectorXd l(n);
            for (int k = 0; k < n; ++k) {
                const GmmComponent& c = comps[static_cast<std::size_t>(k)];
                l[k] = std::log(c.weight) + log_normal_pdf(scores[i], c.mean, c.variance);
                max_l = std::max(max_l, l[k]);
            }
            for (int k = 0; k < n; ++k) sum_e += std::exp(l[k] - max_l);
            ll += max_l + std::log(sum_e);
        }
        run.trace.push_back(ll);
        run.n_iterations = cfg.max_iterations;
    } else {
        run.n_iterations = iter;
    }
    run.components = std::move(comps);
    run.log_likelihood = run.trace.back();
    return run;
}

}  // namespace

GmmModel fit_gmm(const Eigen::Ref<const Eigen::VectorXd>& scores, int n_components,
                 const EmConfig& config) {
    if (n_components < 1) throw ValidationError("fit_gmm: n_components must be >= 1");
    if (scores.size() < 10 * static_cast<Eigen::Index>(n_components)) {
        throw ValidationError("fit_gmm: need at least " + std::to_string(10 * n_components) +
                              " scores for " + std::to_string(n_components) + " components, got " +
                              std::to_string(scores.size()));
    }
    if (!scores.allFinite()) throw ValidationError("fit_gmm: scores contain non-finite values");
    const double lo = scores.minCoeff();
    const double hi = scores.maxCoeff();
    if (lo == hi) throw ValidationError("fit_gmm: all scores identical; mixture fit is degenerate");
    if (config.n_restarts < 1) throw ValidationError("fit_gmm: n_restarts must be >= 1");

    const double span = hi - lo;
    const double variance_floor = config.variance_floor_factor * span * span;

    std::vector<double> sorted(scores.data(), scores.data() + scores.size());
    std::sort(sorted.begin(), sorted.end());
    const double sample_mean = scores.mean();
    const double sample_var = (scores.array() - sample_mean).square().sum() /
                              static_cast<double>(scores.size());
    const double init_var =
        std::max(sample_var / (static_cast<double>(n_components) * n_components), variance_floor);

    EmRun best;
    bool have_best = false;
    for (int restart = 0; restart < config.n_restarts; ++restart) {
        std::vector<GmmComponent> init(static_cast<std::size_t>(n_components));
        Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(restart)));
        for (int k = 0; k < n_components; ++k) {
            const double p = (static_cast<double>(k) + 0.5) / static_cast<double>(n_components);
            double mu = quantile_sorted(sorted, p);
            if (restart > 0) {
                mu += rng.normal(0.0, span / (4.0 * static_cast<double>(n_components)));
                mu = std::clamp(mu, lo, hi);
            }
            init[static_cast<std::size_t>(k)] = {1.0 / n_components, mu, init_var};
        }
        EmRun run = run_em(scores, std::move(init), variance_floor, config);
        if (!have_best || run.log_likelihood > best.log_likelihood) {
            best = std::move(run);
            have_best = true;
        }
    }

    GmmModel model;
    model.components = std::move(best.components);
    std::sort(model.components.begin(), model.components.end(),
              [](const GmmComponent& a, const GmmComponent& b) {
                  if (a.mean != b.mean) return a.mean < b.mean;
                  return a.variance < b.variance;
              });
    for (std::size_t k = 1; k < model.components.size(); ++k) {
        if (model.components[k].mean == model.components[k - 1].mean) model.degenerate = true;
    }
    model.log_likelihood = best.log_likelihood;
    model.n_iterations = best.n_iterations;
    model.converged = best.converged;
    model.variance_floor_hits = best.variance_floor_hits;
    model.log_likelihood_trace = std::move(best.trace);
    model.settings = config;
    return model;
}

Eigen::VectorXd posterior(const GmmModel& model, double y) {
    const int n = model.n_components();
    if (n == 0) throw ValidationError("posterior: empty model");
    Eigen::VectorXd l(n);
    double max_l = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
        const GmmComponent& c = model.components[static_cast<std::size_t>(k)];
        l[k] = std::log(c.weight) + log_normal_pdf(y, c.mean, c.variance);
        max_l = std::max(max_l, l[k]);
    }
    Eigen::VectorXd p(n);
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
        p[k] = std::exp(l[k] - max_l);
        sum += p[k];
    }
    return p / sum;
}

namespace {

int argmax_posterior(const GmmModel& model, double y) {
    // Ties resolve to the lower-mean (lower-index) component.
    int best = 0;
    double best_l = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < model.n_components(); ++k) {
        const GmmComponent& c = model.components[static_cast<std::size_t>(k)];
        const double l = std::log(c.weight) + log_normal_pdf(y, c.mean, c.variance);
        if (l > best_l) {
            best_l = l;
            best = k;
        }
    }
    return best;
}

}  // namespace

Eigen::VectorXi assign_labels(const GmmModel& model,
                              const Eigen::Ref<const Eigen::VectorXd>& scores) {
    if (model.n_components() == 0) throw ValidationError("assign_labels: empty model");
    Eigen::VectorXi labels(scores.size());
    for (Eigen::Index i = 0; i < scores.size(); ++i) labels[i] = argmax_posterior(model, scores[i]);
    return labels;
}

std::vector<double> thresholds(const GmmModel& model, double lo, double hi) {
    const int n = model.n_components();
    if (n < 2) throw ValidationError("thresholds: model needs at least 2 components");
    if (!(lo < hi)) throw ValidationError("thresholds: empty search range");

    constexpr int kGridPoints = 10000;
    constexpr double kBisectTol = 1e-8;

    const double step = (hi - lo) / static_cast<double>(kGridPoints - 1);
    std::vector<std::pair<double, double>> switches;  // bracket [a, b]
    std::vector<std::pair<int, int>> switch_classes;
    int prev_class = argmax_posterior(model, lo);
    int first_class = prev_class;
    double prev_x = lo;
    for (int g = 1; g < kGridPoints; ++g) {
        const double x = (g == kGridPoints - 1) ? hi : lo + step * g;
        const int cls = argmax_posterior(model, x);
        if (cls != prev_class) {
            switches.emplace_back(prev_x, x);
            switch_classes.emplace_back(prev_class, cls);
        }
        prev_class = cls;
        prev_x = x;
    }

    auto fail = [&](const std::string& detail) {
        throw ComputeError("thresholds: expected " + std::to_string(n - 1) +
                           " argmax switches over the search range, found " +
                           std::to_string(switches.size()) + " (" + detail +
                           "); refit or override thresholds manually");
    };
    if (static_cast<int>(switches.size()) != n - 1) fail("non-monotone class regions");
    if (first_class != 0) fail("leftmost region is class " + std::to_string(first_class));
    for (int s = 0; s < n - 1; ++s) {
        if (switch_classes[static_cast<std::size_t>(s)] != std::pair<int, int>(s, s + 1)) {
            fail("switch " + std::to_string(s) + " is not between adjacent components");
        }
    }

    std::vector<double> bounds;
    bounds.reserve(static_cast<std::size_t>(n - 1));
    for (int s = 0; s < n - 1; ++s) {
        double a = switches[static_cast<std::size_t>(s)].first;
        double b = switches[static_cast<std::size_t>(s)].second;
        while (b - a > kBisectTol) {
            const double mid = 0.5 * (a + b);
            const int cls = argmax_posterior(model, mid);
            if (cls == s) {
                a = mid;
            } else if (cls == s + 1) {
                b = mid;
            } else {
                fail("class " + std::to_string(cls) + " appeared inside bracket of switch " +
                     std::to_string(s));
            }
        }
        bounds.push_back(0.5 * (a + b));
    }
    return bounds;
}

double gmm_log_pdf(const GmmModel& model, double y) {
    double max_l = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd l(model.n_components());
    for (int k = 0; k < model.n_components(); ++k) {
        const GmmComponent& c = model.components[static_cast<std::size_t>(k)];
        l[k] = std::log(c.weight) + log_normal_pdf(y, c.mean, c.variance);
        max_l = std::max(max_l, l[k]);
    }
    double sum = 0.0;
    for (int k = 0; k < model.n_components(); ++k) sum += std::exp(l[k] - max_l);
    return max_l + std::log(sum);
}

double gmm_pdf(const GmmModel& model, double y) {
    return std::exp(gmm_log_pdf(model, y));
}

}  // namespace ugcqa
