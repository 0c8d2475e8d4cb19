// Independent direct-definition implementations used as test oracles.
// Everything here is deliberately written with plain scalar loops and
// different algebraic routes than the library, and must stay decoupled
// from the implementation paths it checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Average ranks by pairwise counting: rank_i = #(x_j < x_i) + (ties+1)/2.
inline std::vector<double> ranks(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t less = 0, equal = 0;
        for (std::size_t j = 0; j < n; ++j) {
            less += x[j] < x[i];
            equal += x[j] == x[i];
        }
        r[i] = static_cast<double>(less) + 0.5 * static_cast<double>(equal + 1);
    }
    return r;
}

// Pearson from the covariance definition, separate square roots.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double cov = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return cov / (std::sqrt(sxx) * std::sqrt(syy));
}

inline bool has_ties(const std::vector<double>& x) {
    std::vector<double> s = x;
    std::sort(s.begin(), s.end());
    return std::adjacent_find(s.begin(), s.end()) != s.end();
}

// Spearman via the classic untied d^2 formula when possible, otherwise
// Pearson of counted ranks.
inline double srcc(const std::vector<double>& x, const std::vector<double>& y) {
    const std::vector<double> rx = ranks(x);
    const std::vector<double> ry = ranks(y);
    if (!has_ties(x) && !has_ties(y)) {
        const double n = static_cast<double>(x.size());
        double d2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
        return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
    }
    return pearson(rx, ry);
}

inline double rmse(const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
    return std::sqrt(s / static_cast<double>(x.size()));
}

struct Counts {
    std::int64_t tp = 0, tn = 0, fp = 0, fn = 0;
};

inline Counts count(const std::vector<int>& pred, const std::vector<int>& truth) {
    Counts c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == 1 && pred[i] == 1) ++c.tp;
        if (truth[i] == 1 && pred[i] == 0) ++c.fn;
        if (truth[i] == 0 && pred[i] == 0) ++c.tn;
        if (truth[i] == 0 && pred[i] == 1) ++c.fp;
    }
    return c;
}

inline double accuracy(const Counts& c) {
    return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.tp + c.tn + c.fp + c.fn);
}

inline double balanced_accuracy(const Counts& c) {
    return 0.5 * (static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) +
                  static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp));
}

inline double mze(const std::vector<int>& pred, const std::vector<int>& truth) {
    std::int64_t wrong = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) wrong += pred[i] != truth[i];
    return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

inline double mae(const std::vector<int>& pred, const std::vector<int>& truth) {
    std::int64_t dev = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        dev += std::abs(static_cast<std::int64_t>(pred[i]) - truth[i]);
    }
    return static_cast<double>(dev) / static_cast<double>(truth.size());
}

// --- 1-D Gaussian mixture helpers -----------------------------------------

struct MixtureComponent {
    double weight, mean, variance;
};

inline double mixture_log_density(const std::vector<MixtureComponent>& comps, double y, int k) {
    const MixtureComponent& c = comps[static_cast<std::size_t>(k)];
    const double d = y - c.mean;
    return std::log(c.weight) - 0.5 * std::log(2.0 * M_PI * c.variance) -
           0.5 * d * d / c.variance;
}

inline int argmax_component(const std::vector<MixtureComponent>& comps, double y) {
    int best = 0;
    double best_l = -1e300;
    for (int k = 0; k < static_cast<int>(comps.size()); ++k) {
        const double l = mixture_log_density(comps, y, k);
        if (l > best_l) {
            best_l = l;
            best = k;
        }
    }
    return best;
}

// Posterior-argmax boundaries by brute scan at fixed step.
inline std::vector<double> threshold_scan(const std::vector<MixtureComponent>& comps, double lo,
                                          double hi, double step) {
    std::vector<double> bounds;
    int prev = argmax_component(comps, lo);
    for (double y = lo + step; y <= hi; y += step) {
        const int cur = argmax_component(comps, y);
        if (cur != prev) bounds.push_back(y - 0.5 * step);
        prev = cur;
    }
    return bounds;
}

// --- small dense QP by active-set enumeration ------------------------------

// min 0.5 a'Qa - e'a  s.t.  y'a = 0, 0 <= a_i <= C.
// Every {lower, upper, free} assignment is tried; KKT-feasible ones are
// collected and the best objective wins. Returns (alpha, bias) where the
// decision function is sum_i alpha_i y_i K(x_i, x) + bias.
struct QpSolution {
    Eigen::VectorXd alpha;
    double bias = 0.0;
    double objective = 0.0;
    int feasible_count = 0;
};

inline QpSolution solve_qp_active_sets(const Eigen::MatrixXd& q, const Eigen::VectorXi& y,
                                       double c) {
    const int n = static_cast<int>(q.rows());
    QpSolution best;
    best.objective = 1e300;

    std::vector<int> state(static_cast<std::size_t>(n), 0);  // 0=lower,1=upper,2=free
    const long total = static_cast<long>(std::pow(3.0, n));
    for (long code = 0; code < total; ++code) {
        long rem = code;
        for (int i = 0; i < n; ++i) {
            state[static_cast<std::size_t>(i)] = static_cast<int>(rem % 3);
            rem /= 3;
        }
        std::vector<int> free_idx;
        Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < n; ++i) {
            if (state[static_cast<std::size_t>(i)] == 1) alpha[i] = c;
            if (state[static_cast<std::size_t>(i)] == 2) free_idx.push_back(i);
        }
        const int f = static_cast<int>(free_idx.size());

        // Stationarity over free vars plus the equality constraint.
        Eigen::MatrixXd a(f + 1, f + 1);
        Eigen::VectorXd b(f + 1);
        for (int r = 0; r < f; ++r) {
            for (int s = 0; s < f; ++s) a(r, s) = q(free_idx[static_cast<std::size_t>(r)],
                                                    free_idx[static_cast<std::size_t>(s)]);
            a(r, f) = y[free_idx[static_cast<std::size_t>(r)]];
            double rhs = 1.0;
            for (int i = 0; i < n; ++i) {
                if (state[static_cast<std::size_t>(i)] == 1) {
                    rhs -= q(free_idx[static_cast<std::size_t>(r)], i) * c;
                }
            }
            b(r) = rhs;
        }
        double bound_y = 0.0;
        for (int i = 0; i < n; ++i) {
            if (state[static_cast<std::size_t>(i)] == 1) bound_y += y[i] * c;
        }
        for (int s = 0; s < f; ++s) a(f, s) = y[free_idx[static_cast<std::size_t>(s)]];
        a(f, f) = 0.0;
        b(f) = -bound_y;

        Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
        if (!lu.isInvertible()) continue;
        const Eigen::VectorXd sol = lu.solve(b);
        double beta = sol[f];
        bool ok = true;
        for (int s = 0; s < f; ++s) {
            const double v = sol[s];
            if (v < -1e-9 || v > c + 1e-9) ok = false;
            alpha[free_idx[static_cast<std::size_t>(s)]] = v;
        }
        if (!ok) continue;

        // Multiplier feasibility at the bounds.
        const Eigen::VectorXd grad = q * alpha - Eigen::VectorXd::Ones(n);
        for (int i = 0; i < n && ok; ++i) {
            const double g = grad[i] + beta * y[i];
            if (state[static_cast<std::size_t>(i)] == 0 && g < -1e-9) ok = false;
            if (state[static_cast<std::size_t>(i)] == 1 && g > 1e-9) ok = false;
        }
        if (!ok) continue;

        const double obj = 0.5 * alpha.dot(q * alpha) - alpha.sum();
        ++best.feasible_count;
        if (obj < best.objective - 1e-12) {
            best.objective = obj;
            best.alpha = alpha;
            best.bias = beta;
        }
    }
    if (best.feasible_count == 0) throw std::runtime_error("qp oracle: no KKT point found");
    return best;
}

}  // namespace oracle
