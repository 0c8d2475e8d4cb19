#include "ugcqa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>

namespace ugcqa {

namespace {

void require_equal_length(const VecRef& x, const VecRef& y, std::size_t min_len, const char* who) {
    if (x.size() != y.size()) {
        throw ValidationError(std::string(who) + ": length mismatch (" + std::to_string(x.size()) +
                              " vs " + std::to_string(y.size()) + ")");
    }
    if (static_cast<std::size_t>(x.size()) < min_len) {
        throw ValidationError(std::string(who) + ": needs at least " + std::to_string(min_len) +
                              " points, got " + std::to_string(x.size()));
    }
}

bool is_constant(const VecRef& x) {
    return x.maxCoeff() == x.minCoeff();
}

// Pearson with a single sqrt of the variance product; keeps r exactly +-1
// for exactly (anti)linear rank vectors.
double pearson(const VecRef& x, const VecRef& y, const char* who) {
    require_equal_length(x, y, 3, who);
    if (is_constant(x) || is_constant(y)) {
        throw ValidationError(std::string(who) + ": undefined for constant input");
    }
    const double mx = x.mean();
    const double my = y.mean();
    const Eigen::ArrayXd dx = x.array() - mx;
    const Eigen::ArrayXd dy = y.array() - my;
    const double cov = (dx * dy).sum();
    const double sxx = (dx * dx).sum();
    const double syy = (dy * dy).sum();
    return cov / std::sqrt(sxx * syy);
}

}  // namespace

Eigen::VectorXd average_ranks(const VecRef& x) {
    const Eigen::Index n = x.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return x[a] < x[b]; });

    Eigen::VectorXd ranks(n);
    Eigen::Index i = 0;
    while (i < n) {
        Eigen::Index j = i;
        while (j + 1 < n && x[order[static_cast<std::size_t>(j + 1)]] == x[order[static_cast<std::size_t>(i)]]) ++j;
        // positions i..j (0-based) share rank mean of (i+1)..(j+1)
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (Eigen::Index k = i; k <= j; ++k) ranks[order[static_cast<std::size_t>(k)]] = r;
        i = j + 1;
    }
    return ranks;
}

double srcc(const VecRef& x, const VecRef& y) {
    require_equal_length(x, y, 3, "srcc");
    if (is_constant(x) || is_constant(y)) {
        throw ValidationError("srcc: undefined for constant input");
    }
    const Eigen::VectorXd rx = average_ranks(x);
    const Eigen::VectorXd ry = average_ranks(y);
    return pearson(rx, ry, "srcc");
}

double plcc(const VecRef& x, const VecRef& y) {
    return pearson(x, y, "plcc");
}

double rmse(const VecRef& x, const VecRef& y) {
    require_equal_length(x, y, 3, "rmse");
    return std::sqrt((x - y).squaredNorm() / static_cast<double>(x.size()));
}

ConfusionCounts confusion(const IntVecRef& predicted, const IntVecRef& truth) {
    if (predicted.size() != truth.size()) {
        throw ValidationError("confusion: length mismatch");
    }
    ConfusionCounts c;
    for (Eigen::Index i = 0; i < truth.size(); ++i) {
        const int p = predicted[i];
        const int t = truth[i];
        if (p != 0 && p != 1) throw ValidationError("confusion: predicted label not in {0,1}");
        if (t != 0 && t != 1) throw ValidationError("confusion: true label not in {0,1}");
        if (t == 1) {
            (p == 1 ? c.tp : c.fn)++;
        } else {
            (p == 0 ? c.tn : c.fp)++;
        }
    }
    return c;
}

double accuracy(const ConfusionCounts& c) {
    if (c.total() == 0) throw ValidationError("accuracy: no samples");
    return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

double accuracy(const IntVecRef& predicted, const IntVecRef& truth) {
    if (predicted.size() != truth.size()) throw ValidationError("accuracy: length mismatch");
    if (truth.size() == 0) throw ValidationError("accuracy: no samples");
    std::int64_t hits = 0;
    for (Eigen::Index i = 0; i < truth.size(); ++i) hits += (predicted[i] == truth[i]);
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double balanced_accuracy(const ConfusionCounts& c) {
    if (c.total() == 0) throw ValidationError("balanced_accuracy: no samples");
    if (c.positives() == 0 || c.negatives() == 0) {
        throw ValidationError("balanced_accuracy: ground truth has a single class");
    }
    const double recall_pos = static_cast<double>(c.tp) / static_cast<double>(c.positives());
    const double recall_neg = static_cast<double>(c.tn) / static_cast<double>(c.negatives());
    return 0.5 * (recall_pos + recall_neg);
}

namespace {

void require_ranks(const IntVecRef& predicted, const IntVecRef& truth, const char* who) {
    if (predicted.size() != truth.size()) {
        throw ValidationError(std::string(who) + ": length mismatch");
    }
    if (truth.size() == 0) {
        throw ValidationError(std::string(who) + ": no samples");
    }
    for (Eigen::Index i = 0; i < truth.size(); ++i) {
        if (predicted[i] < 1 || truth[i] < 1) {
            throw ValidationError(std::string(who) + ": ranks are 1-based");
        }
    }
}

}  // namespace

double mze(const IntVecRef& predicted_ranks, const IntVecRef& true_ranks) {
    require_ranks(predicted_ranks, true_ranks, "mze");
    std::int64_t wrong = 0;
    for (Eigen::Index i = 0; i < true_ranks.size(); ++i) wrong += (predicted_ranks[i] != true_ranks[i]);
    return static_cast<double>(wrong) / static_cast<double>(true_ranks.size());
}

double mae_ordinal(const IntVecRef& predicted_ranks, const IntVecRef& true_ranks) {
    require_ranks(predicted_ranks, true_ranks, "mae_ordinal");
    std::int64_t dev = 0;
    for (Eigen::Index i = 0; i < true_ranks.size(); ++i) {
        dev += std::abs(static_cast<std::int64_t>(predicted_ranks[i]) - true_ranks[i]);
    }
    return static_cast<double>(dev) / static_cast<double>(true_ranks.size());
}

double Logistic4::operator()(double x) const {
    return b2 + (b1 - b2) / (1.0 + std::exp(-(x - b3) / std::abs(b4)));
}

Eigen::VectorXd Logistic4::map(const VecRef& x) const {
    Eigen::VectorXd out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = (*this)(x[i]);
    return out;
}

Logistic4 fit_logistic4(const VecRef& x, const VecRef& y) {
    require_equal_length(x, y, 4, "fit_logistic4");
    if (is_constant(x)) throw ValidationError("fit_logistic4: constant predictor");

    const Eigen::Index n = x.size();
    Logistic4 p;
    p.b1 = y.maxCoeff();
    p.b2 = y.minCoeff();
    p.b3 = x.mean();
    p.b4 = std::sqrt((x.array() - p.b3).square().sum() / static_cast<double>(n));
    if (p.b4 <= 0.0) p.b4 = 1.0;
    if (p.b1 == p.b2) p.b1 = p.b2 + 1.0;

    auto residuals = [&](const Logistic4& q, Eigen::VectorXd& r) {
        for (Eigen::Index i = 0; i < n; ++i) r[i] = q(x[i]) - y[i];
    };

    Eigen::VectorXd r(n);
    residuals(p, r);
    double sse = r.squaredNorm();
    double lambda = 1e-3;

    for (int iter = 0; iter < 200; ++iter) {
        Eigen::MatrixXd J(n, 4);
        const double s = std::abs(p.b4);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double t = (x[i] - p.b3) / s;
            const double e = 1.0 / (1.0 + std::exp(-t));     // logistic
            const double de = e * (1.0 - e);
            J(i, 0) = e;
            J(i, 1) = 1.0 - e;
            J(i, 2) = -(p.b1 - p.b2) * de / s;
            J(i, 3) = -(p.b1 - p.b2) * de * t / s * (p.b4 >= 0 ? 1.0 : -1.0);
        }
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * r;

        bool improved = false;
        for (int attempt = 0; attempt < 12; ++attempt) {
            Eigen::MatrixXd A = JtJ;
            A.diagonal().array() += lambda * (JtJ.diagonal().array().abs() + 1e-12);
            const Eigen::VectorXd step = A.ldlt().solve(g);
            Logistic4 q = p;
            q.b1 -= step[0];
            q.b2 -= step[1];
            q.b3 -= step[2];
            q.b4 -= step[3];
            if (std::abs(q.b4) < 1e-12) q.b4 = (q.b4 < 0 ? -1e-12 : 1e-12);
            Eigen::VectorXd rq(n);
            residuals(q, rq);
            const double sq = rq.squaredNorm();
            if (std::isfinite(sq) && sq <= sse) {
                const double rel = (sse - sq) / std::max(sse, 1e-300);
                p = q;
                r = rq;
                sse = sq;
                lambda = std::max(lambda * 0.5, 1e-12);
                improved = true;
                if (rel < 1e-12) iter = 200;
                break;
            }
            lambda *= 4.0;
        }
        if (!improved) break;
    }
    return p;
}

}  // namespace ugcqa
