#include "ugcqa/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>

namespace ugcqa {

std::string to_string(KernelKind k) {
    return k == KernelKind::Rbf ? "rbf" : "linear";
}

KernelKind kernel_from_string(const std::string& s) {
    if (s == "rbf") return KernelKind::Rbf;
    if (s == "linear") return KernelKind::Linear;
    throw ValidationError("unknown kernel '" + s + "' (expected rbf|linear)");
}

double kernel_value(const KernelParams& k, const Eigen::Ref<const Eigen::VectorXd>& a,
                    const Eigen::Ref<const Eigen::VectorXd>& b) {
    if (k.kind == KernelKind::Linear) return a.dot(b);
    return std::exp(-k.gamma * (a - b).squaredNorm());
}

Eigen::VectorXd kernel_row(const KernelParams& k, const Eigen::Ref<const Eigen::MatrixXd>& rows,
                           const Eigen::Ref<const Eigen::VectorXd>& x) {
    Eigen::VectorXd dots = rows * x;
    if (k.kind == KernelKind::Linear) return dots;
    const Eigen::VectorXd sq = rows.rowwise().squaredNorm();
    return (-k.gamma * (sq.array() - 2.0 * dots.array() + x.squaredNorm())).exp();
}

namespace {

constexpr double kTau = 1e-12;

/// Base kernel rows behind an LRU cache; extended indices (regression's
/// doubled variables) map onto base rows.
class KernelRowCache {
public:
    KernelRowCache(const Eigen::Ref<const Eigen::MatrixXd>& x, const KernelParams& kernel,
                   std::size_t cache_bytes)
        : x_(x), kernel_(kernel) {
        const std::size_t row_bytes = sizeof(double) * static_cast<std::size_t>(x.rows());
        max_rows_ = std::max<std::size_t>(2, cache_bytes / std::max<std::size_t>(1, row_bytes));
        if (kernel_.kind == KernelKind::Rbf) sq_norms_ = x_.rowwise().squaredNorm();
    }

    const Eigen::VectorXd& row(Eigen::Index i) {
        auto it = index_.find(i);
        if (it != index_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second);
            return it->second->second;
        }
        Eigen::VectorXd r;
        if (kernel_.kind == KernelKind::Linear) {
            r = x_ * x_.row(i).transpose();
        } else {
            const Eigen::VectorXd dots = x_ * x_.row(i).transpose();
            r = (-kernel_.gamma * (sq_norms_.array() - 2.0 * dots.array() + sq_norms_[i])).exp();
        }
        lru_.emplace_front(i, std::move(r));
        index_[i] = lru_.begin();
        if (lru_.size() > max_rows_) {
            index_.erase(lru_.back().first);
            lru_.pop_back();
        }
        return lru_.front().second;
    }

    double diag(Eigen::Index i) const {
        if (kernel_.kind == KernelKind::Linear) return x_.row(i).squaredNorm();
        return 1.0;
    }

private:
    Eigen::Ref<const Eigen::MatrixXd> x_;
    KernelParams kernel_;
    Eigen::VectorXd sq_norms_;
    std::size_t max_rows_;
    std::list<std::pair<Eigen::Index, Eigen::VectorXd>> lru_;
    std::unordered_map<Eigen::Index, decltype(lru_)::iterator> index_;
};

struct SmoProblem {
    Eigen::Index n;                 // number of dual variables
    Eigen::Index base;              // number of training rows
    Eigen::VectorXd p;              // linear term
    std::vector<signed char> sign;  // y_i in {-1,+1}
    Eigen::VectorXd c;              // per-variable box bound
};

struct SmoState {
    Eigen::VectorXd alpha;
    double rho = 0.0;
    double kkt_violation = 0.0;
    std::int64_t n_iterations = 0;
    std::vector<double> objective_trace;
};

// Q_ij = sign_i * sign_j * K(base(i), base(j)); f minimized is
// 0.5 a'Qa + p'a subject to sign'a = 0 and the box.
SmoState solve_smo(const SmoProblem& prob, KernelRowCache& cache, const SmoSettings& settings) {
    const Eigen::Index n = prob.n;
    SmoState st;
    st.alpha = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd grad = prob.p;

    const std::int64_t max_iter =
        settings.max_iterations > 0
            ? settings.max_iterations
            : std::max<std::int64_t>(10000000, 100 * static_cast<std::int64_t>(n));

    auto base_of = [&](Eigen::Index t) { return t < prob.base ? t : t - prob.base; };
    auto q_diag = [&](Eigen::Index t) { return cache.diag(base_of(t)); };

    auto objective_max_form = [&]() {
        // grad = Q*alpha + p, so alpha'(grad + p)/2 is the minimization
        // objective; the trace stores its negation.
        return -0.5 * (st.alpha.dot(grad) + st.alpha.dot(prob.p));
    };
    st.objective_trace.push_back(objective_max_form());

    for (std::int64_t iter = 0;; ++iter) {
        if (iter >= max_iter) {
            throw ComputeError("SMO did not converge within " + std::to_string(max_iter) +
                               " iterations (violation " + std::to_string(st.kkt_violation) + ")");
        }
        // Maximal violating pair over I_up / I_low.
        Eigen::Index i = -1, j = -1;
        double g_max = -std::numeric_limits<double>::infinity();
        double g_min = std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < n; ++t) {
            const double yg = -static_cast<double>(prob.sign[static_cast<std::size_t>(t)]) * grad[t];
            const bool pos = prob.sign[static_cast<std::size_t>(t)] > 0;
            const bool in_up = pos ? st.alpha[t] < prob.c[t] : st.alpha[t] > 0.0;
            const bool in_low = pos ? st.alpha[t] > 0.0 : st.alpha[t] < prob.c[t];
            if (in_up && yg > g_max) {
                g_max = yg;
                i = t;
            }
            if (in_low && yg < g_min) {
                g_min = yg;
                j = t;
            }
        }
        st.kkt_violation = g_max - g_min;
        if (i < 0 || j < 0 || st.kkt_violation < settings.tol) {
            st.n_iterations = iter;
            break;
        }

        const Eigen::VectorXd& ki = cache.row(base_of(i));
        const Eigen::VectorXd& kj = cache.row(base_of(j));
        const double si = prob.sign[static_cast<std::size_t>(i)];
        const double sj = prob.sign[static_cast<std::size_t>(j)];
        const double q_ij = si * sj * ki[base_of(j)];

        const double old_ai = st.alpha[i];
        const double old_aj = st.alpha[j];

        if (si != sj) {
            double quad = q_diag(i) + q_diag(j) + 2.0 * q_ij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = st.alpha[i] - st.alpha[j];
            st.alpha[i] += delta;
            st.alpha[j] += delta;
            if (diff > 0.0) {
                if (st.alpha[j] < 0.0) {
                    st.alpha[j] = 0.0;
                    st.alpha[i] = diff;
                }
            } else {
                if (st.alpha[i] < 0.0) {
                    st.alpha[i] = 0.0;
                    st.alpha[j] = -diff;
                }
            }
            if (diff > prob.c[i] - prob.c[j]) {
                if (st.alpha[i] > prob.c[i]) {
                    st.alpha[i] = prob.c[i];
                    st.alpha[j] = prob.c[i] - diff;
                }
            } else {
                if (st.alpha[j] > prob.c[j]) {
                    st.alpha[j] = prob.c[j];
                    st.alpha[i] = prob.c[j] + diff;
                }
            }
        } else {
            double quad = q_diag(i) + q_diag(j) - 2.0 * q_ij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = st.alpha[i] + st.alpha[j];
            st.alpha[i] -= delta;
            st.alpha[j] += delta;
            if (sum > prob.c[i]) {
                if (st.alpha[i] > prob.c[i]) {
                    st.alpha[i] = prob.c[i];
                    st.alpha[j] = sum - prob.c[i];
                }
            } else {
                if (st.alpha[j] < 0.0) {
                    st.alpha[j] = 0.0;
                    st.alpha[i] = sum;
                }
            }
            if (sum > prob.c[j]) {
                if (st.alpha[j] > prob.c[j]) {
                    st.alpha[j] = prob.c[j];
                    st.alpha[i] = sum - prob.c[j];
                }
            } else {
                if (st.alpha[i] < 0.0) {
                    st.alpha[i] = 0.0;
                    st.alpha[j] = sum;
                }
            }
        }

        const double di = si * (st.alpha[i] - old_ai);
        const double dj = sj * (st.alpha[j] - old_aj);
        for (Eigen::Index t = 0; t < n; ++t) {
            const Eigen::Index bt = base_of(t);
            grad[t] += static_cast<double>(prob.sign[static_cast<std::size_t>(t)]) *
                       (ki[bt] * di + kj[bt] * dj);
        }

        if ((iter + 1) % n == 0) st.objective_trace.push_back(objective_max_form());
    }
    st.objective_trace.push_back(objective_max_form());

    // Offset from the KKT conditions: average of y*grad over free
    // variables, else the midpoint of the active bounds.
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    Eigen::Index n_free = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
        const double yg = static_cast<double>(prob.sign[static_cast<std::size_t>(t)]) * grad[t];
        if (st.alpha[t] >= prob.c[t]) {
            if (prob.sign[static_cast<std::size_t>(t)] < 0) {
                ub = std::min(ub, yg);
            } else {
                lb = std::max(lb, yg);
            }
        } else if (st.alpha[t] <= 0.0) {
            if (prob.sign[static_cast<std::size_t>(t)] > 0) {
                ub = std::min(ub, yg);
            } else {
                lb = std::max(lb, yg);
            }
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    st.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);
    return st;
}

}  // namespace

SvmSolution solve_svc(const Eigen::Ref<const Eigen::MatrixXd>& x,
                      const Eigen::Ref<const Eigen::VectorXi>& y, const KernelParams& kernel,
                      double c_pos, double c_neg, const SmoSettings& settings) {
    const Eigen::Index n = x.rows();
    if (y.size() != n) throw ValidationError("solve_svc: label/row count mismatch");
    if (n < 2) throw ValidationError("solve_svc: need at least 2 rows");
    if (!(c_pos > 0.0) || !(c_neg > 0.0)) throw ValidationError("solve_svc: C must be positive");

    SmoProblem prob;
    prob.n = n;
    prob.base = n;
    prob.p = Eigen::VectorXd::Constant(n, -1.0);
    prob.sign.resize(static_cast<std::size_t>(n));
    prob.c.resize(n);
    bool has_pos = false, has_neg = false;
    for (Eigen::Index t = 0; t < n; ++t) {
        if (y[t] != 1 && y[t] != -1) throw ValidationError("solve_svc: labels must be -1/+1");
        prob.sign[static_cast<std::size_t>(t)] = static_cast<signed char>(y[t]);
        prob.c[t] = y[t] > 0 ? c_pos : c_neg;
        (y[t] > 0 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) throw ValidationError("solve_svc: both classes must be present");

    KernelRowCache cache(x, kernel, settings.cache_bytes);
    SmoState st = solve_smo(prob, cache, settings);

    SvmSolution sol;
    sol.alpha = st.alpha;
    sol.coef.resize(n);
    for (Eigen::Index t = 0; t < n; ++t) sol.coef[t] = st.alpha[t] * y[t];
    sol.bias = -st.rho;
    sol.kkt_violation = st.kkt_violation;
    sol.n_iterations = st.n_iterations;
    sol.dual_objective_trace = std::move(st.objective_trace);
    return sol;
}

SvmSolution solve_svr(const Eigen::Ref<const Eigen::MatrixXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& targets,
                      const KernelParams& kernel, double c, double epsilon,
                      const SmoSettings& settings) {
    const Eigen::Index n = x.rows();
    if (targets.size() != n) throw ValidationError("solve_svr: target/row count mismatch");
    if (n < 2) throw ValidationError("solve_svr: need at least 2 rows");
    if (!(c > 0.0)) throw ValidationError("solve_svr: C must be positive");
    if (epsilon < 0.0) throw ValidationError("solve_svr: epsilon must be nonnegative");

    SmoProblem prob;
    prob.n = 2 * n;
    prob.base = n;
    prob.p.resize(2 * n);
    prob.sign.resize(static_cast<std::size_t>(2 * n));
    prob.c = Eigen::VectorXd::Constant(2 * n, c);
    for (Eigen::Index t = 0; t < n; ++t) {
        prob.p[t] = epsilon - targets[t];
        prob.p[n + t] = epsilon + targets[t];
        prob.sign[static_cast<std::size_t>(t)] = 1;
        prob.sign[static_cast<std::size_t>(n + t)] = -1;
    }

    KernelRowCache cache(x, kernel, settings.cache_bytes);
    SmoState st = solve_smo(prob, cache, settings);

    SvmSolution sol;
    sol.alpha = st.alpha;
    sol.coef.resize(n);
    for (Eigen::Index t = 0; t < n; ++t) sol.coef[t] = st.alpha[t] - st.alpha[n + t];
    sol.bias = -st.rho;
    sol.kkt_violation = st.kkt_violation;
    sol.n_iterations = st.n_iterations;
    sol.dual_objective_trace = std::move(st.objective_trace);
    return sol;
}

}  // namespace ugcqa
