#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ugcqa/error.hpp"

namespace ugcqa {

enum class KernelKind { Rbf, Linear };

std::string to_string(KernelKind k);
KernelKind kernel_from_string(const std::string& s);

struct KernelParams {
    KernelKind kind = KernelKind::Rbf;
    double gamma = 0.1;  // rbf only
};

double kernel_value(const KernelParams& k, const Eigen::Ref<const Eigen::VectorXd>& a,
                    const Eigen::Ref<const Eigen::VectorXd>& b);

/// Kernel row against a whole matrix (rows = samples).
Eigen::VectorXd kernel_row(const KernelParams& k, const Eigen::Ref<const Eigen::MatrixXd>& rows,
                           const Eigen::Ref<const Eigen::VectorXd>& x);

/// Soft-margin dual solution. The decision function is
///   f(x) = sum_i coef[i] * K(x_i, x) + bias
/// over the training rows (zero-coefficient rows carry no weight).
struct SvmSolution {
    Eigen::VectorXd coef;    // alpha_i*y_i (classification) or alpha_i - alpha*_i (regression)
    double bias = 0.0;
    Eigen::VectorXd alpha;   // raw dual variables (n for SVC, 2n for SVR)
    double kkt_violation = 0.0;
    std::int64_t n_iterations = 0;
    // Dual objective (maximization form) sampled once per sweep of n
    // working-set updates plus the final value; nondecreasing up to
    // floating-point noise.
    std::vector<double> dual_objective_trace;
};

/// Sequential minimal optimization with maximal-KKT-violating-pair working
/// set selection, an LRU kernel row cache, and no shrinking. Terminates
/// when the maximum KKT violation drops below `tol`.
struct SmoSettings {
    double tol = 1e-3;
    std::size_t cache_bytes = 256ull << 20;
    std::int64_t max_iterations = 0;  // 0 = max(1e7, 100n)
};

/// Binary soft-margin SVM; labels must be -1/+1 with both classes present.
/// Per-class box constraints c_pos (y=+1) and c_neg (y=-1).
SvmSolution solve_svc(const Eigen::Ref<const Eigen::MatrixXd>& x,
                      const Eigen::Ref<const Eigen::VectorXi>& y, const KernelParams& kernel,
                      double c_pos, double c_neg, const SmoSettings& settings = {});

/// Epsilon-insensitive support vector regression via the standard
/// doubled-variable dual, solved by the same SMO machinery.
SvmSolution solve_svr(const Eigen::Ref<const Eigen::MatrixXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& targets,
                      const KernelParams& kernel, double c, double epsilon,
                      const SmoSettings& settings = {});

}  // namespace ugcqa
