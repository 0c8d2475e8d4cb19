#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ugcqa/labeling.hpp"
#include "ugcqa/svm.hpp"

namespace ugcqa {

enum class Task { Regression, Binary, Ordinal };

std::string to_string(Task t);
Task task_from_string(const std::string& s);

enum class ClassWeighting { None, Balanced };

struct Hyperparams {
    KernelKind kernel = KernelKind::Rbf;
    double c = 1.0;
    double gamma = 0.1;                                       // rbf only
    double epsilon = 0.1;                                     // regression only
    ClassWeighting class_weighting = ClassWeighting::Balanced;  // classification only
};

/// Per-feature z-score parameters, computed on training rows only.
/// Constant columns keep stddev 1 and are flagged.
struct Standardizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd stddev;
    std::vector<bool> constant;

    Eigen::MatrixXd transform(const Eigen::Ref<const Eigen::MatrixXd>& rows) const;
};

Standardizer standardize_fit(const Eigen::Ref<const Eigen::MatrixXd>& train_rows);

/// One binary decision function over standardized inputs.
struct SvmSubmodel {
    Eigen::MatrixXd support_vectors;  // standardized rows with nonzero weight
    Eigen::VectorXd coefficients;
    double bias = 0.0;
    double kkt_violation = 0.0;

    double decision(const KernelParams& k, const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// Fitted predictor for one task: a single SVR or SVC machine, or the
/// cumulative stack of N-1 binary machines for ordinal prediction.
/// Immutable after training; prediction is pure.
struct TrainedModel {
    Task task = Task::Regression;
    int n_classes = 2;  // ordinal only
    Hyperparams hyperparams;
    Standardizer standardizer;
    std::vector<SvmSubmodel> submodels;
    std::int64_t n_samples = 0;
    std::uint64_t seed = 0;

    Eigen::Index feature_dim() const { return standardizer.mean.size(); }
};

/// Binary soft-margin SVM on class labels {0,1}. Balanced weighting scales
/// C per class inversely to class frequency.
TrainedModel train_svc(const Eigen::Ref<const Eigen::MatrixXd>& features,
                       const Eigen::Ref<const Eigen::VectorXi>& labels, const Hyperparams& hp,
                       std::uint64_t seed);

/// Epsilon-SVR on continuous targets; needs at least 10 samples.
TrainedModel train_svr(const Eigen::Ref<const Eigen::MatrixXd>& features,
                       const Eigen::Ref<const Eigen::VectorXd>& targets, const Hyperparams& hp,
                       std::uint64_t seed);

/// Cumulative decomposition for ordered classes {0..n_classes-1}: machine k
/// separates [class > k]; the prediction counts positive decisions, which
/// is monotone by construction.
TrainedModel train_ordinal(const Eigen::Ref<const Eigen::MatrixXd>& features,
                           const Eigen::Ref<const Eigen::VectorXi>& labels, int n_classes,
                           const Hyperparams& hp, std::uint64_t seed);

/// Regression predictions (task must be Regression).
Eigen::VectorXd predict_scores(const TrainedModel& model,
                               const Eigen::Ref<const Eigen::MatrixXd>& features);

/// Class predictions (Binary or Ordinal).
Eigen::VectorXi predict_labels(const TrainedModel& model,
                               const Eigen::Ref<const Eigen::MatrixXd>& features);

/// Raw decision values of submodel `index`.
Eigen::VectorXd decision_values(const TrainedModel& model,
                                const Eigen::Ref<const Eigen::MatrixXd>& features,
                                std::size_t index = 0);

/// Regression-then-threshold baseline: predict scores with a regression
/// model, then bucket them with the scheme's thresholds.
Eigen::VectorXi regress_then_threshold(const TrainedModel& model, const LabelingScheme& scheme,
                                       const Eigen::Ref<const Eigen::MatrixXd>& features);

/// Candidate hyperparameter grid. Defaults: C = 2^-3..2^10 and
/// gamma = 2^-10..2^3 (14 log-spaced points each), epsilon =
/// {0.01, 0.1, 0.3} x score-range length.
struct GridSpec {
    std::vector<double> c_values;
    std::vector<double> gamma_values;
    std::vector<double> epsilon_values;
};

GridSpec default_grid(double score_range_length);

struct SearchSettings {
    int n_candidates = 32;
    int k_folds = 5;
    KernelKind kernel = KernelKind::Rbf;
    ClassWeighting class_weighting = ClassWeighting::Balanced;
    int workers = 1;  // candidates evaluated concurrently
};

/// Randomized grid search with k-fold cross validation (stratified folds
/// for classification). Selection metric: SRCC for regression, balanced
/// accuracy for binary, negative MAE for ordinal. Ties break toward
/// smaller C, then smaller gamma, then smaller epsilon. `targets` drives
/// regression, `labels` drives classification; the other may be empty.
Hyperparams random_grid_search(Task task, const Eigen::Ref<const Eigen::MatrixXd>& features,
                               const Eigen::Ref<const Eigen::VectorXd>& targets,
                               const Eigen::Ref<const Eigen::VectorXi>& labels, int n_classes,
                               const GridSpec& grid, const SearchSettings& settings,
                               std::uint64_t seed);

/// Versioned JSON container; reload reproduces predictions exactly.
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace ugcqa
