#include "ugcqa/learner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "ugcqa/io_util.hpp"
#include "ugcqa/metrics.hpp"
#include "ugcqa/rng.hpp"

namespace ugcqa {

using nlohmann::json;

std::string to_string(Task t) {
    switch (t) {
        case Task::Regression: return "regression";
        case Task::Binary: return "binary";
        case Task::Ordinal: return "ordinal";
    }
    return "regression";
}

Task task_from_string(const std::string& s) {
    if (s == "regression") return Task::Regression;
    if (s == "binary") return Task::Binary;
    if (s == "ordinal") return Task::Ordinal;
    throw ValidationError("unknown task '" + s + "' (expected regression|binary|ordinal)");
}

Eigen::MatrixXd Standardizer::transform(const Eigen::Ref<const Eigen::MatrixXd>& rows) const {
    if (rows.cols() != mean.size()) {
        throw ValidationError("standardizer: feature dimension mismatch (" +
                              std::to_string(rows.cols()) + " vs " + std::to_string(mean.size()) +
                              ")");
    }
    return (rows.rowwise() - mean.transpose()).array().rowwise() /
           stddev.transpose().array();
}

Standardizer standardize_fit(const Eigen::Ref<const Eigen::MatrixXd>& train_rows) {
    if (train_rows.rows() < 2) throw ValidationError("standardize_fit: need at least 2 rows");
    Standardizer s;
    s.mean = train_rows.colwise().mean();
    const Eigen::ArrayXd var =
        (train_rows.rowwise() - s.mean.transpose()).array().square().colwise().mean();
    s.stddev.resize(train_rows.cols());
    s.constant.assign(static_cast<std::size_t>(train_rows.cols()), false);
    for (Eigen::Index k = 0; k < train_rows.cols(); ++k) {
        const double sd = std::sqrt(var[k]);
        if (sd > 0.0) {
            s.stddev[k] = sd;
        } else {
            s.stddev[k] = 1.0;
            s.constant[static_cast<std::size_t>(k)] = true;
        }
    }
    return s;
}

double SvmSubmodel::decision(const KernelParams& k,
                             const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (support_vectors.rows() == 0) return bias;
    return coefficients.dot(kernel_row(k, support_vectors, x)) + bias;
}

namespace {

KernelParams kernel_params(const Hyperparams& hp) {
    return {hp.kernel, hp.gamma};
}

void check_hyperparams(const Hyperparams& hp, Task task) {
    if (!(hp.c > 0.0)) throw ValidationError("hyperparams: C must be positive");
    if (hp.kernel == KernelKind::Rbf && !(hp.gamma > 0.0)) {
        throw ValidationError("hyperparams: gamma must be positive for the rbf kernel");
    }
    if (task == Task::Regression && hp.epsilon < 0.0) {
        throw ValidationError("hyperparams: epsilon must be nonnegative");
    }
}

// Drops zero-coefficient rows so the stored model holds only support
// vectors.
SvmSubmodel compress(const Eigen::MatrixXd& x, const SvmSolution& sol) {
    std::vector<Eigen::Index> sv;
    for (Eigen::Index i = 0; i < sol.coef.size(); ++i) {
        if (sol.coef[i] != 0.0) sv.push_back(i);
    }
    SvmSubmodel m;
    m.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), x.cols());
    m.coefficients.resize(static_cast<Eigen::Index>(sv.size()));
    for (std::size_t r = 0; r < sv.size(); ++r) {
        m.support_vectors.row(static_cast<Eigen::Index>(r)) = x.row(sv[r]);
        m.coefficients[static_cast<Eigen::Index>(r)] = sol.coef[sv[r]];
    }
    m.bias = sol.bias;
    m.kkt_violation = sol.kkt_violation;
    return m;
}

// Binary machine on standardized rows; targets in {0,1} with 1 positive.
SvmSubmodel fit_binary_machine(const Eigen::MatrixXd& xs, const Eigen::VectorXi& positive,
                               const Hyperparams& hp) {
    const Eigen::Index n = xs.rows();
    Eigen::VectorXi y(n);
    Eigen::Index n_pos = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        y[i] = positive[i] == 1 ? 1 : -1;
        n_pos += positive[i] == 1;
    }
    const Eigen::Index n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw ValidationError("classification training set has a single class");
    }
    double c_pos = hp.c;
    double c_neg = hp.c;
    if (hp.class_weighting == ClassWeighting::Balanced) {
        c_pos = hp.c * static_cast<double>(n) / (2.0 * static_cast<double>(n_pos));
        c_neg = hp.c * static_cast<double>(n) / (2.0 * static_cast<double>(n_neg));
    }
    const SvmSolution sol = solve_svc(xs, y, kernel_params(hp), c_pos, c_neg);
    return compress(xs, sol);
}

}  // namespace

TrainedModel train_svc(const Eigen::Ref<const Eigen::MatrixXd>& features,
                       const Eigen::Ref<const Eigen::VectorXi>& labels, const Hyperparams& hp,
                       std::uint64_t seed) {
    check_hyperparams(hp, Task::Binary);
    if (features.rows() != labels.size()) throw ValidationError("train_svc: row/label mismatch");
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) {
            throw ValidationError("train_svc: labels must be in {0,1}");
        }
    }
    TrainedModel m;
    m.task = Task::Binary;
    m.n_classes = 2;
    m.hyperparams = hp;
    m.standardizer = standardize_fit(features);
    const Eigen::MatrixXd xs = m.standardizer.transform(features);
    m.submodels.push_back(fit_binary_machine(xs, labels, hp));
    m.n_samples = features.rows();
    m.seed = seed;
    return m;
}

TrainedModel train_svr(const Eigen::Ref<const Eigen::MatrixXd>& features,
                       const Eigen::Ref<const Eigen::VectorXd>& targets, const Hyperparams& hp,
                       std::uint64_t seed) {
    check_hyperparams(hp, Task::Regression);
    if (features.rows() != targets.size()) throw ValidationError("train_svr: row/target mismatch");
    if (features.rows() < 10) throw ValidationError("train_svr: need at least 10 samples");
    TrainedModel m;
    m.task = Task::Regression;
    m.hyperparams = hp;
    m.standardizer = standardize_fit(features);
    const Eigen::MatrixXd xs = m.standardizer.transform(features);
    const SvmSolution sol = solve_svr(xs, targets, kernel_params(hp), hp.c, hp.epsilon);
    m.submodels.push_back(compress(xs, sol));
    m.n_samples = features.rows();
    m.seed = seed;
    return m;
}

TrainedModel train_ordinal(const Eigen::Ref<const Eigen::MatrixXd>& features,
                           const Eigen::Ref<const Eigen::VectorXi>& labels, int n_classes,
                           const Hyperparams& hp, std::uint64_t seed) {
    check_hyperparams(hp, Task::Ordinal);
    if (n_classes < 2) throw ValidationError("train_ordinal: n_classes must be >= 2");
    if (features.rows() != labels.size()) throw ValidationError("train_ordinal: row/label mismatch");
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(n_classes), 0);
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= n_classes) {
            throw ValidationError("train_ordinal: label outside {0.." + std::to_string(n_classes - 1) +
                                  "}");
        }
        ++counts[static_cast<std::size_t>(labels[i])];
    }
    for (int k = 0; k < n_classes; ++k) {
        if (counts[static_cast<std::size_t>(k)] == 0) {
            throw ValidationError("train_ordinal: class " + std::to_string(k) +
                                  " absent from training set");
        }
    }

    TrainedModel m;
    m.task = Task::Ordinal;
    m.n_classes = n_classes;
    m.hyperparams = hp;
    m.standardizer = standardize_fit(features);
    const Eigen::MatrixXd xs = m.standardizer.transform(features);
    for (int k = 0; k + 1 < n_classes; ++k) {
        Eigen::VectorXi above(labels.size());
        for (Eigen::Index i = 0; i < labels.size(); ++i) above[i] = labels[i] > k ? 1 : 0;
        m.submodels.push_back(fit_binary_machine(xs, above, hp));
    }
    m.n_samples = features.rows();
    m.seed = seed;
    return m;
}

namespace {

void check_predict_input(const TrainedModel& model,
                         const Eigen::Ref<const Eigen::MatrixXd>& features) {
    if (features.cols() != model.feature_dim()) {
        throw ValidationError("predict: feature dimension " + std::to_string(features.cols()) +
                              " does not match training dimension " +
                              std::to_string(model.feature_dim()));
    }
}

}  // namespace

Eigen::VectorXd decision_values(const TrainedModel& model,
                                const Eigen::Ref<const Eigen::MatrixXd>& features,
                                std::size_t index) {
    check_predict_input(model, features);
    if (index >= model.submodels.size()) throw ValidationError("decision_values: no such submodel");
    const Eigen::MatrixXd xs = model.standardizer.transform(features);
    const KernelParams k = kernel_params(model.hyperparams);
    Eigen::VectorXd out(xs.rows());
    for (Eigen::Index i = 0; i < xs.rows(); ++i) {
        out[i] = model.submodels[index].decision(k, xs.row(i).transpose());
    }
    return out;
}

Eigen::VectorXd predict_scores(const TrainedModel& model,
                               const Eigen::Ref<const Eigen::MatrixXd>& features) {
    if (model.task != Task::Regression) {
        throw ValidationError("predict_scores: model does not solve a regression task");
    }
    return decision_values(model, features, 0);
}

Eigen::VectorXi predict_labels(const TrainedModel& model,
                               const Eigen::Ref<const Eigen::MatrixXd>& features) {
    if (model.task == Task::Regression) {
        throw ValidationError("predict_labels: model solves a regression task");
    }
    check_predict_input(model, features);
    const Eigen::MatrixXd xs = model.standardizer.transform(features);
    const KernelParams k = kernel_params(model.hyperparams);
    Eigen::VectorXi out(xs.rows());
    for (Eigen::Index i = 0; i < xs.rows(); ++i) {
        int cls = 0;
        for (const SvmSubmodel& sub : model.submodels) {
            cls += sub.decision(k, xs.row(i).transpose()) > 0.0;
        }
        out[i] = std::min(cls, model.n_classes - 1);
    }
    return out;
}

Eigen::VectorXi regress_then_threshold(const TrainedModel& model, const LabelingScheme& scheme,
                                       const Eigen::Ref<const Eigen::MatrixXd>& features) {
    const Eigen::VectorXd scores = predict_scores(model, features);
    Eigen::VectorXi out(scores.size());
    for (Eigen::Index i = 0; i < scores.size(); ++i) out[i] = scheme.discretize(scores[i]);
    return out;
}

GridSpec default_grid(double score_range_length) {
    if (!(score_range_length > 0.0)) {
        throw ValidationError("default_grid: score range length must be positive");
    }
    GridSpec g;
    for (int e = -3; e <= 10; ++e) g.c_values.push_back(std::ldexp(1.0, e));
    for (int e = -10; e <= 3; ++e) g.gamma_values.push_back(std::ldexp(1.0, e));
    g.epsilon_values = {0.01 * score_range_length, 0.1 * score_range_length,
                        0.3 * score_range_length};
    return g;
}

namespace {

// k-fold assignment, seeded; stratified keeps per-class proportions.
std::vector<int> fold_assignment(const Eigen::VectorXi& labels, Eigen::Index n, int k_folds,
                                 bool stratified, std::uint64_t seed) {
    std::vector<int> fold(static_cast<std::size_t>(n), 0);
    Rng rng(seed);
    if (!stratified) {
        std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        shuffle(order, rng);
        for (std::size_t i = 0; i < order.size(); ++i) {
            fold[static_cast<std::size_t>(order[i])] = static_cast<int>(i % static_cast<std::size_t>(k_folds));
        }
        return fold;
    }
    const int n_classes = labels.size() > 0 ? labels.maxCoeff() + 1 : 0;
    for (int c = 0; c < n_classes; ++c) {
        std::vector<Eigen::Index> members;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (labels[i] == c) members.push_back(i);
        }
        if (static_cast<int>(members.size()) < k_folds) {
            throw ValidationError("cross-validation: class " + std::to_string(c) + " has " +
                                  std::to_string(members.size()) + " members, fewer than " +
                                  std::to_string(k_folds) + " folds");
        }
        shuffle(members, rng);
        for (std::size_t i = 0; i < members.size(); ++i) {
            fold[static_cast<std::size_t>(members[i])] = static_cast<int>(i % static_cast<std::size_t>(k_folds));
        }
    }
    return fold;
}

constexpr double kFailedFoldScore = -1e9;

// Mean CV score of one candidate; folds where the metric is undefined
// (e.g. constant predictions) score kFailedFoldScore.
double cv_score(Task task, const Eigen::Ref<const Eigen::MatrixXd>& x,
                const Eigen::Ref<const Eigen::VectorXd>& targets, const Eigen::VectorXi& labels,
                int n_classes, const Hyperparams& hp, const std::vector<int>& fold, int k_folds,
                std::uint64_t seed) {
    double total = 0.0;
    for (int f = 0; f < k_folds; ++f) {
        std::vector<Eigen::Index> tr, te;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            (fold[static_cast<std::size_t>(i)] == f ? te : tr).push_back(i);
        }
        Eigen::MatrixXd xtr(static_cast<Eigen::Index>(tr.size()), x.cols());
        Eigen::MatrixXd xte(static_cast<Eigen::Index>(te.size()), x.cols());
        for (std::size_t i = 0; i < tr.size(); ++i) xtr.row(static_cast<Eigen::Index>(i)) = x.row(tr[i]);
        for (std::size_t i = 0; i < te.size(); ++i) xte.row(static_cast<Eigen::Index>(i)) = x.row(te[i]);

        double score;
        try {
            if (task == Task::Regression) {
                Eigen::VectorXd ytr(static_cast<Eigen::Index>(tr.size()));
                Eigen::VectorXd yte(static_cast<Eigen::Index>(te.size()));
                for (std::size_t i = 0; i < tr.size(); ++i) ytr[static_cast<Eigen::Index>(i)] = targets[tr[i]];
                for (std::size_t i = 0; i < te.size(); ++i) yte[static_cast<Eigen::Index>(i)] = targets[te[i]];
                const TrainedModel m = train_svr(xtr, ytr, hp, seed);
                score = srcc(predict_scores(m, xte), yte);
            } else {
                Eigen::VectorXi ytr(static_cast<Eigen::Index>(tr.size()));
                Eigen::VectorXi yte(static_cast<Eigen::Index>(te.size()));
                for (std::size_t i = 0; i < tr.size(); ++i) ytr[static_cast<Eigen::Index>(i)] = labels[tr[i]];
                for (std::size_t i = 0; i < te.size(); ++i) yte[static_cast<Eigen::Index>(i)] = labels[te[i]];
                if (task == Task::Binary) {
                    const TrainedModel m = train_svc(xtr, ytr, hp, seed);
                    score = balanced_accuracy(confusion(predict_labels(m, xte), yte));
                } else {
                    const TrainedModel m = train_ordinal(xtr, ytr, n_classes, hp, seed);
                    const Eigen::VectorXi pred = predict_labels(m, xte);
                    score = -mae_ordinal(pred.array() + 1, yte.array() + 1);
                }
            }
        } catch (const std::exception&) {
            score = kFailedFoldScore;
        }
        total += score;
    }
    return total / static_cast<double>(k_folds);
}

}  // namespace

Hyperparams random_grid_search(Task task, const Eigen::Ref<const Eigen::MatrixXd>& features,
                               const Eigen::Ref<const Eigen::VectorXd>& targets,
                               const Eigen::Ref<const Eigen::VectorXi>& labels, int n_classes,
                               const GridSpec& grid, const SearchSettings& settings,
                               std::uint64_t seed) {
    if (settings.n_candidates < 1) throw ValidationError("grid search: n_candidates must be >= 1");
    if (settings.k_folds < 2) throw ValidationError("grid search: k_folds must be >= 2");
    if (grid.c_values.empty()) throw ValidationError("grid search: empty C grid");
    const bool rbf = settings.kernel == KernelKind::Rbf;
    const bool regression = task == Task::Regression;
    if (rbf && grid.gamma_values.empty()) throw ValidationError("grid search: empty gamma grid");
    if (regression && grid.epsilon_values.empty()) {
        throw ValidationError("grid search: empty epsilon grid");
    }
    if (regression && targets.size() != features.rows()) {
        throw ValidationError("grid search: target/row mismatch");
    }
    if (!regression && labels.size() != features.rows()) {
        throw ValidationError("grid search: label/row mismatch");
    }

    // Materialize the grid in (C, gamma, epsilon) order so tie-breaking by
    // index equals the documented smaller-C/gamma/epsilon rule.
    std::vector<Hyperparams> points;
    const std::vector<double> gammas = rbf ? grid.gamma_values : std::vector<double>{1.0};
    const std::vector<double> epsilons = regression ? grid.epsilon_values : std::vector<double>{0.0};
    for (double c : grid.c_values) {
        for (double g : gammas) {
            for (double e : epsilons) {
                Hyperparams hp;
                hp.kernel = settings.kernel;
                hp.c = c;
                hp.gamma = g;
                hp.epsilon = e;
                hp.class_weighting = settings.class_weighting;
                points.push_back(hp);
            }
        }
    }

    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, 0x67726964));
    shuffle(order, rng);
    order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(settings.n_candidates)));
    std::sort(order.begin(), order.end());  // stable tie-breaking by grid position

    const std::vector<int> fold = fold_assignment(
        regression ? Eigen::VectorXi() : Eigen::VectorXi(labels), features.rows(),
        settings.k_folds, !regression, derive_seed(seed, 0x666f6c64));

    std::vector<double> scores(order.size());
    std::atomic<std::size_t> next{0};
    auto eval_worker = [&]() {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= order.size()) return;
            scores[c] = cv_score(task, features, targets, labels, n_classes, points[order[c]], fold,
                                 settings.k_folds, seed);
        }
    };
    const int n_threads = std::max(1, std::min<int>(settings.workers, static_cast<int>(order.size())));
    if (n_threads > 1) {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(eval_worker);
        for (std::thread& t : pool) t.join();
    } else {
        eval_worker();
    }

    std::size_t best = 0;
    for (std::size_t c = 1; c < order.size(); ++c) {
        if (scores[c] > scores[best]) best = c;  // ties keep the smaller grid index
    }
    return points[order[best]];
}

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Eigen::VectorXd vector_from_json(const json& a) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
    return v;
}

}  // namespace

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
    json j;
    j["format"] = "ugcqa.model/1";
    j["task"] = to_string(model.task);
    j["n_classes"] = model.n_classes;
    j["hyperparams"] = {{"kernel", to_string(model.hyperparams.kernel)},
                        {"c", model.hyperparams.c},
                        {"gamma", model.hyperparams.gamma},
                        {"epsilon", model.hyperparams.epsilon},
                        {"class_weighting", model.hyperparams.class_weighting ==
                                                    ClassWeighting::Balanced
                                                ? "balanced"
                                                : "none"}};
    json std_j;
    std_j["mean"] = vector_to_json(model.standardizer.mean);
    std_j["stddev"] = vector_to_json(model.standardizer.stddev);
    std_j["constant"] = model.standardizer.constant;
    j["standardizer"] = std_j;

    json subs = json::array();
    for (const SvmSubmodel& s : model.submodels) {
        json rows = json::array();
        for (Eigen::Index r = 0; r < s.support_vectors.rows(); ++r) {
            rows.push_back(vector_to_json(s.support_vectors.row(r).transpose()));
        }
        subs.push_back({{"support_vectors", rows},
                        {"coefficients", vector_to_json(s.coefficients)},
                        {"bias", s.bias},
                        {"kkt_violation", s.kkt_violation}});
    }
    j["submodels"] = subs;
    j["n_samples"] = model.n_samples;
    j["seed"] = model.seed;
    write_text_file(path, j.dump(2) + "\n");
}

TrainedModel load_model(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": not a valid model file: " + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "ugcqa.model/1") {
            throw ValidationError(path.string() + ": unsupported model format");
        }
        TrainedModel m;
        m.task = task_from_string(j.at("task").get<std::string>());
        m.n_classes = j.at("n_classes").get<int>();
        const json& h = j.at("hyperparams");
        m.hyperparams.kernel = kernel_from_string(h.at("kernel").get<std::string>());
        m.hyperparams.c = h.at("c").get<double>();
        m.hyperparams.gamma = h.at("gamma").get<double>();
        m.hyperparams.epsilon = h.at("epsilon").get<double>();
        m.hyperparams.class_weighting = h.at("class_weighting").get<std::string>() == "balanced"
                                            ? ClassWeighting::Balanced
                                            : ClassWeighting::None;
        const json& st = j.at("standardizer");
        m.standardizer.mean = vector_from_json(st.at("mean"));
        m.standardizer.stddev = vector_from_json(st.at("stddev"));
        m.standardizer.constant = st.at("constant").get<std::vector<bool>>();
        for (const json& s : j.at("submodels")) {
            SvmSubmodel sub;
            const json& rows = s.at("support_vectors");
            sub.support_vectors.resize(static_cast<Eigen::Index>(rows.size()),
                                       m.standardizer.mean.size());
            for (std::size_t r = 0; r < rows.size(); ++r) {
                sub.support_vectors.row(static_cast<Eigen::Index>(r)) =
                    vector_from_json(rows[r]).transpose();
            }
            sub.coefficients = vector_from_json(s.at("coefficients"));
            sub.bias = s.at("bias").get<double>();
            sub.kkt_violation = s.at("kkt_violation").get<double>();
            m.submodels.push_back(std::move(sub));
        }
        m.n_samples = j.at("n_samples").get<std::int64_t>();
        m.seed = j.at("seed").get<std::uint64_t>();
        if (m.submodels.empty()) throw ValidationError(path.string() + ": model has no machines");
        return m;
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": malformed model file: " + e.what());
    }
}

}  // namespace ugcqa
