#include "ugcqa/splits.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ugcqa/rng.hpp"

namespace ugcqa {

namespace {

Eigen::Index clamp_count(double ideal, Eigen::Index n) {
    const Eigen::Index v = static_cast<Eigen::Index>(std::llround(ideal));
    return std::clamp<Eigen::Index>(v, 1, n - 1);
}

}  // namespace

SplitPlan make_splits(Eigen::Index n_samples, const Eigen::Ref<const Eigen::VectorXi>& labels,
                      double ratio, int repeats, bool stratified, std::uint64_t seed) {
    if (n_samples < 10) throw ValidationError("make_splits: need at least 10 samples");
    if (!(ratio > 0.0 && ratio < 1.0)) throw ValidationError("make_splits: ratio must be in (0,1)");
    if (repeats < 1) throw ValidationError("make_splits: repeats must be >= 1");

    std::vector<std::vector<Eigen::Index>> classes;
    if (stratified) {
        if (labels.size() != n_samples) {
            throw ValidationError("make_splits: stratification needs one label per sample");
        }
        const int n_classes = labels.maxCoeff() + 1;
        classes.resize(static_cast<std::size_t>(n_classes));
        for (Eigen::Index i = 0; i < n_samples; ++i) {
            if (labels[i] < 0) throw ValidationError("make_splits: negative class label");
            classes[static_cast<std::size_t>(labels[i])].push_back(i);
        }
        for (std::size_t c = 0; c < classes.size(); ++c) {
            if (classes[c].size() < 2) {
                throw ValidationError("make_splits: class " + std::to_string(c) + " has " +
                                      std::to_string(classes[c].size()) +
                                      " members; stratification needs at least 2");
            }
        }
    }

    SplitPlan plan;
    plan.ratio = ratio;
    plan.seed = seed;
    plan.stratified = stratified;
    plan.repeats.resize(static_cast<std::size_t>(repeats));

    for (int r = 0; r < repeats; ++r) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        SplitRepeat& rep = plan.repeats[static_cast<std::size_t>(r)];
        if (!stratified) {
            std::vector<Eigen::Index> order(static_cast<std::size_t>(n_samples));
            std::iota(order.begin(), order.end(), 0);
            shuffle(order, rng);
            const Eigen::Index n_train = clamp_count(ratio * static_cast<double>(n_samples), n_samples);
            rep.train.assign(order.begin(), order.begin() + n_train);
            rep.test.assign(order.begin() + n_train, order.end());
        } else {
            for (std::vector<Eigen::Index> members : classes) {
                shuffle(members, rng);
                const Eigen::Index n_test = clamp_count(
                    (1.0 - ratio) * static_cast<double>(members.size()),
                    static_cast<Eigen::Index>(members.size()));
                rep.test.insert(rep.test.end(), members.begin(), members.begin() + n_test);
                rep.train.insert(rep.train.end(), members.begin() + n_test, members.end());
            }
        }
        std::sort(rep.train.begin(), rep.train.end());
        std::sort(rep.test.begin(), rep.test.end());
    }
    return plan;
}

void validate(const SplitPlan& plan, Eigen::Index n_samples,
              const Eigen::Ref<const Eigen::VectorXi>& labels) {
    for (std::size_t r = 0; r < plan.repeats.size(); ++r) {
        const SplitRepeat& rep = plan.repeats[r];
        std::vector<char> seen(static_cast<std::size_t>(n_samples), 0);
        for (Eigen::Index i : rep.train) {
            if (i < 0 || i >= n_samples || seen[static_cast<std::size_t>(i)]) {
                throw ComputeError("split repeat " + std::to_string(r) + ": bad train index");
            }
            seen[static_cast<std::size_t>(i)] = 1;
        }
        for (Eigen::Index i : rep.test) {
            if (i < 0 || i >= n_samples || seen[static_cast<std::size_t>(i)]) {
                throw ComputeError("split repeat " + std::to_string(r) +
                                   ": test overlaps train or repeats an index");
            }
            seen[static_cast<std::size_t>(i)] = 2;
        }
        if (rep.train.size() + rep.test.size() != static_cast<std::size_t>(n_samples)) {
            throw ComputeError("split repeat " + std::to_string(r) + ": indices do not cover dataset");
        }
        if (plan.stratified) {
            const int n_classes = labels.maxCoeff() + 1;
            for (int c = 0; c < n_classes; ++c) {
                Eigen::Index total = 0, test = 0;
                for (Eigen::Index i = 0; i < n_samples; ++i) {
                    if (labels[i] == c) {
                        ++total;
                        test += seen[static_cast<std::size_t>(i)] == 2;
                    }
                }
                const double ideal = (1.0 - plan.ratio) * static_cast<double>(total);
                if (std::abs(static_cast<double>(test) - ideal) > 1.0) {
                    throw ComputeError("split repeat " + std::to_string(r) + ": class " +
                                       std::to_string(c) + " test share off by more than one sample");
                }
            }
        }
    }
}

}  // namespace ugcqa
