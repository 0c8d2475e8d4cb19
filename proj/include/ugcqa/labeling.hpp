#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ugcqa/dataset.hpp"
#include "ugcqa/gmm.hpp"

namespace ugcqa {

enum class SchemeProvenance { Fitted, Override };

std::string to_string(SchemeProvenance p);

/// Ordered class labeling induced by N-1 strictly increasing thresholds.
/// discretize(y) counts thresholds strictly below y, so a score exactly at
/// a threshold falls in the lower class.
struct LabelingScheme {
    int n_classes = 2;
    std::vector<double> thresholds;        // size n_classes - 1
    std::vector<std::string> class_names;  // low-to-high quality order
    SchemeProvenance provenance = SchemeProvenance::Fitted;
    std::optional<GmmModel> gmm;           // present when fitted

    int discretize(double y) const;

    /// 1-based rank (class index + 1) used by the ordinal metrics.
    int rank(double y) const { return discretize(y) + 1; }
};

/// Default ordered names: N=2 low/high, N=3 low/medium/high, N=5 the ACR
/// scale, otherwise class_0..class_{N-1}.
std::vector<std::string> default_class_names(int n_classes);

/// Builds a scheme from explicit thresholds (e.g. published values),
/// validating monotonicity. Provenance records the source.
LabelingScheme make_scheme(std::vector<double> thresholds, SchemeProvenance provenance,
                           std::vector<std::string> class_names = {});

/// Fits an n_classes-component mixture to the dataset's MOS values and
/// derives thresholds over the declared score range.
LabelingScheme fit_labeling(const Dataset& d, int n_classes, const EmConfig& config = {});

/// Requires every threshold strictly inside the range.
void require_thresholds_inside(const LabelingScheme& scheme, const ScoreRange& range);

/// Class index per sample (thresholds must lie strictly inside
/// d.score_range).
Eigen::VectorXi discretize(const Dataset& d, const LabelingScheme& scheme);

/// Per-class sample counts of a discretized label vector.
std::vector<std::int64_t> class_histogram(const Eigen::Ref<const Eigen::VectorXi>& labels,
                                          int n_classes);

/// Scheme metadata file (JSON): n_classes, thresholds at full precision,
/// class names, provenance, and the EM settings plus fitted mixture when
/// applicable.
void save_scheme(const LabelingScheme& scheme, const std::filesystem::path& path);
LabelingScheme load_scheme(const std::filesystem::path& path);

}  // namespace ugcqa
