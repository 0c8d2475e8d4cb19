#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ugcqa/brisque.hpp"
#include "ugcqa/dataset.hpp"

namespace ugcqa {

/// Per-sample fixed-length feature vectors, row-aligned with a Dataset.
/// Immutable once built.
struct FeatureMatrix {
    std::string feature_set_name;
    std::vector<std::string> content_ids;  // matches rows
    Eigen::MatrixXd rows;                  // n x dim, all finite

    Eigen::Index dim() const { return rows.cols(); }
    Eigen::Index count() const { return rows.rows(); }
};

/// Checks alignment against d (same ids, same order) plus finiteness.
void validate(const FeatureMatrix& fm, const Dataset& d);

/// Reads a feature table (CSV header `content_id,f0,...,f{dim-1}`) and
/// aligns rows to the dataset order. Missing or extra ids, inconsistent
/// dimensions, and non-finite entries are rejected with the offending
/// location.
FeatureMatrix import_features(const std::filesystem::path& path, const Dataset& d);

/// Writes the table in the import format with full-precision decimals.
void save_features(const FeatureMatrix& fm, const std::filesystem::path& path);

/// BRISQUE features of one sample: a direct image for an image reference,
/// or the temporal average over the frames of a directory reference.
/// `cache_dir`, when set, memoizes per-media vectors across runs.
Eigen::VectorXd extract_sample_features(
    const Sample& sample, const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

/// Whole-dataset BRISQUE extraction, parallel over samples. Every sample
/// must carry a media_ref.
FeatureMatrix extract_brisque(const Dataset& d, int workers = 0,
                              const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

}  // namespace ugcqa
