#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ugcqa/error.hpp"

namespace ugcqa {

enum class MediaKind { Image, Video };

std::string to_string(MediaKind k);
MediaKind media_kind_from_string(const std::string& s);

/// Closed interval of admissible scores. Always a < b.
struct ScoreRange {
    double lo = 0.0;
    double hi = 1.0;

    double length() const { return hi - lo; }
    bool contains(double v) const { return v >= lo && v <= hi; }
};

/// One rated content item. `media_ref` points at an image file or, for
/// videos, a directory of frame images; it may be empty when features are
/// imported from a precomputed table.
struct Sample {
    std::string content_id;
    std::string media_ref;                 // empty = no media attached
    double mos = 0.0;
    std::optional<double> mos_sigma;       // carried through, never consumed
};

/// Immutable after load; safe to share across threads.
struct Dataset {
    std::string name;
    MediaKind kind = MediaKind::Image;
    ScoreRange score_range;
    std::vector<Sample> samples;

    std::size_t size() const { return samples.size(); }

    /// All MOS values in sample order.
    Eigen::VectorXd mos_values() const;

    /// Index of a content id, or nullopt.
    std::optional<std::size_t> find(const std::string& content_id) const;
};

/// Checks every Dataset invariant (nonempty, unique ids, scores in range,
/// nonnegative sigma, valid range). Throws ValidationError naming the
/// offending sample.
void validate(const Dataset& d);

/// Reads a manifest: CSV with header `content_id,media_ref,mos,mos_sigma`,
/// preceded by a `# key=value` sidecar block carrying name, range_min,
/// range_max and kind. The returned Dataset is fully validated.
Dataset load_manifest(const std::filesystem::path& path);

/// Inverse of load_manifest up to field order.
void save_manifest(const Dataset& d, const std::filesystem::path& path);

/// Affinely remaps every MOS from the dataset's range onto `target` and
/// updates score_range. Order-preserving by construction.
Dataset normalize_scores(const Dataset& d, ScoreRange target);

}  // namespace ugcqa
