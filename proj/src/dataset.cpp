#include "ugcqa/dataset.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <unordered_set>

#include "ugcqa/io_util.hpp"

namespace ugcqa {

std::string to_string(MediaKind k) {
    return k == MediaKind::Image ? "image" : "video";
}

MediaKind media_kind_from_string(const std::string& s) {
    if (s == "image") return MediaKind::Image;
    if (s == "video") return MediaKind::Video;
    throw ValidationError("unknown dataset kind '" + s + "' (expected image|video)");
}

Eigen::VectorXd Dataset::mos_values() const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) v[static_cast<Eigen::Index>(i)] = samples[i].mos;
    return v;
}

std::optional<std::size_t> Dataset::find(const std::string& content_id) const {
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].content_id == content_id) return i;
    }
    return std::nullopt;
}

void validate(const Dataset& d) {
    if (!(d.score_range.lo < d.score_range.hi)) {
        throw ValidationError("dataset '" + d.name + "': score range [" +
                              format_double(d.score_range.lo) + "," + format_double(d.score_range.hi) +
                              "] is degenerate");
    }
    if (d.samples.empty()) throw ValidationError("dataset '" + d.name + "': no samples");

    std::unordered_set<std::string> seen;
    seen.reserve(d.samples.size());
    for (const Sample& s : d.samples) {
        if (s.content_id.empty()) throw ValidationError("dataset '" + d.name + "': empty content_id");
        if (!seen.insert(s.content_id).second) {
            throw ValidationError("dataset '" + d.name + "': duplicate content_id '" + s.content_id + "'");
        }
        if (!std::isfinite(s.mos) || !d.score_range.contains(s.mos)) {
            throw ValidationError("dataset '" + d.name + "': sample '" + s.content_id + "' MOS " +
                                  format_double(s.mos) + " outside range [" +
                                  format_double(d.score_range.lo) + "," +
                                  format_double(d.score_range.hi) + "]");
        }
        if (s.mos_sigma && (!std::isfinite(*s.mos_sigma) || *s.mos_sigma < 0.0)) {
            throw ValidationError("dataset '" + d.name + "': sample '" + s.content_id +
                                  "' has negative mos_sigma");
        }
        // Video media are frame directories; container files are out of
        // scope. Only checkable when the path already exists.
        if (d.kind == MediaKind::Video && !s.media_ref.empty()) {
            std::error_code ec;
            if (std::filesystem::is_regular_file(s.media_ref, ec)) {
                throw ValidationError("dataset '" + d.name + "': video sample '" + s.content_id +
                                      "' must reference a frame directory, got file '" +
                                      s.media_ref + "'");
            }
        }
    }
}

namespace {

const char* kHeader = "content_id,media_ref,mos,mos_sigma";

}  // namespace

Dataset load_manifest(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    const std::vector<std::string> lines = split_lines(text);

    Dataset d;
    std::map<std::string, std::string> meta;
    std::size_t i = 0;
    for (; i < lines.size(); ++i) {
        std::string_view line = trim(lines[i]);
        if (line.empty()) continue;
        if (line.front() != '#') break;
        line.remove_prefix(1);
        line = trim(line);
        auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ValidationError(path.string() + ": metadata line without '=': # " + std::string(line));
        }
        meta[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
    }
    for (const char* key : {"name", "range_min", "range_max", "kind"}) {
        if (!meta.count(key)) {
            throw ValidationError(path.string() + ": missing metadata key '" + key +
                                  "' (expected '# " + key + "=...')");
        }
    }
    d.name = meta.at("name");
    d.score_range.lo = parse_double(meta.at("range_min"), "range_min");
    d.score_range.hi = parse_double(meta.at("range_max"), "range_max");
    d.kind = media_kind_from_string(meta.at("kind"));

    if (i >= lines.size() || trim(lines[i]) != kHeader) {
        throw ValidationError(path.string() + ": expected header '" + std::string(kHeader) + "'");
    }
    ++i;

    for (; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        std::vector<std::string> f = csv_split(lines[i]);
        if (f.size() != 4) {
            throw ValidationError(path.string() + ":" + std::to_string(i + 1) + ": expected 4 fields, got " +
                                  std::to_string(f.size()));
        }
        Sample s;
        s.content_id = std::string(trim(f[0]));
        s.media_ref = std::string(trim(f[1]));
        s.mos = parse_double(f[2], "mos of '" + s.content_id + "'");
        std::string_view sig = trim(f[3]);
        if (!sig.empty()) s.mos_sigma = parse_double(sig, "mos_sigma of '" + s.content_id + "'");
        d.samples.push_back(std::move(s));
    }

    validate(d);
    return d;
}

void save_manifest(const Dataset& d, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "# name=" << d.name << "\n";
    out << "# range_min=" << format_double(d.score_range.lo) << "\n";
    out << "# range_max=" << format_double(d.score_range.hi) << "\n";
    out << "# kind=" << to_string(d.kind) << "\n";
    out << kHeader << "\n";
    for (const Sample& s : d.samples) {
        out << csv_join({s.content_id, s.media_ref, format_double(s.mos),
                         s.mos_sigma ? format_double(*s.mos_sigma) : std::string()})
            << "\n";
    }
    write_text_file(path, out.str());
}

Dataset normalize_scores(const Dataset& d, ScoreRange target) {
    if (!(target.lo < target.hi)) {
        throw ValidationError("normalize_scores: target range [" + format_double(target.lo) + "," +
                              format_double(target.hi) + "] has nonpositive length");
    }
    Dataset out = d;
    const double scale = target.length() / d.score_range.length();
    for (Sample& s : out.samples) {
        s.mos = target.lo + (s.mos - d.score_range.lo) * scale;
        // Affine maps are exact at endpoints up to rounding; clamp the ulps.
        s.mos = std::min(std::max(s.mos, target.lo), target.hi);
        if (s.mos_sigma) s.mos_sigma = *s.mos_sigma * scale;
    }
    out.score_range = target;
    validate(out);
    return out;
}

}  // namespace ugcqa
