#include "ugcqa/features.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "ugcqa/image.hpp"
#include "ugcqa/io_util.hpp"

namespace ugcqa {

void validate(const FeatureMatrix& fm, const Dataset& d) {
    if (static_cast<std::size_t>(fm.count()) != d.size() ||
        fm.content_ids.size() != d.size()) {
        throw ValidationError("feature matrix row count " + std::to_string(fm.count()) +
                              " does not match dataset size " + std::to_string(d.size()));
    }
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (fm.content_ids[i] != d.samples[i].content_id) {
            throw ValidationError("feature row " + std::to_string(i) + " is '" + fm.content_ids[i] +
                                  "', dataset has '" + d.samples[i].content_id + "'");
        }
    }
    if (!fm.rows.allFinite()) throw ValidationError("feature matrix has non-finite entries");
}

FeatureMatrix import_features(const std::filesystem::path& path, const Dataset& d) {
    const std::vector<std::string> lines = split_lines(read_text_file(path));
    if (lines.empty()) throw ValidationError(path.string() + ": empty feature table");

    const std::vector<std::string> header = csv_split(lines[0]);
    if (header.size() < 2 || trim(header[0]) != "content_id") {
        throw ValidationError(path.string() + ": expected header 'content_id,f0,...'");
    }
    const Eigen::Index dim = static_cast<Eigen::Index>(header.size()) - 1;
    for (Eigen::Index k = 0; k < dim; ++k) {
        if (trim(header[static_cast<std::size_t>(k) + 1]) != "f" + std::to_string(k)) {
            throw ValidationError(path.string() + ": feature column " + std::to_string(k) +
                                  " must be named f" + std::to_string(k));
        }
    }

    std::unordered_map<std::string, Eigen::VectorXd> by_id;
    by_id.reserve(lines.size());
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const std::vector<std::string> f = csv_split(lines[i]);
        const std::string where = path.string() + ":" + std::to_string(i + 1);
        if (static_cast<Eigen::Index>(f.size()) != dim + 1) {
            throw ValidationError(where + ": expected " + std::to_string(dim + 1) + " fields, got " +
                                  std::to_string(f.size()));
        }
        const std::string id = std::string(trim(f[0]));
        Eigen::VectorXd row(dim);
        for (Eigen::Index k = 0; k < dim; ++k) {
            const double v = parse_double(f[static_cast<std::size_t>(k) + 1],
                                          where + " column f" + std::to_string(k));
            if (!std::isfinite(v)) {
                throw ValidationError(where + ": non-finite value in column f" + std::to_string(k) +
                                      " for '" + id + "'");
            }
            row[k] = v;
        }
        if (!by_id.emplace(id, std::move(row)).second) {
            throw ValidationError(where + ": duplicate content_id '" + id + "'");
        }
    }

    FeatureMatrix fm;
    fm.feature_set_name = path.stem().string();
    fm.content_ids.reserve(d.size());
    fm.rows.resize(static_cast<Eigen::Index>(d.size()), dim);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const std::string& id = d.samples[i].content_id;
        const auto it = by_id.find(id);
        if (it == by_id.end()) {
            throw ValidationError(path.string() + ": missing features for content_id '" + id + "'");
        }
        fm.rows.row(static_cast<Eigen::Index>(i)) = it->second;
        fm.content_ids.push_back(id);
        by_id.erase(it);
    }
    if (!by_id.empty()) {
        throw ValidationError(path.string() + ": feature table has " + std::to_string(by_id.size()) +
                              " ids not in the dataset, e.g. '" + by_id.begin()->first + "'");
    }
    return fm;
}

void save_features(const FeatureMatrix& fm, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "content_id";
    for (Eigen::Index k = 0; k < fm.dim(); ++k) out << ",f" << k;
    out << "\n";
    for (Eigen::Index i = 0; i < fm.count(); ++i) {
        std::vector<std::string> fields;
        fields.reserve(static_cast<std::size_t>(fm.dim()) + 1);
        fields.push_back(fm.content_ids[static_cast<std::size_t>(i)]);
        for (Eigen::Index k = 0; k < fm.dim(); ++k) fields.push_back(format_double(fm.rows(i, k)));
        out << csv_join(fields) << "\n";
    }
    write_text_file(path, out.str());
}

namespace {

// Cache key: path plus file size and mtime of the media, FNV-1a hashed.
std::string cache_key(const std::filesystem::path& media) {
    namespace fs = std::filesystem;
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::string_view s) {
        for (char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ULL;
        }
    };
    mix(fs::weakly_canonical(media).string());
    std::error_code ec;
    const auto size = fs::is_regular_file(media, ec) ? fs::file_size(media, ec) : 0;
    const auto mtime = fs::last_write_time(media, ec).time_since_epoch().count();
    mix(std::to_string(size));
    mix(std::to_string(mtime));
    std::ostringstream name;
    name << std::hex << h;
    return name.str();
}

std::optional<Eigen::VectorXd> cache_load(const std::filesystem::path& file) {
    if (!std::filesystem::exists(file)) return std::nullopt;
    const std::vector<std::string> lines = split_lines(read_text_file(file));
    if (lines.size() != 1) return std::nullopt;
    const std::vector<std::string> f = csv_split(lines[0]);
    Eigen::VectorXd v(static_cast<Eigen::Index>(f.size()));
    for (std::size_t k = 0; k < f.size(); ++k) {
        v[static_cast<Eigen::Index>(k)] = parse_double(f[k], "feature cache");
    }
    return v;
}

void cache_store(const std::filesystem::path& file, const Eigen::VectorXd& v) {
    std::vector<std::string> fields;
    fields.reserve(static_cast<std::size_t>(v.size()));
    for (Eigen::Index k = 0; k < v.size(); ++k) fields.push_back(format_double(v[k]));
    write_text_file(file, csv_join(fields) + "\n");
}

}  // namespace

Eigen::VectorXd extract_sample_features(const Sample& sample,
                                        const std::optional<std::filesystem::path>& cache_dir) {
    namespace fs = std::filesystem;
    if (sample.media_ref.empty()) {
        throw ValidationError("sample '" + sample.content_id + "' has no media_ref");
    }
    const fs::path media(sample.media_ref);

    std::optional<fs::path> cache_file;
    if (cache_dir) {
        cache_file = *cache_dir / (cache_key(media) + ".features.csv");
        if (auto cached = cache_load(*cache_file); cached && cached->size() == kBrisqueDim) {
            return *cached;
        }
    }

    Eigen::VectorXd features;
    if (fs::is_directory(media)) {
        std::vector<Eigen::VectorXd> frames;
        for (const fs::path& frame : list_frames(media)) {
            frames.push_back(brisque_features(load_image(frame)));
        }
        features = pool_temporal(frames);
    } else {
        features = brisque_features(load_image(media));
    }

    if (cache_file) cache_store(*cache_file, features);
    return features;
}

FeatureMatrix extract_brisque(const Dataset& d, int workers,
                              const std::optional<std::filesystem::path>& cache_dir) {
    if (workers <= 0) {
        workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    }
    if (cache_dir) std::filesystem::create_directories(*cache_dir);

    const std::size_t n = d.size();
    FeatureMatrix fm;
    fm.feature_set_name = "brisque";
    fm.content_ids.reserve(n);
    for (const Sample& s : d.samples) fm.content_ids.push_back(s.content_id);
    fm.rows.resize(static_cast<Eigen::Index>(n), kBrisqueDim);

    std::atomic<std::size_t> next{0};
    std::vector<std::string> failures(n);
    std::atomic<bool> failed{false};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fm.rows.row(static_cast<Eigen::Index>(i)) =
                    extract_sample_features(d.samples[i], cache_dir);
            } catch (const std::exception& e) {
                failures[i] = e.what();
                failed.store(true);
            }
        }
    };

    std::vector<std::thread> pool;
    const int n_threads = std::min<int>(workers, static_cast<int>(n));
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    if (failed.load()) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!failures[i].empty()) {
                throw ComputeError("feature extraction failed for '" + d.samples[i].content_id +
                                   "': " + failures[i]);
            }
        }
    }
    validate(fm, d);
    return fm;
}

}  // namespace ugcqa
