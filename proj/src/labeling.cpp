#include "ugcqa/labeling.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "ugcqa/io_util.hpp"

namespace ugcqa {

using nlohmann::json;

std::string to_string(SchemeProvenance p) {
    return p == SchemeProvenance::Fitted ? "fitted" : "paper-override";
}

int LabelingScheme::discretize(double y) const {
    int cls = 0;
    for (double t : thresholds) cls += (t < y);
    return cls;
}

std::vector<std::string> default_class_names(int n_classes) {
    switch (n_classes) {
        case 2: return {"low", "high"};
        case 3: return {"low", "medium", "high"};
        case 5: return {"bad", "poor", "fair", "good", "excellent"};
        default: {
            std::vector<std::string> names;
            names.reserve(static_cast<std::size_t>(n_classes));
            for (int k = 0; k < n_classes; ++k) names.push_back("class_" + std::to_string(k));
            return names;
        }
    }
}

LabelingScheme make_scheme(std::vector<double> thresholds, SchemeProvenance provenance,
                           std::vector<std::string> class_names) {
    if (thresholds.empty()) throw ValidationError("scheme: needs at least one threshold");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (!std::isfinite(thresholds[i])) throw ValidationError("scheme: non-finite threshold");
        if (i > 0 && !(thresholds[i - 1] < thresholds[i])) {
            throw ValidationError("scheme: thresholds must be strictly increasing");
        }
    }
    LabelingScheme s;
    s.n_classes = static_cast<int>(thresholds.size()) + 1;
    s.thresholds = std::move(thresholds);
    s.class_names = class_names.empty() ? default_class_names(s.n_classes) : std::move(class_names);
    if (static_cast<int>(s.class_names.size()) != s.n_classes) {
        throw ValidationError("scheme: expected " + std::to_string(s.n_classes) + " class names");
    }
    s.provenance = provenance;
    return s;
}

LabelingScheme fit_labeling(const Dataset& d, int n_classes, const EmConfig& config) {
    if (n_classes < 2) throw ValidationError("fit_labeling: n_classes must be >= 2");
    const GmmModel model = fit_gmm(d.mos_values(), n_classes, config);
    std::vector<double> bounds = thresholds(model, d.score_range.lo, d.score_range.hi);
    LabelingScheme s = make_scheme(std::move(bounds), SchemeProvenance::Fitted);
    s.gmm = model;
    require_thresholds_inside(s, d.score_range);
    return s;
}

void require_thresholds_inside(const LabelingScheme& scheme, const ScoreRange& range) {
    for (double t : scheme.thresholds) {
        if (!(t > range.lo && t < range.hi)) {
            throw ValidationError("scheme threshold " + format_double(t) +
                                  " not strictly inside score range [" + format_double(range.lo) +
                                  "," + format_double(range.hi) + "]");
        }
    }
}

Eigen::VectorXi discretize(const Dataset& d, const LabelingScheme& scheme) {
    require_thresholds_inside(scheme, d.score_range);
    Eigen::VectorXi labels(static_cast<Eigen::Index>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) {
        labels[static_cast<Eigen::Index>(i)] = scheme.discretize(d.samples[i].mos);
    }
    return labels;
}

std::vector<std::int64_t> class_histogram(const Eigen::Ref<const Eigen::VectorXi>& labels,
                                          int n_classes) {
    std::vector<std::int64_t> hist(static_cast<std::size_t>(n_classes), 0);
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        const int c = labels[i];
        if (c < 0 || c >= n_classes) throw ValidationError("class_histogram: label out of range");
        ++hist[static_cast<std::size_t>(c)];
    }
    return hist;
}

namespace {

json em_config_to_json(const EmConfig& c) {
    return json{{"max_iterations", c.max_iterations},
                {"rel_tol", c.rel_tol},
                {"variance_floor_factor", c.variance_floor_factor},
                {"n_restarts", c.n_restarts},
                {"seed", c.seed}};
}

EmConfig em_config_from_json(const json& j) {
    EmConfig c;
    c.max_iterations = j.at("max_iterations").get<int>();
    c.rel_tol = j.at("rel_tol").get<double>();
    c.variance_floor_factor = j.at("variance_floor_factor").get<double>();
    c.n_restarts = j.at("n_restarts").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

}  // namespace

void save_scheme(const LabelingScheme& scheme, const std::filesystem::path& path) {
    json j;
    j["format"] = "ugcqa.scheme/1";
    j["n_classes"] = scheme.n_classes;
    j["thresholds"] = scheme.thresholds;
    j["class_names"] = scheme.class_names;
    j["provenance"] = to_string(scheme.provenance);
    if (scheme.gmm) {
        const GmmModel& g = *scheme.gmm;
        json comps = json::array();
        for (const GmmComponent& c : g.components) {
            comps.push_back({{"weight", c.weight}, {"mean", c.mean}, {"variance", c.variance}});
        }
        j["gmm"] = {{"components", comps},
                    {"log_likelihood", g.log_likelihood},
                    {"n_iterations", g.n_iterations},
                    {"converged", g.converged},
                    {"em", em_config_to_json(g.settings)}};
    }
    write_text_file(path, j.dump(2) + "\n");
}

LabelingScheme load_scheme(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": not a valid scheme file: " + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "ugcqa.scheme/1") {
            throw ValidationError(path.string() + ": unsupported scheme format");
        }
        const std::string prov = j.at("provenance").get<std::string>();
        LabelingScheme s = make_scheme(j.at("thresholds").get<std::vector<double>>(),
                                       prov == "fitted" ? SchemeProvenance::Fitted
                                                        : SchemeProvenance::Override,
                                       j.at("class_names").get<std::vector<std::string>>());
        if (s.n_classes != j.at("n_classes").get<int>()) {
            throw ValidationError(path.string() + ": n_classes disagrees with threshold count");
        }
        if (j.contains("gmm")) {
            GmmModel g;
            for (const json& c : j["gmm"].at("components")) {
                g.components.push_back({c.at("weight").get<double>(), c.at("mean").get<double>(),
                                        c.at("variance").get<double>()});
            }
            g.log_likelihood = j["gmm"].at("log_likelihood").get<double>();
            g.n_iterations = j["gmm"].at("n_iterations").get<int>();
            g.converged = j["gmm"].at("converged").get<bool>();
            g.settings = em_config_from_json(j["gmm"].at("em"));
            s.gmm = std::move(g);
        }
        return s;
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": malformed scheme file: " + e.what());
    }
}

}  // namespace ugcqa
