// Command-line surface for the UGC quality-assessment benchmarking toolkit.
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ugcqa/benchmark.hpp"
#include "ugcqa/dataset.hpp"
#include "ugcqa/features.hpp"
#include "ugcqa/io_util.hpp"
#include "ugcqa/labeling.hpp"
#include "ugcqa/learner.hpp"

using namespace ugcqa;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::optional<fs::path> cache_dir_from_env() {
    if (const char* env = std::getenv("UGCQA_CACHE_DIR"); env && *env) return fs::path(env);
    return std::nullopt;
}

FeatureMatrix resolve_features(const std::string& source, const Dataset& d, int workers) {
    if (source == "builtin-brisque") {
        return extract_brisque(d, workers, cache_dir_from_env());
    }
    return import_features(source, d);
}

std::vector<Task> parse_tasks(const std::string& spec) {
    std::vector<Task> tasks;
    for (const std::string& t : csv_split(spec)) {
        const std::string_view v = trim(t);
        if (v == "A") {
            tasks.push_back(Task::Regression);
        } else if (v == "B") {
            tasks.push_back(Task::Binary);
        } else if (v == "C") {
            tasks.push_back(Task::Ordinal);
        } else {
            throw ValidationError("unknown task '" + std::string(v) + "' (expected A, B or C)");
        }
    }
    if (tasks.empty()) throw ValidationError("no tasks requested");
    return tasks;
}

std::vector<double> parse_threshold_list(const std::string& spec) {
    std::vector<double> values;
    for (const std::string& t : csv_split(spec)) values.push_back(parse_double(t, "threshold"));
    return values;
}


ClassWeighting weighting_from_string(const std::string& s) {
    if (s == "balanced") return ClassWeighting::Balanced;
    if (s == "none") return ClassWeighting::None;
    throw ValidationError("unknown class weighting '" + s + "' (expected balanced|none)");
}

void echo_config(const fs::path& out_dir, const std::string& command, const json& values) {
    json j;
    j["command"] = command;
    j["options"] = values;
    write_text_file(out_dir / "config.json", j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// fit-labels

struct FitLabelsOptions {
    std::string manifest;
    std::string out;
    int classes = 2;
    std::string thresholds;  // override list; skips fitting
    int restarts = 1;
    std::uint64_t seed = 0;
};

void write_histogram(const fs::path& path, const LabelingScheme& scheme,
                     const Eigen::VectorXi& labels) {
    const std::vector<std::int64_t> hist = class_histogram(labels, scheme.n_classes);
    std::ostringstream out;
    out << "class_index,class_name,count\n";
    for (int k = 0; k < scheme.n_classes; ++k) {
        out << k << "," << scheme.class_names[static_cast<std::size_t>(k)] << ","
            << hist[static_cast<std::size_t>(k)] << "\n";
    }
    write_text_file(path, out.str());
}

void write_mos_histogram(const fs::path& path, const Dataset& d, int bins) {
    const Eigen::VectorXd mos = d.mos_values();
    const double lo = d.score_range.lo;
    const double width = d.score_range.length() / bins;
    std::vector<std::int64_t> counts(static_cast<std::size_t>(bins), 0);
    for (Eigen::Index i = 0; i < mos.size(); ++i) {
        int b = static_cast<int>((mos[i] - lo) / width);
        b = std::min(std::max(b, 0), bins - 1);
        ++counts[static_cast<std::size_t>(b)];
    }
    std::ostringstream out;
    out << "bin_lo,bin_hi,count,density\n";
    const double n = static_cast<double>(mos.size());
    for (int b = 0; b < bins; ++b) {
        const double blo = lo + b * width;
        out << format_double(blo) << "," << format_double(blo + width) << ","
            << counts[static_cast<std::size_t>(b)] << ","
            << format_double(counts[static_cast<std::size_t>(b)] / (n * width)) << "\n";
    }
    write_text_file(path, out.str());
}

// Component densities on a grid wide enough that the mixture's mass over
// the grid is 1 up to quadrature error.
void write_density_curves(const fs::path& path, const GmmModel& model, const ScoreRange& range) {
    double sigma_max = 0.0;
    for (const GmmComponent& c : model.components) {
        sigma_max = std::max(sigma_max, std::sqrt(c.variance));
    }
    const double lo = range.lo - 8.0 * sigma_max;
    const double hi = range.hi + 8.0 * sigma_max;
    const int points = 4097;
    const double step = (hi - lo) / (points - 1);

    std::ostringstream out;
    out << "y";
    for (int k = 0; k < model.n_components(); ++k) out << ",component_" << k;
    out << ",mixture\n";
    for (int i = 0; i < points; ++i) {
        const double y = lo + step * i;
        out << format_double(y);
        double total = 0.0;
        for (const GmmComponent& c : model.components) {
            const double d = y - c.mean;
            const double dens =
                c.weight * std::exp(-0.5 * d * d / c.variance) / std::sqrt(2.0 * M_PI * c.variance);
            out << "," << format_double(dens);
            total += dens;
        }
        out << "," << format_double(total) << "\n";
    }
    write_text_file(path, out.str());
}

int cmd_fit_labels(const FitLabelsOptions& opt) {
    const Dataset d = load_manifest(opt.manifest);
    const fs::path out_dir(opt.out);
    fs::create_directories(out_dir);

    LabelingScheme scheme;
    if (!opt.thresholds.empty()) {
        scheme = make_scheme(parse_threshold_list(opt.thresholds), SchemeProvenance::Override);
        require_thresholds_inside(scheme, d.score_range);
    } else {
        EmConfig cfg;
        cfg.n_restarts = opt.restarts;
        cfg.seed = opt.seed;
        scheme = fit_labeling(d, opt.classes, cfg);
    }

    save_scheme(scheme, out_dir / "scheme.json");
    write_histogram(out_dir / "class_histogram.csv", scheme, discretize(d, scheme));
    write_mos_histogram(out_dir / "mos_histogram.csv", d, 64);
    if (scheme.gmm) write_density_curves(out_dir / "density_curves.csv", *scheme.gmm, d.score_range);

    echo_config(out_dir, "fit-labels",
                json{{"manifest", opt.manifest},
                     {"classes", opt.classes},
                     {"thresholds", opt.thresholds},
                     {"restarts", opt.restarts},
                     {"seed", opt.seed}});

    std::cout << "scheme: " << to_string(scheme.provenance) << ", thresholds:";
    for (double t : scheme.thresholds) std::cout << " " << format_double(t);
    std::cout << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// extract / import-check

struct ExtractOptions {
    std::string manifest;
    std::string out;
    int workers = 0;
};

int cmd_extract(const ExtractOptions& opt) {
    const Dataset d = load_manifest(opt.manifest);
    const fs::path out_dir(opt.out);
    fs::create_directories(out_dir);
    const FeatureMatrix fm = extract_brisque(d, opt.workers, cache_dir_from_env());
    save_features(fm, out_dir / "features.csv");
    echo_config(out_dir, "extract",
                json{{"manifest", opt.manifest}, {"workers", opt.workers}});
    std::cout << "wrote " << fm.count() << "x" << fm.dim() << " feature table\n";
    return 0;
}

struct ImportCheckOptions {
    std::string manifest;
    std::string features;
};

int cmd_import_check(const ImportCheckOptions& opt) {
    const Dataset d = load_manifest(opt.manifest);
    const FeatureMatrix fm = import_features(opt.features, d);
    std::cout << "ok: " << fm.count() << " rows, dim " << fm.dim() << ", feature set '"
              << fm.feature_set_name << "'\n";
    return 0;
}

// ---------------------------------------------------------------------------
// shared labeling resolution for train/benchmark

LabelingScheme resolve_scheme(const Dataset& d, const std::string& scheme_path,
                              const std::string& thresholds, int fit_classes,
                              std::uint64_t seed, int restarts) {
    if (!scheme_path.empty()) {
        LabelingScheme s = load_scheme(scheme_path);
        require_thresholds_inside(s, d.score_range);
        return s;
    }
    if (!thresholds.empty()) {
        LabelingScheme s = make_scheme(parse_threshold_list(thresholds), SchemeProvenance::Override);
        require_thresholds_inside(s, d.score_range);
        return s;
    }
    EmConfig cfg;
    cfg.seed = seed;
    cfg.n_restarts = restarts;
    return fit_labeling(d, fit_classes, cfg);
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
    std::string manifest;
    std::string features = "builtin-brisque";
    std::string task = "A";
    std::string class_weighting = "balanced";
    std::string scheme;
    std::string thresholds;
    int classes = 0;  // 0 = task default (B:2, C:3)
    std::string kernel = "rbf";
    int candidates = 32;
    int folds = 5;
    std::uint64_t seed = 0;
    int workers = 0;
    std::string out;
};

int cmd_train(const TrainOptions& opt) {
    const Dataset d = load_manifest(opt.manifest);
    const FeatureMatrix fm = resolve_features(opt.features, d, opt.workers);
    const fs::path out_dir(opt.out);
    fs::create_directories(out_dir);

    SearchSettings search;
    search.n_candidates = opt.candidates;
    search.k_folds = opt.folds;
    search.kernel = kernel_from_string(opt.kernel);
    search.class_weighting = weighting_from_string(opt.class_weighting);
    search.workers = opt.workers > 0 ? opt.workers : 1;
    const GridSpec grid = default_grid(d.score_range.length());

    TrainedModel model;
    if (opt.task == "A") {
        const Eigen::VectorXd mos = d.mos_values();
        const Hyperparams hp = random_grid_search(Task::Regression, fm.rows, mos,
                                                  Eigen::VectorXi(), 0, grid, search, opt.seed);
        model = train_svr(fm.rows, mos, hp, opt.seed);
    } else if (opt.task == "B" || opt.task == "C") {
        const bool binary = opt.task == "B";
        const int n_classes = opt.classes > 0 ? opt.classes : (binary ? 2 : 3);
        const LabelingScheme scheme =
            resolve_scheme(d, opt.scheme, opt.thresholds, n_classes, opt.seed, 1);
        if (binary && scheme.n_classes != 2) {
            throw ValidationError("task B needs a 2-class scheme");
        }
        const Eigen::VectorXi labels = discretize(d, scheme);
        if (binary) {
            const Hyperparams hp = random_grid_search(Task::Binary, fm.rows, Eigen::VectorXd(),
                                                      labels, 2, grid, search, opt.seed);
            model = train_svc(fm.rows, labels, hp, opt.seed);
        } else {
            const Hyperparams hp =
                random_grid_search(Task::Ordinal, fm.rows, Eigen::VectorXd(), labels,
                                   scheme.n_classes, grid, search, opt.seed);
            model = train_ordinal(fm.rows, labels, scheme.n_classes, hp, opt.seed);
        }
        save_scheme(scheme, out_dir / "scheme.json");
    } else {
        throw ValidationError("unknown task '" + opt.task + "' (expected A, B or C)");
    }

    save_model(model, out_dir / "model.json");
    echo_config(out_dir, "train",
                json{{"manifest", opt.manifest},
                     {"features", opt.features},
                     {"task", opt.task},
                     {"scheme", opt.scheme},
                     {"thresholds", opt.thresholds},
                     {"kernel", opt.kernel},
                     {"candidates", opt.candidates},
                     {"folds", opt.folds},
                     {"seed", opt.seed}});
    std::cout << "trained " << to_string(model.task) << " model on " << model.n_samples
              << " samples\n";
    return 0;
}

// ---------------------------------------------------------------------------
// benchmark

struct BenchmarkOptions {
    std::string manifest;
    std::string features = "builtin-brisque";
    std::string tasks = "A,B,C";
    std::string class_weighting = "balanced";
    std::string scheme_binary;
    std::string thresholds_binary;
    std::string scheme_ordinal;
    std::string thresholds_ordinal;
    int ordinal_classes = 3;
    std::uint64_t seed = 0;
    int repeats = 20;
    double ratio = 0.8;
    std::string kernel = "rbf";
    int candidates = 32;
    int folds = 5;
    int workers = 0;
    bool plcc_logistic = false;
    bool regthr_baseline = false;
    int restarts = 1;
    std::string model_name;
    std::string out;
};

int cmd_benchmark(const BenchmarkOptions& opt) {
    const Dataset d = load_manifest(opt.manifest);
    const FeatureMatrix fm = resolve_features(opt.features, d, opt.workers);
    const fs::path out_dir(opt.out);
    fs::create_directories(out_dir);

    BenchmarkConfig config;
    config.tasks = parse_tasks(opt.tasks);
    config.repeats = opt.repeats;
    config.ratio = opt.ratio;
    config.seed = opt.seed;
    config.search.n_candidates = opt.candidates;
    config.search.k_folds = opt.folds;
    config.search.kernel = kernel_from_string(opt.kernel);
    config.search.class_weighting = weighting_from_string(opt.class_weighting);
    config.workers = opt.workers;
    config.plcc_logistic = opt.plcc_logistic;
    config.regthr_baseline = opt.regthr_baseline;
    config.model_name = opt.model_name;

    const bool want_b = opt.tasks.find('B') != std::string::npos || opt.regthr_baseline;
    const bool want_c = opt.tasks.find('C') != std::string::npos;

    std::optional<LabelingScheme> scheme_b, scheme_c;
    if (want_b) {
        scheme_b = resolve_scheme(d, opt.scheme_binary, opt.thresholds_binary, 2, opt.seed,
                                  opt.restarts);
        save_scheme(*scheme_b, out_dir / "scheme_binary.json");
    }
    if (want_c) {
        scheme_c = resolve_scheme(d, opt.scheme_ordinal, opt.thresholds_ordinal,
                                  opt.ordinal_classes, opt.seed, opt.restarts);
        save_scheme(*scheme_c, out_dir / "scheme_ordinal.json");
    }

    const BenchmarkReport report =
        run_benchmark(d, fm, scheme_b ? &*scheme_b : nullptr, scheme_c ? &*scheme_c : nullptr,
                      config);

    save_per_repeat_csv({report}, out_dir / "per_repeat.csv");
    save_summary_csv({report}, out_dir / "summary.csv");
    write_text_file(out_dir / "summary.txt", format_summary_table({report}));
    echo_config(out_dir, "benchmark",
                json{{"manifest", opt.manifest},
                     {"features", opt.features},
                     {"tasks", opt.tasks},
                     {"seed", opt.seed},
                     {"repeats", opt.repeats},
                     {"ratio", opt.ratio},
                     {"kernel", opt.kernel},
                     {"candidates", opt.candidates},
                     {"folds", opt.folds},
                     {"plcc_logistic", opt.plcc_logistic},
                     {"regthr_baseline", opt.regthr_baseline},
                     {"model_name", config.model_name}});

    std::cout << format_summary_table({report});
    return 0;
}

// ---------------------------------------------------------------------------
// report

struct ReportOptions {
    std::vector<std::string> inputs;
    std::string out;
};

int cmd_report(const ReportOptions& opt) {
    std::vector<BenchmarkReport> all;
    for (const std::string& path : opt.inputs) {
        std::vector<BenchmarkReport> part = load_per_repeat_csv(path);
        all.insert(all.end(), part.begin(), part.end());
    }
    if (all.empty()) throw ValidationError("report: no input rows");
    const fs::path out_dir(opt.out);
    fs::create_directories(out_dir);
    save_summary_csv(all, out_dir / "summary.csv");
    write_text_file(out_dir / "summary.txt", format_summary_table(all));
    std::cout << format_summary_table(all);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"UGC quality assessment benchmarking toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from an INI/TOML file");

    FitLabelsOptions fit_opt;
    CLI::App* fit = app.add_subcommand("fit-labels",
                                       "Fit a Gaussian-mixture labeling to manifest MOS values");
    fit->add_option("--manifest", fit_opt.manifest, "Dataset manifest")->required();
    fit->add_option("--classes", fit_opt.classes, "Number of quality classes");
    fit->add_option("--thresholds", fit_opt.thresholds,
                    "Comma-separated thresholds; bypasses fitting");
    fit->add_option("--restarts", fit_opt.restarts, "Seeded EM restarts");
    fit->add_option("--seed", fit_opt.seed, "Random seed");
    fit->add_option("--out", fit_opt.out, "Output directory")->required();

    ExtractOptions ext_opt;
    CLI::App* ext = app.add_subcommand("extract", "Extract built-in BRISQUE features");
    ext->add_option("--manifest", ext_opt.manifest, "Dataset manifest")->required();
    ext->add_option("--out", ext_opt.out, "Output directory")->required();
    ext->add_option("--workers", ext_opt.workers, "Parallel workers (0 = hardware)");

    ImportCheckOptions imp_opt;
    CLI::App* imp = app.add_subcommand("import-check", "Validate a precomputed feature table");
    imp->add_option("--manifest", imp_opt.manifest, "Dataset manifest")->required();
    imp->add_option("--features", imp_opt.features, "Feature table CSV")->required();

    TrainOptions train_opt;
    CLI::App* train = app.add_subcommand("train", "Grid-search and train one model");
    train->add_option("--manifest", train_opt.manifest, "Dataset manifest")->required();
    train->add_option("--features", train_opt.features,
                      "Feature table path or 'builtin-brisque'");
    train->add_option("--task", train_opt.task, "A (regression), B (binary) or C (ordinal)");
    train->add_option("--scheme", train_opt.scheme, "Labeling scheme file (tasks B/C)");
    train->add_option("--thresholds", train_opt.thresholds, "Threshold override (tasks B/C)");
    train->add_option("--classes", train_opt.classes, "Classes to fit when no scheme given");
    train->add_option("--kernel", train_opt.kernel, "rbf or linear");
    train->add_option("--class-weighting", train_opt.class_weighting,
                      "balanced (default) or none");
    train->add_option("--candidates", train_opt.candidates, "Grid-search candidates");
    train->add_option("--folds", train_opt.folds, "Cross-validation folds");
    train->add_option("--seed", train_opt.seed, "Random seed");
    train->add_option("--workers", train_opt.workers, "Parallel workers");
    train->add_option("--out", train_opt.out, "Output directory")->required();

    BenchmarkOptions bench_opt;
    CLI::App* bench = app.add_subcommand("benchmark", "Run the repeated-split benchmark protocol");
    bench->add_option("--manifest", bench_opt.manifest, "Dataset manifest")->required();
    bench->add_option("--features", bench_opt.features,
                      "Feature table path or 'builtin-brisque'");
    bench->add_option("--tasks", bench_opt.tasks, "Subset of A,B,C");
    bench->add_option("--scheme-binary", bench_opt.scheme_binary, "Binary scheme file");
    bench->add_option("--thresholds,--thresholds-binary", bench_opt.thresholds_binary,
                      "Binary threshold override");
    bench->add_option("--scheme-ordinal", bench_opt.scheme_ordinal, "Ordinal scheme file");
    bench->add_option("--thresholds-ordinal", bench_opt.thresholds_ordinal,
                      "Ordinal threshold override (comma-separated)");
    bench->add_option("--classes", bench_opt.ordinal_classes,
                      "Ordinal classes to fit when no scheme given");
    bench->add_option("--seed", bench_opt.seed, "Random seed");
    bench->add_option("--repeats", bench_opt.repeats, "Number of train/test repeats");
    bench->add_option("--ratio", bench_opt.ratio, "Training fraction");
    bench->add_option("--kernel", bench_opt.kernel, "rbf or linear");
    bench->add_option("--class-weighting", bench_opt.class_weighting,
                      "balanced (default) or none");
    bench->add_option("--candidates", bench_opt.candidates, "Grid-search candidates");
    bench->add_option("--folds", bench_opt.folds, "Cross-validation folds");
    bench->add_option("--workers", bench_opt.workers, "Parallel workers (0 = hardware)");
    bench->add_flag("--plcc-logistic", bench_opt.plcc_logistic,
                    "Apply a 4-parameter logistic mapping before PLCC");
    bench->add_flag("--regthr-baseline", bench_opt.regthr_baseline,
                    "Also evaluate the regression-then-threshold binary baseline");
    bench->add_option("--restarts", bench_opt.restarts, "EM restarts when fitting labels");
    bench->add_option("--model-name", bench_opt.model_name, "Row label in reports");
    bench->add_option("--out", bench_opt.out, "Output directory")->required();

    ReportOptions rep_opt;
    CLI::App* rep = app.add_subcommand("report", "Merge per-repeat tables into summary tables");
    rep->add_option("--inputs", rep_opt.inputs, "Per-repeat CSV files")->required();
    rep->add_option("--out", rep_opt.out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*fit) return cmd_fit_labels(fit_opt);
        if (*ext) return cmd_extract(ext_opt);
        if (*imp) return cmd_import_check(imp_opt);
        if (*train) return cmd_train(train_opt);
        if (*bench) return cmd_benchmark(bench_opt);
        if (*rep) return cmd_report(rep_opt);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ComputeError& e) {
        std::cerr << "computation failed: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected failure: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
