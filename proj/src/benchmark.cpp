#include "ugcqa/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "ugcqa/io_util.hpp"
#include "ugcqa/metrics.hpp"
#include "ugcqa/rng.hpp"

namespace ugcqa {

double mean_of(const std::vector<double>& v) {
    if (v.empty()) throw ValidationError("mean_of: empty series");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double median_of(const std::vector<double>& v) {
    if (v.empty()) throw ValidationError("median_of: empty series");
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    return n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

double stddev_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string task_code(Task t) {
    switch (t) {
        case Task::Regression: return "A";
        case Task::Binary: return "B";
        case Task::Ordinal: return "C";
    }
    return "A";
}

std::vector<std::string> task_metrics(Task t) {
    switch (t) {
        case Task::Regression: return {"SRCC", "PLCC"};
        case Task::Binary: return {"Acc", "BalancedAcc"};
        case Task::Ordinal: return {"MZE", "MAE"};
    }
    return {};
}

namespace {

struct RepeatScores {
    // (task code, metric) -> value for one repeat
    std::vector<std::pair<std::pair<std::string, std::string>, double>> entries;

    void add(const std::string& task, const std::string& metric, double value) {
        entries.push_back({{task, metric}, value});
    }
};

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& idx) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), x.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(idx[i]);
    return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& idx) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[idx[i]];
    return out;
}

Eigen::VectorXi take(const Eigen::VectorXi& v, const std::vector<Eigen::Index>& idx) {
    Eigen::VectorXi out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[idx[i]];
    return out;
}

}  // namespace

BenchmarkReport run_benchmark(const Dataset& d, const FeatureMatrix& fm,
                              const LabelingScheme* binary_scheme,
                              const LabelingScheme* ordinal_scheme,
                              const BenchmarkConfig& config) {
    validate(fm, d);
    if (config.tasks.empty()) throw ValidationError("run_benchmark: no tasks requested");
    if (config.repeats < 1) throw ValidationError("run_benchmark: repeats must be >= 1");

    const bool want_a = std::count(config.tasks.begin(), config.tasks.end(), Task::Regression) > 0;
    const bool want_b = std::count(config.tasks.begin(), config.tasks.end(), Task::Binary) > 0;
    const bool want_c = std::count(config.tasks.begin(), config.tasks.end(), Task::Ordinal) > 0;
    if ((want_b || config.regthr_baseline) && binary_scheme == nullptr) {
        throw ValidationError("run_benchmark: task B needs a binary labeling scheme");
    }
    if (want_c && ordinal_scheme == nullptr) {
        throw ValidationError("run_benchmark: task C needs an ordinal labeling scheme");
    }
    if (binary_scheme && binary_scheme->n_classes != 2) {
        throw ValidationError("run_benchmark: binary scheme must have exactly 2 classes");
    }

    const Eigen::MatrixXd& x = fm.rows;
    const Eigen::VectorXd mos = d.mos_values();
    const GridSpec grid = config.grid ? *config.grid : default_grid(d.score_range.length());

    Eigen::VectorXi labels_b, labels_c;
    SplitPlan plan_a, plan_b, plan_c;
    const Eigen::Index n = static_cast<Eigen::Index>(d.size());
    if (want_a) {
        plan_a = make_splits(n, Eigen::VectorXi(), config.ratio, config.repeats, false, config.seed);
    }
    if (want_b || config.regthr_baseline) {
        labels_b = discretize(d, *binary_scheme);
        plan_b = make_splits(n, labels_b, config.ratio, config.repeats, true, config.seed);
    }
    if (want_c) {
        labels_c = discretize(d, *ordinal_scheme);
        plan_c = make_splits(n, labels_c, config.ratio, config.repeats, true, config.seed);
    }

    std::vector<RepeatScores> per_repeat(static_cast<std::size_t>(config.repeats));
    std::atomic<int> next{0};
    std::mutex error_mutex;
    std::string first_error;

    auto run_repeat = [&](int r) {
        RepeatScores& out = per_repeat[static_cast<std::size_t>(r)];
        const std::uint64_t repeat_seed = derive_seed(config.seed, static_cast<std::uint64_t>(r));

        if (want_a) {
            const SplitRepeat& rep = plan_a.repeats[static_cast<std::size_t>(r)];
            const Eigen::MatrixXd xtr = take_rows(x, rep.train);
            const Eigen::MatrixXd xte = take_rows(x, rep.test);
            const Eigen::VectorXd ytr = take(mos, rep.train);
            const Eigen::VectorXd yte = take(mos, rep.test);
            const Hyperparams hp =
                random_grid_search(Task::Regression, xtr, ytr, Eigen::VectorXi(), 0, grid,
                                   config.search, repeat_seed);
            const TrainedModel m = train_svr(xtr, ytr, hp, repeat_seed);
            const Eigen::VectorXd pred = predict_scores(m, xte);
            out.add("A", "SRCC", srcc(pred, yte));
            if (config.plcc_logistic) {
                const Logistic4 f = fit_logistic4(pred, yte);
                out.add("A", "PLCC", plcc(f.map(pred), yte));
            } else {
                out.add("A", "PLCC", plcc(pred, yte));
            }
        }

        if (want_b) {
            const SplitRepeat& rep = plan_b.repeats[static_cast<std::size_t>(r)];
            const Eigen::MatrixXd xtr = take_rows(x, rep.train);
            const Eigen::MatrixXd xte = take_rows(x, rep.test);
            const Eigen::VectorXi ytr = take(labels_b, rep.train);
            const Eigen::VectorXi yte = take(labels_b, rep.test);
            const Hyperparams hp = random_grid_search(Task::Binary, xtr, Eigen::VectorXd(), ytr, 2,
                                                      grid, config.search, repeat_seed);
            const TrainedModel m = train_svc(xtr, ytr, hp, repeat_seed);
            const ConfusionCounts c = confusion(predict_labels(m, xte), yte);
            out.add("B", "Acc", accuracy(c));
            out.add("B", "BalancedAcc", balanced_accuracy(c));
        }

        if (config.regthr_baseline) {
            // Same stratified splits as task B so the comparison is paired.
            const SplitRepeat& rep = plan_b.repeats[static_cast<std::size_t>(r)];
            const Eigen::MatrixXd xtr = take_rows(x, rep.train);
            const Eigen::MatrixXd xte = take_rows(x, rep.test);
            const Eigen::VectorXd ytr = take(mos, rep.train);
            const Eigen::VectorXi yte = take(labels_b, rep.test);
            const Hyperparams hp =
                random_grid_search(Task::Regression, xtr, ytr, Eigen::VectorXi(), 0, grid,
                                   config.search, repeat_seed);
            const TrainedModel m = train_svr(xtr, ytr, hp, repeat_seed);
            const Eigen::VectorXi pred = regress_then_threshold(m, *binary_scheme, xte);
            const ConfusionCounts c = confusion(pred, yte);
            out.add("B-regthr", "Acc", accuracy(c));
            out.add("B-regthr", "BalancedAcc", balanced_accuracy(c));
        }

        if (want_c) {
            const SplitRepeat& rep = plan_c.repeats[static_cast<std::size_t>(r)];
            const Eigen::MatrixXd xtr = take_rows(x, rep.train);
            const Eigen::MatrixXd xte = take_rows(x, rep.test);
            const Eigen::VectorXi ytr = take(labels_c, rep.train);
            const Eigen::VectorXi yte = take(labels_c, rep.test);
            const int n_classes = ordinal_scheme->n_classes;
            const Hyperparams hp = random_grid_search(Task::Ordinal, xtr, Eigen::VectorXd(), ytr,
                                                      n_classes, grid, config.search, repeat_seed);
            const TrainedModel m = train_ordinal(xtr, ytr, n_classes, hp, repeat_seed);
            const Eigen::VectorXi pred = predict_labels(m, xte);
            out.add("C", "MZE", mze((pred.array() + 1).matrix(), (yte.array() + 1).matrix()));
            out.add("C", "MAE", mae_ordinal((pred.array() + 1).matrix(), (yte.array() + 1).matrix()));
        }
    };

    auto worker = [&]() {
        for (;;) {
            const int r = next.fetch_add(1);
            if (r >= config.repeats) return;
            try {
                run_repeat(r);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (first_error.empty()) {
                    first_error = "repeat " + std::to_string(r) + ": " + e.what();
                }
            }
        }
    };

    int workers = config.workers;
    if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min(workers, config.repeats);
    if (workers > 1) {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    } else {
        worker();
    }
    if (!first_error.empty()) throw ComputeError("run_benchmark: " + first_error);

    BenchmarkReport report;
    report.dataset = d.name;
    report.model = config.model_name.empty() ? fm.feature_set_name : config.model_name;
    report.repeats = config.repeats;

    // Stable row order: first repeat's insertion order.
    for (const auto& entry : per_repeat[0].entries) {
        ReportRow row;
        row.task = entry.first.first;
        row.metric = entry.first.second;
        row.values.reserve(static_cast<std::size_t>(config.repeats));
        for (const RepeatScores& rs : per_repeat) {
            bool found = false;
            for (const auto& e : rs.entries) {
                if (e.first == entry.first) {
                    row.values.push_back(e.second);
                    found = true;
                    break;
                }
            }
            if (!found) throw ComputeError("run_benchmark: repeat missing metric " + row.metric);
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

void save_per_repeat_csv(const std::vector<BenchmarkReport>& reports,
                         const std::filesystem::path& path) {
    std::ostringstream out;
    out << "dataset,model,task,metric,repeat,value\n";
    for (const BenchmarkReport& report : reports) {
        for (const ReportRow& row : report.rows) {
            for (std::size_t r = 0; r < row.values.size(); ++r) {
                out << csv_join({report.dataset, report.model, row.task, row.metric,
                                 std::to_string(r), format_double(row.values[r])})
                    << "\n";
            }
        }
    }
    write_text_file(path, out.str());
}

std::vector<BenchmarkReport> load_per_repeat_csv(const std::filesystem::path& path) {
    const std::vector<std::string> lines = split_lines(read_text_file(path));
    if (lines.empty() || trim(lines[0]) != "dataset,model,task,metric,repeat,value") {
        throw ValidationError(path.string() + ": expected per-repeat table header");
    }
    // (dataset, model) -> (task, metric) -> repeat -> value
    std::map<std::pair<std::string, std::string>,
             std::map<std::pair<std::string, std::string>, std::map<std::size_t, double>>>
        cells;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const std::vector<std::string> f = csv_split(lines[i]);
        if (f.size() != 6) {
            throw ValidationError(path.string() + ":" + std::to_string(i + 1) + ": expected 6 fields");
        }
        const std::size_t r = static_cast<std::size_t>(parse_int(f[4], "repeat"));
        cells[{f[0], f[1]}][{f[2], f[3]}][r] = parse_double(f[5], "value");
    }
    std::vector<BenchmarkReport> reports;
    for (const auto& [key, rows] : cells) {
        BenchmarkReport rep;
        rep.dataset = key.first;
        rep.model = key.second;
        for (const auto& [rk, by_repeat] : rows) {
            ReportRow row;
            row.task = rk.first;
            row.metric = rk.second;
            for (const auto& [r, v] : by_repeat) {
                if (r != row.values.size()) {
                    throw ValidationError(path.string() + ": non-contiguous repeat indices for " +
                                          rk.first + "/" + rk.second);
                }
                row.values.push_back(v);
            }
            rep.rows.push_back(std::move(row));
        }
        rep.repeats = rep.rows.empty() ? 0 : static_cast<int>(rep.rows[0].values.size());
        reports.push_back(std::move(rep));
    }
    return reports;
}

void save_summary_csv(const std::vector<BenchmarkReport>& reports,
                      const std::filesystem::path& path) {
    std::ostringstream out;
    out << "dataset,model,task,metric,mean,median,stddev\n";
    for (const BenchmarkReport& report : reports) {
        for (const ReportRow& row : report.rows) {
            out << csv_join({report.dataset, report.model, row.task, row.metric,
                             format_double(mean_of(row.values)), format_double(median_of(row.values)),
                             format_double(stddev_of(row.values))})
                << "\n";
        }
    }
    write_text_file(path, out.str());
}

namespace {

bool is_percent_metric(const std::string& metric) {
    return metric == "Acc" || metric == "BalancedAcc";
}

std::string format_cell(const std::string& metric, double mean) {
    char buf[32];
    if (is_percent_metric(metric)) {
        std::snprintf(buf, sizeof(buf), "%.1f", mean * 100.0);
    } else {
        std::snprintf(buf, sizeof(buf), "%.3f", mean);
    }
    return buf;
}

}  // namespace

std::string format_summary_table(const std::vector<BenchmarkReport>& reports) {
    // Group by dataset; models become rows.
    std::map<std::string, std::vector<const BenchmarkReport*>> by_dataset;
    for (const BenchmarkReport& r : reports) by_dataset[r.dataset].push_back(&r);

    std::ostringstream out;
    for (const auto& [dataset, group] : by_dataset) {
        std::vector<std::pair<std::string, std::string>> columns;
        for (const BenchmarkReport* r : group) {
            for (const ReportRow& row : r->rows) {
                const std::pair<std::string, std::string> col{row.task, row.metric};
                if (std::find(columns.begin(), columns.end(), col) == columns.end()) {
                    columns.push_back(col);
                }
            }
        }
        std::sort(columns.begin(), columns.end());

        std::size_t model_width = 5;
        for (const BenchmarkReport* r : group) model_width = std::max(model_width, r->model.size());

        out << "Dataset: " << dataset << "\n";
        out << std::string(model_width, ' ') << "  ";
        for (const auto& col : columns) {
            std::string head = col.first + ":" + col.second;
            out << head << "  ";
        }
        out << "\n";
        for (const BenchmarkReport* r : group) {
            out << r->model << std::string(model_width - r->model.size(), ' ') << "  ";
            for (const auto& col : columns) {
                const std::string head = col.first + ":" + col.second;
                std::string cell = "-";
                for (const ReportRow& row : r->rows) {
                    if (row.task == col.first && row.metric == col.second) {
                        cell = format_cell(row.metric, mean_of(row.values));
                        break;
                    }
                }
                out << cell << std::string(cell.size() < head.size() + 2
                                               ? head.size() + 2 - cell.size()
                                               : 2,
                                           ' ');
            }
            out << "\n";
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace ugcqa
