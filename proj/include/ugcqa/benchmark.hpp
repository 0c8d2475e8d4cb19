#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ugcqa/dataset.hpp"
#include "ugcqa/features.hpp"
#include "ugcqa/labeling.hpp"
#include "ugcqa/learner.hpp"
#include "ugcqa/splits.hpp"

namespace ugcqa {

struct BenchmarkConfig {
    std::vector<Task> tasks;  // nonempty
    int repeats = 20;
    double ratio = 0.8;
    std::uint64_t seed = 0;
    SearchSettings search;            // candidate/fold counts, kernel, weighting
    std::optional<GridSpec> grid;     // default: default_grid(score range length)
    int workers = 0;                  // repeats in parallel; 0 = hardware
    bool plcc_logistic = false;       // 4-parameter logistic before PLCC
    bool regthr_baseline = false;     // regression-then-threshold comparison rows
    std::string model_name;           // default: feature set name
};

/// One (task, metric) series across repeats.
struct ReportRow {
    std::string task;    // "A", "B", "C", or "B-regthr"
    std::string metric;  // SRCC, PLCC, Acc, BalancedAcc, MZE, MAE
    std::vector<double> values;
};

struct BenchmarkReport {
    std::string dataset;
    std::string model;
    int repeats = 0;
    std::vector<ReportRow> rows;
};

double mean_of(const std::vector<double>& v);
double median_of(const std::vector<double>& v);
double stddev_of(const std::vector<double>& v);  // sample stddev

/// Task names and the metric pair reported for each.
std::string task_code(Task t);
std::vector<std::string> task_metrics(Task t);

/// Full split protocol: for every repeat and requested task, search
/// hyperparameters on the training side, fit there, and evaluate the
/// task's metric pair on the held-out side. Task A uses unstratified
/// splits on the raw MOS; tasks B and C stratify on their discretized
/// labels. All plans share the base seed so repeats pair across tasks.
/// A failing repeat aborts the run with its repeat index.
BenchmarkReport run_benchmark(const Dataset& d, const FeatureMatrix& fm,
                              const LabelingScheme* binary_scheme,
                              const LabelingScheme* ordinal_scheme, const BenchmarkConfig& config);

/// Long-form machine table: dataset,model,task,metric,repeat,value.
void save_per_repeat_csv(const std::vector<BenchmarkReport>& reports,
                         const std::filesystem::path& path);
std::vector<BenchmarkReport> load_per_repeat_csv(const std::filesystem::path& path);

/// Aggregated machine table: dataset,model,task,metric,mean,median,stddev.
void save_summary_csv(const std::vector<BenchmarkReport>& reports,
                      const std::filesystem::path& path);

/// Human-readable summary: one block per dataset, models as rows,
/// task-metric pairs as column groups. Correlations and ordinal errors
/// show three decimals; accuracies show percent to one decimal.
std::string format_summary_table(const std::vector<BenchmarkReport>& reports);

}  // namespace ugcqa
