#pragma once

#include <functional>
#include <string>
#include <vector>

#include "emocorr/stats.hpp"
#include "emocorr/trainer.hpp"

namespace emocorr {

enum class MetricKind { jaccard, micro_f1, macro_f1 };

double metric_value(const EvaluationReport& report, MetricKind kind);

// One grid cell: a config plus per-seed results. dev_reports come from the
// early-stopped phase, test_reports from the train+dev retrained models.
struct RunResult {
    TrainConfig config;
    std::string status = "ok";  // ok | skipped: ... | error: ...
    std::vector<EvaluationReport> dev_reports;
    std::vector<int> best_epochs;
    std::vector<EvaluationReport> test_reports;
    std::vector<SquareMatrix> test_prediction_correlations;

    bool ok() const { return status == "ok"; }
    std::vector<double> dev_values(MetricKind kind) const;
    std::vector<double> test_values(MetricKind kind) const;
};

struct Phase1Result {
    EvaluationReport dev_report;
    int best_epoch = 0;
};

struct Phase2Result {
    EvaluationReport test_report;
    SquareMatrix prediction_correlation;
};

using Phase1Runner = std::function<Phase1Result(const TrainConfig&, std::uint64_t)>;
using Phase2Runner =
    std::function<Phase2Result(const TrainConfig&, const std::vector<int>&, std::uint64_t)>;

struct GridOptions {
    int threads = 1;
    bool with_retrain = true;
};

// Executes every valid cell for all its seeds (phase 1), then, when a phase-2
// runner is supplied, retrains per seed with the cell's best-epoch list.
// Invalid cells are marked skipped, per-cell failures marked error; neither
// aborts the sweep. Results are deterministic regardless of thread count.
std::vector<RunResult> run_grid(const std::vector<TrainConfig>& cells, const GridOptions& options,
                                const Phase1Runner& phase1, const Phase2Runner& phase2 = nullptr);

Phase1Runner training_phase1(const EmotionSet& set, const DatasetSplit& train,
                             const DatasetSplit& dev);
Phase2Runner training_phase2(const EmotionSet& set, const DatasetSplit& train,
                             const DatasetSplit& dev, const DatasetSplit& test);

// Cells from a sweep file: base config sections plus repeated [grid] blocks
// whose list-valued keys expand Cartesian-style; canonically equal cells are
// deduplicated keeping first occurrence.
std::vector<TrainConfig> grid_cells_from_file(const std::string& path,
                                              TrainConfig* base_out = nullptr);

// The default full product over {model} x {group} x {weights} x {family} x
// {global prior}.
std::vector<TrainConfig> full_cartesian_grid(const TrainConfig& base,
                                             const std::vector<ModelKind>& models);

// The ablation row set and ordering of the headline results table: per model
// a baseline, global-only rows, the exp-family local block by weight mode,
// the cosine block, and the combined local+global rows.
std::vector<TrainConfig> table1_grid(const TrainConfig& base);

enum class ReportFormat { csv, json_text };

std::string render_report(const std::vector<RunResult>& results, ReportFormat format);
void emit_report(const std::vector<RunResult>& results, ReportFormat format,
                 const std::string& path);

struct MetricComparison {
    std::string metric;
    double mean_diff = 0.0;
    double t = 0.0;
    double p = 1.0;
    bool degenerate = false;
};

// Per-metric pooled-variance two-sample t comparison; needs >= 2 seeds per
// side.
std::vector<MetricComparison> summarize(const RunResult& a, const RunResult& b,
                                        bool use_test = false);

}  // namespace emocorr
