#include "emocorr/grid.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <set>
#include <thread>

#include "json.hpp"

#include "emocorr/enum_names.hpp"
#include "emocorr/errors.hpp"

namespace emocorr {

double metric_value(const EvaluationReport& report, MetricKind kind) {
    switch (kind) {
        case MetricKind::jaccard: return report.jaccard;
        case MetricKind::micro_f1: return report.micro_f1;
        case MetricKind::macro_f1: return report.macro_f1;
    }
    return 0.0;
}

std::vector<double> RunResult::dev_values(MetricKind kind) const {
    std::vector<double> out;
    for (const auto& r : dev_reports) out.push_back(metric_value(r, kind));
    return out;
}

std::vector<double> RunResult::test_values(MetricKind kind) const {
    std::vector<double> out;
    for (const auto& r : test_reports) out.push_back(metric_value(r, kind));
    return out;
}

namespace {

void parallel_for(int threads, int count, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, count));
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&]() {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= count) break;
                fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

struct Task {
    int cell;
    int seed_idx;
};

}  // namespace

std::vector<RunResult> run_grid(const std::vector<TrainConfig>& cells, const GridOptions& options,
                                const Phase1Runner& phase1, const Phase2Runner& phase2) {
    std::vector<RunResult> results(cells.size());
    std::vector<Task> tasks;
    for (int c = 0; c < static_cast<int>(cells.size()); ++c) {
        auto& r = results[static_cast<std::size_t>(c)];
        r.config = cells[static_cast<std::size_t>(c)];
        try {
            r.config.validate();
        } catch (const ConfigError& e) {
            r.status = std::string("skipped: ") + e.what();
            continue;
        }
        const int seed_count = static_cast<int>(r.config.seeds.size());
        r.dev_reports.resize(static_cast<std::size_t>(seed_count));
        r.best_epochs.resize(static_cast<std::size_t>(seed_count));
        for (int s = 0; s < seed_count; ++s) tasks.push_back({c, s});
    }

    std::vector<std::string> errors(tasks.size());
    parallel_for(options.threads, static_cast<int>(tasks.size()), [&](int i) {
        const Task& t = tasks[static_cast<std::size_t>(i)];
        auto& cell = results[static_cast<std::size_t>(t.cell)];
        try {
            Phase1Result out =
                phase1(cell.config, cell.config.seeds[static_cast<std::size_t>(t.seed_idx)]);
            cell.dev_reports[static_cast<std::size_t>(t.seed_idx)] = out.dev_report;
            cell.best_epochs[static_cast<std::size_t>(t.seed_idx)] = out.best_epoch;
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(i)] = e.what();
        }
    });
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (errors[i].empty()) continue;
        auto& cell = results[static_cast<std::size_t>(tasks[i].cell)];
        if (cell.ok()) {
            cell.status = "error: " + errors[i];
            cell.dev_reports.clear();
            cell.best_epochs.clear();
        }
    }

    if (!phase2 || !options.with_retrain) {
        return results;
    }

    std::vector<Task> tasks2;
    for (int c = 0; c < static_cast<int>(results.size()); ++c) {
        auto& r = results[static_cast<std::size_t>(c)];
        if (!r.ok()) continue;
        const int seed_count = static_cast<int>(r.config.seeds.size());
        r.test_reports.resize(static_cast<std::size_t>(seed_count));
        r.test_prediction_correlations.resize(static_cast<std::size_t>(seed_count));
        for (int s = 0; s < seed_count; ++s) tasks2.push_back({c, s});
    }
    std::vector<std::string> errors2(tasks2.size());
    parallel_for(options.threads, static_cast<int>(tasks2.size()), [&](int i) {
        const Task& t = tasks2[static_cast<std::size_t>(i)];
        auto& cell = results[static_cast<std::size_t>(t.cell)];
        try {
            Phase2Result out = phase2(cell.config, cell.best_epochs,
                                      cell.config.seeds[static_cast<std::size_t>(t.seed_idx)]);
            cell.test_reports[static_cast<std::size_t>(t.seed_idx)] = out.test_report;
            cell.test_prediction_correlations[static_cast<std::size_t>(t.seed_idx)] =
                out.prediction_correlation;
        } catch (const std::exception& e) {
            errors2[static_cast<std::size_t>(i)] = e.what();
        }
    });
    for (std::size_t i = 0; i < tasks2.size(); ++i) {
        if (errors2[i].empty()) continue;
        auto& cell = results[static_cast<std::size_t>(tasks2[i].cell)];
        if (cell.ok()) {
            cell.status = "error: " + errors2[i];
            cell.test_reports.clear();
            cell.test_prediction_correlations.clear();
        }
    }
    return results;
}

Phase1Runner training_phase1(const EmotionSet& set, const DatasetSplit& train,
                             const DatasetSplit& dev) {
    return [&set, &train, &dev](const TrainConfig& config, std::uint64_t seed) {
        TrainOutcome out = train_model(config, set, train, dev, seed);
        return Phase1Result{out.dev_report, out.best_epoch};
    };
}

Phase2Runner training_phase2(const EmotionSet& set, const DatasetSplit& train,
                             const DatasetSplit& dev, const DatasetSplit& test) {
    return [&set, &train, &dev, &test](const TrainConfig& config,
                                       const std::vector<int>& best_epochs, std::uint64_t seed) {
        DatasetSplit merged;
        merged.name = "train+dev";
        merged.examples = train.examples;
        merged.examples.insert(merged.examples.end(), dev.examples.begin(), dev.examples.end());
        FittedModel fitted = retrain_full(config, best_epochs, set, merged, seed);
        Phase2Result out;
        out.test_report = evaluate_split(fitted, test);
        out.prediction_correlation = prediction_correlation(fitted, test);
        return out;
    };
}

namespace {

void append_cell(std::vector<TrainConfig>& cells, std::set<std::string>& seen, TrainConfig cell) {
    cell.canonicalize();
    const std::string key = cell.to_kv_string();
    if (seen.insert(key).second) {
        cells.push_back(std::move(cell));
    }
}

}  // namespace

std::vector<TrainConfig> grid_cells_from_file(const std::string& path, TrainConfig* base_out) {
    const KvFile kv = KvFile::parse_file(path);
    TrainConfig base = TrainConfig::from_kv(kv);
    if (base_out) {
        *base_out = base;
    }
    const auto blocks = kv.sections("grid");
    if (blocks.empty()) {
        throw ConfigError(path + ": sweep file has no [grid] blocks");
    }
    static const std::set<std::string> axis_keys = {"model",        "memo.head", "local.group",
                                                    "family",       "weight.mode", "weight.prior",
                                                    "global.prior", "alpha",     "beta"};
    std::vector<TrainConfig> cells;
    std::set<std::string> seen;
    for (const auto* block : blocks) {
        for (const auto& [key, value] : block->entries) {
            if (!axis_keys.count(key)) {
                throw ConfigError(path + ": unknown grid axis '" + key + "'");
            }
        }
        auto values_of = [&](const char* key, const std::string& fallback) {
            const auto v = block->get(key);
            return v ? split_list(*v) : std::vector<std::string>{fallback};
        };
        const auto models = values_of("model", to_string(base.model));
        const auto heads = values_of("memo.head", to_string(base.memo_head));
        const auto groups = values_of("local.group", to_string(base.loss.local_group));
        const auto families = values_of("family", to_string(base.loss.family));
        const auto wmodes = values_of("weight.mode", to_string(base.loss.weight_mode));
        const auto wpriors = values_of("weight.prior", to_string(base.loss.weight_prior));
        const auto gpriors = values_of("global.prior", to_string(base.loss.global_prior));
        const auto alphas = values_of("alpha", std::to_string(base.loss.alpha));
        const auto betas = values_of("beta", std::to_string(base.loss.beta));
        for (const auto& model : models)
        for (const auto& head : heads)
        for (const auto& group : groups)
        for (const auto& family : families)
        for (const auto& wmode : wmodes)
        for (const auto& wprior : wpriors)
        for (const auto& gprior : gpriors)
        for (const auto& alpha : alphas)
        for (const auto& beta : betas) {
            TrainConfig cell = base;
            cell.model = parse_model_kind(model);
            cell.memo_head = parse_memo_head(head);
            cell.loss.local_group = parse_local_group(group);
            cell.loss.family = parse_loss_family(family);
            cell.loss.weight_mode = parse_weight_mode(wmode);
            cell.loss.weight_prior = parse_prior_choice(wprior);
            cell.loss.global_prior = parse_prior_choice(gprior);
            cell.loss.alpha = parse_double("alpha", alpha);
            cell.loss.beta = parse_double("beta", beta);
            append_cell(cells, seen, std::move(cell));
        }
    }
    return cells;
}

std::vector<TrainConfig> full_cartesian_grid(const TrainConfig& base,
                                             const std::vector<ModelKind>& models) {
    std::vector<TrainConfig> cells;
    std::set<std::string> seen;
    for (ModelKind model : models) {
        for (LocalGroup group :
             {LocalGroup::none, LocalGroup::inter, LocalGroup::intra, LocalGroup::both}) {
            for (WeightMode wmode : {WeightMode::constant_one, WeightMode::from_prior}) {
                for (PriorChoice wprior : {PriorChoice::empirical_rho, PriorChoice::wheel_theta}) {
                    if (wmode == WeightMode::constant_one && wprior != PriorChoice::empirical_rho) {
                        continue;  // weight prior only meaningful with from-prior weights
                    }
                    for (LossFamily family :
                         {LossFamily::exp_predictions, LossFamily::cosine_representations}) {
                        for (PriorChoice gprior : {PriorChoice::none, PriorChoice::empirical_rho,
                                                   PriorChoice::wheel_theta}) {
                            TrainConfig cell = base;
                            cell.model = model;
                            cell.loss.local_group = group;
                            cell.loss.weight_mode = wmode;
                            cell.loss.weight_prior = wprior;
                            cell.loss.family = family;
                            cell.loss.global_prior = gprior;
                            append_cell(cells, seen, std::move(cell));
                        }
                    }
                }
            }
        }
    }
    return cells;
}

std::vector<TrainConfig> table1_grid(const TrainConfig& base) {
    std::vector<TrainConfig> cells;
    std::set<std::string> seen;
    auto cell_of = [&](ModelKind model, LocalGroup group, WeightMode wmode, PriorChoice wprior,
                       LossFamily family, PriorChoice gprior) {
        TrainConfig cell = base;
        cell.model = model;
        cell.loss.local_group = group;
        cell.loss.weight_mode = wmode;
        cell.loss.weight_prior = wprior;
        cell.loss.family = family;
        cell.loss.global_prior = gprior;
        append_cell(cells, seen, std::move(cell));
    };
    struct WeightRow {
        WeightMode mode;
        PriorChoice prior;
    };
    const WeightRow weight_rows[] = {{WeightMode::constant_one, PriorChoice::empirical_rho},
                                     {WeightMode::from_prior, PriorChoice::empirical_rho},
                                     {WeightMode::from_prior, PriorChoice::wheel_theta}};

    // Demux block: baseline, global-only, exp-family local rows grouped by
    // weight mode, the cosine rows, then the combined local+global rows.
    const ModelKind demux = ModelKind::demux;
    cell_of(demux, LocalGroup::none, WeightMode::constant_one, PriorChoice::empirical_rho,
            LossFamily::exp_predictions, PriorChoice::none);
    for (PriorChoice gprior : {PriorChoice::empirical_rho, PriorChoice::wheel_theta}) {
        cell_of(demux, LocalGroup::none, WeightMode::constant_one, PriorChoice::empirical_rho,
                LossFamily::exp_predictions, gprior);
    }
    for (const auto& w : weight_rows) {
        for (LocalGroup group : {LocalGroup::inter, LocalGroup::intra, LocalGroup::both}) {
            cell_of(demux, group, w.mode, w.prior, LossFamily::exp_predictions, PriorChoice::none);
        }
    }
    for (const auto& w : weight_rows) {
        cell_of(demux, LocalGroup::both, w.mode, w.prior, LossFamily::cosine_representations,
                PriorChoice::none);
    }
    cell_of(demux, LocalGroup::intra, WeightMode::constant_one, PriorChoice::empirical_rho,
            LossFamily::exp_predictions, PriorChoice::empirical_rho);
    cell_of(demux, LocalGroup::intra, WeightMode::from_prior, PriorChoice::empirical_rho,
            LossFamily::exp_predictions, PriorChoice::empirical_rho);
    cell_of(demux, LocalGroup::both, WeightMode::from_prior, PriorChoice::wheel_theta,
            LossFamily::exp_predictions, PriorChoice::empirical_rho);

    // MEmo block: baseline plus the exp-family local rows.
    const ModelKind memo = ModelKind::memo;
    cell_of(memo, LocalGroup::none, WeightMode::constant_one, PriorChoice::empirical_rho,
            LossFamily::exp_predictions, PriorChoice::none);
    for (const auto& w : weight_rows) {
        for (LocalGroup group : {LocalGroup::inter, LocalGroup::intra, LocalGroup::both}) {
            cell_of(memo, group, w.mode, w.prior, LossFamily::exp_predictions, PriorChoice::none);
        }
    }
    return cells;
}

namespace {

std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string joined_ints(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(v[i]);
    }
    return out;
}

std::vector<double> per_emotion_means(const std::vector<EvaluationReport>& reports) {
    std::vector<double> out;
    if (reports.empty()) return out;
    out.assign(reports[0].per_emotion_f1.size(), 0.0);
    for (const auto& r : reports) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += r.per_emotion_f1[i];
    }
    for (auto& x : out) x /= static_cast<double>(reports.size());
    return out;
}

}  // namespace

std::string render_report(const std::vector<RunResult>& results, ReportFormat format) {
    if (results.empty()) {
        throw std::invalid_argument("render_report: no results");
    }
    if (format == ReportFormat::csv) {
        std::string out =
            "cell,config,status,seeds,"
            "dev_jaccard_mean,dev_jaccard_std,dev_micro_f1_mean,dev_micro_f1_std,"
            "dev_macro_f1_mean,dev_macro_f1_std,"
            "test_jaccard_mean,test_jaccard_std,test_micro_f1_mean,test_micro_f1_std,"
            "test_macro_f1_mean,test_macro_f1_std,best_epochs,per_emotion_f1_mean\n";
        for (std::size_t c = 0; c < results.size(); ++c) {
            const auto& r = results[c];
            out += std::to_string(c) + ",\"" + r.config.fingerprint() + "\",\"" + r.status + "\"," +
                   std::to_string(r.config.seeds.size());
            for (MetricKind kind : {MetricKind::jaccard, MetricKind::micro_f1, MetricKind::macro_f1}) {
                const auto vals = r.dev_values(kind);
                out += vals.empty() ? ",," : "," + fmt6(mean_of(vals)) + "," + fmt6(stddev_of(vals));
            }
            for (MetricKind kind : {MetricKind::jaccard, MetricKind::micro_f1, MetricKind::macro_f1}) {
                const auto vals = r.test_values(kind);
                out += vals.empty() ? ",," : "," + fmt6(mean_of(vals)) + "," + fmt6(stddev_of(vals));
            }
            out += ",\"" + joined_ints(r.best_epochs) + "\"";
            const auto pe = per_emotion_means(r.test_reports.empty() ? r.dev_reports : r.test_reports);
            std::string pes;
            for (std::size_t i = 0; i < pe.size(); ++i) {
                if (i) pes += ';';
                pes += fmt6(pe[i]);
            }
            out += ",\"" + pes + "\"\n";
        }
        return out;
    }

    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < results.size(); ++c) {
        const auto& r = results[c];
        nlohmann::ordered_json row;
        row["cell"] = c;
        row["config"] = r.config.fingerprint();
        row["status"] = r.status;
        row["seeds"] = r.config.seeds.size();
        auto stats_of = [&](const std::vector<double>& vals) {
            nlohmann::ordered_json s;
            if (!vals.empty()) {
                s["mean"] = mean_of(vals);
                s["std"] = stddev_of(vals);
            }
            return s;
        };
        for (const char* phase : {"dev", "test"}) {
            nlohmann::ordered_json block;
            const bool dev = phase[0] == 'd';
            block["jaccard"] =
                stats_of(dev ? r.dev_values(MetricKind::jaccard) : r.test_values(MetricKind::jaccard));
            block["micro_f1"] = stats_of(dev ? r.dev_values(MetricKind::micro_f1)
                                             : r.test_values(MetricKind::micro_f1));
            block["macro_f1"] = stats_of(dev ? r.dev_values(MetricKind::macro_f1)
                                             : r.test_values(MetricKind::macro_f1));
            row[phase] = block;
        }
        row["best_epochs"] = r.best_epochs;
        row["per_emotion_f1_mean"] =
            per_emotion_means(r.test_reports.empty() ? r.dev_reports : r.test_reports);
        arr.push_back(row);
    }
    return arr.dump(2) + "\n";
}

void emit_report(const std::vector<RunResult>& results, ReportFormat format,
                 const std::string& path) {
    const std::string text = render_report(results, format);
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write report file: " + path);
    }
    out << text;
    if (!out) {
        throw DataError("failed writing report file: " + path);
    }
}

std::vector<MetricComparison> summarize(const RunResult& a, const RunResult& b, bool use_test) {
    std::vector<MetricComparison> out;
    const struct {
        MetricKind kind;
        const char* name;
    } metrics[] = {{MetricKind::jaccard, "jaccard"},
                   {MetricKind::micro_f1, "micro_f1"},
                   {MetricKind::macro_f1, "macro_f1"}};
    for (const auto& m : metrics) {
        const auto va = use_test ? a.test_values(m.kind) : a.dev_values(m.kind);
        const auto vb = use_test ? b.test_values(m.kind) : b.dev_values(m.kind);
        const TTestResult t = pooled_t_test(va, vb);
        out.push_back({m.name, t.mean_diff, t.t, t.p, t.degenerate});
    }
    return out;
}

}  // namespace emocorr
