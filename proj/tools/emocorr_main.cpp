#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "emocorr/data_io.hpp"
#include "emocorr/enum_names.hpp"
#include "emocorr/errors.hpp"
#include "emocorr/grid.hpp"
#include "emocorr/label_space.hpp"
#include "emocorr/trainer.hpp"

namespace {

using namespace emocorr;

EmotionSet resolve_emotions(const std::string& emotions_arg, const std::string& wheel_path) {
    EmotionSet set;
    if (emotions_arg.empty() || emotions_arg == "semeval") {
        set = EmotionSet::semeval11();
    } else {
        std::ifstream in(emotions_arg);
        if (!in) {
            throw DataError("cannot open emotions file: " + emotions_arg);
        }
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) set.names.push_back(line);
        }
        set.wheel_angle_deg.assign(set.names.size(), std::nullopt);
    }
    if (!wheel_path.empty()) {
        apply_wheel_angles(set, load_wheel_angles(wheel_path));
    }
    set.validate();
    return set;
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

DatasetSplit load_split(const std::string& explicit_path, const std::string& data_dir,
                        const std::string& default_name, const EmotionSet& set,
                        const std::string& split_name) {
    std::string path = explicit_path;
    if (path.empty()) {
        if (data_dir.empty()) {
            throw ConfigError("no path for the " + split_name + " split: pass --" + split_name +
                              " or --data-dir");
        }
        path = join_path(data_dir, default_name);
    }
    return load_semeval_tsv(path, set, split_name);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write file: " + path);
    }
    out << text;
    if (!out) {
        throw DataError("failed writing file: " + path);
    }
}

std::vector<std::uint64_t> parse_seed_list(const std::string& value) {
    std::vector<std::uint64_t> out;
    for (const auto& item : split_list(value)) {
        try {
            out.push_back(std::stoull(item));
        } catch (const std::exception&) {
            throw ConfigError("--seeds: expected integers, got '" + item + "'");
        }
    }
    if (out.empty()) {
        throw ConfigError("--seeds: empty list");
    }
    return out;
}

int run_train(const std::string& config_path, const std::string& train_path,
              const std::string& dev_path, const std::string& data_dir,
              const std::string& emotions_arg, const std::string& wheel_path, long seed_flag,
              const std::string& out_prefix) {
    TrainConfig config = TrainConfig::from_kv(KvFile::parse_file(config_path));
    config.canonicalize();
    config.validate();
    const EmotionSet set = resolve_emotions(emotions_arg, wheel_path);
    const DatasetSplit train = load_split(train_path, data_dir, "train.tsv", set, "train");
    const DatasetSplit dev = load_split(dev_path, data_dir, "dev.tsv", set, "dev");
    const std::uint64_t seed = seed_flag >= 0 ? static_cast<std::uint64_t>(seed_flag)
                                              : config.seeds.front();

    TrainOutcome outcome = train_model(config, set, train, dev, seed);
    std::cout << "seed " << seed << ": best epoch " << outcome.best_epoch << " of "
              << outcome.stopped_epoch << " run epochs\n";
    std::cout << "dev " << outcome.dev_report.to_json() << "\n";
    if (!out_prefix.empty()) {
        outcome.fitted.model.params().save(out_prefix + ".params.txt");
        outcome.fitted.vocab.save(out_prefix + ".vocab.txt");
        write_text(out_prefix + ".report.json", outcome.dev_report.to_json() + "\n");
        std::cout << "checkpoint written to " << out_prefix << ".{params,vocab}.txt\n";
    }
    return 0;
}

int run_eval(const std::string& config_path, const std::string& checkpoint_prefix,
             const std::string& data_path, const std::string& emotions_arg,
             const std::string& wheel_path, const std::string& out_path) {
    TrainConfig config = TrainConfig::from_kv(KvFile::parse_file(config_path));
    config.canonicalize();
    const EmotionSet set = resolve_emotions(emotions_arg, wheel_path);
    const DatasetSplit data = load_semeval_tsv(data_path, set, "eval");

    FittedModel fitted;
    fitted.vocab = Vocabulary::load(checkpoint_prefix + ".vocab.txt", config.vocab_max_piece);
    ParamStore params = ParamStore::load(checkpoint_prefix + ".params.txt");
    TextModel model = TextModel::init(config.model, config.memo_head, config.encoder,
                                      fitted.vocab.size(), set.size(), 0);
    for (auto& [name, tensor] : model.params().tensors) {
        tensor = params.at(name);  // missing names raise
    }
    fitted.model = std::move(model);
    fitted.set = set;
    fitted.threshold = config.threshold;

    const EvaluationReport report = evaluate_split(fitted, data);
    std::cout << report.to_json() << "\n";
    if (!out_path.empty()) {
        write_text(out_path, report.to_json() + "\n");
    }
    return 0;
}

int run_grid_cmd(const std::string& grid_path, const std::string& preset,
                 const std::string& train_path, const std::string& dev_path,
                 const std::string& test_path, const std::string& data_dir,
                 const std::string& emotions_arg, const std::string& wheel_path,
                 const std::string& seeds_flag, int threads, bool dev_only,
                 const std::string& out_path, const std::string& format) {
    TrainConfig base;
    std::vector<TrainConfig> cells;
    if (!grid_path.empty()) {
        cells = grid_cells_from_file(grid_path, &base);
    } else if (!preset.empty()) {
        if (preset == "table1") {
            cells = table1_grid(base);
        } else if (preset == "full") {
            cells = full_cartesian_grid(base, {ModelKind::demux, ModelKind::memo});
        } else {
            throw ConfigError("unknown preset '" + preset + "' (want table1 or full)");
        }
    } else {
        throw ConfigError("grid: pass --grid FILE or --preset NAME");
    }
    if (!seeds_flag.empty()) {
        const auto seeds = parse_seed_list(seeds_flag);
        for (auto& c : cells) c.seeds = seeds;
    }
    const EmotionSet set = resolve_emotions(emotions_arg, wheel_path);
    const DatasetSplit train = load_split(train_path, data_dir, "train.tsv", set, "train");
    const DatasetSplit dev = load_split(dev_path, data_dir, "dev.tsv", set, "dev");
    DatasetSplit test;
    if (!dev_only) {
        test = load_split(test_path, data_dir, "test.tsv", set, "test");
    }

    GridOptions options;
    options.threads = threads;
    options.with_retrain = !dev_only;
    const auto results =
        dev_only ? run_grid(cells, options, training_phase1(set, train, dev))
                 : run_grid(cells, options, training_phase1(set, train, dev),
                            training_phase2(set, train, dev, test));

    const ReportFormat fmt = format == "json" ? ReportFormat::json_text : ReportFormat::csv;
    if (out_path.empty()) {
        std::cout << render_report(results, fmt);
    } else {
        emit_report(results, fmt, out_path);
        std::cout << "report written to " << out_path << "\n";
    }
    for (const auto& r : results) {
        if (!r.ok()) {
            std::cerr << "cell '" << r.config.fingerprint() << "': " << r.status << "\n";
        }
    }
    return 0;
}

int run_gen_data(const std::string& spec_path, const std::string& out_dir) {
    const SyntheticSpec spec = SyntheticSpec::from_kv_file(spec_path);
    const SyntheticDataset data = generate_synthetic(spec);
    std::filesystem::create_directories(out_dir);
    write_semeval_tsv(join_path(out_dir, "train.tsv"), data.train, data.set);
    write_semeval_tsv(join_path(out_dir, "dev.tsv"), data.dev, data.set);
    write_semeval_tsv(join_path(out_dir, "test.tsv"), data.test, data.set);
    std::string emotions, wheel;
    for (int i = 0; i < data.set.size(); ++i) {
        emotions += data.set.names[static_cast<std::size_t>(i)] + "\n";
        wheel += data.set.names[static_cast<std::size_t>(i)] + " = " +
                 std::to_string(*data.set.wheel_angle_deg[static_cast<std::size_t>(i)]) + "\n";
    }
    write_text(join_path(out_dir, "emotions.txt"), emotions);
    write_text(join_path(out_dir, "wheel.txt"), wheel);
    write_text(join_path(out_dir, "target_correlation.csv"), to_csv(data.target, data.set.names));
    std::cout << "wrote " << data.train.examples.size() << "/" << data.dev.examples.size() << "/"
              << data.test.examples.size() << " examples to " << out_dir << "\n";
    return 0;
}

int run_inspect_corr(const std::string& data_path, const std::string& emotions_arg,
                     const std::string& wheel_path, const std::string& out_prefix) {
    const EmotionSet set = resolve_emotions(emotions_arg, wheel_path);
    const DatasetSplit data = load_semeval_tsv(data_path, set, "data");
    const CorrelationPrior rho = empirical_correlation(data.label_matrix());
    const std::string rho_csv = to_csv(rho.matrix, set.names);

    std::string theta_csv;
    bool have_theta = true;
    try {
        theta_csv = to_csv(wheel_prior(set).matrix, set.names);
    } catch (const ConfigError&) {
        have_theta = false;  // no wheel angles for this set
    }
    if (out_prefix.empty()) {
        std::cout << "# empirical rho (projected to [0,1])\n" << rho_csv;
        if (have_theta) {
            std::cout << "# wheel theta (projected to [0,1])\n" << theta_csv;
        }
    } else {
        write_text(out_prefix + ".rho.csv", rho_csv);
        if (have_theta) {
            write_text(out_prefix + ".theta.csv", theta_csv);
        }
        std::cout << "wrote " << out_prefix << ".rho.csv"
                  << (have_theta ? " and " + out_prefix + ".theta.csv" : "") << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"correlation-aware multi-label emotion classification"};
    app.require_subcommand(1);

    std::string config_path, grid_path, preset, spec_path, checkpoint_prefix;
    std::string train_path, dev_path, test_path, data_path, data_dir;
    std::string emotions_arg = "semeval", wheel_path;
    std::string out_path, format = "csv", seeds_flag;
    long seed_flag = -1;
    int threads = 1;
    bool dev_only = false;

    auto* train_cmd = app.add_subcommand("train", "train one configuration on train/dev splits");
    train_cmd->add_option("--config", config_path, "config file")->required();
    train_cmd->add_option("--train", train_path, "train TSV");
    train_cmd->add_option("--dev", dev_path, "dev TSV");
    train_cmd->add_option("--data-dir", data_dir, "directory with train.tsv/dev.tsv");
    train_cmd->add_option("--emotions", emotions_arg, "semeval or emotions file");
    train_cmd->add_option("--wheel", wheel_path, "wheel angle file");
    train_cmd->add_option("--seed", seed_flag, "seed (default: first config seed)");
    train_cmd->add_option("--out", out_path, "checkpoint prefix");

    auto* grid_cmd = app.add_subcommand("grid", "run an ablation sweep");
    grid_cmd->add_option("--grid", grid_path, "sweep file with [grid] blocks");
    grid_cmd->add_option("--preset", preset, "table1 or full");
    grid_cmd->add_option("--train", train_path, "train TSV");
    grid_cmd->add_option("--dev", dev_path, "dev TSV");
    grid_cmd->add_option("--test", test_path, "test TSV");
    grid_cmd->add_option("--data-dir", data_dir, "directory with train/dev/test.tsv");
    grid_cmd->add_option("--emotions", emotions_arg, "semeval or emotions file");
    grid_cmd->add_option("--wheel", wheel_path, "wheel angle file");
    grid_cmd->add_option("--seeds", seeds_flag, "comma-separated seeds override");
    grid_cmd->add_option("--threads", threads, "worker pool size");
    grid_cmd->add_flag("--dev-only", dev_only, "skip the train+dev retraining phase");
    grid_cmd->add_option("--out", out_path, "report path (stdout when omitted)");
    grid_cmd->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a split");
    eval_cmd->add_option("--config", config_path, "config file")->required();
    eval_cmd->add_option("--checkpoint", checkpoint_prefix, "checkpoint prefix")->required();
    eval_cmd->add_option("--data", data_path, "TSV to evaluate")->required();
    eval_cmd->add_option("--emotions", emotions_arg, "semeval or emotions file");
    eval_cmd->add_option("--wheel", wheel_path, "wheel angle file");
    eval_cmd->add_option("--out", out_path, "report output path");

    auto* gen_cmd = app.add_subcommand("gen-data", "generate a synthetic dataset");
    gen_cmd->add_option("--spec", spec_path, "synthetic spec file")->required();
    gen_cmd->add_option("--out", out_path, "output directory")->required();

    auto* corr_cmd = app.add_subcommand("inspect-corr", "empirical and wheel priors as CSV");
    corr_cmd->add_option("--data", data_path, "TSV to analyze")->required();
    corr_cmd->add_option("--emotions", emotions_arg, "semeval or emotions file");
    corr_cmd->add_option("--wheel", wheel_path, "wheel angle file");
    corr_cmd->add_option("--out", out_path, "output prefix (stdout when omitted)");

    try {
        app.parse(argc, argv);
        if (train_cmd->parsed()) {
            return run_train(config_path, train_path, dev_path, data_dir, emotions_arg, wheel_path,
                             seed_flag, out_path);
        }
        if (grid_cmd->parsed()) {
            return run_grid_cmd(grid_path, preset, train_path, dev_path, test_path, data_dir,
                                emotions_arg, wheel_path, seeds_flag, threads, dev_only, out_path,
                                format);
        }
        if (eval_cmd->parsed()) {
            return run_eval(config_path, checkpoint_prefix, data_path, emotions_arg, wheel_path,
                            out_path);
        }
        if (gen_cmd->parsed()) {
            return run_gen_data(spec_path, out_path);
        }
        if (corr_cmd->parsed()) {
            return run_inspect_corr(data_path, emotions_arg, wheel_path, out_path);
        }
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const DivergenceError& e) {
        std::cerr << "numerical divergence: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
