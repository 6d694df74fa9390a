#include "cn/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cn/checkpoint.hpp"
#include "cn/dataset.hpp"
#include "cn/metrics.hpp"
#include "cn/model.hpp"
#include "cn/partition.hpp"
#include "cn/snapshots.hpp"
#include "cn/synthetic.hpp"
#include "cn/trials.hpp"

namespace cn {
namespace {

struct Options {
    std::string data_path;
    std::string map_path;
    std::string model_path;
    std::string out_path = "out";
    std::string map_out;
    std::string predictions_out;
    std::string groups = "natural";
    std::string study = "noise";
    SyntheticSpec synth;
    TrainConfig train;
    ModelConfig model;
    PipelineConfig pipe;
    int trials = 10;
    int jobs = 1;
    uint64_t seed = 0;
    double lr = 0.0;  // > 0 overrides all three learning rates
    std::vector<int> snap_steps = {5, 10, 20, 30, 40};
};

ModalityPartition build_partition(const Dataset& data, const Options& opt) {
    if (opt.groups == "natural") {
        if (opt.map_path.empty())
            throw std::invalid_argument("natural grouping needs --modality-map");
        return natural_partition(data.feature_names, load_modality_map(opt.map_path));
    }
    if (opt.groups.rfind("random:", 0) == 0) {
        std::string tail = opt.groups.substr(7);
        size_t used = 0;
        int k = 0;
        try {
            k = std::stoi(tail, &used);
        } catch (const std::exception&) {
            used = std::string::npos;
        }
        if (used != tail.size() || k < 2)
            throw std::invalid_argument("--groups random:K needs an integer K >= 2");
        return random_partition(data.feature_count(), k, opt.seed);
    }
    throw std::invalid_argument("--groups must be 'natural' or 'random:K'");
}

void apply_lr(Options& opt) {
    if (opt.lr > 0.0) {
        opt.train.lr_ephysician = opt.lr;
        opt.train.lr_discriminator = opt.lr;
        opt.train.lr_classifier = opt.lr;
    }
    opt.train.seed = opt.seed;
}

std::filesystem::path ensure_out_dir(const std::string& out) {
    std::filesystem::path dir(out);
    std::filesystem::create_directories(dir);
    return dir;
}

struct PreparedData {
    Dataset complete;
    SplitResult split;
    Scaler scaler;
    Matrix x_train, x_val, x_test;
    std::vector<int> y_train, y_val, y_test;
};

PreparedData prepare(const Options& opt) {
    PreparedData prep;
    Dataset raw = load_csv(opt.data_path);
    prep.complete = raw.has_missing() ? knn_impute(raw, opt.pipe.impute_k) : std::move(raw);
    if (prep.complete.class_count() < 2)
        throw std::invalid_argument(opt.data_path + ": need at least two classes");
    prep.split = split_dataset(prep.complete, opt.pipe.train_ratio, opt.pipe.val_ratio,
                               opt.pipe.test_ratio, opt.seed);
    prep.scaler = zscore_fit(opt.pipe.scaler_fit_on_all ? prep.complete : prep.split.train);
    Dataset train = zscore_apply(prep.scaler, prep.split.train);
    Dataset val = zscore_apply(prep.scaler, prep.split.val);
    Dataset test = zscore_apply(prep.scaler, prep.split.test);
    prep.x_train = train.feature_matrix();
    prep.x_val = val.feature_matrix();
    prep.x_test = test.feature_matrix();
    prep.y_train = train.labels();
    prep.y_val = val.labels();
    prep.y_test = test.labels();
    return prep;
}

int run_synth(Options& opt) {
    SyntheticData data = generate_synthetic(opt.synth, opt.seed);
    save_csv(data.dataset, opt.out_path);
    if (!opt.map_out.empty()) save_modality_map(synthetic_modality_map(opt.synth), opt.map_out);
    std::printf("wrote %d samples, %d features, %d modalities to %s\n", opt.synth.samples,
                opt.synth.total_dims(), opt.synth.modalities, opt.out_path.c_str());
    return 0;
}

int run_train(Options& opt, bool with_snapshots) {
    apply_lr(opt);
    PreparedData prep = prepare(opt);
    ModalityPartition partition = build_partition(prep.complete, opt);

    ModelConfig mc = opt.model;
    mc.noise_enabled = opt.train.noise_enabled;
    ConsensusModel model(partition, prep.complete.class_count(), mc);
    Rng rng(opt.seed);
    model.init(rng);
    Trainer trainer(model, opt.train, rng);

    auto dir = ensure_out_dir(opt.out_path);
    TrainHistory history;
    if (with_snapshots) {
        SnapshotExporter exporter(opt.snap_steps, prep.split.train.ids());
        history = trainer.run(prep.x_train, prep.y_train, prep.x_val, prep.y_val,
                              [&](int step, const std::vector<Matrix>& reps, const Matrix* noise,
                                  double lc, double ld, double va) {
                                  exporter.on_step(step, reps, noise, lc, ld, va);
                              });
        exporter.write_csv((dir / "snapshots.csv").string());
    } else {
        history = trainer.run(prep.x_train, prep.y_train, prep.x_val, prep.y_val);
    }
    history.write_csv((dir / "history.csv").string());
    save_model_bundle((dir / "model.ckpt").string(), model, prep.complete.feature_names,
                      prep.complete.class_names, prep.scaler);

    Metrics m = compute_metrics(prep.y_test, model.predict(prep.x_test),
                                prep.complete.class_count());
    std::printf("stopped after %zu step(s): %s\n", history.steps.size(),
                to_string(history.stop_reason));
    std::printf("test accuracy %.4f, micro F1 %.4f, macro F1 %.4f\n", m.accuracy, m.micro_f1,
                m.macro_f1);
    return 0;
}

int run_evaluate(Options& opt) {
    ModelBundle bundle = load_model_bundle(opt.model_path);
    Dataset raw = load_csv(opt.data_path, bundle.class_names);
    if (raw.feature_names != bundle.feature_names)
        throw std::runtime_error(opt.data_path + ": feature columns do not match the checkpoint");
    Dataset complete = raw.has_missing() ? knn_impute(raw, opt.pipe.impute_k) : std::move(raw);
    Dataset scaled = zscore_apply(bundle.scaler, complete);
    Matrix x = scaled.feature_matrix();
    std::vector<int> pred = bundle.model.predict(x);

    Metrics m = compute_metrics(scaled.labels(), pred, bundle.model.n_classes());
    std::printf("%d samples: accuracy %.4f, micro F1 %.4f, macro F1 %.4f\n", scaled.size(),
                m.accuracy, m.micro_f1, m.macro_f1);
    if (!opt.predictions_out.empty()) {
        std::ofstream out(opt.predictions_out);
        if (!out) throw std::runtime_error("cannot open " + opt.predictions_out + " for writing");
        out << "id,label,predicted\n";
        for (int i = 0; i < scaled.size(); ++i)
            out << scaled.records[i].id << ',' << bundle.class_names[scaled.records[i].label]
                << ',' << bundle.class_names[pred[i]] << '\n';
    }
    return 0;
}

int run_trials_cmd(Options& opt) {
    apply_lr(opt);
    Dataset data = load_csv(opt.data_path);
    TrialSpec spec;
    spec.cell_id = "cn";
    spec.family = ModelFamily::kConsensus;
    spec.train = opt.train;
    spec.model = opt.model;
    if (opt.groups.rfind("random:", 0) == 0) {
        ModalityPartition probe = build_partition(data, opt);
        spec.random_partition_groups = probe.group_count();
    } else {
        spec.partition = build_partition(data, opt);
    }
    TrialSummary summary = run_trials(data, spec, opt.trials, opt.seed, opt.pipe, opt.jobs);

    auto dir = ensure_out_dir(opt.out_path);
    AblationReport report;
    report.cells.push_back(std::move(summary));
    report.write_summary_csv((dir / "summary.csv").string());
    report.write_trials_csv((dir / "trials.csv").string());
    const TrialSummary& s = report.cells[0];
    std::printf("accuracy %.4f +/- %.4f, micro F1 %.4f +/- %.4f, macro F1 %.4f +/- %.4f (n=%d",
                s.accuracy.mean, s.accuracy.stddev, s.micro_f1.mean, s.micro_f1.stddev,
                s.macro_f1.mean, s.macro_f1.stddev, s.accuracy.n);
    if (s.failed_count > 0) std::printf(", %d failed", s.failed_count);
    std::printf(")\n");
    return 0;
}

int run_ablate(Options& opt) {
    apply_lr(opt);
    Dataset data = load_csv(opt.data_path);
    ModalityPartition partition = build_partition(data, opt);
    AblationStudy study = parse_ablation_study(opt.study);
    AblationReport report = run_ablation(study, data, partition, opt.train, opt.model, opt.trials,
                                         opt.seed, opt.pipe, opt.jobs);

    auto dir = ensure_out_dir(opt.out_path);
    report.write_summary_csv((dir / "summary.csv").string());
    report.write_trials_csv((dir / "trials.csv").string());
    for (const auto& cell : report.cells) {
        std::printf("%-24s accuracy %.4f +/- %.4f  macro F1 %.4f +/- %.4f (n=%d",
                    cell.cell_id.c_str(), cell.accuracy.mean, cell.accuracy.stddev,
                    cell.macro_f1.mean, cell.macro_f1.stddev, cell.accuracy.n);
        if (cell.failed_count > 0) std::printf(", %d failed", cell.failed_count);
        std::printf(")\n");
    }
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    Options opt;
    CLI::App app{"consensus network classifier over grouped feature sets"};
    app.require_subcommand(1);

    auto add_common = [&](CLI::App* cmd, bool needs_data) {
        auto* data = cmd->add_option("--data", opt.data_path, "input CSV (id,label,features)");
        if (needs_data) data->required();
        cmd->add_option("--modality-map", opt.map_path, "feature-to-group CSV");
        cmd->add_option("--groups", opt.groups, "'natural' or 'random:K'")
            ->capture_default_str();
        cmd->add_option("--seed", opt.seed, "master seed")->capture_default_str();
        cmd->add_option("--out", opt.out_path, "output directory")->capture_default_str();
        cmd->add_option("--impute-k", opt.pipe.impute_k, "neighbours for imputation")
            ->capture_default_str();
        cmd->add_flag("--scale-all", opt.pipe.scaler_fit_on_all,
                      "fit the scaler on all data instead of the training split");
    };
    auto add_train_flags = [&](CLI::App* cmd) {
        cmd->add_option("--steps", opt.train.max_steps, "outer step limit")
            ->capture_default_str();
        cmd->add_option("--k-disc", opt.train.disc_steps, "discriminator steps per batch")
            ->capture_default_str();
        cmd->add_option("--batch", opt.train.batch_size, "minibatch size")
            ->capture_default_str();
        cmd->add_option("--lr", opt.lr, "learning rate for all three optimizers");
        cmd->add_option("--tol", opt.train.convergence_tol, "convergence tolerance")
            ->capture_default_str();
        cmd->add_flag("--noise,!--no-noise", opt.train.noise_enabled,
                      "train against a noise modality");
        cmd->add_flag("--coop,!--no-coop", opt.train.cooperative,
                      "let classifier gradients reach the encoders");
        cmd->add_option("--hidden-dim", opt.model.hidden_dim, "encoder hidden width")
            ->capture_default_str();
        cmd->add_option("--rep-dim", opt.model.rep_dim, "representation width")
            ->capture_default_str();
    };

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    synth->add_option("--out", opt.out_path, "output CSV path")->required();
    synth->add_option("--map-out", opt.map_out, "also write the modality map here");
    synth->add_option("--seed", opt.seed, "generator seed")->capture_default_str();
    synth->add_option("--samples", opt.synth.samples)->capture_default_str();
    synth->add_option("--modalities", opt.synth.modalities)->capture_default_str();
    synth->add_option("--latent-dim", opt.synth.latent_dim)->capture_default_str();
    synth->add_option("--signal-dims", opt.synth.signal_dims)->capture_default_str();
    synth->add_option("--distractor-dims", opt.synth.distractor_dims)->capture_default_str();
    synth->add_option("--strength", opt.synth.strength)->capture_default_str();
    synth->add_option("--noise-scale", opt.synth.noise_scale)->capture_default_str();
    synth->add_option("--balance", opt.synth.balance)->capture_default_str();

    CLI::App* train = app.add_subcommand("train", "fit one model and save a checkpoint");
    add_common(train, true);
    add_train_flags(train);

    CLI::App* evaluate = app.add_subcommand("evaluate", "score a CSV with a checkpoint");
    evaluate->add_option("--model", opt.model_path, "checkpoint path")->required();
    evaluate->add_option("--data", opt.data_path, "input CSV")->required();
    evaluate->add_option("--out", opt.predictions_out, "optional predictions CSV");
    evaluate->add_option("--impute-k", opt.pipe.impute_k)->capture_default_str();

    CLI::App* trials = app.add_subcommand("trials", "repeated trials of one configuration");
    add_common(trials, true);
    add_train_flags(trials);
    trials->add_option("--trials", opt.trials, "number of trials")->capture_default_str();
    trials->add_option("--jobs", opt.jobs, "parallel trials")->capture_default_str();

    CLI::App* ablate = app.add_subcommand("ablate", "run one ablation study");
    add_common(ablate, true);
    add_train_flags(ablate);
    ablate->add_option("--study", opt.study, "noise, coop, models or partition")->required();
    ablate->add_option("--trials", opt.trials, "number of trials")->capture_default_str();
    ablate->add_option("--jobs", opt.jobs, "parallel trials")->capture_default_str();

    CLI::App* snapshots = app.add_subcommand("snapshots", "train and export 2-D projections");
    add_common(snapshots, true);
    add_train_flags(snapshots);
    snapshots->add_option("--snap-steps", opt.snap_steps, "steps to project")
        ->delimiter(',')
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (synth->parsed()) return run_synth(opt);
        if (train->parsed()) return run_train(opt, false);
        if (evaluate->parsed()) return run_evaluate(opt);
        if (trials->parsed()) return run_trials_cmd(opt);
        if (ablate->parsed()) return run_ablate(opt);
        if (snapshots->parsed()) return run_train(opt, true);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}

int cli_main(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("cn");
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace cn
