#include "cn/trials.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace cn {
namespace {

std::string sanitize(const std::string& s) {
    std::string out = s;
    std::replace(out.begin(), out.end(), ',', ';');
    std::replace(out.begin(), out.end(), '\n', ' ');
    return out;
}

TrialResult run_single_trial(const Dataset& complete, const TrialSpec& spec,
                             const std::vector<int>& columns, int index, uint64_t seed,
                             const PipelineConfig& pipe) {
    TrialResult result;
    result.trial = index;
    result.seed = seed;
    try {
        SplitResult split = split_dataset(complete, pipe.train_ratio, pipe.val_ratio,
                                          pipe.test_ratio, seed);
        result.split_hash = split_fingerprint(split);
        Dataset train = select_features(split.train, columns);
        Dataset val = select_features(split.val, columns);
        Dataset test = select_features(split.test, columns);
        if (test.size() == 0) throw std::runtime_error("empty test split");
        if (val.size() == 0) throw std::runtime_error("empty validation split");

        Scaler scaler =
            zscore_fit(pipe.scaler_fit_on_all ? select_features(complete, columns) : train);
        train = zscore_apply(scaler, train);
        val = zscore_apply(scaler, val);
        test = zscore_apply(scaler, test);

        Matrix x_train = train.feature_matrix();
        Matrix x_val = val.feature_matrix();
        Matrix x_test = test.feature_matrix();
        std::vector<int> y_train = train.labels();
        std::vector<int> y_val = val.labels();
        std::vector<int> y_test = test.labels();
        int n_classes = complete.class_count();
        int width = static_cast<int>(columns.size());

        Rng rng(seed);
        TrainConfig tc = spec.train;
        tc.seed = seed;
        std::vector<int> pred;
        if (spec.family == ModelFamily::kConsensus) {
            ModalityPartition part = spec.random_partition_groups > 0
                                         ? random_partition(width, spec.random_partition_groups, seed)
                                         : spec.partition;
            ModelConfig mc = spec.model;
            mc.noise_enabled = tc.noise_enabled;
            ConsensusModel model(part, n_classes, mc);
            model.init(rng);
            Trainer trainer(model, tc, rng);
            result.history = trainer.run(x_train, y_train, x_val, y_val);
            pred = model.predict(x_test);
        } else {
            auto sizes = mlp_baseline_hidden_sizes(spec.modality_count, spec.model.hidden_dim,
                                                   spec.model.rep_dim, spec.classifier_hidden);
            Mlp net = build_mlp_baseline(width, n_classes, sizes, spec.model);
            net.init(rng);
            result.history = train_mlp_classifier(net, tc, rng, x_train, y_train, x_val, y_val);
            pred = mlp_predict(net, x_test);
        }
        result.test_metrics = compute_metrics(y_test, pred, n_classes);
    } catch (const std::exception& e) {
        result.failed = true;
        result.error = e.what();
    }
    return result;
}

}  // namespace

TrialSummary run_trials(const Dataset& data, const TrialSpec& spec, int n_trials,
                        uint64_t master_seed, const PipelineConfig& pipe, int jobs) {
    require(n_trials >= 2, "run_trials: need at least two trials");
    require(jobs >= 1, "run_trials: jobs must be positive");
    require(data.class_count() >= 2, "run_trials: need at least two classes");

    Dataset complete = data.has_missing() ? knn_impute(data, pipe.impute_k) : data;

    std::vector<int> columns = spec.columns;
    if (columns.empty()) {
        columns.resize(complete.feature_count());
        std::iota(columns.begin(), columns.end(), 0);
    }
    int width = static_cast<int>(columns.size());
    if (spec.family == ModelFamily::kConsensus) {
        if (spec.random_partition_groups > 0) {
            require(spec.random_partition_groups >= 2 && spec.random_partition_groups <= width,
                    "run_trials: random partition group count out of range");
        } else {
            spec.partition.validate();
            require(spec.partition.total_dims == width,
                    "run_trials: partition width does not match the selected columns");
        }
    } else {
        require(spec.modality_count >= 1, "run_trials: baseline needs a modality count");
    }

    TrialSummary summary;
    summary.cell_id = spec.cell_id;
    summary.trials.resize(n_trials);

#pragma omp parallel for schedule(dynamic) num_threads(jobs) if (jobs > 1)
    for (int i = 0; i < n_trials; ++i)
        summary.trials[i] = run_single_trial(complete, spec, columns, i, master_seed + i, pipe);

    std::vector<double> acc, micro, macro;
    for (const auto& t : summary.trials) {
        if (t.failed) {
            ++summary.failed_count;
            continue;
        }
        acc.push_back(t.test_metrics.accuracy);
        micro.push_back(t.test_metrics.micro_f1);
        macro.push_back(t.test_metrics.macro_f1);
    }
    if (acc.empty())
        throw std::runtime_error("cell '" + spec.cell_id +
                                 "': all trials failed; first error: " + summary.trials[0].error);
    summary.accuracy = aggregate(acc);
    summary.micro_f1 = aggregate(micro);
    summary.macro_f1 = aggregate(macro);
    return summary;
}

std::vector<int> mlp_baseline_hidden_sizes(int modality_count, int hidden_dim, int rep_dim,
                                           int classifier_hidden) {
    require(modality_count >= 1, "mlp_baseline_hidden_sizes: modality count must be positive");
    require(hidden_dim >= 1 && rep_dim >= 1,
            "mlp_baseline_hidden_sizes: layer widths must be positive");
    require(classifier_hidden >= 0,
            "mlp_baseline_hidden_sizes: classifier width must be non-negative");
    std::vector<int> sizes = {hidden_dim * modality_count, rep_dim * modality_count};
    if (classifier_hidden > 0) sizes.push_back(classifier_hidden);
    return sizes;
}

Mlp build_mlp_baseline(int input_dim, int n_classes, const std::vector<int>& hidden_sizes,
                       const ModelConfig& cfg) {
    require(input_dim >= 1, "build_mlp_baseline: input_dim must be positive");
    require(n_classes >= 2, "build_mlp_baseline: need at least two classes");
    Mlp net;
    int prev = input_dim;
    for (int width : hidden_sizes) {
        require(width >= 1, "build_mlp_baseline: hidden widths must be positive");
        net.blocks.emplace_back(DenseLayer(prev, width));
        net.blocks.emplace_back(BatchNormLayer(width, cfg.bn_epsilon, cfg.bn_momentum));
        net.blocks.emplace_back(LeakyReluLayer(cfg.leaky_slope));
        prev = width;
    }
    net.blocks.emplace_back(DenseLayer(prev, n_classes));
    return net;
}

AblationStudy parse_ablation_study(const std::string& name) {
    if (name == "noise") return AblationStudy::kNoise;
    if (name == "coop" || name == "cooperative") return AblationStudy::kCooperative;
    if (name == "models") return AblationStudy::kModels;
    if (name == "partition") return AblationStudy::kPartition;
    throw std::invalid_argument("unknown ablation study '" + name +
                                "' (expected noise, coop, models or partition)");
}

const char* to_string(AblationStudy study) {
    switch (study) {
        case AblationStudy::kNoise: return "noise";
        case AblationStudy::kCooperative: return "cooperative";
        case AblationStudy::kModels: return "models";
        case AblationStudy::kPartition: return "partition";
    }
    return "?";
}

void AblationReport::write_summary_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "cell,metric,mean,std,n\n";
    char buf[96];
    for (const auto& cell : cells) {
        const std::pair<const char*, const Aggregate*> rows[] = {
            {"accuracy", &cell.accuracy}, {"micro_f1", &cell.micro_f1}, {"macro_f1", &cell.macro_f1}};
        for (const auto& [metric, agg] : rows) {
            std::snprintf(buf, sizeof buf, ",%s,%.17g,%.17g,%d\n", metric, agg->mean, agg->stddev,
                          agg->n);
            out << cell.cell_id << buf;
        }
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

void AblationReport::write_trials_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "cell,trial,seed,split_hash,status,accuracy,micro_f1,macro_f1,stop_reason,steps,error\n";
    char buf[192];
    for (const auto& cell : cells) {
        for (const auto& t : cell.trials) {
            if (t.failed) {
                std::snprintf(buf, sizeof buf, ",%d,%llu,%016llx,failed,,,,,,", t.trial,
                              static_cast<unsigned long long>(t.seed),
                              static_cast<unsigned long long>(t.split_hash));
                out << cell.cell_id << buf << sanitize(t.error) << '\n';
            } else {
                std::snprintf(buf, sizeof buf, ",%d,%llu,%016llx,ok,%.17g,%.17g,%.17g,%s,%zu,\n",
                              t.trial, static_cast<unsigned long long>(t.seed),
                              static_cast<unsigned long long>(t.split_hash),
                              t.test_metrics.accuracy, t.test_metrics.micro_f1,
                              t.test_metrics.macro_f1, to_string(t.history.stop_reason),
                              t.history.steps.size());
                out << cell.cell_id << buf;
            }
        }
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

AblationReport run_ablation(AblationStudy study, const Dataset& data,
                            const ModalityPartition& partition, const TrainConfig& base_train,
                            const ModelConfig& base_model, int n_trials, uint64_t master_seed,
                            const PipelineConfig& pipe, int jobs) {
    partition.validate();
    require(partition.total_dims == data.feature_count(),
            "run_ablation: partition does not cover the dataset features");

    TrialSpec base;
    base.train = base_train;
    base.model = base_model;
    auto consensus_cell = [&](const std::string& id) {
        TrialSpec s = base;
        s.cell_id = id;
        s.family = ModelFamily::kConsensus;
        s.partition = partition;
        return s;
    };

    std::vector<TrialSpec> specs;
    switch (study) {
        case AblationStudy::kNoise: {
            TrialSpec on = consensus_cell("cn_noise");
            on.train.noise_enabled = true;
            TrialSpec off = consensus_cell("cn_nonoise");
            off.train.noise_enabled = false;
            specs = {on, off};
            break;
        }
        case AblationStudy::kCooperative: {
            TrialSpec coop = consensus_cell("cn_coop");
            coop.train.cooperative = true;
            TrialSpec solo = consensus_cell("cn_noncoop");
            solo.train.cooperative = false;
            specs = {coop, solo};
            break;
        }
        case AblationStudy::kModels: {
            int m = partition.group_count();
            for (int g = 0; g < m; ++g) {
                TrialSpec s = base;
                s.cell_id = "mlp_" + partition.groups[g].name;
                s.family = ModelFamily::kMlpBaseline;
                s.columns = partition.groups[g].indices;
                s.modality_count = 1;
                specs.push_back(std::move(s));
            }
            if (m >= 3) {
                for (int i = 0; i < m; ++i) {
                    for (int j = i + 1; j < m; ++j) {
                        PartitionSubset subset = subset_partition(partition, {i, j});
                        std::string pair =
                            partition.groups[i].name + "+" + partition.groups[j].name;
                        TrialSpec mlp = base;
                        mlp.cell_id = "mlp_" + pair;
                        mlp.family = ModelFamily::kMlpBaseline;
                        mlp.columns = subset.columns;
                        mlp.modality_count = 2;
                        specs.push_back(std::move(mlp));
                        TrialSpec con = base;
                        con.cell_id = "cn_" + pair;
                        con.family = ModelFamily::kConsensus;
                        con.columns = subset.columns;
                        con.partition = subset.partition;
                        specs.push_back(std::move(con));
                    }
                }
            }
            TrialSpec mlp_all = base;
            mlp_all.cell_id = "mlp_all";
            mlp_all.family = ModelFamily::kMlpBaseline;
            mlp_all.modality_count = m;
            specs.push_back(std::move(mlp_all));
            specs.push_back(consensus_cell("cn_all"));
            break;
        }
        case AblationStudy::kPartition: {
            specs.push_back(consensus_cell("cn_natural"));
            if (partition.group_count() >= 3) {
                // Coarser two-way natural division: first group against the rest.
                ModalityPartition coarse;
                coarse.total_dims = partition.total_dims;
                coarse.groups.push_back(partition.groups[0]);
                ModalityPartition::Group rest;
                rest.name = "rest";
                for (int g = 1; g < partition.group_count(); ++g)
                    for (int idx : partition.groups[g].indices) rest.indices.push_back(idx);
                coarse.groups.push_back(std::move(rest));
                coarse.validate();
                TrialSpec s = consensus_cell("cn_natural2");
                s.partition = std::move(coarse);
                specs.push_back(std::move(s));
            }
            for (int k = 2; k <= 4; ++k) {
                if (k > data.feature_count()) continue;
                TrialSpec s = base;
                s.cell_id = "cn_random" + std::to_string(k);
                s.family = ModelFamily::kConsensus;
                s.random_partition_groups = k;
                specs.push_back(std::move(s));
            }
            break;
        }
    }

    AblationReport report;
    for (const auto& spec : specs)
        report.cells.push_back(run_trials(data, spec, n_trials, master_seed, pipe, jobs));

    for (int i = 0; i < n_trials; ++i) {
        uint64_t expected = 0;
        for (const auto& cell : report.cells) {
            uint64_t h = cell.trials[i].split_hash;
            if (h == 0) continue;
            if (expected == 0) expected = h;
            if (h != expected)
                throw std::logic_error("paired trials diverged on data splits at trial " +
                                       std::to_string(i));
        }
    }
    return report;
}

}  // namespace cn
