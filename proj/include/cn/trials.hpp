#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cn/dataset.hpp"
#include "cn/metrics.hpp"
#include "cn/model.hpp"
#include "cn/partition.hpp"
#include "cn/train.hpp"

namespace cn {

struct PipelineConfig {
    double train_ratio = 0.6;
    double val_ratio = 0.2;
    double test_ratio = 0.2;
    int impute_k = 5;
    bool scaler_fit_on_all = false;  // default fits the scaler on the training split only
};

enum class ModelFamily { kConsensus, kMlpBaseline };

// One experiment cell: a model family plus the feature view it sees. Trials
// within a cell differ only in the seed; cells run with the same master seed
// share data splits trial for trial.
struct TrialSpec {
    std::string cell_id;
    ModelFamily family = ModelFamily::kConsensus;
    std::vector<int> columns;         // dataset columns used; empty means all
    ModalityPartition partition;      // consensus only, over the selected columns
    int random_partition_groups = 0;  // consensus only; > 0 draws a fresh partition per trial
    int modality_count = 0;           // baseline width factor; consensus infers it
    int classifier_hidden = 0;        // baseline optional extra hidden width
    TrainConfig train;
    ModelConfig model;
};

struct TrialResult {
    int trial = 0;
    uint64_t seed = 0;
    uint64_t split_hash = 0;
    bool failed = false;
    std::string error;
    Metrics test_metrics;
    TrainHistory history;
};

struct TrialSummary {
    std::string cell_id;
    std::vector<TrialResult> trials;
    int failed_count = 0;
    Aggregate accuracy;
    Aggregate micro_f1;
    Aggregate macro_f1;
};

// Runs n_trials independent train/evaluate rounds with seeds
// master_seed + 0 .. master_seed + n-1. Each trial re-splits the data with
// its own seed, fits the scaler, trains and scores the test split. A trial
// that throws is recorded as failed; aggregates cover the rest. With
// jobs > 1 trials run in parallel and the outcome is identical to a serial
// run because every trial owns its RNG stream.
TrialSummary run_trials(const Dataset& data, const TrialSpec& spec, int n_trials,
                        uint64_t master_seed, const PipelineConfig& pipe, int jobs = 1);

// Hidden widths for the size-matched baseline: one layer matching the
// combined ePhysician hidden capacity, one matching the combined
// representation width, and optionally a classifier stage.
std::vector<int> mlp_baseline_hidden_sizes(int modality_count, int hidden_dim, int rep_dim,
                                           int classifier_hidden);
Mlp build_mlp_baseline(int input_dim, int n_classes, const std::vector<int>& hidden_sizes,
                       const ModelConfig& cfg);

enum class AblationStudy { kNoise, kCooperative, kModels, kPartition };
AblationStudy parse_ablation_study(const std::string& name);
const char* to_string(AblationStudy study);

struct AblationReport {
    std::vector<TrialSummary> cells;

    // cell,metric,mean,std,n
    void write_summary_csv(const std::string& path) const;
    // cell,trial,seed,split_hash,status,accuracy,micro_f1,macro_f1,stop_reason,steps,error
    void write_trials_csv(const std::string& path) const;
};

// Builds the cell list for a study and runs every cell with the same master
// seed, then checks that paired trials really saw identical splits.
//   kNoise:       consensus with and without the noise modality
//   kCooperative: consensus with and without classifier gradients reaching
//                 the ePhysicians
//   kModels:      baseline on each single modality, baseline and consensus
//                 on each pair (when more than two groups exist) and on the
//                 full set
//   kPartition:   consensus on the natural grouping and on random 2/3/4-way
//                 regroupings drawn per trial
AblationReport run_ablation(AblationStudy study, const Dataset& data,
                            const ModalityPartition& partition, const TrainConfig& base_train,
                            const ModelConfig& base_model, int n_trials, uint64_t master_seed,
                            const PipelineConfig& pipe, int jobs = 1);

}  // namespace cn
