#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cn/matrix.hpp"

namespace cn {

struct FeatureRecord {
    std::string id;
    int label = -1;
    std::vector<double> features;   // NaN where missing
    std::vector<uint8_t> missing;   // 1 where the cell was empty
};

struct Dataset {
    std::vector<FeatureRecord> records;
    std::vector<std::string> feature_names;
    std::vector<std::string> class_names;

    int feature_count() const { return static_cast<int>(feature_names.size()); }
    int class_count() const { return static_cast<int>(class_names.size()); }
    int size() const { return static_cast<int>(records.size()); }
    bool has_missing() const;

    Matrix feature_matrix() const;  // requires a fully observed dataset
    std::vector<int> labels() const;
    std::vector<std::string> ids() const;
};

// CSV layout: header "id,label,<feature names...>", one record per row.
// Labels are arbitrary strings; class names are their sorted unique values
// unless an explicit list is supplied. Empty feature cells mean missing.
// Parse errors report the 1-based file line.
Dataset load_csv(const std::string& path,
                 const std::vector<std::string>& expected_classes = {});
void save_csv(const Dataset& data, const std::string& path);

// Fills every missing cell with the mean of that feature over the k nearest
// fully comparable neighbours. Distances are squared Euclidean over the
// mutually observed dimensions, normalized by how many there are; ties and
// incomparable pairs resolve by record order. A feature observed nowhere is
// an error.
Dataset knn_impute(const Dataset& data, int k = 5);

struct Scaler {
    std::vector<double> mean;
    std::vector<double> stddev;  // sample (n-1) standard deviation; 0 for constant features
};

Scaler zscore_fit(const Dataset& data);
// (x - mean) / stddev per feature; constant features map to 0.
Dataset zscore_apply(const Scaler& scaler, const Dataset& data);

struct SplitResult {
    Dataset train;
    Dataset val;
    Dataset test;
    bool stratified = true;
};

// Shuffled, label-stratified split with largest-remainder rounding of the
// per-class counts. When any class has fewer than three records the split
// falls back to unstratified and says so via the result flag.
SplitResult split_dataset(const Dataset& data, double train_ratio, double val_ratio,
                          double test_ratio, uint64_t seed);

// Restriction to the given feature columns, in the given order.
Dataset select_features(const Dataset& data, const std::vector<int>& columns);

// Order-sensitive FNV-1a over the record ids; used to confirm that paired
// runs saw identical splits.
uint64_t ids_fingerprint(const Dataset& data);
uint64_t split_fingerprint(const SplitResult& split);

}  // namespace cn
