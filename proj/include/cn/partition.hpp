#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cn/matrix.hpp"

namespace cn {

// Disjoint, exhaustive assignment of feature indices to M >= 2 named groups.
struct ModalityPartition {
    struct Group {
        std::string name;
        std::vector<int> indices;
    };

    std::vector<Group> groups;
    int total_dims = 0;

    int group_count() const { return static_cast<int>(groups.size()); }

    // All feature indices in group order; inverse-permuting a vector
    // concatenated in group order by this list reproduces the original.
    std::vector<int> flatten_indices() const;

    // Throws unless groups are non-empty, pairwise disjoint, cover exactly
    // {0..total_dims-1}, and there are at least two of them.
    void validate() const;
};

// Splits one feature vector into per-group vectors, in group order.
std::vector<std::vector<double>> partition_sample(const std::vector<double>& x,
                                                  const ModalityPartition& p);

// New matrix holding the listed columns of x, in the listed order.
Matrix select_columns(const Matrix& x, const std::vector<int>& columns);

// Builds the partition from an ordered feature_name -> group_name map.
// Group order is the order of first appearance in the map. Every feature
// must be assigned exactly once.
ModalityPartition natural_partition(
    const std::vector<std::string>& feature_names,
    const std::vector<std::pair<std::string, std::string>>& group_map);

// M near-equal random groups (sizes differ by at most 1) over dims features,
// named g1..gM, by seeded shuffle.
ModalityPartition random_partition(int total_dims, int m, uint64_t seed);

// Restriction of a partition to a subset of its groups, reindexed to the
// column list it also returns. Needs at least two groups.
struct PartitionSubset {
    std::vector<int> columns;  // indices into the original feature space
    ModalityPartition partition;
};
PartitionSubset subset_partition(const ModalityPartition& p,
                                 const std::vector<int>& group_indices);

// Modality map CSV: header "feature_name,group_name", one feature per row.
std::vector<std::pair<std::string, std::string>> load_modality_map(const std::string& path);
void save_modality_map(const std::vector<std::pair<std::string, std::string>>& group_map,
                       const std::string& path);

}  // namespace cn
