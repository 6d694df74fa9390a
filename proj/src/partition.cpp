#include "cn/partition.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "cn/rng.hpp"

namespace cn {

std::vector<int> ModalityPartition::flatten_indices() const {
    std::vector<int> out;
    out.reserve(total_dims);
    for (const Group& g : groups)
        out.insert(out.end(), g.indices.begin(), g.indices.end());
    return out;
}

void ModalityPartition::validate() const {
    if (group_count() < 2)
        throw std::invalid_argument("ModalityPartition: need at least 2 groups, got " +
                                    std::to_string(group_count()));
    std::vector<int> seen(total_dims, 0);
    for (const Group& g : groups) {
        if (g.indices.empty())
            throw std::invalid_argument("ModalityPartition: group '" + g.name +
                                        "' is empty");
        for (int idx : g.indices) {
            if (idx < 0 || idx >= total_dims)
                throw std::invalid_argument("ModalityPartition: index " +
                                            std::to_string(idx) + " out of range in group '" +
                                            g.name + "'");
            if (seen[idx]++)
                throw std::invalid_argument("ModalityPartition: feature index " +
                                            std::to_string(idx) + " assigned twice");
        }
    }
    for (int i = 0; i < total_dims; ++i)
        if (!seen[i])
            throw std::invalid_argument("ModalityPartition: feature index " +
                                        std::to_string(i) + " not assigned to any group");
}

std::vector<std::vector<double>> partition_sample(const std::vector<double>& x,
                                                  const ModalityPartition& p) {
    if (static_cast<int>(x.size()) != p.total_dims)
        throw std::invalid_argument("partition_sample: vector length " +
                                    std::to_string(x.size()) + " != partition dims " +
                                    std::to_string(p.total_dims));
    std::vector<std::vector<double>> out;
    out.reserve(p.groups.size());
    for (const auto& g : p.groups) {
        std::vector<double> part;
        part.reserve(g.indices.size());
        for (int idx : g.indices) part.push_back(x[idx]);
        out.push_back(std::move(part));
    }
    return out;
}

Matrix select_columns(const Matrix& x, const std::vector<int>& columns) {
    Matrix out(x.rows, static_cast<int>(columns.size()));
    for (size_t j = 0; j < columns.size(); ++j) {
        const int src = columns[j];
        if (src < 0 || src >= x.cols)
            throw std::invalid_argument("select_columns: column " + std::to_string(src) +
                                        " out of range");
        for (int i = 0; i < x.rows; ++i) out(i, static_cast<int>(j)) = x(i, src);
    }
    return out;
}

ModalityPartition natural_partition(
    const std::vector<std::string>& feature_names,
    const std::vector<std::pair<std::string, std::string>>& group_map) {
    std::unordered_map<std::string, std::string> assignment;
    std::vector<std::string> group_order;
    for (const auto& [feature, group] : group_map) {
        auto [it, inserted] = assignment.emplace(feature, group);
        if (!inserted)
            throw std::invalid_argument("natural_partition: feature '" + feature +
                                        "' assigned twice in modality map");
        if (std::find(group_order.begin(), group_order.end(), group) == group_order.end())
            group_order.push_back(group);
    }

    ModalityPartition p;
    p.total_dims = static_cast<int>(feature_names.size());
    for (const std::string& g : group_order) p.groups.push_back({g, {}});
    for (size_t i = 0; i < feature_names.size(); ++i) {
        auto it = assignment.find(feature_names[i]);
        if (it == assignment.end())
            throw std::invalid_argument("natural_partition: feature '" + feature_names[i] +
                                        "' is not assigned to any group");
        for (auto& grp : p.groups)
            if (grp.name == it->second) {
                grp.indices.push_back(static_cast<int>(i));
                break;
            }
    }
    p.validate();
    return p;
}

ModalityPartition random_partition(int total_dims, int m, uint64_t seed) {
    if (m < 2) throw std::invalid_argument("random_partition: need at least 2 groups");
    if (total_dims < m)
        throw std::invalid_argument("random_partition: fewer features than groups");
    std::vector<int> order(total_dims);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);

    ModalityPartition p;
    p.total_dims = total_dims;
    const int base = total_dims / m;
    const int extra = total_dims % m;  // first `extra` groups get one more
    int pos = 0;
    for (int g = 0; g < m; ++g) {
        const int size = base + (g < extra ? 1 : 0);
        ModalityPartition::Group grp;
        grp.name = "g" + std::to_string(g + 1);
        grp.indices.assign(order.begin() + pos, order.begin() + pos + size);
        pos += size;
        p.groups.push_back(std::move(grp));
    }
    p.validate();
    return p;
}

PartitionSubset subset_partition(const ModalityPartition& p,
                                 const std::vector<int>& group_indices) {
    if (group_indices.size() < 2)
        throw std::invalid_argument("subset_partition: need at least 2 groups");
    PartitionSubset out;
    int next = 0;
    for (int gi : group_indices) {
        if (gi < 0 || gi >= p.group_count())
            throw std::invalid_argument("subset_partition: group index out of range");
        const auto& src = p.groups[gi];
        ModalityPartition::Group grp;
        grp.name = src.name;
        for (int idx : src.indices) {
            out.columns.push_back(idx);
            grp.indices.push_back(next++);
        }
        out.partition.groups.push_back(std::move(grp));
    }
    out.partition.total_dims = next;
    out.partition.validate();
    return out;
}

std::vector<std::pair<std::string, std::string>> load_modality_map(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "feature_name,group_name")
        throw std::runtime_error(path + ":1: expected header 'feature_name,group_name'");

    std::vector<std::pair<std::string, std::string>> map;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        size_t comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected exactly two cells");
        std::string feature = line.substr(0, comma);
        std::string group = line.substr(comma + 1);
        if (feature.empty() || group.empty())
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": empty cell");
        map.emplace_back(std::move(feature), std::move(group));
    }
    if (map.empty()) throw std::runtime_error(path + ": no feature assignments");
    return map;
}

void save_modality_map(const std::vector<std::pair<std::string, std::string>>& group_map,
                       const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "feature_name,group_name\n";
    for (const auto& [feature, group] : group_map) out << feature << ',' << group << '\n';
    if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace cn
