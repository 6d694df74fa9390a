#include "cn/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cn/rng.hpp"

namespace cn {
namespace {

constexpr uint64_t kFnvBasis = 14695981039346656037ULL;
constexpr uint64_t kFnvPrime = 1099511628211ULL;

uint64_t fnv1a(uint64_t h, const void* bytes, size_t n) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
    return h;
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    cells.push_back(cur);
    return cells;
}

double parse_cell(const std::string& raw, const std::string& path, int line_no) {
    std::string s = trim(raw);
    const char* begin = s.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || !std::isfinite(v))
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": cannot parse feature value '" + raw + "'");
    return v;
}

[[noreturn]] void parse_fail(const std::string& path, int line_no, const std::string& msg) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + msg);
}

}  // namespace

bool Dataset::has_missing() const {
    for (const auto& rec : records)
        for (uint8_t m : rec.missing)
            if (m) return true;
    return false;
}

Matrix Dataset::feature_matrix() const {
    if (has_missing())
        throw std::runtime_error("dataset still has missing values; impute first");
    Matrix x(size(), feature_count());
    for (int r = 0; r < size(); ++r)
        for (int c = 0; c < feature_count(); ++c) x(r, c) = records[r].features[c];
    return x;
}

std::vector<int> Dataset::labels() const {
    std::vector<int> y(records.size());
    for (size_t i = 0; i < records.size(); ++i) y[i] = records[i].label;
    return y;
}

std::vector<std::string> Dataset::ids() const {
    std::vector<std::string> out(records.size());
    for (size_t i = 0; i < records.size(); ++i) out[i] = records[i].id;
    return out;
}

Dataset load_csv(const std::string& path, const std::vector<std::string>& expected_classes) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);

    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    auto header = split_line(line);
    if (header.size() < 3) parse_fail(path, line_no, "header needs id, label and at least one feature");
    if (trim(header[0]) != "id" || trim(header[1]) != "label")
        parse_fail(path, line_no, "header must start with 'id,label'");

    Dataset data;
    std::set<std::string> seen_names;
    for (size_t c = 2; c < header.size(); ++c) {
        std::string name = trim(header[c]);
        if (name.empty()) parse_fail(path, line_no, "empty feature name in header");
        if (!seen_names.insert(name).second)
            parse_fail(path, line_no, "duplicate feature name '" + name + "'");
        data.feature_names.push_back(name);
    }
    int d = data.feature_count();

    std::vector<std::string> raw_labels;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != header.size())
            parse_fail(path, line_no,
                       "expected " + std::to_string(header.size()) + " cells, got " +
                           std::to_string(cells.size()));
        FeatureRecord rec;
        rec.id = trim(cells[0]);
        if (rec.id.empty()) parse_fail(path, line_no, "empty id");
        std::string label = trim(cells[1]);
        if (label.empty()) parse_fail(path, line_no, "empty label");
        raw_labels.push_back(label);
        rec.features.resize(d);
        rec.missing.resize(d, 0);
        for (int j = 0; j < d; ++j) {
            const std::string& cell = cells[j + 2];
            if (trim(cell).empty()) {
                rec.features[j] = std::numeric_limits<double>::quiet_NaN();
                rec.missing[j] = 1;
            } else {
                rec.features[j] = parse_cell(cell, path, line_no);
            }
        }
        data.records.push_back(std::move(rec));
    }
    if (data.records.empty()) throw std::runtime_error(path + ": no records");

    if (expected_classes.empty()) {
        std::set<std::string> uniq(raw_labels.begin(), raw_labels.end());
        data.class_names.assign(uniq.begin(), uniq.end());
    } else {
        data.class_names = expected_classes;
    }
    std::map<std::string, int> index;
    for (int c = 0; c < data.class_count(); ++c) index[data.class_names[c]] = c;
    for (size_t i = 0; i < data.records.size(); ++i) {
        auto it = index.find(raw_labels[i]);
        if (it == index.end())
            throw std::runtime_error(path + ": unknown class label '" + raw_labels[i] + "'");
        data.records[i].label = it->second;
    }
    return data;
}

void save_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "id,label";
    for (const auto& name : data.feature_names) out << ',' << name;
    out << '\n';
    char buf[40];
    for (const auto& rec : data.records) {
        require(rec.label >= 0 && rec.label < data.class_count(),
                "save_csv: record label out of range");
        out << rec.id << ',' << data.class_names[rec.label];
        for (size_t j = 0; j < rec.features.size(); ++j) {
            out << ',';
            if (!rec.missing[j]) {
                std::snprintf(buf, sizeof buf, "%.17g", rec.features[j]);
                out << buf;
            }
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

Dataset knn_impute(const Dataset& data, int k) {
    require(k >= 1, "knn_impute: k must be at least 1");
    Dataset out = data;
    if (!data.has_missing()) return out;

    int n = data.size();
    int d = data.feature_count();
    for (int j = 0; j < d; ++j) {
        bool observed = false;
        for (const auto& rec : data.records)
            if (!rec.missing[j]) {
                observed = true;
                break;
            }
        if (!observed)
            throw std::runtime_error("knn_impute: feature '" + data.feature_names[j] +
                                     "' has no observed values");
    }

    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n);
    for (int i = 0; i < n; ++i) {
        const auto& ri = data.records[i];
        bool any_missing = false;
        for (int j = 0; j < d; ++j) any_missing = any_missing || ri.missing[j];
        if (!any_missing) continue;

        for (int t = 0; t < n; ++t) {
            if (t == i) {
                dist[t] = kInf;
                continue;
            }
            const auto& rt = data.records[t];
            double sum = 0.0;
            int shared = 0;
            for (int j = 0; j < d; ++j) {
                if (ri.missing[j] || rt.missing[j]) continue;
                double diff = ri.features[j] - rt.features[j];
                sum += diff * diff;
                ++shared;
            }
            dist[t] = shared > 0 ? sum / shared : kInf;
        }

        for (int j = 0; j < d; ++j) {
            if (!ri.missing[j]) continue;
            std::vector<int> candidates;
            for (int t = 0; t < n; ++t)
                if (t != i && !data.records[t].missing[j]) candidates.push_back(t);
            std::stable_sort(candidates.begin(), candidates.end(),
                             [&](int a, int b) { return dist[a] < dist[b]; });
            int take = std::min<int>(k, static_cast<int>(candidates.size()));
            double sum = 0.0;
            for (int t = 0; t < take; ++t) sum += data.records[candidates[t]].features[j];
            out.records[i].features[j] = sum / take;
            out.records[i].missing[j] = 0;
        }
    }
    return out;
}

Scaler zscore_fit(const Dataset& data) {
    if (data.has_missing())
        throw std::runtime_error("zscore_fit: dataset still has missing values");
    require(data.size() >= 1, "zscore_fit: empty dataset");
    int n = data.size();
    int d = data.feature_count();
    Scaler s;
    s.mean.assign(d, 0.0);
    s.stddev.assign(d, 0.0);
    for (int j = 0; j < d; ++j) {
        double sum = 0.0;
        for (const auto& rec : data.records) sum += rec.features[j];
        s.mean[j] = sum / n;
    }
    if (n < 2) return s;
    for (int j = 0; j < d; ++j) {
        double sq = 0.0;
        for (const auto& rec : data.records) {
            double diff = rec.features[j] - s.mean[j];
            sq += diff * diff;
        }
        double sd = std::sqrt(sq / (n - 1));
        if (sd > 1e-12 * std::max(1.0, std::fabs(s.mean[j]))) s.stddev[j] = sd;
    }
    return s;
}

Dataset zscore_apply(const Scaler& scaler, const Dataset& data) {
    if (data.has_missing())
        throw std::runtime_error("zscore_apply: dataset still has missing values");
    require(static_cast<int>(scaler.mean.size()) == data.feature_count() &&
                scaler.mean.size() == scaler.stddev.size(),
            "zscore_apply: scaler does not match the feature count");
    Dataset out = data;
    for (auto& rec : out.records)
        for (int j = 0; j < data.feature_count(); ++j) {
            double centered = rec.features[j] - scaler.mean[j];
            rec.features[j] = scaler.stddev[j] > 0.0 ? centered / scaler.stddev[j] : 0.0;
        }
    return out;
}

namespace {

// Largest-remainder apportionment of n into three parts; ties go to the
// earlier split so the outcome is deterministic.
std::array<int, 3> apportion(int n, const std::array<double, 3>& ratios) {
    std::array<int, 3> counts;
    std::array<double, 3> frac;
    int assigned = 0;
    for (int s = 0; s < 3; ++s) {
        double quota = n * ratios[s];
        counts[s] = static_cast<int>(std::floor(quota));
        frac[s] = quota - counts[s];
        assigned += counts[s];
    }
    std::array<int, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return frac[a] > frac[b]; });
    for (int extra = 0; extra < n - assigned; ++extra) ++counts[order[extra]];
    return counts;
}

}  // namespace

SplitResult split_dataset(const Dataset& data, double train_ratio, double val_ratio,
                          double test_ratio, uint64_t seed) {
    require(train_ratio > 0.0 && val_ratio >= 0.0 && test_ratio >= 0.0,
            "split_dataset: ratios must be non-negative with a positive train share");
    require(std::fabs(train_ratio + val_ratio + test_ratio - 1.0) < 1e-9,
            "split_dataset: ratios must sum to 1");
    require(data.size() >= 1, "split_dataset: empty dataset");

    std::vector<int> order(data.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    Rng rng(seed);
    rng.shuffle(order);

    SplitResult result;
    for (Dataset* part : {&result.train, &result.val, &result.test}) {
        part->feature_names = data.feature_names;
        part->class_names = data.class_names;
    }

    std::vector<int> class_sizes(data.class_count(), 0);
    for (const auto& rec : data.records) {
        require(rec.label >= 0 && rec.label < data.class_count(),
                "split_dataset: record label out of range");
        ++class_sizes[rec.label];
    }
    result.stratified = true;
    for (int c = 0; c < data.class_count(); ++c) {
        if (class_sizes[c] > 0 && class_sizes[c] < 3) {
            std::fprintf(stderr,
                         "warning: class '%s' has only %d record(s); using an unstratified split\n",
                         data.class_names[c].c_str(), class_sizes[c]);
            result.stratified = false;
        }
    }

    std::array<double, 3> ratios = {train_ratio, val_ratio, test_ratio};
    auto assign = [&](const std::vector<int>& members) {
        auto counts = apportion(static_cast<int>(members.size()), ratios);
        Dataset* parts[3] = {&result.train, &result.val, &result.test};
        int pos = 0;
        for (int s = 0; s < 3; ++s)
            for (int t = 0; t < counts[s]; ++t) parts[s]->records.push_back(data.records[members[pos++]]);
    };

    if (result.stratified) {
        for (int c = 0; c < data.class_count(); ++c) {
            std::vector<int> members;
            for (int idx : order)
                if (data.records[idx].label == c) members.push_back(idx);
            assign(members);
        }
    } else {
        assign(order);
    }
    return result;
}

Dataset select_features(const Dataset& data, const std::vector<int>& columns) {
    require(!columns.empty(), "select_features: empty column list");
    std::set<int> seen;
    for (int c : columns) {
        require(c >= 0 && c < data.feature_count(), "select_features: column index out of range");
        require(seen.insert(c).second, "select_features: duplicate column index");
    }
    Dataset out;
    out.class_names = data.class_names;
    for (int c : columns) out.feature_names.push_back(data.feature_names[c]);
    out.records.reserve(data.records.size());
    for (const auto& rec : data.records) {
        FeatureRecord r;
        r.id = rec.id;
        r.label = rec.label;
        for (int c : columns) {
            r.features.push_back(rec.features[c]);
            r.missing.push_back(rec.missing[c]);
        }
        out.records.push_back(std::move(r));
    }
    return out;
}

uint64_t ids_fingerprint(const Dataset& data) {
    uint64_t h = kFnvBasis;
    for (const auto& rec : data.records) {
        h = fnv1a(h, rec.id.data(), rec.id.size());
        unsigned char sep = 0;
        h = fnv1a(h, &sep, 1);
    }
    return h;
}

uint64_t split_fingerprint(const SplitResult& split) {
    uint64_t h = kFnvBasis;
    for (const Dataset* part : {&split.train, &split.val, &split.test}) {
        uint64_t p = ids_fingerprint(*part);
        h = fnv1a(h, &p, sizeof p);
    }
    return h;
}

}  // namespace cn
