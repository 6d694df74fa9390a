#include "cn/checkpoint.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace cn {
namespace {

constexpr char kMagic[8] = {'C', 'N', 'C', 'K', 'P', 'T', '0', '1'};

void write_u32(std::ostream& out, uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_u64(std::ostream& out, uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

uint32_t read_u32(std::istream& in, const std::string& path) {
    uint32_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
        throw std::runtime_error(path + ": truncated checkpoint");
    return v;
}

uint64_t read_u64(std::istream& in, const std::string& path) {
    uint64_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
        throw std::runtime_error(path + ": truncated checkpoint");
    return v;
}

std::string join_lines(const std::vector<std::string>& parts) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out += '\n';
        out += parts[i];
    }
    return out;
}

std::vector<std::string> split_lines(const std::string& joined) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : joined) {
        if (ch == '\n') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Matrix row_vector(const std::vector<double>& v) {
    Matrix m(1, static_cast<int>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) m(0, static_cast<int>(i)) = v[i];
    return m;
}

std::vector<double> to_vector(const Matrix& m) {
    return m.data;
}

}  // namespace

void Checkpoint::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(kMagic, sizeof kMagic);
    write_u64(out, matrices.size() + strings.size());
    for (const auto& [name, m] : matrices) {
        char kind = 0;
        out.write(&kind, 1);
        write_u32(out, static_cast<uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_u32(out, static_cast<uint32_t>(m.rows));
        write_u32(out, static_cast<uint32_t>(m.cols));
        out.write(reinterpret_cast<const char*>(m.data.data()),
                  static_cast<std::streamsize>(m.data.size() * sizeof(double)));
    }
    for (const auto& [name, s] : strings) {
        char kind = 1;
        out.write(&kind, 1);
        write_u32(out, static_cast<uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_u32(out, static_cast<uint32_t>(s.size()));
        out.write(s.data(), static_cast<std::streamsize>(s.size()));
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[8];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw std::runtime_error(path + ": not a checkpoint file");

    Checkpoint ckpt;
    uint64_t count = read_u64(in, path);
    for (uint64_t e = 0; e < count; ++e) {
        char kind = 0;
        if (!in.read(&kind, 1)) throw std::runtime_error(path + ": truncated checkpoint");
        uint32_t name_len = read_u32(in, path);
        std::string name(name_len, '\0');
        if (!in.read(name.data(), name_len))
            throw std::runtime_error(path + ": truncated checkpoint");
        if (kind == 0) {
            uint32_t rows = read_u32(in, path);
            uint32_t cols = read_u32(in, path);
            Matrix m(static_cast<int>(rows), static_cast<int>(cols));
            if (!in.read(reinterpret_cast<char*>(m.data.data()),
                         static_cast<std::streamsize>(m.data.size() * sizeof(double))))
                throw std::runtime_error(path + ": truncated checkpoint");
            ckpt.matrices.emplace(std::move(name), std::move(m));
        } else if (kind == 1) {
            uint32_t len = read_u32(in, path);
            std::string s(len, '\0');
            if (!in.read(s.data(), len)) throw std::runtime_error(path + ": truncated checkpoint");
            ckpt.strings.emplace(std::move(name), std::move(s));
        } else {
            throw std::runtime_error(path + ": unknown entry kind");
        }
    }
    return ckpt;
}

const Matrix& Checkpoint::matrix(const std::string& name) const {
    auto it = matrices.find(name);
    if (it == matrices.end())
        throw std::runtime_error("checkpoint is missing matrix '" + name + "'");
    return it->second;
}

const std::string& Checkpoint::str(const std::string& name) const {
    auto it = strings.find(name);
    if (it == strings.end())
        throw std::runtime_error("checkpoint is missing string '" + name + "'");
    return it->second;
}

namespace {

void put_dense(Checkpoint& ckpt, const std::string& prefix, const DenseLayer& dense) {
    ckpt.matrices[prefix + ".weights"] = dense.weights;
    ckpt.matrices[prefix + ".bias"] = dense.bias;
}

void get_dense(const Checkpoint& ckpt, const std::string& prefix, DenseLayer& dense) {
    const Matrix& w = ckpt.matrix(prefix + ".weights");
    const Matrix& b = ckpt.matrix(prefix + ".bias");
    if (!w.same_shape(dense.weights) || !b.same_shape(dense.bias))
        throw std::runtime_error("checkpoint shape mismatch at " + prefix);
    dense.weights = w;
    dense.bias = b;
}

void put_bn(Checkpoint& ckpt, const std::string& prefix, const BatchNormLayer& bn) {
    ckpt.matrices[prefix + ".gamma"] = bn.gamma;
    ckpt.matrices[prefix + ".beta"] = bn.beta;
    ckpt.matrices[prefix + ".running_mean"] = bn.running_mean;
    ckpt.matrices[prefix + ".running_var"] = bn.running_var;
}

void get_bn(const Checkpoint& ckpt, const std::string& prefix, BatchNormLayer& bn) {
    const Matrix& gamma = ckpt.matrix(prefix + ".gamma");
    if (!gamma.same_shape(bn.gamma))
        throw std::runtime_error("checkpoint shape mismatch at " + prefix);
    bn.gamma = gamma;
    bn.beta = ckpt.matrix(prefix + ".beta");
    bn.running_mean = ckpt.matrix(prefix + ".running_mean");
    bn.running_var = ckpt.matrix(prefix + ".running_var");
}

int parse_int(const std::string& s, const std::string& what) {
    try {
        return std::stoi(s);
    } catch (const std::exception&) {
        throw std::runtime_error("checkpoint: bad integer for " + what);
    }
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw std::runtime_error("checkpoint: bad number for " + what);
    }
}

}  // namespace

void save_model_bundle(const std::string& path, ConsensusModel& model,
                       const std::vector<std::string>& feature_names,
                       const std::vector<std::string>& class_names, const Scaler& scaler) {
    Checkpoint ckpt;
    const ModelConfig& cfg = model.config();
    ckpt.strings["meta.format"] = "1";
    ckpt.strings["meta.n_classes"] = std::to_string(model.n_classes());
    ckpt.strings["meta.hidden_dim"] = std::to_string(cfg.hidden_dim);
    ckpt.strings["meta.rep_dim"] = std::to_string(cfg.rep_dim);
    ckpt.strings["meta.leaky_slope"] = format_double(cfg.leaky_slope);
    ckpt.strings["meta.bn_epsilon"] = format_double(cfg.bn_epsilon);
    ckpt.strings["meta.bn_momentum"] = format_double(cfg.bn_momentum);
    ckpt.strings["meta.noise_enabled"] = cfg.noise_enabled ? "1" : "0";

    const ModalityPartition& p = model.partition();
    ckpt.strings["partition.count"] = std::to_string(p.group_count());
    for (int g = 0; g < p.group_count(); ++g) {
        std::string prefix = "partition." + std::to_string(g);
        ckpt.strings[prefix + ".name"] = p.groups[g].name;
        Matrix idx(1, static_cast<int>(p.groups[g].indices.size()));
        for (size_t i = 0; i < p.groups[g].indices.size(); ++i)
            idx(0, static_cast<int>(i)) = p.groups[g].indices[i];
        ckpt.matrices[prefix + ".indices"] = std::move(idx);
    }

    for (int m = 0; m < p.group_count(); ++m) {
        std::string prefix = "ephysician." + std::to_string(m);
        Mlp& net = model.ephysicians()[m];
        put_dense(ckpt, prefix + ".dense1", std::get<DenseLayer>(net.blocks[0]));
        put_bn(ckpt, prefix + ".bn", std::get<BatchNormLayer>(net.blocks[1]));
        put_dense(ckpt, prefix + ".dense2", std::get<DenseLayer>(net.blocks[3]));
    }
    put_dense(ckpt, "classifier", std::get<DenseLayer>(model.classifier().blocks[0]));
    put_dense(ckpt, "discriminator", std::get<DenseLayer>(model.discriminator().blocks[0]));

    require(feature_names.size() == static_cast<size_t>(p.total_dims),
            "save_model_bundle: feature names do not match the partition width");
    require(static_cast<int>(class_names.size()) == model.n_classes(),
            "save_model_bundle: class names do not match the model");
    require(scaler.mean.size() == feature_names.size() &&
                scaler.stddev.size() == feature_names.size(),
            "save_model_bundle: scaler does not match the feature count");
    ckpt.strings["features"] = join_lines(feature_names);
    ckpt.strings["classes"] = join_lines(class_names);
    ckpt.matrices["scaler.mean"] = row_vector(scaler.mean);
    ckpt.matrices["scaler.stddev"] = row_vector(scaler.stddev);

    ckpt.save(path);
}

ModelBundle load_model_bundle(const std::string& path) {
    Checkpoint ckpt = Checkpoint::load(path);
    if (ckpt.str("meta.format") != "1")
        throw std::runtime_error(path + ": unsupported checkpoint format");

    ModalityPartition p;
    int groups = parse_int(ckpt.str("partition.count"), "partition.count");
    int total = 0;
    for (int g = 0; g < groups; ++g) {
        std::string prefix = "partition." + std::to_string(g);
        ModalityPartition::Group group;
        group.name = ckpt.str(prefix + ".name");
        const Matrix& idx = ckpt.matrix(prefix + ".indices");
        for (double v : idx.data) group.indices.push_back(static_cast<int>(v));
        total += static_cast<int>(group.indices.size());
        p.groups.push_back(std::move(group));
    }
    p.total_dims = total;
    p.validate();

    ModelConfig cfg;
    cfg.hidden_dim = parse_int(ckpt.str("meta.hidden_dim"), "meta.hidden_dim");
    cfg.rep_dim = parse_int(ckpt.str("meta.rep_dim"), "meta.rep_dim");
    cfg.leaky_slope = parse_double(ckpt.str("meta.leaky_slope"), "meta.leaky_slope");
    cfg.bn_epsilon = parse_double(ckpt.str("meta.bn_epsilon"), "meta.bn_epsilon");
    cfg.bn_momentum = parse_double(ckpt.str("meta.bn_momentum"), "meta.bn_momentum");
    cfg.noise_enabled = ckpt.str("meta.noise_enabled") == "1";
    int n_classes = parse_int(ckpt.str("meta.n_classes"), "meta.n_classes");

    ModelBundle bundle{ConsensusModel(p, n_classes, cfg),
                       split_lines(ckpt.str("features")),
                       split_lines(ckpt.str("classes")),
                       Scaler{}};
    for (int m = 0; m < groups; ++m) {
        std::string prefix = "ephysician." + std::to_string(m);
        Mlp& net = bundle.model.ephysicians()[m];
        get_dense(ckpt, prefix + ".dense1", std::get<DenseLayer>(net.blocks[0]));
        get_bn(ckpt, prefix + ".bn", std::get<BatchNormLayer>(net.blocks[1]));
        get_dense(ckpt, prefix + ".dense2", std::get<DenseLayer>(net.blocks[3]));
    }
    get_dense(ckpt, "classifier", std::get<DenseLayer>(bundle.model.classifier().blocks[0]));
    get_dense(ckpt, "discriminator",
              std::get<DenseLayer>(bundle.model.discriminator().blocks[0]));

    bundle.scaler.mean = to_vector(ckpt.matrix("scaler.mean"));
    bundle.scaler.stddev = to_vector(ckpt.matrix("scaler.stddev"));
    if (bundle.feature_names.size() != static_cast<size_t>(p.total_dims))
        throw std::runtime_error(path + ": feature names do not match the partition width");
    if (static_cast<int>(bundle.class_names.size()) != n_classes)
        throw std::runtime_error(path + ": class names do not match the classifier");
    return bundle;
}

}  // namespace cn
