#pragma once

#include <map>
#include <string>
#include <vector>

#include "cn/dataset.hpp"
#include "cn/matrix.hpp"
#include "cn/model.hpp"

namespace cn {

// Flat binary container of named matrices and strings. Layout: the magic
// "CNCKPT01", a u64 entry count, then per entry a u8 kind (0 matrix,
// 1 string), a u32 name length and the name, and the payload: matrices as
// u32 rows, u32 cols and rows*cols f64 values, strings as u32 length and
// bytes. All integers and doubles use the host's little-endian layout.
struct Checkpoint {
    std::map<std::string, Matrix> matrices;
    std::map<std::string, std::string> strings;

    void save(const std::string& path) const;
    static Checkpoint load(const std::string& path);

    const Matrix& matrix(const std::string& name) const;
    const std::string& str(const std::string& name) const;
};

// Everything needed to score new data: the model with its partition and
// running statistics, the feature and class vocabulary, and the scaler.
struct ModelBundle {
    ConsensusModel model;
    std::vector<std::string> feature_names;
    std::vector<std::string> class_names;
    Scaler scaler;
};

void save_model_bundle(const std::string& path, ConsensusModel& model,
                       const std::vector<std::string>& feature_names,
                       const std::vector<std::string>& class_names, const Scaler& scaler);
ModelBundle load_model_bundle(const std::string& path);

}  // namespace cn
