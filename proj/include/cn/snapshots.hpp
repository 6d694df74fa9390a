#pragma once

#include <string>
#include <vector>

#include "cn/matrix.hpp"

namespace cn {

struct SnapshotRow {
    int step = 0;
    int modality = 0;  // 0 is the noise block, 1..M the real modalities
    std::string sample_id;
    double pc1 = 0.0;
    double pc2 = 0.0;
    double explained_frac = 0.0;
    double loss_d = 0.0;
    double val_acc = 0.0;
};

// Collects 2-D projections of the representation space at chosen training
// steps. At each requested step the per-modality representations and the
// noise block (when present) are stacked into one matrix and reduced
// jointly, so the projected clouds share axes within a step.
class SnapshotExporter {
public:
    SnapshotExporter(std::vector<int> steps, std::vector<std::string> sample_ids);

    // Matches the trainer's step observer signature.
    void on_step(int step, const std::vector<Matrix>& reps, const Matrix* noise, double loss_c,
                 double loss_d, double val_acc);

    const std::vector<SnapshotRow>& rows() const { return rows_; }

    // step,modality,sample_id,pc1,pc2,explained_frac,loss_d,val_acc
    void write_csv(const std::string& path) const;

private:
    std::vector<int> steps_;
    std::vector<std::string> sample_ids_;
    std::vector<SnapshotRow> rows_;
};

}  // namespace cn
