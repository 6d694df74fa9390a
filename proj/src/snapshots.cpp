#include "cn/snapshots.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "cn/pca.hpp"

namespace cn {

SnapshotExporter::SnapshotExporter(std::vector<int> steps, std::vector<std::string> sample_ids)
    : steps_(std::move(steps)), sample_ids_(std::move(sample_ids)) {
    require(!steps_.empty(), "SnapshotExporter: no steps requested");
    for (int s : steps_) require(s >= 1, "SnapshotExporter: steps are 1-based");
    require(!sample_ids_.empty(), "SnapshotExporter: no sample ids");
}

void SnapshotExporter::on_step(int step, const std::vector<Matrix>& reps, const Matrix* noise,
                               double /*loss_c*/, double loss_d, double val_acc) {
    if (std::find(steps_.begin(), steps_.end(), step) == steps_.end()) return;
    require(!reps.empty(), "SnapshotExporter: no representations");
    int b = reps[0].rows;
    require(b == static_cast<int>(sample_ids_.size()),
            "SnapshotExporter: representation rows do not match the sample ids");

    int blocks = static_cast<int>(reps.size()) + (noise ? 1 : 0);
    Matrix stacked(blocks * b, reps[0].cols);
    int row = 0;
    auto append = [&](const Matrix& block) {
        require(block.rows == b && block.cols == reps[0].cols,
                "SnapshotExporter: block shape mismatch");
        for (int i = 0; i < block.rows; ++i)
            for (int j = 0; j < block.cols; ++j) stacked(row + i, j) = block(i, j);
        row += block.rows;
    };
    if (noise) append(*noise);
    for (const Matrix& r : reps) append(r);

    PcaResult pca = pca_top2(stacked);
    int first_modality = noise ? 0 : 1;
    for (int blk = 0; blk < blocks; ++blk) {
        for (int i = 0; i < b; ++i) {
            SnapshotRow out;
            out.step = step;
            out.modality = first_modality + blk;
            out.sample_id = sample_ids_[i];
            out.pc1 = pca.coords(blk * b + i, 0);
            out.pc2 = pca.coords(blk * b + i, 1);
            out.explained_frac = pca.explained_fraction;
            out.loss_d = loss_d;
            out.val_acc = val_acc;
            rows_.push_back(std::move(out));
        }
    }
}

void SnapshotExporter::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "step,modality,sample_id,pc1,pc2,explained_frac,loss_d,val_acc\n";
    char buf[160];
    for (const auto& r : rows_) {
        std::snprintf(buf, sizeof buf, "%d,%d,%s,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.step,
                      r.modality, r.sample_id.c_str(), r.pc1, r.pc2, r.explained_frac, r.loss_d,
                      r.val_acc);
        out << buf;
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace cn
