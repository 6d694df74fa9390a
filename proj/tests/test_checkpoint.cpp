#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "cn/checkpoint.hpp"
#include "cn/snapshots.hpp"
#include "cn/train.hpp"
#include "gradcheck.hpp"

using namespace cn;
using testutil::random_matrix;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(std::string p) : path(std::move(p)) {}
    ~TempFile() { std::remove(path.c_str()); }
};

ModalityPartition make_partition() {
    ModalityPartition p;
    p.total_dims = 5;
    p.groups = {{"labs", {0, 2, 4}}, {"vitals", {1, 3}}};
    return p;
}

}  // namespace

TEST_CASE("raw checkpoint containers round trip bit for bit") {
    Rng rng(3);
    Checkpoint ck;
    ck.matrices["w"] = random_matrix(3, 4, rng);
    ck.matrices["empty"] = Matrix(0, 2);
    ck.strings["note"] = "line one\nline two";
    TempFile f("ckpt_raw.bin");
    ck.save(f.path);

    Checkpoint back = Checkpoint::load(f.path);
    CHECK(back.matrices.size() == 2);
    CHECK(back.matrix("w").data == ck.matrix("w").data);
    CHECK(back.matrix("empty").rows == 0);
    CHECK(back.matrix("empty").cols == 2);
    CHECK(back.str("note") == "line one\nline two");
    CHECK_THROWS_WITH_AS(back.matrix("absent"), doctest::Contains("absent"),
                         std::runtime_error);
    CHECK_THROWS_AS(back.str("w"), std::runtime_error);
}

TEST_CASE("corrupt checkpoint files fail loudly") {
    TempFile f("ckpt_bad.bin");
    {
        std::ofstream out(f.path, std::ios::binary);
        out << "NOTMAGIC" << std::string(16, '\0');
    }
    CHECK_THROWS_WITH_AS(Checkpoint::load(f.path), doctest::Contains("not a checkpoint"),
                         std::runtime_error);

    Rng rng(4);
    Checkpoint ck;
    ck.matrices["w"] = random_matrix(8, 8, rng);
    TempFile whole("ckpt_whole.bin");
    ck.save(whole.path);
    std::ifstream in(whole.path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    TempFile cut("ckpt_cut.bin");
    {
        std::ofstream out(cut.path, std::ios::binary);
        out.write(bytes.data(), static_cast<long>(bytes.size() / 2));
    }
    CHECK_THROWS_AS(Checkpoint::load(cut.path), std::runtime_error);

    CHECK_THROWS_AS(Checkpoint::load("ckpt_missing_file.bin"), std::runtime_error);
}

TEST_CASE("a trained model bundle restores to bit-identical predictions") {
    ModalityPartition p = make_partition();
    ConsensusModel model(p, 3);
    Rng rng(11);
    model.init(rng);

    // train briefly so running statistics and all parameter tensors move
    Matrix x = random_matrix(30, 5, rng);
    std::vector<int> y = testutil::random_labels(30, 3, rng);
    TrainConfig cfg;
    cfg.max_steps = 3;
    cfg.batch_size = 10;
    Trainer trainer(model, cfg, rng);
    trainer.run(x, y, Matrix(0, 5), {});

    Scaler scaler;
    scaler.mean = {0.1, 0.2, 0.3, 0.4, 0.5};
    scaler.stddev = {1.0, 2.0, 3.0, 0.0, 5.0};

    TempFile f("ckpt_bundle.bin");
    save_model_bundle(f.path, model, {"a", "b", "c", "d", "e"}, {"x", "y", "z"}, scaler);
    ModelBundle bundle = load_model_bundle(f.path);

    CHECK(bundle.feature_names == std::vector<std::string>{"a", "b", "c", "d", "e"});
    CHECK(bundle.class_names == std::vector<std::string>{"x", "y", "z"});
    CHECK(bundle.scaler.mean == scaler.mean);
    CHECK(bundle.scaler.stddev == scaler.stddev);
    CHECK(bundle.model.partition().groups[0].name == "labs");
    CHECK(bundle.model.partition().groups[1].indices == std::vector<int>{1, 3});
    CHECK(bundle.model.config().noise_enabled == model.config().noise_enabled);

    Matrix probe = random_matrix(12, 5, rng);
    CHECK(bundle.model.predict(probe) == model.predict(probe));
    Matrix pa = model.class_probabilities(probe);
    Matrix pb = bundle.model.class_probabilities(probe);
    CHECK(pa.data == pb.data);  // running stats restored exactly

    // a representative running statistic really is nonzero after training
    const auto& bn = std::get<BatchNormLayer>(bundle.model.ephysicians()[0].blocks[1]);
    bool moved = false;
    for (double v : bn.running_mean.data) moved |= v != 0.0;
    CHECK(moved);
}

TEST_CASE("bundle loading rejects a missing key and a reshaped tensor") {
    ModalityPartition p = make_partition();
    ConsensusModel model(p, 2);
    Rng rng(12);
    model.init(rng);
    Scaler scaler;
    scaler.mean.assign(5, 0.0);
    scaler.stddev.assign(5, 1.0);

    TempFile f("ckpt_tamper.bin");
    save_model_bundle(f.path, model, {"a", "b", "c", "d", "e"}, {"n", "p"}, scaler);

    Checkpoint ck = Checkpoint::load(f.path);
    REQUIRE(ck.matrices.count("classifier.weights") == 1);
    ck.matrices.erase("classifier.weights");
    TempFile missing("ckpt_missing_key.bin");
    ck.save(missing.path);
    CHECK_THROWS_AS(load_model_bundle(missing.path), std::runtime_error);

    Checkpoint reshaped = Checkpoint::load(f.path);
    reshaped.matrices["classifier.weights"] = Matrix(1, 1, 0.5);
    TempFile bad("ckpt_bad_shape.bin");
    reshaped.save(bad.path);
    CHECK_THROWS_AS(load_model_bundle(bad.path), std::runtime_error);
}

TEST_CASE("snapshot export stacks noise and modalities through a shared projection") {
    SnapshotExporter exporter({1, 2}, {"s1", "s2", "s3", "s4"});
    Rng rng(13);
    std::vector<Matrix> reps = {random_matrix(4, 6, rng), random_matrix(4, 6, rng)};
    Matrix noise = random_matrix(4, 6, rng);

    exporter.on_step(1, reps, &noise, 0.9, 1.1, 0.5);
    exporter.on_step(5, reps, &noise, 0.8, 1.0, 0.6);  // unlisted, skipped
    exporter.on_step(2, reps, nullptr, 0.7, 0.9, 0.7);

    TempFile f("snap.csv");
    exporter.write_csv(f.path);
    std::ifstream in(f.path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "step,modality,sample_id,pc1,pc2,explained_frac,loss_d,val_acc");
    std::vector<std::string> rows;
    while (std::getline(in, line))
        if (!line.empty()) rows.push_back(line);
    // step 1: noise + two modalities, step 2: two modalities
    REQUIRE(rows.size() == 3 * 4 + 2 * 4);
    CHECK(rows[0].substr(0, 7) == "1,0,s1,");
    CHECK(rows[4].substr(0, 7) == "1,1,s1,");
    CHECK(rows[12].substr(0, 7) == "2,1,s1,");

    CHECK_THROWS_AS(SnapshotExporter({}, {"s1"}), std::invalid_argument);
    CHECK_THROWS_AS(SnapshotExporter({1}, {}), std::invalid_argument);
}
