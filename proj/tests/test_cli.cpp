#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cn/cli.hpp"
#include "cn/dataset.hpp"
#include "cn/partition.hpp"

using namespace cn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run(std::initializer_list<std::string> args) { return cli_main(std::vector<std::string>(args)); }

}  // namespace

TEST_CASE("synth output is byte-identical for a repeated seed") {
    TempDir dir("cn_cli_synth");
    std::string a = dir.file("a.csv");
    std::string b = dir.file("b.csv");
    CHECK(run({"synth", "--out", a, "--seed", "7", "--samples", "40"}) == 0);
    CHECK(run({"synth", "--out", b, "--seed", "7", "--samples", "40"}) == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a).rfind("id,label,", 0) == 0);

    std::string c = dir.file("c.csv");
    CHECK(run({"synth", "--out", c, "--seed", "8", "--samples", "40"}) == 0);
    CHECK(slurp(a) != slurp(c));
}

TEST_CASE("synth writes a loadable modality map") {
    TempDir dir("cn_cli_map");
    std::string data = dir.file("data.csv");
    std::string map = dir.file("map.csv");
    CHECK(run({"synth", "--out", data, "--map-out", map, "--seed", "1", "--samples", "30",
               "--modalities", "2"}) == 0);
    Dataset d = load_csv(data);
    auto pairs = load_modality_map(map);
    CHECK(pairs.size() == d.feature_names.size());
    ModalityPartition p = natural_partition(d.feature_names, pairs);
    CHECK(p.group_count() == 2);
}

TEST_CASE("usage errors exit with code 1") {
    CHECK(run({"train"}) == 1);                           // --data is required
    CHECK(run({"train", "--bogus-flag", "x"}) == 1);      // unknown option
    CHECK(run({"definitely-not-a-command"}) == 1);        // unknown subcommand
    CHECK(run({}) == 1);                                  // no subcommand
    CHECK(run({"synth", "--out", "x.csv", "--samples", "-5"}) == 1);
}

TEST_CASE("runtime failures exit with code 2") {
    TempDir dir("cn_cli_rt");
    CHECK(run({"train", "--data", dir.file("nope.csv"), "--groups", "random:2"}) == 2);
    CHECK(run({"evaluate", "--model", dir.file("nope.ckpt"), "--data",
               dir.file("nope.csv")}) == 2);
}

TEST_CASE("synth, train, evaluate, and snapshots run end to end") {
    TempDir dir("cn_cli_e2e");
    std::string data = dir.file("data.csv");
    std::string map = dir.file("map.csv");
    REQUIRE(run({"synth", "--out", data, "--map-out", map, "--seed", "3", "--samples", "120",
                 "--modalities", "2", "--signal-dims", "3", "--distractor-dims", "1",
                 "--latent-dim", "2"}) == 0);

    std::string out = dir.file("run");
    REQUIRE(run({"train", "--data", data, "--modality-map", map, "--out", out, "--seed", "5",
                 "--steps", "4", "--batch", "16"}) == 0);
    CHECK(fs::exists(out + "/model.ckpt"));
    CHECK(fs::exists(out + "/history.csv"));
    std::string history = slurp(out + "/history.csv");
    CHECK(history.rfind("step,L_C_train,L_D_train,val_accuracy,stop_reason", 0) == 0);

    std::string preds = dir.file("preds.csv");
    REQUIRE(run({"evaluate", "--model", out + "/model.ckpt", "--data", data, "--out",
                 preds}) == 0);
    std::string pred_body = slurp(preds);
    CHECK(pred_body.rfind("id,label,predicted", 0) == 0);
    CHECK(std::count(pred_body.begin(), pred_body.end(), '\n') == 121);

    std::string snap = dir.file("snaprun");
    REQUIRE(run({"snapshots", "--data", data, "--modality-map", map, "--out", snap, "--seed",
                 "5", "--steps", "4", "--batch", "16", "--tol", "1e-300", "--snap-steps", "1,3"}) == 0);
    std::string snaps = slurp(snap + "/snapshots.csv");
    CHECK(snaps.rfind("step,modality,sample_id,pc1,pc2,explained_frac,loss_d,val_acc", 0) == 0);
    // 120 samples -> 72 train rows; two steps, noise + 2 modalities each
    CHECK(std::count(snaps.begin(), snaps.end(), '\n') == 1 + 2 * 3 * 72);
    CHECK(snaps.find("\n1,0,") != std::string::npos);

    std::string snap2 = dir.file("snaprun2");
    REQUIRE(run({"snapshots", "--data", data, "--modality-map", map, "--out", snap2, "--seed",
                 "5", "--steps", "4", "--batch", "16", "--tol", "1e-300", "--snap-steps", "1,3",
                 "--no-noise"}) == 0);
    std::string snaps2 = slurp(snap2 + "/snapshots.csv");
    CHECK(snaps2.find("\n1,0,") == std::string::npos);
    CHECK(std::count(snaps2.begin(), snaps2.end(), '\n') == 1 + 2 * 2 * 72);
}

TEST_CASE("training twice with one seed reproduces the artifacts exactly") {
    TempDir dir("cn_cli_repro");
    std::string data = dir.file("data.csv");
    REQUIRE(run({"synth", "--out", data, "--seed", "9", "--samples", "80", "--modalities", "2",
                 "--signal-dims", "3", "--distractor-dims", "1", "--latent-dim", "2"}) == 0);
    std::string a = dir.file("a");
    std::string b = dir.file("b");
    for (const std::string& out : {a, b})
        REQUIRE(run({"train", "--data", data, "--groups", "random:2", "--out", out, "--seed",
                     "11", "--steps", "3", "--batch", "16"}) == 0);
    CHECK(slurp(a + "/history.csv") == slurp(b + "/history.csv"));
    CHECK(slurp(a + "/model.ckpt") == slurp(b + "/model.ckpt"));
}

TEST_CASE("evaluate refuses data whose features do not match the model") {
    TempDir dir("cn_cli_mismatch");
    std::string data = dir.file("data.csv");
    REQUIRE(run({"synth", "--out", data, "--seed", "2", "--samples", "60", "--modalities", "2",
                 "--signal-dims", "2", "--distractor-dims", "1", "--latent-dim", "2"}) == 0);
    std::string out = dir.file("run");
    REQUIRE(run({"train", "--data", data, "--groups", "random:2", "--out", out, "--seed", "1",
                 "--steps", "2", "--batch", "8"}) == 0);

    std::string other = dir.file("other.csv");
    REQUIRE(run({"synth", "--out", other, "--seed", "2", "--samples", "60", "--modalities", "2",
                 "--signal-dims", "3", "--distractor-dims", "1", "--latent-dim", "2"}) == 0);
    CHECK(run({"evaluate", "--model", out + "/model.ckpt", "--data", other,
               "--out", dir.file("p.csv")}) == 2);
}

TEST_CASE("trials writes per-trial and summary tables") {
    TempDir dir("cn_cli_trials");
    std::string data = dir.file("data.csv");
    REQUIRE(run({"synth", "--out", data, "--seed", "4", "--samples", "100", "--modalities", "2",
                 "--signal-dims", "3", "--distractor-dims", "1", "--latent-dim", "2"}) == 0);
    std::string out = dir.file("trials");
    REQUIRE(run({"trials", "--data", data, "--groups", "random:2", "--out", out, "--trials",
                 "2", "--seed", "21", "--steps", "3", "--batch", "16", "--jobs", "2"}) == 0);
    std::string summary = slurp(out + "/summary.csv");
    CHECK(summary.rfind("cell,metric,mean,std,n", 0) == 0);
    std::string trials = slurp(out + "/trials.csv");
    CHECK(std::count(trials.begin(), trials.end(), '\n') == 3);
    CHECK(trials.find(",ok,") != std::string::npos);
}

TEST_CASE("ablate runs a two-cell study end to end") {
    TempDir dir("cn_cli_ablate");
    std::string data = dir.file("data.csv");
    std::string map = dir.file("map.csv");
    REQUIRE(run({"synth", "--out", data, "--map-out", map, "--seed", "6", "--samples", "100",
                 "--modalities", "2", "--signal-dims", "3", "--distractor-dims", "1",
                 "--latent-dim", "2"}) == 0);
    std::string out = dir.file("study");
    REQUIRE(run({"ablate", "--study", "noise", "--data", data, "--modality-map", map, "--out",
                 out, "--trials", "2", "--seed", "31", "--steps", "3", "--batch", "16",
                 "--jobs", "2"}) == 0);
    std::string summary = slurp(out + "/summary.csv");
    CHECK(summary.find("cn_noise,") != std::string::npos);
    CHECK(summary.find("cn_nonoise,") != std::string::npos);
}
