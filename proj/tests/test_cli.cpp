#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "autolabel/dataset.hpp"
#include "autolabel/io.hpp"
#include "support/synthetic.hpp"
#include "support/testutil.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

using namespace autolabel;
using testsupport::TempDir;

namespace {

std::string binary_path() {
    const char* env = std::getenv("AUTOLABEL_BIN");
    REQUIRE_MESSAGE(env != nullptr, "AUTOLABEL_BIN must point at the CLI binary");
    return env;
}

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

RunResult run_cli(const TempDir& dir, const std::string& args) {
    const auto out_path = dir.file("stdout.txt");
    const auto err_path = dir.file("stderr.txt");
    const std::string command = binary_path() + " " + args + " >" + out_path + " 2>" + err_path;
    const int status = std::system(command.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = read_text_file(out_path);
    result.err = read_text_file(err_path);
    return result;
}

/// Small but non-trivial collection written in UCR layout.
void write_benchmark(const TempDir& dir, const std::string& train_name, const std::string& test_name) {
    write_ucr_tsv(testsupport::make_synthetic3(12, 32, 5), dir.file(train_name));
    write_ucr_tsv(testsupport::make_synthetic3(8, 32, 6), dir.file(test_name));
}

std::string fast_flags(const TempDir& dir, const std::string& out_subdir) {
    return "--train " + dir.file("train.tsv") + " --output-dir " + dir.file(out_subdir) +
           " --rep-fraction 0.25 --compact-length 6 --aecs-epochs 20 --vae-epochs 15 --max-iterations 3"
           " --seed 42";
}

}  // namespace

TEST_CASE("label writes its artifact set and exits 0") {
    TempDir dir("cli");
    write_benchmark(dir, "train.tsv", "test.tsv");
    const auto result = run_cli(dir, "label " + fast_flags(dir, "out"));
    CAPTURE(result.err);
    REQUIRE(result.exit_code == 0);
    CHECK(std::filesystem::exists(dir.file("out/labels.csv")));
    CHECK(std::filesystem::exists(dir.file("out/iterations.json")));
    CHECK(std::filesystem::exists(dir.file("out/embedding.csv")));
    CHECK(std::filesystem::exists(dir.file("out/run_meta.json")));
    CHECK(result.out.find("iteration 1") != std::string::npos);

    SUBCASE("run meta echoes the resolved config") {
        const auto meta = nlohmann::json::parse(read_text_file(dir.file("out/run_meta.json")));
        CHECK(meta["seed"] == 42);
        CHECK(meta["compact_length"] == 6);
        CHECK(meta["command"] == "label");
        CHECK(meta["linkage"] == "average");
    }
    SUBCASE("labels.csv speaks the original label vocabulary") {
        std::ifstream in(dir.file("out/labels.csv"));
        std::string header, first;
        std::getline(in, header);
        std::getline(in, first);
        CHECK(header == "instance_index,label");
        CHECK(first.rfind("0,", 0) == 0);
    }
}

TEST_CASE("identical configs produce byte-identical outputs") {
    TempDir dir("cli");
    write_benchmark(dir, "train.tsv", "test.tsv");
    const auto first = run_cli(dir, "label " + fast_flags(dir, "out_a"));
    REQUIRE(first.exit_code == 0);
    const auto second = run_cli(dir, "label " + fast_flags(dir, "out_b"));
    REQUIRE(second.exit_code == 0);
    CHECK(read_text_file(dir.file("out_a/labels.csv")) == read_text_file(dir.file("out_b/labels.csv")));
    CHECK(read_text_file(dir.file("out_a/iterations.json")) ==
          read_text_file(dir.file("out_b/iterations.json")));
    CHECK(read_text_file(dir.file("out_a/embedding.csv")) ==
          read_text_file(dir.file("out_b/embedding.csv")));
}

TEST_CASE("config file supplies defaults that flags override") {
    TempDir dir("cli");
    write_benchmark(dir, "train.tsv", "test.tsv");
    write_text_file(dir.file("run.ini"),
                    "[label]\ntrain=" + dir.file("train.tsv") +
                        "\nrep-fraction=0.25\ncompact-length=6\naecs-epochs=20\nvae-epochs=15\n"
                        "max-iterations=3\nseed=11\n");
    const auto result = run_cli(dir, "--config " + dir.file("run.ini") + " label --output-dir " +
                                         dir.file("cfg") + " --seed 42");
    CAPTURE(result.err);
    REQUIRE(result.exit_code == 0);
    const auto meta = nlohmann::json::parse(read_text_file(dir.file("cfg/run_meta.json")));
    CHECK(meta["rep_fraction"] == 0.25);  // from the file
    CHECK(meta["seed"] == 42);            // flag wins
}

TEST_CASE("missing train file exits 2 and names the path") {
    TempDir dir("cli");
    const auto result = run_cli(dir, "label --train " + dir.file("absent.tsv"));
    CHECK(result.exit_code == 2);
    CHECK(result.err.find("absent.tsv") != std::string::npos);
}

TEST_CASE("over-complete bottleneck exits 2 before training") {
    TempDir dir("cli");
    write_benchmark(dir, "train.tsv", "test.tsv");
    const auto result =
        run_cli(dir, "label --train " + dir.file("train.tsv") + " --compact-length 32 --rep-fraction 0.25");
    CHECK(result.exit_code == 2);
    CHECK(result.err.find("under-complete") != std::string::npos);
}

TEST_CASE("evaluate") {
    TempDir dir("cli");
    write_benchmark(dir, "train.tsv", "test.tsv");

    SUBCASE("inline labeling produces a full report") {
        const auto result = run_cli(dir, "evaluate " + fast_flags(dir, "out") + " --test " +
                                             dir.file("test.tsv") + " --classifier knn --knn-k 1");
        CAPTURE(result.err);
        REQUIRE(result.exit_code == 0);
        const auto report = nlohmann::json::parse(read_text_file(dir.file("out/report.json")));
        CHECK(report.contains("label_accuracy"));
        REQUIRE(report["classifiers"].size() == 1);
        CHECK(report["classifiers"][0]["name"] == "knn");
        CHECK(report["classifiers"][0]["k_neighbors"] == 1);
    }
    SUBCASE("a labels file shorter than the train set exits 3") {
        write_text_file(dir.file("short.csv"), "instance_index,label\n0,0\n1,1\n");
        const auto result = run_cli(dir, "evaluate " + fast_flags(dir, "out2") + " --test " +
                                             dir.file("test.tsv") + " --labels " + dir.file("short.csv"));
        CHECK(result.exit_code == 3);
        CHECK(result.err.find("covers") != std::string::npos);
    }
    SUBCASE("missing test file exits 2") {
        const auto result = run_cli(dir, "evaluate " + fast_flags(dir, "out3"));
        CHECK(result.exit_code == 2);
    }
}

TEST_CASE("encode dumps the compact matrix and round-trips its checkpoint") {
    TempDir dir("cli");
    write_benchmark(dir, "train.tsv", "test.tsv");
    const auto result = run_cli(dir, "encode " + fast_flags(dir, "enc") + " --save-model " +
                                         dir.file("model.ckpt"));
    CAPTURE(result.err);
    REQUIRE(result.exit_code == 0);
    REQUIRE(std::filesystem::exists(dir.file("enc/aecs.csv")));
    const auto csv = read_text_file(dir.file("enc/aecs.csv"));
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 36);

    const auto reused = run_cli(dir, "encode " + fast_flags(dir, "enc2") + " --load-model " +
                                         dir.file("model.ckpt"));
    CAPTURE(reused.err);
    REQUIRE(reused.exit_code == 0);
    CHECK(read_text_file(dir.file("enc2/aecs.csv")) == csv);
}

TEST_CASE("cluster reports Hubert scores per measure") {
    TempDir dir("cli");
    write_benchmark(dir, "train.tsv", "test.tsv");
    const auto result = run_cli(dir, "cluster " + fast_flags(dir, "clu") + " --dendrogram");
    CAPTURE(result.err);
    REQUIRE(result.exit_code == 0);
    const auto hubert = nlohmann::json::parse(read_text_file(dir.file("clu/hubert.json")));
    CHECK(hubert.contains("chebyshev"));
    CHECK(hubert.contains("manhattan"));
    CHECK(hubert.contains("mahalanobis"));
    CHECK(hubert["clusters"] == 3);
    const std::string best = hubert["best"];
    CHECK((best == "chebyshev" || best == "manhattan" || best == "mahalanobis"));
    CHECK(std::filesystem::exists(dir.file("clu/clusters.csv")));
    CHECK(std::filesystem::exists(dir.file("clu/dendrogram.json")));
}
