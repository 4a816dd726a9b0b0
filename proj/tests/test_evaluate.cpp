#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "autolabel/evaluate.hpp"
#include "autolabel/io.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"
#include "support/testutil.hpp"

#include <cmath>
#include <fstream>

using namespace autolabel;
using testsupport::TempDir;

namespace {

TimeSeriesDataset from_rows(const std::vector<std::vector<double>>& rows) {
    TimeSeriesDataset ds;
    ds.name = "rows";
    for (const auto& row : rows) {
        TimeSeries instance;
        instance.values.resize(static_cast<Eigen::Index>(row.size()), 1);
        for (std::size_t t = 0; t < row.size(); ++t) {
            instance.values(static_cast<Eigen::Index>(t), 0) = row[t];
        }
        ds.instances.push_back(std::move(instance));
    }
    return ds;
}

}  // namespace

TEST_CASE("knn basics") {
    const auto train = from_rows({{0, 0, 0}, {1, 1, 1}, {2, 2, 2}});
    const std::vector<int> labels = {0, 1, 1};

    SUBCASE("a zero-distance neighbor wins at k=1") {
        const auto test = from_rows({{1, 1, 1}});
        CHECK(knn_classify(train, labels, test, 1) == std::vector<int>{1});
    }
    SUBCASE("majority of three neighbors") {
        const auto test = from_rows({{1.4, 1.4, 1.4}});
        CHECK(knn_classify(train, labels, test, 3) == std::vector<int>{1});
    }
    SUBCASE("vote ties go to the smallest label") {
        const auto pair_train = from_rows({{0, 0}, {2, 2}});
        const auto test = from_rows({{1, 1}});
        CHECK(knn_classify(pair_train, {1, 0}, test, 2) == std::vector<int>{0});
    }
    SUBCASE("empty training set is a contract error") {
        TimeSeriesDataset empty;
        CHECK_THROWS_AS(knn_classify(empty, {}, train, 1), ContractError);
    }
    SUBCASE("variable lengths are zero-padded") {
        const auto ragged_train = from_rows({{0, 0}, {5, 5, 5, 5}});
        const auto test = from_rows({{0, 0, 0}});
        CHECK(knn_classify(ragged_train, {0, 1}, test, 1) == std::vector<int>{0});
    }
}

TEST_CASE("knn matches the exhaustive-scan reference on random data") {
    const auto train = testsupport::make_random_dataset(30, 16, 1, 91);
    const auto test = testsupport::make_random_dataset(12, 16, 1, 92);
    std::vector<int> labels(30);
    Rng rng(5);
    for (auto& label : labels) {
        label = static_cast<int>(rng.below(3));
    }
    const auto mine = knn_classify(train, labels, test, 1);
    const auto reference =
        testsupport::oracle_nearest_neighbor(testsupport::to_grid(to_feature_rows(train, 16)), labels,
                                             testsupport::to_grid(to_feature_rows(test, 16)));
    CHECK(mine == reference);
}

TEST_CASE("decision tree basics") {
    SUBCASE("perfectly separable single feature trains to accuracy 1.0") {
        const auto train = from_rows({{0.0, 0.0}, {0.1, 0.0}, {5.0, 0.0}, {5.1, 0.0}});
        const std::vector<int> labels = {0, 0, 1, 1};
        const auto predictions = decision_tree_classify(train, labels, train, 3);
        CHECK(predictions == labels);
    }
    SUBCASE("uniform labels produce a constant predictor") {
        const auto train = from_rows({{0.0, 1.0}, {2.0, 3.0}});
        const auto test = from_rows({{9.0, 9.0}});
        CHECK(decision_tree_classify(train, {1, 1}, test, 3) == std::vector<int>{1});
    }
    SUBCASE("xor needs depth 2 and gets it") {
        Matrix features(4, 2);
        features << 0, 0, 0, 1, 1, 0, 1, 1;
        const std::vector<int> labels = {0, 1, 1, 0};
        const auto tree = fit_decision_tree(features, labels, 2, 2);
        CHECK(decision_tree_predict(tree, features) == labels);
    }
    SUBCASE("longer test series are truncated to the train length") {
        const auto train = from_rows({{0.0, 0.0}, {5.0, 5.0}});
        const auto test = from_rows({{5.0, 5.0, 99.0, 99.0}});
        CHECK(decision_tree_classify(train, {0, 1}, test, 2) == std::vector<int>{1});
    }
}

TEST_CASE("classifiers are deterministic") {
    const auto train = testsupport::make_random_dataset(25, 12, 1, 17);
    const auto test = testsupport::make_random_dataset(10, 12, 1, 18);
    std::vector<int> labels(25);
    Rng rng(1);
    for (auto& label : labels) {
        label = static_cast<int>(rng.below(2));
    }
    CHECK(knn_classify(train, labels, test, 3) == knn_classify(train, labels, test, 3));
    CHECK(decision_tree_classify(train, labels, test, 6) ==
          decision_tree_classify(train, labels, test, 6));
}

TEST_CASE("evaluate_pipeline") {
    auto train = testsupport::make_synthetic3(10, 24, 31);
    auto test = testsupport::make_synthetic3(15, 24, 32);

    SUBCASE("generated == truth gives gap exactly 0 and label accuracy 1") {
        LabelVector generated{*train.labels, 1};
        const auto report = evaluate_pipeline(train, test, generated, *train.labels);
        CHECK(report.label_accuracy == 1.0);
        REQUIRE(report.classifiers.size() == 2);
        for (const auto& score : report.classifiers) {
            CHECK(score.gap == 0.0);
            CHECK(score.accuracy_generated == score.accuracy_true);
        }
    }
    SUBCASE("uniform random labels score near chance on a balanced test set") {
        double knn_total = 0.0, dt_total = 0.0;
        const int trials = 20;
        for (int trial = 0; trial < trials; ++trial) {
            Rng rng(derive_seed(1000, "random-labels", trial));
            LabelVector generated;
            generated.labels.resize(static_cast<std::size_t>(train.size()));
            for (auto& label : generated.labels) {
                label = static_cast<int>(rng.below(3));
            }
            const auto report = evaluate_pipeline(train, test, generated, *train.labels);
            knn_total += report.classifiers[0].accuracy_generated;
            dt_total += report.classifiers[1].accuracy_generated;
        }
        CHECK(std::abs(knn_total / trials - 1.0 / 3.0) < 0.1);
        CHECK(std::abs(dt_total / trials - 1.0 / 3.0) < 0.1);
    }
    SUBCASE("length mismatch is a contract error") {
        LabelVector generated{{0, 1}, 1};
        CHECK_THROWS_AS(evaluate_pipeline(train, test, generated, *train.labels), ContractError);
    }
    SUBCASE("classifier subset is honored") {
        EvaluateOptions options;
        options.classifiers = {"knn"};
        LabelVector generated{*train.labels, 1};
        const auto report = evaluate_pipeline(train, test, generated, *train.labels, options);
        REQUIRE(report.classifiers.size() == 1);
        CHECK(report.classifiers[0].name == "knn");
    }
}

TEST_CASE("report JSON round trips to an equal document") {
    EvaluationReport report;
    report.dataset = "synthetic3";
    report.rep_fraction = 0.1;
    report.label_accuracy = 0.9666667;
    report.iteration_log = "out/iterations.json";
    report.classifiers = {{"knn", 1, 0, 0.85, 0.9, 0.05}, {"dt", 0, 10, 0.8, 0.82, 0.02}};

    const auto text = report_json(report);
    const auto parsed = report_from_json(text);
    CHECK(report_json(parsed) == text);
    CHECK(parsed.dataset == "synthetic3");
    CHECK(parsed.classifiers.size() == 2);
    CHECK(parsed.classifiers[0].knn_k == 1);
    CHECK(parsed.classifiers[1].max_depth == 10);
    CHECK(parsed.label_accuracy == doctest::Approx(0.966667));
    CHECK_THROWS_AS(report_from_json("not json"), FormatError);
}

TEST_CASE("pca") {
    SUBCASE("identical rows collapse to a single point") {
        Matrix X = Matrix::Ones(6, 4) * 2.5;
        const auto result = pca(X, 2);
        CHECK(result.scores.cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("rank-1 data has a zero second coordinate") {
        Vector direction(3);
        direction << 1.0, 2.0, -1.0;
        Matrix X(5, 3);
        for (int i = 0; i < 5; ++i) {
            X.row(i) = (0.5 * i) * direction.transpose();
        }
        const auto result = pca(X, 2);
        CHECK(result.scores.col(1).cwiseAbs().maxCoeff() < 1e-9);
    }
    SUBCASE("full-rank reconstruction returns the input") {
        const Matrix X = testsupport::make_random_embeddings(50, 12, 123);
        const auto result = pca(X, 12);
        const Matrix reconstructed =
            (result.scores * result.components.transpose()).rowwise() + result.mean.transpose();
        CHECK((reconstructed - X).cwiseAbs().maxCoeff() < 1e-9);
    }
    SUBCASE("sign convention pins the first nonzero loading positive") {
        const Matrix X = testsupport::make_random_embeddings(20, 4, 7);
        const auto result = pca(X, 4);
        for (int c = 0; c < 4; ++c) {
            for (int i = 0; i < 4; ++i) {
                const double value = result.components(i, c);
                if (std::abs(value) > 1e-12) {
                    CHECK(value > 0.0);
                    break;
                }
            }
        }
    }
}

TEST_CASE("2-D embedding export") {
    TempDir dir("evaluate");
    const Matrix X = testsupport::make_random_embeddings(8, 5, 3);
    const std::vector<int> labels = {0, 1, 2, 0, 1, 2, 0, 1};
    const auto path = dir.file("embedding.csv");
    export_embedding_2d(X, labels, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "x,y,label");
    int rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) {
            ++rows;
        }
    }
    CHECK(rows == 8);
    CHECK_THROWS_AS(export_embedding_2d(X, {0, 1}, path), ContractError);
}
