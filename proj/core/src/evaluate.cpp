#include "autolabel/evaluate.hpp"

#include "autolabel/io.hpp"
#include "autolabel/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace autolabel {

namespace {

using nlohmann::json;

int majority_label(const std::vector<int>& counts) {
    int best = 0;
    for (std::size_t c = 1; c < counts.size(); ++c) {
        if (counts[c] > counts[static_cast<std::size_t>(best)]) {
            best = static_cast<int>(c);
        }
    }
    return best;
}

double gini_impurity(const std::vector<int>& counts, int total) {
    if (total == 0) {
        return 0.0;
    }
    double impurity = 1.0;
    for (const int count : counts) {
        const double fraction = static_cast<double>(count) / total;
        impurity -= fraction * fraction;
    }
    return impurity;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        hits += (predicted[i] == truth[i]) ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

}  // namespace

Matrix to_feature_rows(const TimeSeriesDataset& dataset, int length) {
    const int channels = dataset.channels();
    Matrix rows = Matrix::Zero(dataset.size(), static_cast<Eigen::Index>(length) * channels);
    for (int i = 0; i < dataset.size(); ++i) {
        const auto& values = dataset.instances[static_cast<std::size_t>(i)].values;
        const auto copy = std::min<Eigen::Index>(values.rows(), length);
        for (Eigen::Index c = 0; c < channels; ++c) {
            rows.block(i, c * length, 1, copy) = values.col(c).head(copy).transpose();
        }
    }
    return rows;
}

std::vector<int> knn_classify(const TimeSeriesDataset& train, const std::vector<int>& train_labels,
                              const TimeSeriesDataset& test, int k_neighbors) {
    if (train.size() == 0) {
        throw ContractError("knn_classify: empty training set");
    }
    if (static_cast<int>(train_labels.size()) != train.size()) {
        throw ContractError("knn_classify: one label per training instance required");
    }
    if (train.channels() != test.channels()) {
        throw ShapeError("knn_classify: train and test channel counts differ");
    }
    if (k_neighbors < 1) {
        throw ConfigError("knn_classify: k must be at least 1");
    }

    const int length = std::max(train.max_length(), test.max_length());
    const Matrix train_rows = to_feature_rows(train, length);
    const Matrix test_rows = to_feature_rows(test, length);
    const int k = std::min(k_neighbors, train.size());
    const int class_count = 1 + *std::max_element(train_labels.begin(), train_labels.end());

    std::vector<int> predictions(static_cast<std::size_t>(test.size()), 0);
    parallel_for(static_cast<std::size_t>(test.size()), [&](std::size_t i) {
        std::vector<std::pair<double, int>> neighbors(static_cast<std::size_t>(train.size()));
        for (int j = 0; j < train.size(); ++j) {
            neighbors[static_cast<std::size_t>(j)] = {
                (train_rows.row(j) - test_rows.row(static_cast<Eigen::Index>(i))).squaredNorm(), j};
        }
        std::partial_sort(neighbors.begin(), neighbors.begin() + k, neighbors.end());
        std::vector<int> votes(static_cast<std::size_t>(class_count), 0);
        for (int v = 0; v < k; ++v) {
            ++votes[static_cast<std::size_t>(
                train_labels[static_cast<std::size_t>(neighbors[static_cast<std::size_t>(v)].second)])];
        }
        predictions[i] = majority_label(votes);
    });
    return predictions;
}

namespace {

struct TreeBuilder {
    const Matrix& features;
    const std::vector<int>& labels;
    int class_count;
    int max_depth;
    DecisionTree tree;

    int build(std::vector<int>& samples, int depth) {
        std::vector<int> counts(static_cast<std::size_t>(class_count), 0);
        for (const int s : samples) {
            ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(s)])];
        }
        const int majority = majority_label(counts);
        const bool pure = counts[static_cast<std::size_t>(majority)] == static_cast<int>(samples.size());
        if (pure || depth >= max_depth || samples.size() < 2) {
            return make_leaf(majority);
        }

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_score = std::numeric_limits<double>::infinity();
        const int total = static_cast<int>(samples.size());

        std::vector<std::pair<double, int>> ordered(samples.size());
        for (int feature = 0; feature < static_cast<int>(features.cols()); ++feature) {
            for (std::size_t i = 0; i < samples.size(); ++i) {
                ordered[i] = {features(samples[i], feature), labels[static_cast<std::size_t>(samples[i])]};
            }
            std::sort(ordered.begin(), ordered.end());
            if (ordered.front().first == ordered.back().first) {
                continue;  // constant feature in this node
            }
            std::vector<int> left_counts(static_cast<std::size_t>(class_count), 0);
            std::vector<int> right_counts = counts;
            int left_total = 0;
            for (std::size_t i = 0; i + 1 < ordered.size(); ++i) {
                ++left_counts[static_cast<std::size_t>(ordered[i].second)];
                --right_counts[static_cast<std::size_t>(ordered[i].second)];
                ++left_total;
                if (ordered[i].first == ordered[i + 1].first) {
                    continue;
                }
                const double threshold = 0.5 * (ordered[i].first + ordered[i + 1].first);
                const double score = (left_total * gini_impurity(left_counts, left_total) +
                                      (total - left_total) * gini_impurity(right_counts, total - left_total)) /
                                     total;
                // Strict < with ascending feature/threshold scan order keeps
                // the lowest feature index and lowest threshold among ties.
                if (score < best_score) {
                    best_score = score;
                    best_feature = feature;
                    best_threshold = threshold;
                }
            }
        }
        if (best_feature < 0) {
            return make_leaf(majority);
        }

        std::vector<int> left_samples, right_samples;
        for (const int s : samples) {
            if (features(s, best_feature) <= best_threshold) {
                left_samples.push_back(s);
            } else {
                right_samples.push_back(s);
            }
        }
        const int node = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({best_feature, best_threshold, -1, -1, -1});
        const int left = build(left_samples, depth + 1);
        const int right = build(right_samples, depth + 1);
        tree.nodes[static_cast<std::size_t>(node)].left = left;
        tree.nodes[static_cast<std::size_t>(node)].right = right;
        return node;
    }

    int make_leaf(int label) {
        tree.nodes.push_back({-1, 0.0, label, -1, -1});
        return static_cast<int>(tree.nodes.size()) - 1;
    }
};

}  // namespace

DecisionTree fit_decision_tree(const Matrix& features, const std::vector<int>& labels, int class_count,
                               int max_depth) {
    if (features.rows() == 0) {
        throw ContractError("fit_decision_tree: empty training set");
    }
    if (static_cast<Eigen::Index>(labels.size()) != features.rows()) {
        throw ContractError("fit_decision_tree: one label per row required");
    }
    if (max_depth < 0) {
        throw ConfigError("fit_decision_tree: max_depth must be non-negative");
    }
    TreeBuilder builder{features, labels, class_count, max_depth, {}};
    std::vector<int> samples(static_cast<std::size_t>(features.rows()));
    std::iota(samples.begin(), samples.end(), 0);
    builder.build(samples, 0);
    builder.tree.feature_count = static_cast<int>(features.cols());
    return builder.tree;
}

std::vector<int> decision_tree_predict(const DecisionTree& tree, const Matrix& features) {
    if (features.cols() != tree.feature_count) {
        throw ShapeError("decision_tree_predict: feature width mismatch");
    }
    std::vector<int> predictions(static_cast<std::size_t>(features.rows()), 0);
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        int node = 0;
        while (tree.nodes[static_cast<std::size_t>(node)].label < 0) {
            const auto& current = tree.nodes[static_cast<std::size_t>(node)];
            node = features(i, current.feature) <= current.threshold ? current.left : current.right;
        }
        predictions[static_cast<std::size_t>(i)] = tree.nodes[static_cast<std::size_t>(node)].label;
    }
    return predictions;
}

std::vector<int> decision_tree_classify(const TimeSeriesDataset& train, const std::vector<int>& train_labels,
                                        const TimeSeriesDataset& test, int max_depth) {
    if (train.size() == 0) {
        throw ContractError("decision_tree_classify: empty training set");
    }
    if (static_cast<int>(train_labels.size()) != train.size()) {
        throw ContractError("decision_tree_classify: one label per training instance required");
    }
    if (train.channels() != test.channels()) {
        throw ShapeError("decision_tree_classify: train and test channel counts differ");
    }
    // Feature length is pinned by the training set; longer test series are
    // truncated to it.
    const int length = train.max_length();
    const int class_count = 1 + *std::max_element(train_labels.begin(), train_labels.end());
    const auto tree = fit_decision_tree(to_feature_rows(train, length), train_labels, class_count, max_depth);
    return decision_tree_predict(tree, to_feature_rows(test, length));
}

EvaluationReport evaluate_pipeline(const TimeSeriesDataset& train, const TimeSeriesDataset& test,
                                   const LabelVector& generated, const std::vector<int>& true_train_labels,
                                   const EvaluateOptions& options) {
    if (generated.size() != train.size()) {
        throw ContractError("evaluate_pipeline: generated labels do not cover the training set");
    }
    if (static_cast<int>(true_train_labels.size()) != train.size()) {
        throw ContractError("evaluate_pipeline: true labels do not cover the training set");
    }
    if (!test.labels) {
        throw ContractError("evaluate_pipeline: test set carries no labels");
    }

    EvaluationReport report;
    report.dataset = train.name;
    report.label_accuracy = accuracy(generated.labels, true_train_labels);

    for (const auto& name : options.classifiers) {
        ClassifierScore score;
        score.name = name;
        std::vector<int> from_generated, from_truth;
        if (name == "knn") {
            score.knn_k = options.knn_k;
            from_generated = knn_classify(train, generated.labels, test, options.knn_k);
            from_truth = knn_classify(train, true_train_labels, test, options.knn_k);
        } else if (name == "dt") {
            score.max_depth = options.tree_depth;
            from_generated = decision_tree_classify(train, generated.labels, test, options.tree_depth);
            from_truth = decision_tree_classify(train, true_train_labels, test, options.tree_depth);
        } else {
            throw ConfigError("unknown classifier: " + name);
        }
        score.accuracy_generated = accuracy(from_generated, *test.labels);
        score.accuracy_true = accuracy(from_truth, *test.labels);
        score.gap = score.accuracy_true - score.accuracy_generated;
        report.classifiers.push_back(std::move(score));
    }
    return report;
}

std::string report_json(const EvaluationReport& report) {
    json doc;
    doc["dataset"] = report.dataset;
    doc["rep_fraction"] = round6(report.rep_fraction);
    doc["label_accuracy"] = round6(report.label_accuracy);
    doc["classifiers"] = json::array();
    for (const auto& score : report.classifiers) {
        json entry;
        entry["name"] = score.name;
        if (score.name == "knn") {
            entry["k_neighbors"] = score.knn_k;
        }
        if (score.name == "dt") {
            entry["max_depth"] = score.max_depth;
        }
        entry["accuracy_generated"] = round6(score.accuracy_generated);
        entry["accuracy_true"] = round6(score.accuracy_true);
        entry["gap"] = round6(score.gap);
        doc["classifiers"].push_back(entry);
    }
    if (!report.iteration_log.empty()) {
        doc["iteration_log"] = report.iteration_log;
    }
    return doc.dump(2) + "\n";
}

EvaluationReport report_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& error) {
        throw FormatError(std::string("report is not valid JSON: ") + error.what());
    }
    EvaluationReport report;
    report.dataset = doc.value("dataset", "");
    report.rep_fraction = doc.value("rep_fraction", 0.0);
    report.label_accuracy = doc.value("label_accuracy", 0.0);
    report.iteration_log = doc.value("iteration_log", "");
    for (const auto& entry : doc.value("classifiers", json::array())) {
        ClassifierScore score;
        score.name = entry.value("name", "");
        score.knn_k = entry.value("k_neighbors", 0);
        score.max_depth = entry.value("max_depth", 0);
        score.accuracy_generated = entry.value("accuracy_generated", 0.0);
        score.accuracy_true = entry.value("accuracy_true", 0.0);
        score.gap = entry.value("gap", 0.0);
        report.classifiers.push_back(std::move(score));
    }
    return report;
}

PcaResult pca(const Matrix& X, int n_components) {
    if (X.rows() < 1) {
        throw ContractError("pca: empty matrix");
    }
    if (n_components < 1 || n_components > X.cols()) {
        throw ConfigError("pca: component count out of range");
    }
    PcaResult result;
    result.mean = X.colwise().mean();
    const Matrix centered = X.rowwise() - result.mean.transpose();
    const double denom = X.rows() > 1 ? static_cast<double>(X.rows() - 1) : 1.0;
    const Matrix covariance = (centered.transpose() * centered) / denom;

    Eigen::SelfAdjointEigenSolver<Matrix> solver(covariance);
    if (solver.info() != Eigen::Success) {
        throw NumericError("pca: eigendecomposition failed");
    }

    result.components.resize(X.cols(), n_components);
    result.eigenvalues.resize(n_components);
    for (int c = 0; c < n_components; ++c) {
        // Solver orders eigenvalues ascending; take from the top.
        const auto source = X.cols() - 1 - c;
        Vector component = solver.eigenvectors().col(source);
        for (Eigen::Index i = 0; i < component.size(); ++i) {
            if (std::abs(component[i]) > 1e-12) {
                if (component[i] < 0.0) {
                    component = -component;
                }
                break;
            }
        }
        result.components.col(c) = component;
        result.eigenvalues[c] = solver.eigenvalues()[source];
    }
    result.scores = centered * result.components;
    return result;
}

void export_embedding_2d(const Matrix& X, const std::vector<int>& labels, const std::string& path) {
    if (static_cast<Eigen::Index>(labels.size()) != X.rows()) {
        throw ContractError("export_embedding_2d: one label per row required");
    }
    const int components = static_cast<int>(std::min<Eigen::Index>(2, X.cols()));
    const auto projection = pca(X, components);
    std::ostringstream out;
    out << "x,y,label\n";
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const double x = projection.scores(i, 0);
        const double y = components > 1 ? projection.scores(i, 1) : 0.0;
        out << format_g9(x) << ',' << format_g9(y) << ',' << labels[static_cast<std::size_t>(i)] << '\n';
    }
    write_text_file(path, out.str());
}

}  // namespace autolabel
