#pragma once

#include "autolabel/dataset.hpp"
#include "autolabel/labeling.hpp"

#include <optional>
#include <string>
#include <vector>

namespace autolabel {

/// Fixed-length feature rows for the base classifiers: every channel
/// zero-padded or truncated to `length`, channels concatenated channel-major.
Matrix to_feature_rows(const TimeSeriesDataset& dataset, int length);

/// Majority label of the k nearest training instances under Euclidean
/// distance on zero-padded raw series. Distance ties resolve by train index,
/// vote ties by smallest label.
std::vector<int> knn_classify(const TimeSeriesDataset& train, const std::vector<int>& train_labels,
                              const TimeSeriesDataset& test, int k_neighbors);

struct DecisionTreeNode {
    int feature = -1;
    double threshold = 0.0;
    int label = -1;  // >= 0 marks a leaf
    int left = -1;
    int right = -1;
};

/// CART with Gini impurity; split ties resolve to the lowest feature index,
/// then the lowest threshold.
struct DecisionTree {
    std::vector<DecisionTreeNode> nodes;
    int feature_count = 0;
};

DecisionTree fit_decision_tree(const Matrix& features, const std::vector<int>& labels, int class_count,
                               int max_depth);
std::vector<int> decision_tree_predict(const DecisionTree& tree, const Matrix& features);

std::vector<int> decision_tree_classify(const TimeSeriesDataset& train, const std::vector<int>& train_labels,
                                        const TimeSeriesDataset& test, int max_depth);

struct ClassifierScore {
    std::string name;  // "knn" or "dt"
    int knn_k = 0;
    int max_depth = 0;
    double accuracy_generated = 0.0;
    double accuracy_true = 0.0;
    double gap = 0.0;  // accuracy_true - accuracy_generated
};

struct EvaluationReport {
    std::string dataset;
    double rep_fraction = 0.0;
    /// Fraction of train instances where the generated label matches truth.
    double label_accuracy = 0.0;
    std::vector<ClassifierScore> classifiers;
    /// Path of the iteration log this run belongs to, when one exists.
    std::string iteration_log;
};

struct EvaluateOptions {
    std::vector<std::string> classifiers = {"knn", "dt"};
    int knn_k = 1;
    int tree_depth = 10;
};

/// Trains every requested base classifier twice (generated vs. true train
/// labels), scores both on the labeled test set, and assembles the report.
EvaluationReport evaluate_pipeline(const TimeSeriesDataset& train, const TimeSeriesDataset& test,
                                   const LabelVector& generated, const std::vector<int>& true_train_labels,
                                   const EvaluateOptions& options = {});

/// Report JSON with floats at 6 decimal places; parses back to an equal value.
std::string report_json(const EvaluationReport& report);
EvaluationReport report_from_json(const std::string& text);

struct PcaResult {
    Matrix scores;       // n x components
    Matrix components;   // p x components, column-wise loadings
    Vector mean;         // p
    Vector eigenvalues;  // components, descending
};

/// Deterministic PCA: components ordered by descending eigenvalue with the
/// first nonzero loading of each component made positive.
PcaResult pca(const Matrix& X, int n_components);

/// 2-D PCA projection as CSV rows `x,y,label`.
void export_embedding_2d(const Matrix& X, const std::vector<int>& labels, const std::string& path);

}  // namespace autolabel
