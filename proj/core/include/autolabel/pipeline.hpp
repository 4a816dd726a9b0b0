#pragma once

#include "autolabel/evaluate.hpp"
#include "autolabel/labeling.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace autolabel {

/// Resolved configuration of one run. All randomness flows from `seed`
/// through named per-stage streams.
struct PipelineConfig {
    std::string train_path;
    std::string test_path;
    std::string labels_path;
    std::string output_dir = "out";
    std::string load_model_path;
    std::string save_model_path;
    std::string dataset_name;

    double rep_fraction = 0.15;
    double tau = 0.05;
    int compact_length = 12;
    std::uint64_t seed = 42;
    int max_iterations = 10;
    int aecs_epochs = 150;
    int vae_epochs = 150;
    int vae_hidden = 32;
    Linkage linkage = Linkage::Average;
    bool normalize = true;
    bool merge_representatives = true;
    bool has_header = false;
    bool dump_dendrogram = false;
    int knn_k = 1;
    int tree_depth = 10;
    std::vector<std::string> classifiers = {"knn", "dt"};

    void validate() const;
    AecsConfig aecs() const;
    SelfCorrectConfig correction() const;
    EvaluateOptions evaluation() const;
};

/// Full resolved config echoed as JSON; written next to every run's outputs.
std::string run_meta_json(const PipelineConfig& config, const std::string& command);

struct LabelRun {
    TimeSeriesDataset train;  // normalized, with true labels
    RepresentativeSelection selection;
    AecsModel model;
    SelfCorrectResult correction;
    CompactMatrix embeddings;  // unlabeled-collection rows
};

/// dataset -> autoencoder -> self-correction. Pure compute; writes nothing.
LabelRun run_label_pipeline(const PipelineConfig& config);

/// labels.csv, iterations.json, embedding.csv, run_meta.json (and the
/// dendrogram when requested) into output_dir.
void write_label_artifacts(const PipelineConfig& config, const LabelRun& run);

void write_labels_csv(const std::string& path, const LabelVector& labels,
                      const TimeSeriesDataset& dataset);
std::vector<int> read_labels_csv(const std::string& path, const TimeSeriesDataset& dataset);

/// Scores generated labels against the hidden test set. Uses labels_path (or
/// output_dir/labels.csv) when present, otherwise runs the label pipeline
/// inline first. Writes report.json and run_meta.json.
EvaluationReport run_evaluate(const PipelineConfig& config);

}  // namespace autolabel
