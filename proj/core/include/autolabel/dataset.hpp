#pragma once

#include "autolabel/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace autolabel {

/// One instance: a (length x channels) matrix of finite values. Variable
/// lengths are stored as true ragged lengths; padding and masks exist only at
/// the neural-net boundary.
struct TimeSeries {
    Matrix values;

    int length() const { return static_cast<int>(values.rows()); }
    int channels() const { return static_cast<int>(values.cols()); }
};

struct TimeSeriesDataset {
    std::vector<TimeSeries> instances;
    /// Internal labels, renumbered to {0..k-1}; absent for unlabeled data.
    std::optional<std::vector<int>> labels;
    std::optional<int> class_count;
    std::string name;
    /// Internal id -> original label value, kept so outputs can speak the
    /// input file's label vocabulary.
    std::vector<double> label_names;

    int size() const { return static_cast<int>(instances.size()); }
    int channels() const { return instances.empty() ? 0 : instances.front().channels(); }
    int min_length() const;
    int max_length() const;
};

enum class Origin : std::uint8_t { Expert, Synthetic };

/// The small labeled subset seeding label generation; grows with synthetic
/// instances during self-correction.
struct RepresentativeSet {
    std::vector<TimeSeries> instances;
    std::vector<int> labels;
    std::vector<Origin> origins;

    int size() const { return static_cast<int>(instances.size()); }
    int class_count() const;
    int expert_count() const;
};

/// UCR-style TSV: tab-separated, one instance per line, first field the class
/// label; trailing empty fields or NaN tokens mark absent timesteps.
TimeSeriesDataset load_ucr_tsv(const std::string& path, bool has_header = false);

/// Multivariate input as one file per channel with identical row order.
TimeSeriesDataset load_ucr_channels(const std::vector<std::string>& channel_paths, bool has_header = false);

/// Directory convention <name>_dim<i>.tsv, channels ordered by <i>.
TimeSeriesDataset load_ucr_directory(const std::string& directory, bool has_header = false);

/// Dispatches to the file or directory loader.
TimeSeriesDataset load_dataset(const std::string& path, bool has_header = false);

/// Writes a univariate dataset back out in the UCR TSV layout with original
/// label values.
void write_ucr_tsv(const TimeSeriesDataset& dataset, const std::string& path);

/// Per-instance, per-channel z-normalization over the valid length with
/// population sigma; constant channels map to all-zeros.
TimeSeriesDataset znormalize(const TimeSeriesDataset& dataset);

struct RepresentativeSelection {
    RepresentativeSet representatives;
    /// The full dataset with labels stripped; what the pipeline treats as the
    /// unlabeled collection.
    TimeSeriesDataset unlabeled;
    /// Indices of the selected representatives in the parent dataset.
    std::vector<int> selected_indices;
};

/// Stratified random subset with ceil(fraction*n/k) instances per class
/// (capped at class size), tagged Origin::Expert. Deterministic per seed.
RepresentativeSelection select_representatives(const TimeSeriesDataset& dataset, double fraction,
                                               std::uint64_t seed);

/// Appends extra instances to a dataset copy (labels dropped).
TimeSeriesDataset concat_instances(const TimeSeriesDataset& dataset, const std::vector<TimeSeries>& extra);

/// Remaps a labeled dataset onto an existing internal<->original label
/// vocabulary (typically the training set's), so both agree on class ids.
TimeSeriesDataset align_labels(const TimeSeriesDataset& dataset, const std::vector<double>& label_names);

}  // namespace autolabel
