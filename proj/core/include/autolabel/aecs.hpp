#pragma once

#include "autolabel/dataset.hpp"
#include "autolabel/neuralnet.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace autolabel {

struct AecsConfig {
    /// Bottleneck length; must stay below the shortest training instance.
    int compact_length = 12;
    int epochs = 150;
    RmsPropConfig optimizer;
    double clip_norm = 5.0;
    /// Training stops once the loss improves by less than `early_stop_delta`
    /// for `early_stop_patience` consecutive epochs.
    double early_stop_delta = 1e-6;
    int early_stop_patience = 20;
};

/// Seq2Seq under-complete autoencoder. Two stacked encoder cells compress a
/// series to the top cell's final hidden state (the compact sequence); the
/// decoder consumes that state as its initial state and reconstructs from
/// zero inputs.
struct AecsModel {
    LstmCell encoder1, encoder2;
    LstmCell decoder1, decoder2;
    DenseLayer output;
    int compact_length = 0;
    int channels = 0;
    std::uint64_t seed = 0;
    AecsConfig config;
    /// Full-batch loss per epoch, recorded before each update.
    std::vector<double> loss_history;

    std::vector<ParamView> param_views();

    void save(const std::string& path) const;
    static AecsModel load(const std::string& path);
};

struct AecsGrads {
    LstmGrads encoder1, encoder2, decoder1, decoder2;
    DenseGrads output;

    static AecsGrads zero(const AecsModel& model);
    std::vector<ParamView> param_views();
};

/// Freshly initialized (untrained) model; encoder hidden sizes are
/// (2*max(16, compact_length), compact_length).
AecsModel make_aecs_model(int channels, const AecsConfig& config, std::uint64_t seed);

/// Full-batch training minimizing mean squared reconstruction error over
/// valid timesteps. Throws ConfigError when compact_length >= the shortest
/// instance (the model would not be under-complete) and TrainingError naming
/// the epoch on divergence.
AecsModel train_aecs(const TimeSeriesDataset& dataset, const AecsConfig& config, std::uint64_t seed);
AecsModel train_aecs(const TimeSeriesDataset& dataset, int compact_length, int epochs, std::uint64_t seed);

/// Mean reconstruction loss of the batch at the model's current parameters.
double aecs_loss(const AecsModel& model, const TimeSeriesDataset& dataset);

/// Loss plus parameter gradients accumulated into `grads`.
double aecs_loss_and_gradients(const AecsModel& model, const TimeSeriesDataset& dataset, AecsGrads& grads);

/// Final hidden state of the top encoder layer, length compact_length.
Vector encode_series(const AecsModel& model, const TimeSeries& series);

struct CompactMatrix {
    Matrix embeddings;  // n x compact_length
    std::uint64_t source_hash = 0;
};

std::uint64_t dataset_digest(const TimeSeriesDataset& dataset);

/// Row i = embedding of instance i; deterministic and safe to parallelize.
CompactMatrix encode(const AecsModel& model, const TimeSeriesDataset& dataset);

/// CSV export: one row per instance, compact_length columns, 9 significant
/// digits.
void write_compact_csv(const CompactMatrix& compact, const std::string& path);

}  // namespace autolabel
