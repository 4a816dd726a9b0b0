#pragma once

#include "autolabel/dataset.hpp"
#include "autolabel/neuralnet.hpp"

#include <cstdint>
#include <vector>

namespace autolabel {

struct VaeConfig {
    int hidden_size = 32;
    int epochs = 150;
    RmsPropConfig optimizer;
    double clip_norm = 5.0;
    double early_stop_delta = 1e-6;
    int early_stop_patience = 20;
};

/// Per-class generator: single-layer LSTM encoder/decoder with dense mean and
/// log-variance heads. The latent sample has one value per timestep, so its
/// length equals the length of the series it conditions on.
struct VaeModel {
    LstmCell encoder;       // channels -> hidden
    DenseLayer mean_head;   // hidden -> 1
    DenseLayer logvar_head; // hidden -> 1
    LstmCell decoder;       // 1 -> hidden
    DenseLayer output;      // hidden -> channels
    int class_id = 0;
    int channels = 0;
    std::uint64_t seed = 0;
    VaeConfig config;
    std::vector<double> loss_history;

    std::vector<ParamView> param_views();
};

struct VaeGrads {
    LstmGrads encoder, decoder;
    DenseGrads mean_head, logvar_head, output;

    static VaeGrads zero(const VaeModel& model);
    std::vector<ParamView> param_views();
};

/// KL(N(mu, diag(exp(logvar))) || N(0, I)), closed form:
/// 0.5 * sum(mu^2 + exp(logvar) - 1 - logvar).
double gaussian_kl(const Vector& mu, const Vector& logvar);

/// z = mu + exp(logvar/2) .* eps
Vector reparameterize(const Vector& mu, const Vector& logvar, const Vector& eps);

VaeModel make_vae_model(int channels, int class_id, const VaeConfig& config, std::uint64_t seed);

/// Negative ELBO of the batch (mean per-element reconstruction error plus
/// per-timestep KL) with the given fixed noise draws; gradients accumulate
/// into `grads` when non-null.
double vae_loss_and_gradients(const VaeModel& model, const std::vector<TimeSeries>& batch,
                              const std::vector<Vector>& eps, VaeGrads* grads);

/// Trains one class's generator on that class's expert instances only.
VaeModel train_vae(const RepresentativeSet& representatives, int class_id, const VaeConfig& config,
                   std::uint64_t seed);

struct VaeDraw {
    TimeSeries series;
    Vector latent;
    Vector mean;
    Vector logvar;
};

/// One generated series conditioned on `condition`; with zero_noise the
/// latent equals the mean exactly.
VaeDraw vae_draw(const VaeModel& model, const TimeSeries& condition, Rng& rng, bool zero_noise = false);

/// `count` series, each conditioned on a randomly chosen instance from
/// `class_instances`. Deterministic per seed.
std::vector<TimeSeries> sample_vae(const VaeModel& model, const std::vector<TimeSeries>& class_instances,
                                   int count, std::uint64_t seed);

}  // namespace autolabel
