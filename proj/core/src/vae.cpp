#include "autolabel/vae.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace autolabel {

namespace {

struct VaePass {
    LstmTrace encoder, decoder;
    Vector mu, logvar, z;
    Matrix reconstruction;
    double recon_loss = 0.0;
    double kl = 0.0;

    double loss() const { return recon_loss + kl; }
};

VaePass run_instance(const VaeModel& model, const TimeSeries& series, const Vector& eps) {
    const auto steps = series.values.rows();
    if (eps.size() != steps) {
        throw ShapeError("vae: noise length does not match series length");
    }
    VaePass pass;
    pass.encoder = lstm_forward(model.encoder, series.values);
    pass.mu = dense_forward_rows(model.mean_head, pass.encoder.hiddens).col(0);
    pass.logvar = dense_forward_rows(model.logvar_head, pass.encoder.hiddens).col(0);
    pass.z = reparameterize(pass.mu, pass.logvar, eps);
    pass.decoder = lstm_forward(model.decoder, pass.z);
    pass.reconstruction = dense_forward_rows(model.output, pass.decoder.hiddens);
    const Matrix residual = pass.reconstruction - series.values;
    pass.recon_loss = residual.squaredNorm() / static_cast<double>(residual.size());
    pass.kl = gaussian_kl(pass.mu, pass.logvar) / static_cast<double>(steps);
    return pass;
}

void backprop_instance(const VaeModel& model, const TimeSeries& series, const Vector& eps,
                       const VaePass& pass, double weight, VaeGrads& grads) {
    const auto steps = series.values.rows();
    const Matrix residual = pass.reconstruction - series.values;
    const Matrix d_recon = residual * (2.0 * weight / static_cast<double>(residual.size()));
    const Matrix d_dec_h =
        dense_backward_rows(model.output, pass.decoder.hiddens, pass.reconstruction, d_recon, grads.output);
    const Vector zero_h = Vector::Zero(model.decoder.hidden_size);
    const auto dec_back = lstm_backward(model.decoder, pass.decoder, d_dec_h, zero_h, zero_h, grads.decoder);
    const Vector dz = dec_back.d_inputs.col(0);

    const Vector sigma = (pass.logvar.array() * 0.5).exp();
    Vector d_mu = dz;
    Vector d_logvar = dz.cwiseProduct(eps).cwiseProduct(sigma) * 0.5;
    // KL term, averaged per timestep like the reconstruction.
    const double kl_weight = weight / static_cast<double>(steps);
    d_mu += kl_weight * pass.mu;
    d_logvar += (0.5 * kl_weight) * (pass.logvar.array().exp() - 1.0).matrix();

    Matrix d_enc_h =
        dense_backward_rows(model.mean_head, pass.encoder.hiddens, pass.mu, d_mu, grads.mean_head);
    d_enc_h += dense_backward_rows(model.logvar_head, pass.encoder.hiddens, pass.logvar, d_logvar,
                                   grads.logvar_head);
    const Vector zero_e = Vector::Zero(model.encoder.hidden_size);
    lstm_backward(model.encoder, pass.encoder, d_enc_h, zero_e, zero_e, grads.encoder);
}

}  // namespace

std::vector<ParamView> VaeModel::param_views() {
    std::vector<ParamView> views;
    append_views(views, views_of(encoder));
    append_views(views, views_of(mean_head));
    append_views(views, views_of(logvar_head));
    append_views(views, views_of(decoder));
    append_views(views, views_of(output));
    return views;
}

std::vector<ParamView> VaeGrads::param_views() {
    std::vector<ParamView> views;
    append_views(views, views_of(encoder));
    append_views(views, views_of(mean_head));
    append_views(views, views_of(logvar_head));
    append_views(views, views_of(decoder));
    append_views(views, views_of(output));
    return views;
}

VaeGrads VaeGrads::zero(const VaeModel& model) {
    VaeGrads grads;
    grads.encoder = LstmGrads::zero(model.encoder);
    grads.decoder = LstmGrads::zero(model.decoder);
    grads.mean_head = DenseGrads::zero(model.mean_head);
    grads.logvar_head = DenseGrads::zero(model.logvar_head);
    grads.output = DenseGrads::zero(model.output);
    return grads;
}

double gaussian_kl(const Vector& mu, const Vector& logvar) {
    if (mu.size() != logvar.size()) {
        throw ShapeError("gaussian_kl: mu and logvar lengths differ");
    }
    return 0.5 * (mu.array().square() + logvar.array().exp() - 1.0 - logvar.array()).sum();
}

Vector reparameterize(const Vector& mu, const Vector& logvar, const Vector& eps) {
    if (mu.size() != logvar.size() || mu.size() != eps.size()) {
        throw ShapeError("reparameterize: length mismatch");
    }
    return mu + (logvar.array() * 0.5).exp().matrix().cwiseProduct(eps);
}

VaeModel make_vae_model(int channels, int class_id, const VaeConfig& config, std::uint64_t seed) {
    if (channels < 1) {
        throw ShapeError("vae: channel count must be positive");
    }
    if (config.hidden_size < 1) {
        throw ConfigError("vae: hidden size must be positive");
    }
    VaeModel model;
    model.class_id = class_id;
    model.channels = channels;
    model.seed = seed;
    model.config = config;
    Rng rng(derive_seed(seed, "vae-init"));
    model.encoder = LstmCell::init(channels, config.hidden_size, rng);
    model.mean_head = DenseLayer::init(config.hidden_size, 1, Activation::Identity, rng);
    model.logvar_head = DenseLayer::init(config.hidden_size, 1, Activation::Identity, rng);
    model.decoder = LstmCell::init(1, config.hidden_size, rng);
    model.output = DenseLayer::init(config.hidden_size, channels, Activation::Identity, rng);
    return model;
}

double vae_loss_and_gradients(const VaeModel& model, const std::vector<TimeSeries>& batch,
                              const std::vector<Vector>& eps, VaeGrads* grads) {
    if (batch.empty()) {
        throw ContractError("vae: empty batch");
    }
    if (eps.size() != batch.size()) {
        throw ShapeError("vae: one noise vector per instance required");
    }
    const double weight = 1.0 / static_cast<double>(batch.size());
    double total = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto pass = run_instance(model, batch[i], eps[i]);
        if (grads != nullptr) {
            backprop_instance(model, batch[i], eps[i], pass, weight, *grads);
        }
        total += pass.loss();
    }
    return total * weight;
}

VaeModel train_vae(const RepresentativeSet& representatives, int class_id, const VaeConfig& config,
                   std::uint64_t seed) {
    std::vector<TimeSeries> batch;
    for (int i = 0; i < representatives.size(); ++i) {
        if (representatives.labels[static_cast<std::size_t>(i)] == class_id &&
            representatives.origins[static_cast<std::size_t>(i)] == Origin::Expert) {
            batch.push_back(representatives.instances[static_cast<std::size_t>(i)]);
        }
    }
    if (batch.empty()) {
        throw ContractError("train_vae: class " + std::to_string(class_id) + " has no expert instances");
    }
    if (config.epochs < 1) {
        throw ConfigError("epochs must be at least 1");
    }

    VaeModel model = make_vae_model(batch.front().channels(), class_id, config, seed);
    auto params = model.param_views();
    RmsProp optimizer(config.optimizer, total_size(params));
    Rng noise(derive_seed(seed, "vae-train-noise"));

    double best_loss = std::numeric_limits<double>::infinity();
    int stalled = 0;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        std::vector<Vector> eps;
        eps.reserve(batch.size());
        for (const auto& series : batch) {
            Vector e(series.length());
            for (Eigen::Index t = 0; t < e.size(); ++t) {
                e[t] = noise.normal();
            }
            eps.push_back(std::move(e));
        }
        VaeGrads grads = VaeGrads::zero(model);
        const double loss = vae_loss_and_gradients(model, batch, eps, &grads);
        if (!std::isfinite(loss)) {
            throw TrainingError("vae training diverged at epoch " + std::to_string(epoch) + " for class " +
                                std::to_string(class_id));
        }
        model.loss_history.push_back(loss);
        if (loss < best_loss - config.early_stop_delta) {
            best_loss = loss;
            stalled = 0;
        } else if (++stalled >= config.early_stop_patience) {
            break;
        }
        auto grad_views = grads.param_views();
        clip_global_norm(grad_views, config.clip_norm);
        try {
            optimizer.step(params, grad_views);
        } catch (const TrainingError&) {
            throw TrainingError("vae training diverged at epoch " + std::to_string(epoch) + " for class " +
                                std::to_string(class_id));
        }
    }
    return model;
}

VaeDraw vae_draw(const VaeModel& model, const TimeSeries& condition, Rng& rng, bool zero_noise) {
    if (condition.channels() != model.channels) {
        throw ShapeError("vae_draw: condition channel count does not match the model");
    }
    const auto steps = condition.values.rows();
    const auto encoder = lstm_forward(model.encoder, condition.values);
    VaeDraw draw;
    draw.mean = dense_forward_rows(model.mean_head, encoder.hiddens).col(0);
    draw.logvar = dense_forward_rows(model.logvar_head, encoder.hiddens).col(0);
    Vector eps = Vector::Zero(steps);
    if (!zero_noise) {
        for (Eigen::Index t = 0; t < steps; ++t) {
            eps[t] = rng.normal();
        }
    }
    draw.latent = reparameterize(draw.mean, draw.logvar, eps);
    const auto decoder = lstm_forward(model.decoder, draw.latent);
    draw.series.values = dense_forward_rows(model.output, decoder.hiddens);
    if (!draw.series.values.allFinite()) {
        throw NumericError("vae_draw: generated series has non-finite values");
    }
    return draw;
}

std::vector<TimeSeries> sample_vae(const VaeModel& model, const std::vector<TimeSeries>& class_instances,
                                   int count, std::uint64_t seed) {
    if (count < 1) {
        throw ContractError("sample_vae: count must be at least 1");
    }
    if (class_instances.empty()) {
        throw ContractError("sample_vae: no instances to condition on");
    }
    Rng rng(derive_seed(seed, "vae-sample"));
    std::vector<TimeSeries> samples;
    samples.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const auto index = static_cast<std::size_t>(rng.below(class_instances.size()));
        samples.push_back(vae_draw(model, class_instances[index], rng).series);
    }
    return samples;
}

}  // namespace autolabel
