#include "autolabel/aecs.hpp"

#include "autolabel/io.hpp"
#include "autolabel/parallel.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace autolabel {

namespace {

using nlohmann::json;

struct InstancePass {
    LstmTrace encoder1, encoder2, decoder1, decoder2;
    Matrix reconstruction;
    double loss = 0.0;
};

InstancePass run_instance(const AecsModel& model, const TimeSeries& series) {
    InstancePass pass;
    const auto steps = series.values.rows();
    pass.encoder1 = lstm_forward(model.encoder1, series.values);
    pass.encoder2 = lstm_forward(model.encoder2, pass.encoder1.hiddens);
    const Vector compact = pass.encoder2.final_hidden();
    const Mask valid(static_cast<std::size_t>(steps), 1);
    pass.decoder1 = lstm_forward(model.decoder1, Matrix::Zero(steps, model.channels), valid, compact,
                                 Vector::Zero(model.compact_length));
    pass.decoder2 = lstm_forward(model.decoder2, pass.decoder1.hiddens);
    pass.reconstruction = dense_forward_rows(model.output, pass.decoder2.hiddens);
    const Matrix residual = pass.reconstruction - series.values;
    pass.loss = residual.squaredNorm() / static_cast<double>(residual.size());
    return pass;
}

void backprop_instance(const AecsModel& model, const TimeSeries& series, const InstancePass& pass,
                       double weight, AecsGrads& grads) {
    const Matrix residual = pass.reconstruction - series.values;
    const Matrix d_recon = residual * (2.0 * weight / static_cast<double>(residual.size()));
    const Matrix d_dec2_h =
        dense_backward_rows(model.output, pass.decoder2.hiddens, pass.reconstruction, d_recon, grads.output);
    const Vector zero_p = Vector::Zero(model.compact_length);
    const Vector zero_h1 = Vector::Zero(model.decoder2.hidden_size);
    const auto back2 = lstm_backward(model.decoder2, pass.decoder2, d_dec2_h, zero_h1, zero_h1, grads.decoder2);
    const auto back1 =
        lstm_backward(model.decoder1, pass.decoder1, back2.d_inputs, zero_p, zero_p, grads.decoder1);
    // The compact state is the decoder's initial hidden state; its gradient
    // enters the top encoder at the carried final state.
    const Matrix no_grad = Matrix::Zero(pass.encoder2.steps(), model.compact_length);
    const auto enc2 =
        lstm_backward(model.encoder2, pass.encoder2, no_grad, back1.d_initial_hidden, zero_p, grads.encoder2);
    const Vector zero_e1 = Vector::Zero(model.encoder1.hidden_size);
    lstm_backward(model.encoder1, pass.encoder1, enc2.d_inputs, zero_e1, zero_e1, grads.encoder1);
}

void check_dataset(const TimeSeriesDataset& dataset) {
    if (dataset.size() < 1) {
        throw ContractError("aecs: empty dataset");
    }
    const int channels = dataset.channels();
    for (const auto& instance : dataset.instances) {
        if (instance.channels() != channels) {
            throw ShapeError("aecs: instances disagree on channel count");
        }
    }
}

}  // namespace

std::vector<ParamView> AecsModel::param_views() {
    std::vector<ParamView> views;
    append_views(views, views_of(encoder1));
    append_views(views, views_of(encoder2));
    append_views(views, views_of(decoder1));
    append_views(views, views_of(decoder2));
    append_views(views, views_of(output));
    return views;
}

std::vector<ParamView> AecsGrads::param_views() {
    std::vector<ParamView> views;
    append_views(views, views_of(encoder1));
    append_views(views, views_of(encoder2));
    append_views(views, views_of(decoder1));
    append_views(views, views_of(decoder2));
    append_views(views, views_of(output));
    return views;
}

AecsGrads AecsGrads::zero(const AecsModel& model) {
    AecsGrads grads;
    grads.encoder1 = LstmGrads::zero(model.encoder1);
    grads.encoder2 = LstmGrads::zero(model.encoder2);
    grads.decoder1 = LstmGrads::zero(model.decoder1);
    grads.decoder2 = LstmGrads::zero(model.decoder2);
    grads.output = DenseGrads::zero(model.output);
    return grads;
}

AecsModel make_aecs_model(int channels, const AecsConfig& config, std::uint64_t seed) {
    if (config.compact_length < 2) {
        throw ConfigError("compact length must be at least 2");
    }
    if (channels < 1) {
        throw ShapeError("aecs: channel count must be positive");
    }
    AecsModel model;
    model.compact_length = config.compact_length;
    model.channels = channels;
    model.seed = seed;
    model.config = config;
    const int wide = 2 * std::max(16, config.compact_length);
    Rng rng(derive_seed(seed, "aecs-init"));
    model.encoder1 = LstmCell::init(channels, wide, rng);
    model.encoder2 = LstmCell::init(wide, config.compact_length, rng);
    model.decoder1 = LstmCell::init(channels, config.compact_length, rng);
    model.decoder2 = LstmCell::init(config.compact_length, wide, rng);
    model.output = DenseLayer::init(wide, channels, Activation::Identity, rng);
    return model;
}

double aecs_loss(const AecsModel& model, const TimeSeriesDataset& dataset) {
    check_dataset(dataset);
    double total = 0.0;
    for (const auto& instance : dataset.instances) {
        total += run_instance(model, instance).loss;
    }
    return total / dataset.size();
}

double aecs_loss_and_gradients(const AecsModel& model, const TimeSeriesDataset& dataset, AecsGrads& grads) {
    check_dataset(dataset);
    const double weight = 1.0 / dataset.size();
    double total = 0.0;
    for (const auto& instance : dataset.instances) {
        const auto pass = run_instance(model, instance);
        backprop_instance(model, instance, pass, weight, grads);
        total += pass.loss;
    }
    return total * weight;
}

AecsModel train_aecs(const TimeSeriesDataset& dataset, const AecsConfig& config, std::uint64_t seed) {
    check_dataset(dataset);
    if (config.epochs < 1) {
        throw ConfigError("epochs must be at least 1");
    }
    if (config.compact_length >= dataset.min_length()) {
        throw ConfigError("compact length " + std::to_string(config.compact_length) +
                          " is not under-complete: shortest instance has length " +
                          std::to_string(dataset.min_length()));
    }

    AecsModel model = make_aecs_model(dataset.channels(), config, seed);
    auto params = model.param_views();
    RmsProp optimizer(config.optimizer, total_size(params));

    double best_loss = std::numeric_limits<double>::infinity();
    int stalled = 0;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        AecsGrads grads = AecsGrads::zero(model);
        const double loss = aecs_loss_and_gradients(model, dataset, grads);
        if (!std::isfinite(loss)) {
            throw TrainingError("aecs training diverged at epoch " + std::to_string(epoch));
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
            throw TrainingError("aecs training diverged at epoch " + std::to_string(epoch));
        }
    }
    return model;
}

AecsModel train_aecs(const TimeSeriesDataset& dataset, int compact_length, int epochs, std::uint64_t seed) {
    AecsConfig config;
    config.compact_length = compact_length;
    config.epochs = epochs;
    return train_aecs(dataset, config, seed);
}

Vector encode_series(const AecsModel& model, const TimeSeries& series) {
    if (series.channels() != model.channels) {
        throw ShapeError("encode: series channel count does not match the model");
    }
    const auto enc1 = lstm_forward(model.encoder1, series.values);
    const auto enc2 = lstm_forward(model.encoder2, enc1.hiddens);
    return enc2.final_hidden();
}

std::uint64_t dataset_digest(const TimeSeriesDataset& dataset) {
    const std::uint64_t n = static_cast<std::uint64_t>(dataset.size());
    std::uint64_t h = hash_bytes(&n, sizeof(n));
    for (const auto& instance : dataset.instances) {
        const std::int64_t dims[2] = {instance.values.rows(), instance.values.cols()};
        h = hash_bytes(dims, sizeof(dims), h);
        h = hash_bytes(instance.values.data(), sizeof(double) * static_cast<std::size_t>(instance.values.size()),
                       h);
    }
    return h;
}

CompactMatrix encode(const AecsModel& model, const TimeSeriesDataset& dataset) {
    CompactMatrix compact;
    compact.embeddings.resize(dataset.size(), model.compact_length);
    parallel_for(static_cast<std::size_t>(dataset.size()), [&](std::size_t i) {
        compact.embeddings.row(static_cast<Eigen::Index>(i)) =
            encode_series(model, dataset.instances[i]).transpose();
    });
    compact.source_hash = dataset_digest(dataset);
    return compact;
}

void write_compact_csv(const CompactMatrix& compact, const std::string& path) {
    std::ostringstream out;
    for (Eigen::Index i = 0; i < compact.embeddings.rows(); ++i) {
        for (Eigen::Index j = 0; j < compact.embeddings.cols(); ++j) {
            if (j > 0) {
                out << ',';
            }
            out << format_g9(compact.embeddings(i, j));
        }
        out << '\n';
    }
    write_text_file(path, out.str());
}

void AecsModel::save(const std::string& path) const {
    json meta;
    meta["kind"] = "aecs";
    meta["compact_length"] = compact_length;
    meta["channels"] = channels;
    meta["seed"] = seed;
    meta["epochs"] = config.epochs;
    meta["learning_rate"] = config.optimizer.learning_rate;
    meta["decay"] = config.optimizer.decay;
    meta["epsilon"] = config.optimizer.epsilon;
    meta["clip_norm"] = config.clip_norm;

    Checkpoint checkpoint;
    checkpoint.meta_json = meta.dump();
    auto add_matrix = [&](const std::string& name, const Matrix& m) {
        CheckpointBlock block;
        block.name = name;
        block.dims = {m.rows(), m.cols()};
        block.values.assign(m.data(), m.data() + m.size());
        checkpoint.blocks.push_back(std::move(block));
    };
    auto add_vector = [&](const std::string& name, const Vector& v) {
        CheckpointBlock block;
        block.name = name;
        block.dims = {v.size()};
        block.values.assign(v.data(), v.data() + v.size());
        checkpoint.blocks.push_back(std::move(block));
    };
    auto add_cell = [&](const std::string& prefix, const LstmCell& cell) {
        add_matrix(prefix + ".w_input", cell.w_input);
        add_matrix(prefix + ".w_hidden", cell.w_hidden);
        add_vector(prefix + ".bias", cell.bias);
    };
    add_cell("encoder1", encoder1);
    add_cell("encoder2", encoder2);
    add_cell("decoder1", decoder1);
    add_cell("decoder2", decoder2);
    add_matrix("output.weight", output.weight);
    add_vector("output.bias", output.bias);
    save_checkpoint(path, checkpoint);
}

AecsModel AecsModel::load(const std::string& path) {
    const Checkpoint checkpoint = load_checkpoint(path);
    json meta;
    try {
        meta = json::parse(checkpoint.meta_json);
    } catch (const json::parse_error&) {
        throw FormatError("checkpoint metadata is not valid JSON: " + path);
    }
    if (meta.value("kind", "") != std::string("aecs")) {
        throw FormatError("checkpoint does not hold an aecs model: " + path);
    }

    AecsModel model;
    model.compact_length = meta.at("compact_length").get<int>();
    model.channels = meta.at("channels").get<int>();
    model.seed = meta.at("seed").get<std::uint64_t>();
    model.config.compact_length = model.compact_length;
    model.config.epochs = meta.value("epochs", model.config.epochs);
    model.config.optimizer.learning_rate = meta.value("learning_rate", model.config.optimizer.learning_rate);
    model.config.optimizer.decay = meta.value("decay", model.config.optimizer.decay);
    model.config.optimizer.epsilon = meta.value("epsilon", model.config.optimizer.epsilon);
    model.config.clip_norm = meta.value("clip_norm", model.config.clip_norm);

    auto get_matrix = [&](const std::string& name) {
        const auto& block = checkpoint.block(name);
        if (block.dims.size() != 2 ||
            static_cast<std::int64_t>(block.values.size()) != block.dims[0] * block.dims[1]) {
            throw FormatError("checkpoint block '" + name + "' has inconsistent shape");
        }
        return Matrix(
            Eigen::Map<const Matrix>(block.values.data(), block.dims[0], block.dims[1]));
    };
    auto get_vector = [&](const std::string& name) {
        const auto& block = checkpoint.block(name);
        if (block.dims.size() != 1 || static_cast<std::int64_t>(block.values.size()) != block.dims[0]) {
            throw FormatError("checkpoint block '" + name + "' has inconsistent shape");
        }
        return Vector(Eigen::Map<const Vector>(block.values.data(), block.dims[0]));
    };
    auto get_cell = [&](const std::string& prefix) {
        LstmCell cell;
        cell.w_input = get_matrix(prefix + ".w_input");
        cell.w_hidden = get_matrix(prefix + ".w_hidden");
        cell.bias = get_vector(prefix + ".bias");
        cell.hidden_size = static_cast<int>(cell.w_hidden.cols());
        cell.input_size = static_cast<int>(cell.w_input.cols());
        return cell;
    };
    model.encoder1 = get_cell("encoder1");
    model.encoder2 = get_cell("encoder2");
    model.decoder1 = get_cell("decoder1");
    model.decoder2 = get_cell("decoder2");
    model.output.weight = get_matrix("output.weight");
    model.output.bias = get_vector("output.bias");
    model.output.activation = Activation::Identity;
    return model;
}

}  // namespace autolabel
