#include "autolabel/neuralnet.hpp"

#include <cmath>

namespace autolabel {

namespace {

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Vector uniform_vector(Eigen::Index size, double bound, Rng& rng) {
    Vector v(size);
    for (Eigen::Index i = 0; i < size; ++i) {
        v[i] = rng.uniform(-bound, bound);
    }
    return v;
}

Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, double bound, Rng& rng) {
    // Row-major fill order so the draw sequence is layout-independent.
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = rng.uniform(-bound, bound);
        }
    }
    return m;
}

}  // namespace

DenseLayer DenseLayer::init(int input, int output, Activation activation, Rng& rng) {
    if (input < 1 || output < 1) {
        throw ShapeError("dense layer sizes must be positive");
    }
    DenseLayer layer;
    const double bound = 1.0 / std::sqrt(static_cast<double>(input));
    layer.weight = uniform_matrix(output, input, bound, rng);
    layer.bias = uniform_vector(output, bound, rng);
    layer.activation = activation;
    return layer;
}

Vector dense_forward(const DenseLayer& layer, const Vector& input) {
    if (input.size() != layer.weight.cols()) {
        throw ShapeError("dense_forward: input size mismatch");
    }
    Vector pre = layer.weight * input + layer.bias;
    switch (layer.activation) {
        case Activation::Identity:
            return pre;
        case Activation::Tanh:
            return pre.array().tanh().matrix();
        case Activation::Sigmoid:
            return pre.unaryExpr([](double x) { return sigmoid(x); });
    }
    return pre;
}

Matrix dense_forward_rows(const DenseLayer& layer, const Matrix& inputs) {
    if (inputs.cols() != layer.weight.cols()) {
        throw ShapeError("dense_forward_rows: input size mismatch");
    }
    Matrix pre = inputs * layer.weight.transpose();
    pre.rowwise() += layer.bias.transpose();
    switch (layer.activation) {
        case Activation::Identity:
            return pre;
        case Activation::Tanh:
            return pre.array().tanh().matrix();
        case Activation::Sigmoid:
            return pre.unaryExpr([](double x) { return sigmoid(x); });
    }
    return pre;
}

DenseGrads DenseGrads::zero(const DenseLayer& layer) {
    DenseGrads grads;
    grads.weight = Matrix::Zero(layer.weight.rows(), layer.weight.cols());
    grads.bias = Vector::Zero(layer.bias.size());
    return grads;
}

Matrix dense_backward_rows(const DenseLayer& layer, const Matrix& inputs, const Matrix& outputs,
                           const Matrix& d_outputs, DenseGrads& grads) {
    Matrix d_pre;
    switch (layer.activation) {
        case Activation::Identity:
            d_pre = d_outputs;
            break;
        case Activation::Tanh:
            d_pre = d_outputs.cwiseProduct((1.0 - outputs.array().square()).matrix());
            break;
        case Activation::Sigmoid:
            d_pre = d_outputs.cwiseProduct((outputs.array() * (1.0 - outputs.array())).matrix());
            break;
    }
    grads.weight.noalias() += d_pre.transpose() * inputs;
    grads.bias.noalias() += d_pre.colwise().sum().transpose();
    return d_pre * layer.weight;
}

LstmCell LstmCell::init(int input, int hidden, Rng& rng) {
    if (input < 1 || hidden < 1) {
        throw ShapeError("lstm cell sizes must be positive");
    }
    LstmCell cell;
    cell.input_size = input;
    cell.hidden_size = hidden;
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    cell.w_input = uniform_matrix(4 * hidden, input, bound, rng);
    cell.w_hidden = uniform_matrix(4 * hidden, hidden, bound, rng);
    cell.bias = uniform_vector(4 * hidden, bound, rng);
    return cell;
}

Vector LstmTrace::final_hidden() const {
    return steps() == 0 ? initial_hidden : Vector(hiddens.row(steps() - 1));
}

Vector LstmTrace::final_cell() const {
    return steps() == 0 ? initial_cell : Vector(cells.row(steps() - 1));
}

LstmTrace lstm_forward(const LstmCell& cell, const Matrix& sequence, const Mask& mask,
                       const Vector& initial_hidden, const Vector& initial_cell) {
    const int t_steps = static_cast<int>(sequence.rows());
    const int h = cell.hidden_size;
    if (sequence.cols() != cell.input_size) {
        throw ShapeError("lstm_forward: sequence channel count does not match cell input size");
    }
    if (static_cast<int>(mask.size()) != t_steps) {
        throw ShapeError("lstm_forward: mask length does not match sequence length");
    }
    if (initial_hidden.size() != h || initial_cell.size() != h) {
        throw ShapeError("lstm_forward: initial state size mismatch");
    }

    LstmTrace trace;
    trace.inputs = sequence;
    trace.mask = mask;
    trace.gate_input = Matrix::Zero(t_steps, h);
    trace.gate_forget = Matrix::Zero(t_steps, h);
    trace.gate_cand = Matrix::Zero(t_steps, h);
    trace.gate_output = Matrix::Zero(t_steps, h);
    trace.cells = Matrix::Zero(t_steps, h);
    trace.hiddens = Matrix::Zero(t_steps, h);
    trace.initial_hidden = initial_hidden;
    trace.initial_cell = initial_cell;

    Vector hidden = initial_hidden;
    Vector cell_state = initial_cell;
    Vector pre(4 * h);
    for (int t = 0; t < t_steps; ++t) {
        if (!mask[static_cast<std::size_t>(t)]) {
            trace.hiddens.row(t) = hidden.transpose();
            trace.cells.row(t) = cell_state.transpose();
            continue;
        }
        pre.noalias() = cell.w_input * sequence.row(t).transpose();
        pre.noalias() += cell.w_hidden * hidden;
        pre += cell.bias;

        for (int j = 0; j < h; ++j) {
            const double gate_in = sigmoid(pre[j]);
            const double gate_forget = sigmoid(pre[h + j]);
            const double gate_cand = std::tanh(pre[2 * h + j]);
            const double gate_out = sigmoid(pre[3 * h + j]);
            const double c = gate_forget * cell_state[j] + gate_in * gate_cand;
            trace.gate_input(t, j) = gate_in;
            trace.gate_forget(t, j) = gate_forget;
            trace.gate_cand(t, j) = gate_cand;
            trace.gate_output(t, j) = gate_out;
            cell_state[j] = c;
            hidden[j] = gate_out * std::tanh(c);
        }
        trace.cells.row(t) = cell_state.transpose();
        trace.hiddens.row(t) = hidden.transpose();
    }
    return trace;
}

LstmTrace lstm_forward(const LstmCell& cell, const Matrix& sequence) {
    const Mask mask(static_cast<std::size_t>(sequence.rows()), 1);
    return lstm_forward(cell, sequence, mask, Vector::Zero(cell.hidden_size), Vector::Zero(cell.hidden_size));
}

LstmGrads LstmGrads::zero(const LstmCell& cell) {
    LstmGrads grads;
    grads.w_input = Matrix::Zero(4 * cell.hidden_size, cell.input_size);
    grads.w_hidden = Matrix::Zero(4 * cell.hidden_size, cell.hidden_size);
    grads.bias = Vector::Zero(4 * cell.hidden_size);
    return grads;
}

LstmBackward lstm_backward(const LstmCell& cell, const LstmTrace& trace, const Matrix& d_hiddens,
                           const Vector& d_final_hidden, const Vector& d_final_cell, LstmGrads& grads) {
    const int t_steps = trace.steps();
    const int h = cell.hidden_size;
    if (d_hiddens.rows() != t_steps || d_hiddens.cols() != h) {
        throw ShapeError("lstm_backward: d_hiddens shape mismatch");
    }

    LstmBackward result;
    result.d_inputs = Matrix::Zero(t_steps, cell.input_size);

    Vector d_hidden = d_final_hidden;
    Vector d_cell = d_final_cell;
    Vector d_pre(4 * h);
    for (int t = t_steps - 1; t >= 0; --t) {
        if (!trace.mask[static_cast<std::size_t>(t)]) {
            // State copied through: gradient passes to the previous step.
            d_hidden += d_hiddens.row(t).transpose();
            continue;
        }
        const Vector cell_prev = (t == 0) ? trace.initial_cell : Vector(trace.cells.row(t - 1));
        const Vector hidden_prev = (t == 0) ? trace.initial_hidden : Vector(trace.hiddens.row(t - 1));

        for (int j = 0; j < h; ++j) {
            const double gate_in = trace.gate_input(t, j);
            const double gate_forget = trace.gate_forget(t, j);
            const double gate_cand = trace.gate_cand(t, j);
            const double gate_out = trace.gate_output(t, j);
            const double tanh_c = std::tanh(trace.cells(t, j));

            const double dh = d_hiddens(t, j) + d_hidden[j];
            const double dc = d_cell[j] + dh * gate_out * (1.0 - tanh_c * tanh_c);

            const double d_gate_out = dh * tanh_c;
            const double d_gate_in = dc * gate_cand;
            const double d_gate_forget = dc * cell_prev[j];
            const double d_gate_cand = dc * gate_in;

            d_pre[j] = d_gate_in * gate_in * (1.0 - gate_in);
            d_pre[h + j] = d_gate_forget * gate_forget * (1.0 - gate_forget);
            d_pre[2 * h + j] = d_gate_cand * (1.0 - gate_cand * gate_cand);
            d_pre[3 * h + j] = d_gate_out * gate_out * (1.0 - gate_out);

            d_cell[j] = dc * gate_forget;
        }

        grads.w_input.noalias() += d_pre * trace.inputs.row(t);
        grads.w_hidden.noalias() += d_pre * hidden_prev.transpose();
        grads.bias += d_pre;

        result.d_inputs.row(t) = (cell.w_input.transpose() * d_pre).transpose();
        d_hidden.noalias() = cell.w_hidden.transpose() * d_pre;
    }

    result.d_initial_hidden = d_hidden;
    result.d_initial_cell = d_cell;
    return result;
}

std::ptrdiff_t total_size(const std::vector<ParamView>& views) {
    std::ptrdiff_t total = 0;
    for (const auto& view : views) {
        total += view.size;
    }
    return total;
}

Vector flatten(const std::vector<ParamView>& views) {
    Vector flat(total_size(views));
    std::ptrdiff_t offset = 0;
    for (const auto& view : views) {
        for (std::ptrdiff_t i = 0; i < view.size; ++i) {
            flat[offset + i] = view.data[i];
        }
        offset += view.size;
    }
    return flat;
}

void unflatten(const Vector& flat, const std::vector<ParamView>& views) {
    if (flat.size() != total_size(views)) {
        throw ShapeError("unflatten: flat vector size mismatch");
    }
    std::ptrdiff_t offset = 0;
    for (const auto& view : views) {
        for (std::ptrdiff_t i = 0; i < view.size; ++i) {
            view.data[i] = flat[offset + i];
        }
        offset += view.size;
    }
}

std::vector<ParamView> views_of(LstmCell& cell) {
    return {{cell.w_input.data(), cell.w_input.size()},
            {cell.w_hidden.data(), cell.w_hidden.size()},
            {cell.bias.data(), cell.bias.size()}};
}

std::vector<ParamView> views_of(DenseLayer& layer) {
    return {{layer.weight.data(), layer.weight.size()}, {layer.bias.data(), layer.bias.size()}};
}

std::vector<ParamView> views_of(LstmGrads& grads) {
    return {{grads.w_input.data(), grads.w_input.size()},
            {grads.w_hidden.data(), grads.w_hidden.size()},
            {grads.bias.data(), grads.bias.size()}};
}

std::vector<ParamView> views_of(DenseGrads& grads) {
    return {{grads.weight.data(), grads.weight.size()}, {grads.bias.data(), grads.bias.size()}};
}

void append_views(std::vector<ParamView>& into, std::vector<ParamView> more) {
    into.insert(into.end(), more.begin(), more.end());
}

double clip_global_norm(const std::vector<ParamView>& grads, double max_norm) {
    double sum_squares = 0.0;
    for (const auto& view : grads) {
        for (std::ptrdiff_t i = 0; i < view.size; ++i) {
            sum_squares += view.data[i] * view.data[i];
        }
    }
    const double norm = std::sqrt(sum_squares);
    if (norm > max_norm && norm > 0.0) {
        const double scale = max_norm / norm;
        for (const auto& view : grads) {
            for (std::ptrdiff_t i = 0; i < view.size; ++i) {
                view.data[i] *= scale;
            }
        }
    }
    return norm;
}

RmsProp::RmsProp(RmsPropConfig config, std::ptrdiff_t parameter_count)
    : config_(config), accum_(Vector::Zero(parameter_count)) {
    if (config_.learning_rate <= 0.0) {
        throw ConfigError("RMSProp learning rate must be positive");
    }
}

void RmsProp::step(const std::vector<ParamView>& params, const std::vector<ParamView>& grads) {
    if (total_size(params) != accum_.size() || total_size(grads) != accum_.size()) {
        throw ShapeError("RmsProp::step: parameter layout mismatch");
    }
    for (const auto& view : grads) {
        for (std::ptrdiff_t i = 0; i < view.size; ++i) {
            if (!std::isfinite(view.data[i])) {
                throw TrainingError("non-finite gradient in optimizer step");
            }
        }
    }
    std::ptrdiff_t offset = 0;
    for (std::size_t v = 0; v < params.size(); ++v) {
        const auto& p = params[v];
        const auto& g = grads[v];
        if (p.size != g.size) {
            throw ShapeError("RmsProp::step: parameter/gradient block mismatch");
        }
        for (std::ptrdiff_t i = 0; i < p.size; ++i) {
            double& a = accum_[offset + i];
            const double grad = g.data[i];
            a = config_.decay * a + (1.0 - config_.decay) * grad * grad;
            p.data[i] -= config_.learning_rate * grad / std::sqrt(a + config_.epsilon);
        }
        offset += p.size;
    }
}

}  // namespace autolabel
