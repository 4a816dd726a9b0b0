#pragma once

#include "autolabel/random.hpp"
#include "autolabel/types.hpp"

#include <cstdint>
#include <vector>

namespace autolabel {

enum class Activation : std::uint8_t { Identity, Tanh, Sigmoid };

struct DenseLayer {
    Matrix weight;  // out x in
    Vector bias;    // out
    Activation activation = Activation::Identity;

    int input_size() const { return static_cast<int>(weight.cols()); }
    int output_size() const { return static_cast<int>(weight.rows()); }

    /// Parameters uniform in [-1/sqrt(in), 1/sqrt(in)].
    static DenseLayer init(int input, int output, Activation activation, Rng& rng);
};

Vector dense_forward(const DenseLayer& layer, const Vector& input);

/// Row-wise forward: each row of `inputs` is one sample.
Matrix dense_forward_rows(const DenseLayer& layer, const Matrix& inputs);

struct DenseGrads {
    Matrix weight;
    Vector bias;

    static DenseGrads zero(const DenseLayer& layer);
};

/// Row-wise backward. `outputs` are the cached post-activation rows from the
/// forward pass. Accumulates parameter gradients into `grads` and returns the
/// gradient w.r.t. the input rows.
Matrix dense_backward_rows(const DenseLayer& layer, const Matrix& inputs, const Matrix& outputs,
                           const Matrix& d_outputs, DenseGrads& grads);

/// Standard LSTM cell. Gate blocks are stacked row-wise in the order
/// input, forget, candidate, output.
struct LstmCell {
    int input_size = 0;
    int hidden_size = 0;
    Matrix w_input;   // 4h x input
    Matrix w_hidden;  // 4h x h
    Vector bias;      // 4h

    /// Parameters uniform in [-1/sqrt(h), 1/sqrt(h)], bit-reproducible per seed.
    static LstmCell init(int input, int hidden, Rng& rng);
};

using Mask = std::vector<std::uint8_t>;

/// Forward cache kept for backpropagation through time.
struct LstmTrace {
    Matrix inputs;  // t x input
    Mask mask;
    Matrix gate_input, gate_forget, gate_cand, gate_output;  // t x h, post-activation
    Matrix cells;                                            // t x h
    Matrix hiddens;                                          // t x h
    Vector initial_hidden, initial_cell;

    int steps() const { return static_cast<int>(hiddens.rows()); }
    /// Carried state after the last step (masked steps carry state through).
    Vector final_hidden() const;
    Vector final_cell() const;
};

/// Masked timesteps do not update state; they copy it forward.
LstmTrace lstm_forward(const LstmCell& cell, const Matrix& sequence, const Mask& mask,
                       const Vector& initial_hidden, const Vector& initial_cell);

/// Zero initial state, all timesteps valid.
LstmTrace lstm_forward(const LstmCell& cell, const Matrix& sequence);

struct LstmGrads {
    Matrix w_input, w_hidden;
    Vector bias;

    static LstmGrads zero(const LstmCell& cell);
};

struct LstmBackward {
    Matrix d_inputs;  // t x input
    Vector d_initial_hidden, d_initial_cell;
};

/// Backpropagation through time. `d_hiddens` holds the upstream gradient for
/// every hidden output row; `d_final_*` add gradient on the carried final
/// state. Parameter gradients accumulate into `grads`.
LstmBackward lstm_backward(const LstmCell& cell, const LstmTrace& trace, const Matrix& d_hiddens,
                           const Vector& d_final_hidden, const Vector& d_final_cell, LstmGrads& grads);

// ---- flat parameter plumbing shared by the optimizer, gradient clipping,
// ---- finite-difference checks, and checkpoints ----

struct ParamView {
    double* data = nullptr;
    std::ptrdiff_t size = 0;
};

std::ptrdiff_t total_size(const std::vector<ParamView>& views);
Vector flatten(const std::vector<ParamView>& views);
void unflatten(const Vector& flat, const std::vector<ParamView>& views);

std::vector<ParamView> views_of(LstmCell& cell);
std::vector<ParamView> views_of(DenseLayer& layer);
std::vector<ParamView> views_of(LstmGrads& grads);
std::vector<ParamView> views_of(DenseGrads& grads);
void append_views(std::vector<ParamView>& into, std::vector<ParamView> more);

/// Scales gradients in place so the global L2 norm is at most max_norm.
/// Returns the pre-clip norm.
double clip_global_norm(const std::vector<ParamView>& grads, double max_norm);

struct RmsPropConfig {
    double learning_rate = 0.003;
    double decay = 0.9;
    double epsilon = 1e-8;
};

/// RMSProp over a fixed flat parameter layout:
///   a <- decay*a + (1-decay)*g^2 ;  theta <- theta - lr*g/sqrt(a+eps)
class RmsProp {
public:
    RmsProp(RmsPropConfig config, std::ptrdiff_t parameter_count);

    /// Throws TrainingError on non-finite gradients; parameters untouched.
    void step(const std::vector<ParamView>& params, const std::vector<ParamView>& grads);

    const Vector& accumulator() const { return accum_; }

private:
    RmsPropConfig config_;
    Vector accum_;
};

}  // namespace autolabel
