#include "autolabel/aecs.hpp"
#include "autolabel/neuralnet.hpp"
#include "autolabel/random.hpp"

#include <benchmark/benchmark.h>

using namespace autolabel;

namespace {

Matrix random_sequence(int steps, int channels, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(steps, channels);
    for (int t = 0; t < steps; ++t) {
        for (int c = 0; c < channels; ++c) {
            m(t, c) = rng.uniform(-1.0, 1.0);
        }
    }
    return m;
}

}  // namespace

static void BM_LstmForward(benchmark::State& state) {
    Rng rng(1);
    const auto cell = LstmCell::init(1, static_cast<int>(state.range(0)), rng);
    const auto sequence = random_sequence(64, 1, 2);
    for (auto _ : state) {
        auto trace = lstm_forward(cell, sequence);
        benchmark::DoNotOptimize(trace.hiddens.data());
    }
}
BENCHMARK(BM_LstmForward)->Arg(16)->Arg(32)->Arg(64);

static void BM_LstmBackward(benchmark::State& state) {
    Rng rng(1);
    const auto cell = LstmCell::init(1, static_cast<int>(state.range(0)), rng);
    const auto sequence = random_sequence(64, 1, 2);
    const auto trace = lstm_forward(cell, sequence);
    const Matrix upstream = Matrix::Ones(64, state.range(0));
    const Vector zero = Vector::Zero(state.range(0));
    for (auto _ : state) {
        LstmGrads grads = LstmGrads::zero(cell);
        auto back = lstm_backward(cell, trace, upstream, zero, zero, grads);
        benchmark::DoNotOptimize(back.d_inputs.data());
    }
}
BENCHMARK(BM_LstmBackward)->Arg(16)->Arg(32);

static void BM_EncodeSeries(benchmark::State& state) {
    AecsConfig config;
    config.compact_length = 12;
    const auto model = make_aecs_model(1, config, 5);
    TimeSeries series;
    series.values = random_sequence(static_cast<int>(state.range(0)), 1, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(encode_series(model, series).data());
    }
}
BENCHMARK(BM_EncodeSeries)->Arg(64)->Arg(140);

BENCHMARK_MAIN();
