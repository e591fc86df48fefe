/// Core kernel throughput: square matmul at the sizes the encoder touches
/// (per-gate LSTM blocks, projection layers) and the fused row softmax.

#include <benchmark/benchmark.h>

#include "edgekit/rng.hpp"
#include "edgekit/tensor.hpp"

namespace {

using namespace edgekit;

Tensor random_square(size_t n, Rng& rng) {
    Tensor t(n, n);
    for (Real& x : t.v) x = Real(rng.uniform(-1.0, 1.0));
    return t;
}

void BM_Matmul(benchmark::State& state) {
    Rng rng(2);
    const size_t n = size_t(state.range(0));
    const Tensor a = random_square(n, rng);
    const Tensor b = random_square(n, rng);
    for (auto _ : state) {
        const Tensor c = matmul(a, b);
        benchmark::DoNotOptimize(c.v.data());
    }
    // 2 n^3 flops per product.
    state.SetItemsProcessed(int64_t(state.iterations()) * 2 * int64_t(n) * int64_t(n) *
                            int64_t(n));
}

void BM_SoftmaxMasked(benchmark::State& state) {
    Rng rng(3);
    const size_t rows = size_t(state.range(0));
    const size_t cols = rows + 1;
    const Tensor logits = random_square(rows, rng);
    Tensor wide(rows, cols);
    for (size_t r = 0; r < rows; ++r)
        for (size_t c = 0; c < cols; ++c) wide.at(r, c) = logits.at(r, c % rows);
    std::vector<std::uint8_t> mask(rows * cols, 1);
    for (size_t r = 0; r < rows; ++r) mask[r * cols + r + 1] = 0;
    for (auto _ : state) {
        const Tensor p = softmax_masked(wide, mask);
        benchmark::DoNotOptimize(p.v.data());
    }
    state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(rows));
}

}  // namespace

BENCHMARK(BM_Matmul)->Arg(32)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_SoftmaxMasked)->Arg(16)->Arg(64)->Arg(256);

BENCHMARK_MAIN();
