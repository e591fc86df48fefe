/// Inference scoring cost against index size: the fast route folds the whole
/// support set into one vector, so one edge costs O(d) however large the
/// index grows; the explainable route visits every stored edge.

#include <benchmark/benchmark.h>

#include <vector>

#include "edgekit/edge_model.hpp"
#include "edgekit/rng.hpp"
#include "edgekit/tensor.hpp"

namespace {

using namespace edgekit;

constexpr size_t kDim = 128;
constexpr Real kTau = 64;

Tensor random_rows(size_t rows, size_t cols, Rng& rng) {
    Tensor t(rows, cols);
    for (Real& x : t.v) x = Real(rng.uniform(-1.0, 1.0));
    return t;
}

ExplainIndex make_index(size_t n, Rng& rng) {
    ExplainIndex idx;
    idx.vectors = random_rows(n, kDim, rng);
    idx.norms.resize(n);
    idx.entries.resize(n);
    for (size_t i = 0; i < n; ++i)
        idx.norms[i] = l2_norm(idx.vectors.v.data() + i * kDim, kDim);
    return idx;
}

/// Fast mode: the support set is already folded into one target row.
void BM_FastScore(benchmark::State& state) {
    Rng rng(1);
    const size_t n = size_t(state.range(0));
    const ExplainIndex idx = make_index(n, rng);
    Tensor target(1, kDim);
    const Tensor folded = l2_normalize_rows(idx.vectors);
    for (size_t i = 0; i < n; ++i)
        for (size_t c = 0; c < kDim; ++c) target.at(0, c) += folded.at(i, c);
    const Tensor query = random_rows(1, kDim, rng);

    for (auto _ : state) {
        const Tensor logits = similarity_logits(query, target, Similarity::cos, kTau);
        benchmark::DoNotOptimize(logits.v.data());
    }
    state.SetItemsProcessed(int64_t(state.iterations()));
}

/// Explainable mode: one similarity per stored support edge.
void BM_ExplainableScore(benchmark::State& state) {
    Rng rng(1);
    const size_t n = size_t(state.range(0));
    const ExplainIndex idx = make_index(n, rng);
    const Tensor query = random_rows(1, kDim, rng);

    for (auto _ : state) {
        const std::vector<Real> sims = support_similarities(query, idx, Similarity::cos, kTau);
        Real total = 0;
        for (Real s : sims) total += s;
        benchmark::DoNotOptimize(total);
    }
    state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(n));
}

}  // namespace

BENCHMARK(BM_FastScore)->Arg(1000)->Arg(10000)->Arg(100000);
BENCHMARK(BM_ExplainableScore)->Arg(1000)->Arg(10000)->Arg(100000);
