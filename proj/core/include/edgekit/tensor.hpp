#ifndef EDGEKIT_TENSOR_HPP
#define EDGEKIT_TENSOR_HPP

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "edgekit/common.hpp"

namespace edgekit {

/// Dense row-major matrix of Real. Rank-1 data is stored as a 1 x n row;
/// scalars as 1 x 1. All numeric kernels live in tensor.cpp.
struct Tensor {
    size_t n_rows = 0;
    size_t n_cols = 0;
    std::vector<Real> v;

    Tensor() = default;
    Tensor(size_t rows, size_t cols) : n_rows(rows), n_cols(cols), v(rows * cols, Real(0)) {}
    Tensor(size_t rows, size_t cols, std::vector<Real> values);
    explicit Tensor(std::initializer_list<Real> row);
    Tensor(std::initializer_list<std::initializer_list<Real>> rows);

    size_t size() const { return v.size(); }
    bool empty() const { return v.empty(); }
    Real& at(size_t r, size_t c) { return v[r * n_cols + c]; }
    Real at(size_t r, size_t c) const { return v[r * n_cols + c]; }
    Real* row_ptr(size_t r) { return v.data() + r * n_cols; }
    const Real* row_ptr(size_t r) const { return v.data() + r * n_cols; }

    bool same_shape(const Tensor& o) const { return n_rows == o.n_rows && n_cols == o.n_cols; }
    std::string shape_str() const;
};

Tensor zeros(size_t rows, size_t cols);
Tensor ones(size_t rows, size_t cols);
Tensor full(size_t rows, size_t cols, Real value);

/// Throws if any value is NaN or infinite; `what` names the producing op.
void check_finite(const Tensor& t, const char* what);
bool all_finite(const Tensor& t);

// ---------------------------------------------------------------------------
// Forward kernels. These are the single source of numeric truth; the autodiff
// tape and the inference fast paths both call them.
// ---------------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);     // (n,k)·(k,m) -> (n,m)
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // (n,d)·(m,d)^T -> (n,m)

/// Elementwise add; `b` may be a 1 x cols row broadcast over rows of `a`.
Tensor add(const Tensor& a, const Tensor& b);
/// Elementwise multiply; same broadcast rule as add.
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, Real c);

Tensor tanh_t(const Tensor& a);
Tensor sigmoid_t(const Tensor& a);

/// Row-wise softmax over positions where mask != 0; masked entries are
/// exactly zero in the output. mask must match a's shape. A row with no
/// unmasked position is an error.
Tensor softmax_masked(const Tensor& logits, const std::vector<std::uint8_t>& mask);

/// Rows scaled to unit L2 norm. Norms below `eps` are floored to `eps`
/// (training keeps gradients finite that way); callers that must reject
/// zero vectors outright check the norm first.
Tensor l2_normalize_rows(const Tensor& a, Real eps = Real(1e-12));
Real l2_norm(const Real* x, size_t n);

Tensor sum_all(const Tensor& a);   // -> 1 x 1
Tensor sum_rows(const Tensor& a);  // column sums -> 1 x cols

/// Column-wise max over rows -> 1 x cols; argmax_rows receives the winning
/// row per column when non-null (used by max-pool backward).
Tensor max_rows(const Tensor& a, std::vector<size_t>* argmax_rows = nullptr);

Tensor gather_rows(const Tensor& a, const std::vector<size_t>& ids);
Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor concat_rows(const std::vector<Tensor>& parts);
/// Columns [c0, c1) of every row.
Tensor slice_cols(const Tensor& a, size_t c0, size_t c1);

Real dot(const Real* a, const Real* b, size_t n);

/// argmax with ties broken toward the lowest index.
size_t argmax_row(const Tensor& t, size_t row);

}  // namespace edgekit

#endif
