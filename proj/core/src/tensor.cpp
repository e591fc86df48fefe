#include "edgekit/tensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace edgekit {

namespace {
using EMat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using EMap = Eigen::Map<EMat>;
using ECMap = Eigen::Map<const EMat>;

ECMap cmap(const Tensor& t) {
    return ECMap(t.v.data(), static_cast<Eigen::Index>(t.n_rows),
                 static_cast<Eigen::Index>(t.n_cols));
}
EMap map(Tensor& t) {
    return EMap(t.v.data(), static_cast<Eigen::Index>(t.n_rows),
                static_cast<Eigen::Index>(t.n_cols));
}
}  // namespace

Tensor::Tensor(size_t rows, size_t cols, std::vector<Real> values)
    : n_rows(rows), n_cols(cols), v(std::move(values)) {
    require(v.size() == rows * cols, "tensor: ", rows, "x", cols, " needs ", rows * cols,
            " values, got ", v.size());
}

Tensor::Tensor(std::initializer_list<Real> row) : n_rows(1), n_cols(row.size()), v(row) {}

Tensor::Tensor(std::initializer_list<std::initializer_list<Real>> rows) {
    n_rows = rows.size();
    n_cols = rows.size() ? rows.begin()->size() : 0;
    v.reserve(n_rows * n_cols);
    for (const auto& r : rows) {
        require(r.size() == n_cols, "tensor: ragged initializer rows");
        v.insert(v.end(), r.begin(), r.end());
    }
}

std::string Tensor::shape_str() const {
    return std::to_string(n_rows) + "x" + std::to_string(n_cols);
}

Tensor zeros(size_t rows, size_t cols) { return Tensor(rows, cols); }

Tensor ones(size_t rows, size_t cols) { return full(rows, cols, Real(1)); }

Tensor full(size_t rows, size_t cols, Real value) {
    Tensor t(rows, cols);
    std::fill(t.v.begin(), t.v.end(), value);
    return t;
}

bool all_finite(const Tensor& t) {
    for (Real x : t.v)
        if (!std::isfinite(x)) return false;
    return true;
}

void check_finite(const Tensor& t, const char* what) {
    if (!all_finite(t)) fail("non-finite value produced by op '", what, "' (", t.shape_str(), ")");
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    require(a.n_cols == b.n_rows, "matmul: shape mismatch ", a.shape_str(), " vs ", b.shape_str());
    Tensor out(a.n_rows, b.n_cols);
    map(out).noalias() = cmap(a) * cmap(b);
    return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    require(a.n_cols == b.n_cols, "matmul_nt: shape mismatch ", a.shape_str(), " vs ",
            b.shape_str());
    Tensor out(a.n_rows, b.n_rows);
    map(out).noalias() = cmap(a) * cmap(b).transpose();
    return out;
}

namespace {
template <class F>
Tensor broadcast_binary(const Tensor& a, const Tensor& b, const char* name, F f) {
    if (a.same_shape(b)) {
        Tensor out(a.n_rows, a.n_cols);
        for (size_t i = 0; i < a.size(); ++i) out.v[i] = f(a.v[i], b.v[i]);
        return out;
    }
    require(b.n_rows == 1 && b.n_cols == a.n_cols, name, ": shape mismatch ", a.shape_str(),
            " vs ", b.shape_str());
    Tensor out(a.n_rows, a.n_cols);
    for (size_t r = 0; r < a.n_rows; ++r) {
        const Real* ar = a.row_ptr(r);
        Real* or_ = out.row_ptr(r);
        for (size_t c = 0; c < a.n_cols; ++c) or_[c] = f(ar[c], b.v[c]);
    }
    return out;
}
}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    return broadcast_binary(a, b, "add", [](Real x, Real y) { return x + y; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return broadcast_binary(a, b, "elementwise-multiply", [](Real x, Real y) { return x * y; });
}

Tensor scale(const Tensor& a, Real c) {
    Tensor out = a;
    for (Real& x : out.v) x *= c;
    return out;
}

Tensor tanh_t(const Tensor& a) {
    Tensor out = a;
    for (Real& x : out.v) x = std::tanh(x);
    return out;
}

Tensor sigmoid_t(const Tensor& a) {
    Tensor out = a;
    for (Real& x : out.v) x = Real(1) / (Real(1) + std::exp(-x));
    return out;
}

Tensor softmax_masked(const Tensor& logits, const std::vector<std::uint8_t>& mask) {
    require(mask.size() == logits.size(), "softmax-with-mask: mask size ", mask.size(),
            " does not match logits ", logits.shape_str());
    Tensor out(logits.n_rows, logits.n_cols);
    for (size_t r = 0; r < logits.n_rows; ++r) {
        const Real* lr = logits.row_ptr(r);
        const std::uint8_t* mr = mask.data() + r * logits.n_cols;
        Real mx = -std::numeric_limits<Real>::infinity();
        for (size_t c = 0; c < logits.n_cols; ++c)
            if (mr[c] && lr[c] > mx) mx = lr[c];
        require(std::isfinite(mx), "softmax-with-mask: row ", r, " has no unmasked position");
        Real z = 0;
        Real* pr = out.row_ptr(r);
        for (size_t c = 0; c < logits.n_cols; ++c) {
            pr[c] = mr[c] ? std::exp(lr[c] - mx) : Real(0);
            z += pr[c];
        }
        for (size_t c = 0; c < logits.n_cols; ++c) pr[c] /= z;
    }
    return out;
}

Real l2_norm(const Real* x, size_t n) {
    Real s = 0;
    for (size_t i = 0; i < n; ++i) s += x[i] * x[i];
    return std::sqrt(s);
}

Real dot(const Real* a, const Real* b, size_t n) {
    Real s = 0;
    for (size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

Tensor l2_normalize_rows(const Tensor& a, Real eps) {
    Tensor out(a.n_rows, a.n_cols);
    for (size_t r = 0; r < a.n_rows; ++r) {
        const Real* ar = a.row_ptr(r);
        Real n = std::max(l2_norm(ar, a.n_cols), eps);
        Real* or_ = out.row_ptr(r);
        for (size_t c = 0; c < a.n_cols; ++c) or_[c] = ar[c] / n;
    }
    return out;
}

Tensor sum_all(const Tensor& a) {
    Real s = 0;
    for (Real x : a.v) s += x;
    Tensor out(1, 1);
    out.v[0] = s;
    return out;
}

Tensor sum_rows(const Tensor& a) {
    Tensor out(1, a.n_cols);
    for (size_t r = 0; r < a.n_rows; ++r) {
        const Real* ar = a.row_ptr(r);
        for (size_t c = 0; c < a.n_cols; ++c) out.v[c] += ar[c];
    }
    return out;
}

Tensor max_rows(const Tensor& a, std::vector<size_t>* argmax_rows) {
    require(a.n_rows >= 1, "max_rows: empty input");
    Tensor out(1, a.n_cols);
    std::vector<size_t> arg(a.n_cols, 0);
    for (size_t c = 0; c < a.n_cols; ++c) out.v[c] = a.at(0, c);
    for (size_t r = 1; r < a.n_rows; ++r) {
        const Real* ar = a.row_ptr(r);
        for (size_t c = 0; c < a.n_cols; ++c) {
            if (ar[c] > out.v[c]) {
                out.v[c] = ar[c];
                arg[c] = r;
            }
        }
    }
    if (argmax_rows) *argmax_rows = std::move(arg);
    return out;
}

Tensor gather_rows(const Tensor& a, const std::vector<size_t>& ids) {
    Tensor out(ids.size(), a.n_cols);
    for (size_t i = 0; i < ids.size(); ++i) {
        require(ids[i] < a.n_rows, "embedding-gather: row ", ids[i], " out of range for ",
                a.shape_str());
        std::copy(a.row_ptr(ids[i]), a.row_ptr(ids[i]) + a.n_cols, out.row_ptr(i));
    }
    return out;
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
    require(a.n_rows == b.n_rows, "concat: row mismatch ", a.shape_str(), " vs ", b.shape_str());
    Tensor out(a.n_rows, a.n_cols + b.n_cols);
    for (size_t r = 0; r < a.n_rows; ++r) {
        std::copy(a.row_ptr(r), a.row_ptr(r) + a.n_cols, out.row_ptr(r));
        std::copy(b.row_ptr(r), b.row_ptr(r) + b.n_cols, out.row_ptr(r) + a.n_cols);
    }
    return out;
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
    require(!parts.empty(), "concat: no parts");
    size_t cols = parts[0].n_cols, rows = 0;
    for (const Tensor& p : parts) {
        require(p.n_cols == cols, "concat: column mismatch ", p.shape_str());
        rows += p.n_rows;
    }
    Tensor out(rows, cols);
    size_t r = 0;
    for (const Tensor& p : parts) {
        std::copy(p.v.begin(), p.v.end(), out.row_ptr(r));
        r += p.n_rows;
    }
    return out;
}

Tensor slice_cols(const Tensor& a, size_t c0, size_t c1) {
    require(c0 < c1 && c1 <= a.n_cols, "slice: columns [", c0, ",", c1, ") out of range for ",
            a.shape_str());
    Tensor out(a.n_rows, c1 - c0);
    for (size_t r = 0; r < a.n_rows; ++r)
        std::copy(a.row_ptr(r) + c0, a.row_ptr(r) + c1, out.row_ptr(r));
    return out;
}

size_t argmax_row(const Tensor& t, size_t row) {
    require(row < t.n_rows && t.n_cols > 0, "argmax: bad row");
    const Real* p = t.row_ptr(row);
    size_t best = 0;
    for (size_t c = 1; c < t.n_cols; ++c)
        if (p[c] > p[best]) best = c;
    return best;
}

}  // namespace edgekit
