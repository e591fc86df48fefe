#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "edgekit/common.hpp"
#include "edgekit/rng.hpp"
#include "edgekit/tensor.hpp"

using namespace edgekit;

namespace {

Tensor random_tensor(size_t rows, size_t cols, Rng& rng) {
    Tensor t(rows, cols);
    for (Real& x : t.v) x = rng.uniform(Real(-2), Real(2));
    return t;
}

/// Reference product: plain triple loop, no blocking, no library.
Tensor matmul_ref(const Tensor& a, const Tensor& b) {
    Tensor out(a.n_rows, b.n_cols);
    for (size_t i = 0; i < a.n_rows; ++i)
        for (size_t k = 0; k < a.n_cols; ++k)
            for (size_t j = 0; j < b.n_cols; ++j) out.at(i, j) += a.at(i, k) * b.at(k, j);
    return out;
}

Tensor transpose_ref(const Tensor& a) {
    Tensor out(a.n_cols, a.n_rows);
    for (size_t i = 0; i < a.n_rows; ++i)
        for (size_t j = 0; j < a.n_cols; ++j) out.at(j, i) = a.at(i, j);
    return out;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    REQUIRE(a.same_shape(b));
    double m = 0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(double(a.v[i] - b.v[i])));
    return m;
}

}  // namespace

TEST_SUITE("tensor") {

TEST_CASE("constructors fix shapes and contents") {
    Tensor row{Real(1), Real(2), Real(3)};
    CHECK(row.n_rows == 1);
    CHECK(row.n_cols == 3);
    CHECK(row.at(0, 2) == Real(3));

    Tensor m{{Real(1), Real(2)}, {Real(3), Real(4)}, {Real(5), Real(6)}};
    CHECK(m.n_rows == 3);
    CHECK(m.n_cols == 2);
    CHECK(m.at(2, 0) == Real(5));

    CHECK(zeros(2, 3).size() == 6);
    CHECK(ones(2, 2).at(1, 1) == Real(1));
    CHECK(full(1, 2, Real(7)).at(0, 1) == Real(7));
    CHECK(Tensor().empty());
}

TEST_CASE("matmul matches a triple-loop reference") {
    Rng rng(11);
    const std::array<std::array<size_t, 3>, 4> shapes{
        {{1, 1, 1}, {3, 4, 5}, {7, 2, 9}, {5, 16, 3}}};
    for (auto [n, k, m] : shapes) {
        Tensor a = random_tensor(n, k, rng);
        Tensor b = random_tensor(k, m, rng);
        CHECK(max_abs_diff(matmul(a, b), matmul_ref(a, b)) < 1e-12);
    }
    CHECK_THROWS_AS(matmul(zeros(2, 3), zeros(2, 3)), Error);
}

TEST_CASE("matmul_nt equals matmul against the transpose") {
    Rng rng(12);
    Tensor a = random_tensor(4, 6, rng);
    Tensor b = random_tensor(5, 6, rng);
    CHECK(max_abs_diff(matmul_nt(a, b), matmul_ref(a, transpose_ref(b))) < 1e-12);
    CHECK_THROWS_AS(matmul_nt(zeros(2, 3), zeros(5, 4)), Error);
}

TEST_CASE("add and mul broadcast a 1 x cols row over all rows") {
    Rng rng(13);
    Tensor a = random_tensor(3, 4, rng);
    Tensor b = random_tensor(3, 4, rng);
    Tensor row = random_tensor(1, 4, rng);

    Tensor s = add(a, b);
    Tensor p = mul(a, b);
    Tensor sb = add(a, row);
    Tensor pb = mul(a, row);
    for (size_t r = 0; r < 3; ++r)
        for (size_t c = 0; c < 4; ++c) {
            CHECK(s.at(r, c) == a.at(r, c) + b.at(r, c));
            CHECK(p.at(r, c) == a.at(r, c) * b.at(r, c));
            CHECK(sb.at(r, c) == a.at(r, c) + row.at(0, c));
            CHECK(pb.at(r, c) == a.at(r, c) * row.at(0, c));
        }
    CHECK_THROWS_AS(add(a, zeros(2, 4)), Error);
    CHECK_THROWS_AS(mul(a, zeros(3, 3)), Error);
}

TEST_CASE("scale, tanh_t and sigmoid_t apply elementwise") {
    Rng rng(14);
    Tensor a = random_tensor(2, 5, rng);
    Tensor sc = scale(a, Real(-1.5));
    Tensor th = tanh_t(a);
    Tensor sg = sigmoid_t(a);
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(sc.v[i] == doctest::Approx(-1.5 * a.v[i]).epsilon(1e-12));
        CHECK(th.v[i] == doctest::Approx(std::tanh(a.v[i])).epsilon(1e-12));
        CHECK(sg.v[i] == doctest::Approx(1.0 / (1.0 + std::exp(-a.v[i]))).epsilon(1e-12));
    }
}

TEST_CASE("softmax_masked: uniform logits, exact zeros, stability, empty rows") {
    Tensor flat{Real(0), Real(0), Real(0)};
    Tensor u = softmax_masked(flat, {1, 1, 1});
    for (size_t c = 0; c < 3; ++c) CHECK(u.v[c] == doctest::Approx(1.0 / 3).epsilon(1e-12));

    Tensor masked = softmax_masked(flat, {1, 0, 1});
    CHECK(masked.v[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(masked.v[1] == Real(0));  // masked cells are exactly zero
    CHECK(masked.v[2] == doctest::Approx(0.5).epsilon(1e-12));

    Rng rng(15);
    Tensor logits = random_tensor(4, 6, rng);
    std::vector<std::uint8_t> mask(24, 1);
    mask[3] = 0;
    mask[10] = 0;
    Tensor sm = softmax_masked(logits, mask);
    for (size_t r = 0; r < 4; ++r) {
        Real z = 0;
        for (size_t c = 0; c < 6; ++c) z += sm.at(r, c);
        CHECK(z == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(sm.v[3] == Real(0));
    CHECK(sm.v[10] == Real(0));

    Tensor huge{Real(4000), Real(0)};
    Tensor hs = softmax_masked(huge, {1, 1});
    CHECK(all_finite(hs));
    CHECK(hs.v[0] == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(softmax_masked(flat, {0, 0, 0}), Error);
    CHECK_THROWS_AS(softmax_masked(flat, {1, 1}), Error);  // mask size mismatch
}

TEST_CASE("l2_normalize_rows produces unit rows and floors zero rows") {
    Tensor a{{Real(3), Real(4)}, {Real(0), Real(0)}};
    Tensor n = l2_normalize_rows(a);
    CHECK(n.at(0, 0) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(n.at(0, 1) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(n.at(1, 0) == Real(0));  // 0 / eps, not NaN
    CHECK(n.at(1, 1) == Real(0));
    CHECK(all_finite(n));

    Rng rng(16);
    Tensor b = random_tensor(5, 7, rng);
    Tensor nb = l2_normalize_rows(b);
    for (size_t r = 0; r < 5; ++r)
        CHECK(l2_norm(nb.row_ptr(r), 7) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("l2_norm and dot agree with direct accumulation") {
    std::vector<Real> x{Real(1), Real(-2), Real(2)};
    std::vector<Real> y{Real(3), Real(0), Real(-1)};
    CHECK(l2_norm(x.data(), 3) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(dot(x.data(), y.data(), 3) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sum_all and sum_rows") {
    Tensor a{{Real(1), Real(2)}, {Real(3), Real(4)}};
    CHECK(sum_all(a).at(0, 0) == Real(10));
    Tensor cs = sum_rows(a);
    CHECK(cs.n_rows == 1);
    CHECK(cs.at(0, 0) == Real(4));
    CHECK(cs.at(0, 1) == Real(6));
}

TEST_CASE("max_rows and argmax_row break ties toward the lower index") {
    Tensor a{{Real(5), Real(7), Real(-1)}, {Real(5), Real(7), Real(4)}, {Real(2), Real(7), Real(4)}};
    std::vector<size_t> arg;
    Tensor mx = max_rows(a, &arg);
    CHECK(mx.at(0, 0) == Real(5));
    CHECK(mx.at(0, 1) == Real(7));
    CHECK(mx.at(0, 2) == Real(4));
    CHECK(arg[0] == 0);  // 5 appears in rows 0 and 1
    CHECK(arg[1] == 0);  // 7 appears in all rows
    CHECK(arg[2] == 1);  // 4 appears in rows 1 and 2

    Tensor t{Real(3), Real(9), Real(9), Real(1)};
    CHECK(argmax_row(t, 0) == 1);
    CHECK_THROWS_AS(argmax_row(t, 1), Error);
}

TEST_CASE("gather_rows copies rows, duplicates allowed") {
    Tensor a{{Real(0), Real(1)}, {Real(10), Real(11)}, {Real(20), Real(21)}};
    Tensor g = gather_rows(a, {2, 0, 2});
    CHECK(g.n_rows == 3);
    CHECK(g.at(0, 0) == Real(20));
    CHECK(g.at(1, 1) == Real(1));
    CHECK(g.at(2, 1) == Real(21));
    CHECK_THROWS_AS(gather_rows(a, {3}), Error);
}

TEST_CASE("concat and slice round-trip") {
    Rng rng(17);
    Tensor a = random_tensor(3, 2, rng);
    Tensor b = random_tensor(3, 4, rng);
    Tensor ab = concat_cols(a, b);
    CHECK(ab.n_cols == 6);
    CHECK(max_abs_diff(slice_cols(ab, 0, 2), a) == 0.0);
    CHECK(max_abs_diff(slice_cols(ab, 2, 6), b) == 0.0);

    Tensor c = random_tensor(2, 2, rng);
    Tensor ac = concat_rows({a, c});
    CHECK(ac.n_rows == 5);
    CHECK(ac.at(3, 0) == c.at(0, 0));
    CHECK(ac.at(4, 1) == c.at(1, 1));

    CHECK_THROWS_AS(concat_cols(a, c), Error);         // row mismatch
    CHECK_THROWS_AS(slice_cols(a, 1, 0), Error);       // reversed bounds
    CHECK_THROWS_AS(slice_cols(a, 0, 3), Error);       // past the end
    CHECK_THROWS_AS(concat_rows({a, b}), Error);       // col mismatch
}

TEST_CASE("check_finite names the offending tensor") {
    Tensor bad{Real(1), std::numeric_limits<Real>::quiet_NaN()};
    CHECK_FALSE(all_finite(bad));
    CHECK_THROWS_WITH_AS(check_finite(bad, "h_dep"), doctest::Contains("h_dep"), Error);

    Tensor inf{std::numeric_limits<Real>::infinity()};
    CHECK_FALSE(all_finite(inf));

    Tensor good{Real(0), Real(-5)};
    CHECK(all_finite(good));
    CHECK_NOTHROW(check_finite(good, "ok"));
}

}  // TEST_SUITE("tensor")
