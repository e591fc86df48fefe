#include <cmath>
#include <vector>

#include "doctest.h"
#include "edgekit/optim.hpp"
#include "edgekit/params.hpp"
#include "edgekit/rng.hpp"

using namespace edgekit;

namespace {

/// Standard Adam recurrence, written out independently of the library:
/// m_t = b1 m + (1-b1) g; v_t = b2 v + (1-b2) g^2;
/// x -= lr * (m_t / (1-b1^t)) / (sqrt(v_t / (1-b2^t)) + eps).
struct AdamRef {
    double m = 0, v = 0;
    int t = 0;
    double b1 = 0.9, b2 = 0.999, eps = 1e-8;

    double update(double g, double lr) {
        ++t;
        m = b1 * m + (1 - b1) * g;
        v = b2 * v + (1 - b2) * g * g;
        double mhat = m / (1 - std::pow(b1, t));
        double vhat = v / (1 - std::pow(b2, t));
        return -lr * mhat / (std::sqrt(vhat) + eps);
    }
};

}  // namespace

TEST_SUITE("optim") {

TEST_CASE("first Adam step moves each entry by about -lr * sign(grad)") {
    ParameterStore store;
    Parameter& p = store.create("p", 1, 3);
    p.value = Tensor{Real(1), Real(2), Real(3)};
    p.grad = Tensor{Real(0.5), Real(-2), Real(8)};

    AdamState adam(store);
    adam.step(store, Real(0.01));
    CHECK(adam.steps_taken() == 1);
    CHECK(p.value.v[0] == doctest::Approx(1 - 0.01).epsilon(1e-6));
    CHECK(p.value.v[1] == doctest::Approx(2 + 0.01).epsilon(1e-6));
    CHECK(p.value.v[2] == doctest::Approx(3 - 0.01).epsilon(1e-6));
}

TEST_CASE("three Adam steps track an independent scalar recurrence") {
    ParameterStore store;
    Parameter& p = store.create("p", 2, 2);
    p.value = Tensor{{Real(0.3), Real(-0.7)}, {Real(1.1), Real(0)}};

    const std::vector<std::vector<double>> grads{
        {0.2, -1.4, 0.9, 3.0}, {-0.6, 0.5, 0.0, -2.0}, {1.0, 1.0, -0.1, 0.4}};
    const double lr = 0.003;

    std::vector<AdamRef> ref(4);
    std::vector<double> expect{0.3, -0.7, 1.1, 0.0};

    AdamState adam(store);
    for (const auto& g : grads) {
        for (size_t k = 0; k < 4; ++k) {
            p.grad.v[k] = Real(g[k]);
            expect[k] += ref[k].update(g[k], lr);
        }
        adam.step(store, Real(lr));
    }
    CHECK(adam.steps_taken() == 3);
    for (size_t k = 0; k < 4; ++k)
        CHECK(p.value.v[k] == doctest::Approx(expect[k]).epsilon(1e-10));
}

TEST_CASE("non-trainable parameters are left untouched") {
    ParameterStore store;
    Parameter& a = store.create("a", 1, 2);
    Parameter& frozen = store.create("frozen", 1, 2);
    frozen.trainable = false;
    a.grad = Tensor{Real(1), Real(1)};
    frozen.grad = Tensor{Real(1), Real(1)};
    frozen.value = Tensor{Real(5), Real(6)};

    AdamState adam(store);
    adam.step(store, Real(0.1));
    CHECK(frozen.value.v[0] == Real(5));
    CHECK(frozen.value.v[1] == Real(6));
    CHECK(a.value.v[0] != Real(0));
}

TEST_CASE("zero-gradient entries stay put") {
    ParameterStore store;
    Parameter& p = store.create("p", 1, 2);
    p.value = Tensor{Real(3), Real(-4)};
    p.grad = Tensor{Real(0), Real(2)};

    AdamState adam(store);
    adam.step(store, Real(0.05));
    CHECK(p.value.v[0] == Real(3));  // m = v = 0 for this entry
    CHECK(p.value.v[1] < Real(-4));
}

TEST_CASE("clip_by_global_norm rescales only above the threshold") {
    ParameterStore store;
    Parameter& a = store.create("a", 1, 1);
    Parameter& b = store.create("b", 1, 1);
    a.grad.v[0] = Real(30);
    b.grad.v[0] = Real(40);

    Real norm = clip_by_global_norm(store, Real(5));
    CHECK(norm == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(a.grad.v[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(b.grad.v[0] == doctest::Approx(4.0).epsilon(1e-12));

    Real small = clip_by_global_norm(store, Real(5));  // now at norm 5, no change
    CHECK(small == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(a.grad.v[0] == doctest::Approx(3.0).epsilon(1e-12));

    a.grad.v[0] = Real(0.3);
    b.grad.v[0] = Real(-0.4);
    Real below = clip_by_global_norm(store, Real(5));
    CHECK(below == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(a.grad.v[0] == Real(0.3));
    CHECK(b.grad.v[0] == Real(-0.4));

    CHECK_THROWS_AS(clip_by_global_norm(store, Real(0)), Error);
}

TEST_CASE("non-trainable gradients are excluded from the clip norm") {
    ParameterStore store;
    Parameter& a = store.create("a", 1, 1);
    Parameter& frozen = store.create("frozen", 1, 1);
    frozen.trainable = false;
    a.grad.v[0] = Real(3);
    frozen.grad.v[0] = Real(1000);

    Real norm = clip_by_global_norm(store, Real(5));
    CHECK(norm == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(frozen.grad.v[0] == Real(1000));
}

TEST_CASE("learning-rate schedule eta0 / (1 + rho t)") {
    const Real eta0 = Real(0.001);
    const Real rho = Real(0.05);
    for (std::uint64_t t = 0; t <= 5; ++t)
        CHECK(lr_at_epoch(eta0, rho, t) ==
              doctest::Approx(0.001 / (1.0 + 0.05 * double(t))).epsilon(1e-12));
    CHECK(lr_at_epoch(eta0, rho, 0) == eta0);
}

}  // TEST_SUITE("optim")
