#include "edgekit/optim.hpp"

#include <cmath>

namespace edgekit {

AdamState::AdamState(const ParameterStore& store, Real beta1, Real beta2, Real eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const Parameter* p : store.all()) {
        m_.emplace_back(p->value.n_rows, p->value.n_cols);
        v_.emplace_back(p->value.n_rows, p->value.n_cols);
    }
}

void AdamState::step(ParameterStore& store, Real lr) {
    auto params = store.all();
    require(params.size() == m_.size(), "adam: store has ", params.size(),
            " parameters, state has ", m_.size());
    ++t_;
    Real bc1 = Real(1) - std::pow(beta1_, static_cast<Real>(t_));
    Real bc2 = Real(1) - std::pow(beta2_, static_cast<Real>(t_));
    for (size_t i = 0; i < params.size(); ++i) {
        Parameter& p = *params[i];
        if (!p.trainable) continue;
        require(p.grad.same_shape(p.value), "adam: grad shape mismatch for '", p.name, "'");
        Tensor& m = m_[i];
        Tensor& v = v_[i];
        for (size_t k = 0; k < p.value.size(); ++k) {
            Real g = p.grad.v[k];
            m.v[k] = beta1_ * m.v[k] + (Real(1) - beta1_) * g;
            v.v[k] = beta2_ * v.v[k] + (Real(1) - beta2_) * g * g;
            Real mhat = m.v[k] / bc1;
            Real vhat = v.v[k] / bc2;
            p.value.v[k] -= lr * mhat / (std::sqrt(vhat) + eps_);
        }
        // frozen rows accumulate zero gradient, so m=v=0 and the update
        // above is exactly zero for them; no special casing needed
    }
}

Real clip_by_global_norm(ParameterStore& store, Real c) {
    require(c > Real(0), "clip_by_global_norm: c must be positive, got ", c);
    Real sq = 0;
    for (Parameter* p : store.all()) {
        if (!p->trainable) continue;
        for (Real g : p->grad.v) sq += g * g;
    }
    Real norm = std::sqrt(sq);
    if (norm > c) {
        Real s = c / norm;
        for (Parameter* p : store.all()) {
            if (!p->trainable) continue;
            for (Real& g : p->grad.v) g *= s;
        }
    }
    return norm;
}

}  // namespace edgekit
