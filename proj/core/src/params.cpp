#include "edgekit/params.hpp"

#include <cmath>
#include <cstring>

namespace edgekit {

Parameter& ParameterStore::create(const std::string& name, size_t rows, size_t cols) {
    require(by_name_.find(name) == by_name_.end(), "parameter '", name, "' already exists");
    auto p = std::make_unique<Parameter>();
    p->name = name;
    p->value = Tensor(rows, cols);
    p->grad = Tensor(rows, cols);
    Parameter& ref = *p;
    by_name_[name] = p.get();
    params_.push_back(std::move(p));
    return ref;
}

Parameter& ParameterStore::create_glorot(const std::string& name, size_t rows, size_t cols,
                                         Rng& rng) {
    Real s = std::sqrt(Real(6) / Real(rows + cols));
    return create_uniform(name, rows, cols, -s, s, rng);
}

Parameter& ParameterStore::create_uniform(const std::string& name, size_t rows, size_t cols,
                                          Real lo, Real hi, Rng& rng) {
    Parameter& p = create(name, rows, cols);
    for (Real& x : p.value.v) x = static_cast<Real>(rng.uniform(lo, hi));
    return p;
}

Parameter* ParameterStore::find(const std::string& name) {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : it->second;
}

const Parameter* ParameterStore::find(const std::string& name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : it->second;
}

Parameter& ParameterStore::get(const std::string& name) {
    Parameter* p = find(name);
    require(p != nullptr, "unknown parameter '", name, "'");
    return *p;
}

const Parameter& ParameterStore::get(const std::string& name) const {
    const Parameter* p = find(name);
    require(p != nullptr, "unknown parameter '", name, "'");
    return *p;
}

std::vector<Parameter*> ParameterStore::all() {
    std::vector<Parameter*> out;
    out.reserve(params_.size());
    for (auto& p : params_) out.push_back(p.get());
    return out;
}

std::vector<const Parameter*> ParameterStore::all() const {
    std::vector<const Parameter*> out;
    out.reserve(params_.size());
    for (auto& p : params_) out.push_back(p.get());
    return out;
}

void ParameterStore::zero_grads() {
    for (auto& p : params_) std::fill(p->grad.v.begin(), p->grad.v.end(), Real(0));
}

std::vector<Tensor> ParameterStore::snapshot() const {
    std::vector<Tensor> out;
    out.reserve(params_.size());
    for (const auto& p : params_) out.push_back(p->value);
    return out;
}

void ParameterStore::restore(const std::vector<Tensor>& values) {
    require(values.size() == params_.size(), "snapshot holds ", values.size(),
            " tensors, store has ", params_.size());
    for (size_t i = 0; i < values.size(); ++i) {
        require(values[i].same_shape(params_[i]->value), "snapshot shape ",
                values[i].shape_str(), " does not match parameter '", params_[i]->name, "'");
        params_[i]->value = values[i];
    }
}

std::uint64_t ParameterStore::value_hash() const {
    std::uint64_t h = 1469598103934665603ull;
    for (const auto& p : params_) {
        h = fnv1a(p->name, h);
        h = fnv1a_u64(p->value.n_rows, h);
        h = fnv1a_u64(p->value.n_cols, h);
        h = fnv1a(std::string_view(reinterpret_cast<const char*>(p->value.v.data()),
                                   p->value.v.size() * sizeof(Real)),
                  h);
    }
    return h;
}

}  // namespace edgekit
