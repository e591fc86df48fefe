#ifndef EDGEKIT_PARAMS_HPP
#define EDGEKIT_PARAMS_HPP

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "edgekit/rng.hpp"
#include "edgekit/tensor.hpp"

namespace edgekit {

/// One named trainable (or frozen) tensor plus its gradient accumulator.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;
    bool trainable = true;
    /// Per-row freeze mask (1 = frozen). Used for word-embedding tables
    /// where pretrained rows stay fixed but UNK/ROOT/uncovered rows train.
    std::vector<std::uint8_t> frozen_rows;

    bool row_frozen(size_t r) const { return !frozen_rows.empty() && frozen_rows[r]; }
};

class ParameterStore {
public:
    Parameter& create(const std::string& name, size_t rows, size_t cols);
    /// Glorot-uniform init: U(-s, s) with s = sqrt(6 / (rows + cols)).
    Parameter& create_glorot(const std::string& name, size_t rows, size_t cols, Rng& rng);
    Parameter& create_uniform(const std::string& name, size_t rows, size_t cols, Real lo,
                              Real hi, Rng& rng);

    Parameter* find(const std::string& name);
    const Parameter* find(const std::string& name) const;
    Parameter& get(const std::string& name);
    const Parameter& get(const std::string& name) const;

    std::vector<Parameter*> all();
    std::vector<const Parameter*> all() const;
    size_t size() const { return params_.size(); }

    void zero_grads();

    /// Copies of every value tensor in creation order (best-checkpoint
    /// bookkeeping); restore writes them back.
    std::vector<Tensor> snapshot() const;
    void restore(const std::vector<Tensor>& values);

    /// Fingerprint over names, shapes and raw values, in creation order.
    /// Support summaries and explain indexes record it to detect staleness.
    std::uint64_t value_hash() const;

private:
    std::vector<std::unique_ptr<Parameter>> params_;
    std::unordered_map<std::string, Parameter*> by_name_;
};

}  // namespace edgekit

#endif
