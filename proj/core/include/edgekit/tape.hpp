#ifndef EDGEKIT_TAPE_HPP
#define EDGEKIT_TAPE_HPP

#include <functional>
#include <vector>

#include "edgekit/params.hpp"
#include "edgekit/rng.hpp"
#include "edgekit/tensor.hpp"

namespace edgekit {

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid for the tape's lifetime.
struct Var {
    Tape* tape = nullptr;
    int id = -1;
    bool valid() const { return tape != nullptr && id >= 0; }
};

/// Reverse-mode autodiff over a topologically ordered op record list.
/// Forward values are computed eagerly by the kernels in tensor.hpp and
/// cached per node; backward replays the records in reverse. Every op
/// checks its output for NaN/Inf and throws on the first offender.
///
/// One tape per training step; single-threaded by construction.
class Tape {
public:
    explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

    /// Value with no gradient tracking.
    Var constant(Tensor t);
    /// Trainable leaf: backward() accumulates into p.grad (frozen rows are
    /// skipped). A parameter with trainable=false behaves like a constant.
    Var leaf(Parameter& p);

    Var matmul(Var a, Var b);
    Var matmul_nt(Var a, Var b);  // a · b^T
    Var add(Var a, Var b);        // b may be 1 x cols, broadcast over rows
    Var mul(Var a, Var b);        // elementwise; same broadcast rule
    Var scale(Var a, Real c);
    Var tanh(Var a);
    Var sigmoid(Var a);
    Var softmax_masked(Var logits, std::vector<std::uint8_t> mask);
    Var l2_normalize(Var a, Real eps = Real(1e-12));
    Var sum_all(Var a);
    Var sum_rows(Var a);
    Var max_rows(Var a);
    Var gather_rows(Var a, std::vector<size_t> ids);
    Var concat_cols(Var a, Var b);
    Var concat_rows(const std::vector<Var>& parts);
    Var slice_cols(Var a, size_t c0, size_t c1);
    Var reshape(Var a, size_t rows, size_t cols);
    /// Inverted dropout: scales kept entries by 1/(1-p) at train time so
    /// inference needs no rescaling. Identity when train=false or p=0.
    Var dropout(Var a, Real p, bool train, Rng& rng);
    /// Negative log-likelihood: -sum_i log probs[i, targets[i]] -> 1 x 1.
    Var nll(Var probs, std::vector<size_t> targets);
    /// Masked softmax cross entropy fused into one op, evaluated via
    /// log-sum-exp so extreme logits (|l| in the thousands under scaled
    /// cosine sums) never underflow a probability to zero. Equals
    /// nll(softmax_masked(logits, mask), targets) analytically.
    Var cross_entropy_masked(Var logits, std::vector<std::uint8_t> mask,
                             std::vector<size_t> targets);

    const Tensor& value(Var v) const;
    /// Gradient of the last backward() w.r.t. node v (zeros if unreached).
    Tensor grad_of(Var v) const;

    /// Reverse accumulation from a scalar loss. Throws if loss is not 1x1.
    void backward(Var loss);

    size_t size() const { return nodes_.size(); }
    bool grad_enabled() const { return grad_enabled_; }

private:
    struct Node {
        Tensor value;
        Tensor grad;  // sized lazily during backward
        std::function<void(Tape&, int)> back;
        Parameter* param = nullptr;
        const char* op = "";
    };

    Var push(Tensor value, const char* op, std::function<void(Tape&, int)> back);
    Tensor& grad_buf(int id);
    Node& node(Var v);
    const Node& node(Var v) const;
    void check_same_tape(Var v) const;

    std::vector<Node> nodes_;
    bool grad_enabled_;
    bool ran_backward_ = false;
};

}  // namespace edgekit

#endif
