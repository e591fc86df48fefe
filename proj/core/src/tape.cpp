#include "edgekit/tape.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace edgekit {

namespace {
// A^T · B, needed by matmul backward only; kept local.
Tensor matmul_tn(const Tensor& a, const Tensor& b) {
    require(a.n_rows == b.n_rows, "matmul_tn: shape mismatch ", a.shape_str(), " vs ",
            b.shape_str());
    Tensor out(a.n_cols, b.n_cols);
    for (size_t r = 0; r < a.n_rows; ++r) {
        const Real* ar = a.row_ptr(r);
        const Real* br = b.row_ptr(r);
        for (size_t i = 0; i < a.n_cols; ++i) {
            Real ai = ar[i];
            if (ai == Real(0)) continue;
            Real* or_ = out.row_ptr(i);
            for (size_t j = 0; j < b.n_cols; ++j) or_[j] += ai * br[j];
        }
    }
    return out;
}

void add_into(Tensor& dst, const Tensor& src) {
    for (size_t i = 0; i < dst.size(); ++i) dst.v[i] += src.v[i];
}
}  // namespace

Var Tape::push(Tensor value, const char* op, std::function<void(Tape&, int)> back) {
    check_finite(value, op);
    Node n;
    n.value = std::move(value);
    n.op = op;
    if (grad_enabled_) n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Tape::Node& Tape::node(Var v) {
    check_same_tape(v);
    return nodes_[static_cast<size_t>(v.id)];
}

const Tape::Node& Tape::node(Var v) const {
    check_same_tape(v);
    return nodes_[static_cast<size_t>(v.id)];
}

void Tape::check_same_tape(Var v) const {
    require(v.tape == this && v.id >= 0 && static_cast<size_t>(v.id) < nodes_.size(),
            "var does not belong to this tape");
}

Tensor& Tape::grad_buf(int id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (n.grad.empty() && !n.value.empty())
        n.grad = Tensor(n.value.n_rows, n.value.n_cols);
    return n.grad;
}

const Tensor& Tape::value(Var v) const { return node(v).value; }

Tensor Tape::grad_of(Var v) const {
    const Node& n = node(v);
    if (n.grad.empty()) return Tensor(n.value.n_rows, n.value.n_cols);
    return n.grad;
}

Var Tape::constant(Tensor t) { return push(std::move(t), "constant", nullptr); }

Var Tape::leaf(Parameter& p) {
    Var v = push(p.value, "leaf", nullptr);
    if (grad_enabled_ && p.trainable) nodes_.back().param = &p;
    return v;
}

Var Tape::matmul(Var a, Var b) {
    Tensor out = edgekit::matmul(value(a), value(b));
    int ia = a.id, ib = b.id;
    return push(std::move(out), "matmul", [ia, ib](Tape& t, int self) {
        const Tensor& g = t.nodes_[self].grad;
        add_into(t.grad_buf(ia), edgekit::matmul_nt(g, t.nodes_[ib].value));
        add_into(t.grad_buf(ib), matmul_tn(t.nodes_[ia].value, g));
    });
}

Var Tape::matmul_nt(Var a, Var b) {
    Tensor out = edgekit::matmul_nt(value(a), value(b));
    int ia = a.id, ib = b.id;
    return push(std::move(out), "matmul_nt", [ia, ib](Tape& t, int self) {
        const Tensor& g = t.nodes_[self].grad;
        add_into(t.grad_buf(ia), edgekit::matmul(g, t.nodes_[ib].value));
        add_into(t.grad_buf(ib), matmul_tn(g, t.nodes_[ia].value));
    });
}

Var Tape::add(Var a, Var b) {
    Tensor out = edgekit::add(value(a), value(b));
    int ia = a.id, ib = b.id;
    bool broadcast = !value(a).same_shape(value(b));
    return push(std::move(out), "add", [ia, ib, broadcast](Tape& t, int self) {
        const Tensor& g = t.nodes_[self].grad;
        add_into(t.grad_buf(ia), g);
        if (broadcast)
            add_into(t.grad_buf(ib), edgekit::sum_rows(g));
        else
            add_into(t.grad_buf(ib), g);
    });
}

Var Tape::mul(Var a, Var b) {
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    Tensor out = edgekit::mul(av, bv);
    int ia = a.id, ib = b.id;
    bool broadcast = !av.same_shape(bv);
    return push(std::move(out), "elementwise-multiply", [ia, ib, broadcast](Tape& t, int self) {
        const Tensor& g = t.nodes_[self].grad;
        const Tensor& av2 = t.nodes_[ia].value;
        const Tensor& bv2 = t.nodes_[ib].value;
        add_into(t.grad_buf(ia), edgekit::mul(g, bv2));
        if (broadcast)
            add_into(t.grad_buf(ib), edgekit::sum_rows(edgekit::mul(g, av2)));
        else
            add_into(t.grad_buf(ib), edgekit::mul(g, av2));
    });
}

Var Tape::scale(Var a, Real c) {
    Tensor out = edgekit::scale(value(a), c);
    int ia = a.id;
    return push(std::move(out), "scale", [ia, c](Tape& t, int self) {
        add_into(t.grad_buf(ia), edgekit::scale(t.nodes_[self].grad, c));
    });
}

Var Tape::tanh(Var a) {
    Tensor out = tanh_t(value(a));
    int ia = a.id;
    return push(std::move(out), "tanh", [ia](Tape& t, int self) {
        const Tensor& y = t.nodes_[self].value;
        const Tensor& g = t.nodes_[self].grad;
        Tensor& ga = t.grad_buf(ia);
        for (size_t i = 0; i < y.size(); ++i) ga.v[i] += g.v[i] * (Real(1) - y.v[i] * y.v[i]);
    });
}

Var Tape::sigmoid(Var a) {
    Tensor out = sigmoid_t(value(a));
    int ia = a.id;
    return push(std::move(out), "sigmoid", [ia](Tape& t, int self) {
        const Tensor& y = t.nodes_[self].value;
        const Tensor& g = t.nodes_[self].grad;
        Tensor& ga = t.grad_buf(ia);
        for (size_t i = 0; i < y.size(); ++i) ga.v[i] += g.v[i] * y.v[i] * (Real(1) - y.v[i]);
    });
}

Var Tape::softmax_masked(Var logits, std::vector<std::uint8_t> mask) {
    Tensor out = edgekit::softmax_masked(value(logits), mask);
    int il = logits.id;
    return push(std::move(out), "softmax-with-mask",
                [il, mask = std::move(mask)](Tape& t, int self) {
                    const Tensor& p = t.nodes_[self].value;
                    const Tensor& g = t.nodes_[self].grad;
                    Tensor& gl = t.grad_buf(il);
                    for (size_t r = 0; r < p.n_rows; ++r) {
                        const Real* pr = p.row_ptr(r);
                        const Real* gr = g.row_ptr(r);
                        const std::uint8_t* mr = mask.data() + r * p.n_cols;
                        Real s = 0;
                        for (size_t c = 0; c < p.n_cols; ++c)
                            if (mr[c]) s += gr[c] * pr[c];
                        Real* glr = gl.row_ptr(r);
                        for (size_t c = 0; c < p.n_cols; ++c)
                            if (mr[c]) glr[c] += pr[c] * (gr[c] - s);
                    }
                });
}

Var Tape::l2_normalize(Var a, Real eps) {
    const Tensor& av = value(a);
    Tensor out = l2_normalize_rows(av, eps);
    int ia = a.id;
    std::vector<Real> norms(av.n_rows);
    for (size_t r = 0; r < av.n_rows; ++r) norms[r] = l2_norm(av.row_ptr(r), av.n_cols);
    return push(std::move(out), "L2-normalize",
                [ia, eps, norms = std::move(norms)](Tape& t, int self) {
                    const Tensor& y = t.nodes_[self].value;
                    const Tensor& g = t.nodes_[self].grad;
                    Tensor& ga = t.grad_buf(ia);
                    for (size_t r = 0; r < y.n_rows; ++r) {
                        const Real* yr = y.row_ptr(r);
                        const Real* gr = g.row_ptr(r);
                        Real* gar = ga.row_ptr(r);
                        Real n = std::max(norms[r], eps);
                        if (norms[r] > eps) {
                            Real gy = dot(gr, yr, y.n_cols);
                            for (size_t c = 0; c < y.n_cols; ++c)
                                gar[c] += (gr[c] - gy * yr[c]) / n;
                        } else {
                            // norm floored: treated as a constant divisor
                            for (size_t c = 0; c < y.n_cols; ++c) gar[c] += gr[c] / n;
                        }
                    }
                });
}

Var Tape::sum_all(Var a) {
    Tensor out = edgekit::sum_all(value(a));
    int ia = a.id;
    return push(std::move(out), "sum-reduce", [ia](Tape& t, int self) {
        Real g = t.nodes_[self].grad.v[0];
        Tensor& ga = t.grad_buf(ia);
        for (Real& x : ga.v) x += g;
    });
}

Var Tape::sum_rows(Var a) {
    Tensor out = edgekit::sum_rows(value(a));
    int ia = a.id;
    return push(std::move(out), "sum-rows", [ia](Tape& t, int self) {
        const Tensor& g = t.nodes_[self].grad;
        Tensor& ga = t.grad_buf(ia);
        for (size_t r = 0; r < ga.n_rows; ++r) {
            Real* gar = ga.row_ptr(r);
            for (size_t c = 0; c < ga.n_cols; ++c) gar[c] += g.v[c];
        }
    });
}

Var Tape::max_rows(Var a) {
    std::vector<size_t> arg;
    Tensor out = edgekit::max_rows(value(a), &arg);
    int ia = a.id;
    return push(std::move(out), "max-rows", [ia, arg = std::move(arg)](Tape& t, int self) {
        const Tensor& g = t.nodes_[self].grad;
        Tensor& ga = t.grad_buf(ia);
        for (size_t c = 0; c < g.n_cols; ++c) ga.at(arg[c], c) += g.v[c];
    });
}

Var Tape::gather_rows(Var a, std::vector<size_t> ids) {
    Tensor out = edgekit::gather_rows(value(a), ids);
    int ia = a.id;
    return push(std::move(out), "embedding-gather",
                [ia, ids = std::move(ids)](Tape& t, int self) {
                    const Tensor& g = t.nodes_[self].grad;
                    Tensor& ga = t.grad_buf(ia);
                    for (size_t i = 0; i < ids.size(); ++i) {
                        Real* dst = ga.row_ptr(ids[i]);
                        const Real* src = g.row_ptr(i);
                        for (size_t c = 0; c < g.n_cols; ++c) dst[c] += src[c];
                    }
                });
}

Var Tape::concat_cols(Var a, Var b) {
    Tensor out = edgekit::concat_cols(value(a), value(b));
    int ia = a.id, ib = b.id;
    size_t ac = value(a).n_cols;
    return push(std::move(out), "concat", [ia, ib, ac](Tape& t, int self) {
        const Tensor& g = t.nodes_[self].grad;
        Tensor& ga = t.grad_buf(ia);
        Tensor& gb = t.grad_buf(ib);
        for (size_t r = 0; r < g.n_rows; ++r) {
            const Real* gr = g.row_ptr(r);
            Real* gar = ga.row_ptr(r);
            Real* gbr = gb.row_ptr(r);
            for (size_t c = 0; c < ac; ++c) gar[c] += gr[c];
            for (size_t c = 0; c < gb.n_cols; ++c) gbr[c] += gr[ac + c];
        }
    });
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
    std::vector<Tensor> vals;
    std::vector<int> ids;
    std::vector<size_t> row_counts;
    vals.reserve(parts.size());
    for (Var p : parts) {
        vals.push_back(value(p));
        ids.push_back(p.id);
        row_counts.push_back(value(p).n_rows);
    }
    Tensor out = edgekit::concat_rows(vals);
    return push(std::move(out), "concat",
                [ids = std::move(ids), row_counts = std::move(row_counts)](Tape& t, int self) {
                    const Tensor& g = t.nodes_[self].grad;
                    size_t r0 = 0;
                    for (size_t i = 0; i < ids.size(); ++i) {
                        Tensor& gp = t.grad_buf(ids[i]);
                        for (size_t r = 0; r < row_counts[i]; ++r) {
                            const Real* gr = g.row_ptr(r0 + r);
                            Real* gpr = gp.row_ptr(r);
                            for (size_t c = 0; c < g.n_cols; ++c) gpr[c] += gr[c];
                        }
                        r0 += row_counts[i];
                    }
                });
}

Var Tape::slice_cols(Var a, size_t c0, size_t c1) {
    Tensor out = edgekit::slice_cols(value(a), c0, c1);
    int ia = a.id;
    return push(std::move(out), "slice", [ia, c0](Tape& t, int self) {
        const Tensor& g = t.nodes_[self].grad;
        Tensor& ga = t.grad_buf(ia);
        for (size_t r = 0; r < g.n_rows; ++r) {
            const Real* gr = g.row_ptr(r);
            Real* gar = ga.row_ptr(r) + c0;
            for (size_t c = 0; c < g.n_cols; ++c) gar[c] += gr[c];
        }
    });
}

Var Tape::reshape(Var a, size_t rows, size_t cols) {
    const Tensor& av = value(a);
    require(rows * cols == av.size(), "reshape: ", av.shape_str(), " to ", rows, "x", cols);
    Tensor out(rows, cols, av.v);
    int ia = a.id;
    return push(std::move(out), "reshape", [ia](Tape& t, int self) {
        const Tensor& g = t.nodes_[self].grad;
        Tensor& ga = t.grad_buf(ia);
        for (size_t i = 0; i < g.size(); ++i) ga.v[i] += g.v[i];
    });
}

Var Tape::dropout(Var a, Real p, bool train, Rng& rng) {
    require(p >= Real(0) && p < Real(1), "dropout: p must be in [0,1), got ", p);
    if (!train || p == Real(0)) {
        // identity pass-through node keeps the op visible on the tape
        Tensor out = value(a);
        int ia = a.id;
        return push(std::move(out), "dropout", [ia](Tape& t, int self) {
            add_into(t.grad_buf(ia), t.nodes_[self].grad);
        });
    }
    const Tensor& av = value(a);
    Tensor mask(av.n_rows, av.n_cols);
    Real keep_scale = Real(1) / (Real(1) - p);
    for (Real& m : mask.v) m = (rng.uniform() < p) ? Real(0) : keep_scale;
    Tensor out = edgekit::mul(av, mask);
    int ia = a.id;
    return push(std::move(out), "dropout", [ia, mask = std::move(mask)](Tape& t, int self) {
        add_into(t.grad_buf(ia), edgekit::mul(t.nodes_[self].grad, mask));
    });
}

Var Tape::nll(Var probs, std::vector<size_t> targets) {
    const Tensor& pv = value(probs);
    require(targets.size() == pv.n_rows, "negative-log-likelihood: ", targets.size(),
            " targets for ", pv.n_rows, " rows");
    Real loss = 0;
    for (size_t r = 0; r < targets.size(); ++r) {
        require(targets[r] < pv.n_cols, "negative-log-likelihood: target ", targets[r],
                " out of range");
        loss -= std::log(pv.at(r, targets[r]));
    }
    Tensor out(1, 1);
    out.v[0] = loss;
    int ip = probs.id;
    return push(std::move(out), "negative-log-likelihood",
                [ip, targets = std::move(targets)](Tape& t, int self) {
                    Real g = t.nodes_[self].grad.v[0];
                    const Tensor& p = t.nodes_[ip].value;
                    Tensor& gp = t.grad_buf(ip);
                    for (size_t r = 0; r < targets.size(); ++r)
                        gp.at(r, targets[r]) -= g / p.at(r, targets[r]);
                });
}

Var Tape::cross_entropy_masked(Var logits, std::vector<std::uint8_t> mask,
                               std::vector<size_t> targets) {
    const Tensor& lv = value(logits);
    require(mask.size() == lv.v.size(), "cross-entropy: mask has ", mask.size(),
            " cells for a ", lv.shape_str(), " input");
    require(targets.size() == lv.n_rows, "cross-entropy: ", targets.size(), " targets for ",
            lv.n_rows, " rows");
    Real loss_total = 0;
    for (size_t r = 0; r < lv.n_rows; ++r) {
        const Real* lr = lv.row_ptr(r);
        const std::uint8_t* mr = mask.data() + r * lv.n_cols;
        require(targets[r] < lv.n_cols && mr[targets[r]] != 0, "cross-entropy: target ",
                targets[r], " of row ", r, " is masked or out of range");
        Real m = -std::numeric_limits<Real>::infinity();
        for (size_t c = 0; c < lv.n_cols; ++c)
            if (mr[c] && lr[c] > m) m = lr[c];
        require(std::isfinite(m), "cross-entropy: row ", r, " has no unmasked cell");
        Real z = 0;
        for (size_t c = 0; c < lv.n_cols; ++c)
            if (mr[c]) z += std::exp(lr[c] - m);
        loss_total += m + std::log(z) - lr[targets[r]];
    }
    Tensor out(1, 1);
    out.v[0] = loss_total;
    int il = logits.id;
    return push(std::move(out), "cross-entropy-with-mask",
                [il, mask = std::move(mask), targets = std::move(targets)](Tape& t, int self) {
                    const Real g = t.nodes_[self].grad.v[0];
                    const Tensor& l = t.nodes_[il].value;
                    Tensor& gl = t.grad_buf(il);
                    for (size_t r = 0; r < l.n_rows; ++r) {
                        const Real* lr = l.row_ptr(r);
                        const std::uint8_t* mr = mask.data() + r * l.n_cols;
                        Real m = -std::numeric_limits<Real>::infinity();
                        for (size_t c = 0; c < l.n_cols; ++c)
                            if (mr[c] && lr[c] > m) m = lr[c];
                        Real z = 0;
                        for (size_t c = 0; c < l.n_cols; ++c)
                            if (mr[c]) z += std::exp(lr[c] - m);
                        Real* glr = gl.row_ptr(r);
                        for (size_t c = 0; c < l.n_cols; ++c) {
                            if (!mr[c]) continue;
                            const Real p = std::exp(lr[c] - m) / z;
                            glr[c] += g * (p - (c == targets[r] ? Real(1) : Real(0)));
                        }
                    }
                });
}

void Tape::backward(Var loss) {
    require(grad_enabled_, "backward on a gradient-disabled tape");
    const Tensor& lv = value(loss);
    require(lv.n_rows == 1 && lv.n_cols == 1, "backward: loss must be scalar, got ",
            lv.shape_str());
    grad_buf(loss.id).v[0] = Real(1);
    for (int id = loss.id; id >= 0; --id) {
        Node& n = nodes_[static_cast<size_t>(id)];
        if (n.grad.empty()) continue;
        if (n.back) n.back(*this, id);
        if (n.param != nullptr) {
            Parameter& p = *n.param;
            if (p.frozen_rows.empty()) {
                add_into(p.grad, n.grad);
            } else {
                for (size_t r = 0; r < n.grad.n_rows; ++r) {
                    if (p.row_frozen(r)) continue;
                    Real* dst = p.grad.row_ptr(r);
                    const Real* src = n.grad.row_ptr(r);
                    for (size_t c = 0; c < n.grad.n_cols; ++c) dst[c] += src[c];
                }
            }
        }
    }
    ran_backward_ = true;
}

}  // namespace edgekit
