#include "dancer/tape.hpp"

#include <cmath>

#include "dancer/kernels.hpp"

namespace dancer {

Parameter& ParamSet::add(const std::string& name, std::vector<int64_t> shape) {
    if (find(name) != nullptr) throw UsageError("duplicate parameter name: " + name);
    params_.emplace_back(name, Tensor::zeros(std::move(shape)));
    return params_.back();
}

Parameter* ParamSet::find(const std::string& name) {
    for (auto& p : params_)
        if (p.name == name) return &p;
    return nullptr;
}

const Parameter* ParamSet::find(const std::string& name) const {
    for (auto& p : params_)
        if (p.name == name) return &p;
    return nullptr;
}

void ParamSet::zero_grad() {
    for (auto& p : params_) p.grad.zero();
}

void ParamSet::copy_values_from(const ParamSet& other) {
    if (other.size() != size()) throw UsageError("parameter set size mismatch");
    for (size_t i = 0; i < size(); ++i) {
        if (params_[i].name != other.params_[i].name ||
            !params_[i].value.same_shape(other.params_[i].value))
            throw UsageError("parameter mismatch at " + params_[i].name);
        params_[i].value = other.params_[i].value;
    }
}

uint64_t ParamSet::value_checksum() const {
    // FNV-1a over raw value bytes
    uint64_t h = 1469598103934665603ULL;
    for (const auto& p : params_) {
        const auto* bytes = reinterpret_cast<const unsigned char*>(p.value.data());
        size_t n = static_cast<size_t>(p.value.numel()) * sizeof(real_t);
        for (size_t i = 0; i < n; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ULL;
        }
    }
    return h;
}

VarId Tape::push(Tensor value, std::function<void(Tape&)> back) {
    Node n;
    n.own_val = std::move(value);
    n.own_grad = Tensor::zeros(n.own_val.shape());
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return static_cast<VarId>(nodes_.size() - 1);
}

VarId Tape::leaf(Parameter& p) {
    Node n;
    n.ext_val = &p.value;
    n.ext_grad = &p.grad;
    nodes_.push_back(std::move(n));
    return static_cast<VarId>(nodes_.size() - 1);
}

VarId Tape::constant(Tensor t) {
    return push(std::move(t), nullptr);
}

void Tape::check(VarId id) const {
    if (id < 0 || static_cast<size_t>(id) >= nodes_.size())
        throw UsageError("invalid tape variable");
}

void Tape::backward(VarId loss) {
    if (nodes_.empty()) throw UsageError("backward called before any forward computation");
    check(loss);
    if (consumed_) throw UsageError("tape already consumed by a backward pass");
    if (val(loss).numel() != 1) throw UsageError("backward requires a scalar loss");
    consumed_ = true;
    grad(loss)[0] = 1.0;
    for (int64_t i = loss; i >= 0; --i) {
        auto& n = nodes_[static_cast<size_t>(i)];
        if (n.back) n.back(*this);
    }
}

VarId Tape::embedding_row(VarId table, int64_t row) {
    check(table);
    const Tensor& W = val(table);
    int64_t n = W.cols();
    Tensor out({n});
    for (int64_t j = 0; j < n; ++j) out[j] = W.at(row, j);
    VarId id = push(std::move(out), nullptr);
    nodes_.back().back = [table, row, id, n](Tape& t) {
        const Tensor& g = t.grad(id);
        Tensor& gW = t.grad(table);
        for (int64_t j = 0; j < n; ++j) gW.at(row, j) += g[j];
    };
    return id;
}

VarId Tape::matvec(VarId A, VarId x) {
    check(A);
    check(x);
    const Tensor& a = val(A);
    const Tensor& v = val(x);
    int64_t m = a.rows(), n = a.cols();
    if (v.numel() != n) throw UsageError("matvec shape mismatch");
    Tensor out({m});
    kernels::matvec(out.data(), a.data(), v.data(), m, n, false);
    VarId id = push(std::move(out), nullptr);
    nodes_.back().back = [A, x, id, m, n](Tape& t) {
        const Tensor& g = t.grad(id);
        kernels::outer_acc(t.grad(A).data(), g.data(), t.val(x).data(), m, n);
        kernels::matvec_t(t.grad(x).data(), t.val(A).data(), g.data(), m, n, true);
    };
    return id;
}

VarId Tape::matvec_t(VarId A, VarId x) {
    check(A);
    check(x);
    const Tensor& a = val(A);
    const Tensor& v = val(x);
    int64_t m = a.rows(), n = a.cols();
    if (v.numel() != m) throw UsageError("matvec_t shape mismatch");
    Tensor out({n});
    kernels::matvec_t(out.data(), a.data(), v.data(), m, n, false);
    VarId id = push(std::move(out), nullptr);
    nodes_.back().back = [A, x, id, m, n](Tape& t) {
        const Tensor& g = t.grad(id);
        kernels::outer_acc(t.grad(A).data(), t.val(x).data(), g.data(), m, n);
        kernels::matvec(t.grad(x).data(), t.val(A).data(), g.data(), m, n, true);
    };
    return id;
}

VarId Tape::matmul_nt(VarId A, VarId B) {
    check(A);
    check(B);
    const Tensor& a = val(A);
    const Tensor& b = val(B);
    int64_t m = a.rows(), k = a.cols(), n = b.rows();
    if (b.cols() != k) throw UsageError("matmul_nt shape mismatch");
    Tensor out({m, n});
    kernels::matmul_nt(out.data(), a.data(), b.data(), m, n, k, false);
    VarId id = push(std::move(out), nullptr);
    nodes_.back().back = [A, B, id, m, n, k](Tape& t) {
        const Tensor& g = t.grad(id);
        // dA += g B ; dB += g^T A
        kernels::matmul_nn(t.grad(A).data(), g.data(), t.val(B).data(), m, k, n, true);
        kernels::matmul_tn(t.grad(B).data(), g.data(), t.val(A).data(), n, k, m, true);
    };
    return id;
}

VarId Tape::add(VarId a, VarId b) {
    check(a);
    check(b);
    const Tensor& x = val(a);
    const Tensor& y = val(b);
    if (!x.same_shape(y)) throw UsageError("add shape mismatch");
    Tensor out(x.shape());
    for (int64_t i = 0; i < x.numel(); ++i) out[i] = x[i] + y[i];
    VarId id = push(std::move(out), nullptr);
    nodes_.back().back = [a, b, id](Tape& t) {
        const Tensor& g = t.grad(id);
        Tensor& ga = t.grad(a);
        Tensor& gb = t.grad(b);
        for (int64_t i = 0; i < g.numel(); ++i) {
            ga[i] += g[i];
            gb[i] += g[i];
        }
    };
    return id;
}

VarId Tape::mul(VarId a, VarId b) {
    check(a);
    check(b);
    const Tensor& x = val(a);
    const Tensor& y = val(b);
    if (!x.same_shape(y)) throw UsageError("mul shape mismatch");
    Tensor out(x.shape());
    for (int64_t i = 0; i < x.numel(); ++i) out[i] = x[i] * y[i];
    VarId id = push(std::move(out), nullptr);
    nodes_.back().back = [a, b, id](Tape& t) {
        const Tensor& g = t.grad(id);
        Tensor& ga = t.grad(a);
        Tensor& gb = t.grad(b);
        const Tensor& x = t.val(a);
        const Tensor& y = t.val(b);
        for (int64_t i = 0; i < g.numel(); ++i) {
            ga[i] += g[i] * y[i];
            gb[i] += g[i] * x[i];
        }
    };
    return id;
}

VarId Tape::sigmoid(VarId x) {
    check(x);
    const Tensor& v = val(x);
    Tensor out(v.shape());
    for (int64_t i = 0; i < v.numel(); ++i) out[i] = 1.0 / (1.0 + std::exp(-v[i]));
    VarId id = push(std::move(out), nullptr);
    nodes_.back().back = [x, id](Tape& t) {
        const Tensor& g = t.grad(id);
        const Tensor& y = t.val(id);
        Tensor& gx = t.grad(x);
        for (int64_t i = 0; i < g.numel(); ++i) gx[i] += g[i] * y[i] * (1.0 - y[i]);
    };
    return id;
}

VarId Tape::tanh_(VarId x) {
    check(x);
    const Tensor& v = val(x);
    Tensor out(v.shape());
    for (int64_t i = 0; i < v.numel(); ++i) out[i] = std::tanh(v[i]);
    VarId id = push(std::move(out), nullptr);
    nodes_.back().back = [x, id](Tape& t) {
        const Tensor& g = t.grad(id);
        const Tensor& y = t.val(id);
        Tensor& gx = t.grad(x);
        for (int64_t i = 0; i < g.numel(); ++i) gx[i] += g[i] * (1.0 - y[i] * y[i]);
    };
    return id;
}

VarId Tape::concat(VarId a, VarId b) {
    check(a);
    check(b);
    const Tensor& x = val(a);
    const Tensor& y = val(b);
    int64_t na = x.numel(), nb = y.numel();
    Tensor out({na + nb});
    for (int64_t i = 0; i < na; ++i) out[i] = x[i];
    for (int64_t i = 0; i < nb; ++i) out[na + i] = y[i];
    VarId id = push(std::move(out), nullptr);
    nodes_.back().back = [a, b, id, na, nb](Tape& t) {
        const Tensor& g = t.grad(id);
        Tensor& ga = t.grad(a);
        Tensor& gb = t.grad(b);
        for (int64_t i = 0; i < na; ++i) ga[i] += g[i];
        for (int64_t i = 0; i < nb; ++i) gb[i] += g[na + i];
    };
    return id;
}

VarId Tape::slice(VarId x, int64_t offset, int64_t len) {
    check(x);
    const Tensor& v = val(x);
    if (offset < 0 || offset + len > v.numel()) throw UsageError("slice out of range");
    Tensor out({len});
    for (int64_t i = 0; i < len; ++i) out[i] = v[offset + i];
    VarId id = push(std::move(out), nullptr);
    nodes_.back().back = [x, id, offset, len](Tape& t) {
        const Tensor& g = t.grad(id);
        Tensor& gx = t.grad(x);
        for (int64_t i = 0; i < len; ++i) gx[offset + i] += g[i];
    };
    return id;
}

VarId Tape::stack_rows(const std::vector<VarId>& rows) {
    if (rows.empty()) throw UsageError("stack_rows on empty list");
    for (VarId r : rows) check(r);
    int64_t n = val(rows[0]).numel();
    int64_t k = static_cast<int64_t>(rows.size());
    Tensor out({k, n});
    for (int64_t i = 0; i < k; ++i) {
        const Tensor& r = val(rows[static_cast<size_t>(i)]);
        if (r.numel() != n) throw UsageError("stack_rows width mismatch");
        for (int64_t j = 0; j < n; ++j) out.at(i, j) = r[j];
    }
    VarId id = push(std::move(out), nullptr);
    std::vector<VarId> rs = rows;
    nodes_.back().back = [rs, id, n](Tape& t) {
        const Tensor& g = t.grad(id);
        for (size_t i = 0; i < rs.size(); ++i) {
            Tensor& gr = t.grad(rs[i]);
            for (int64_t j = 0; j < n; ++j) gr[j] += g.at(static_cast<int64_t>(i), j);
        }
    };
    return id;
}

VarId Tape::softmax(VarId x) {
    check(x);
    const Tensor& v = val(x);
    Tensor out(v.shape());
    kernels::softmax(out.data(), v.data(), v.numel());
    VarId id = push(std::move(out), nullptr);
    nodes_.back().back = [x, id](Tape& t) {
        const Tensor& g = t.grad(id);
        const Tensor& y = t.val(id);
        Tensor& gx = t.grad(x);
        real_t dot = 0.0;
        for (int64_t i = 0; i < g.numel(); ++i) dot += g[i] * y[i];
        for (int64_t i = 0; i < g.numel(); ++i) gx[i] += y[i] * (g[i] - dot);
    };
    return id;
}

VarId Tape::log_prob_pick(VarId logits, int64_t k) {
    check(logits);
    const Tensor& v = val(logits);
    if (k < 0 || k >= v.numel()) throw UsageError("log_prob_pick index out of range");
    Tensor ls(v.shape());
    kernels::log_softmax(ls.data(), v.data(), v.numel());
    Tensor probs(v.shape());
    for (int64_t i = 0; i < v.numel(); ++i) probs[i] = std::exp(ls[i]);
    Tensor out = Tensor::scalar(ls[k]);
    VarId id = push(std::move(out), nullptr);
    nodes_.back().back = [logits, id, k, probs](Tape& t) {
        real_t g = t.grad(id)[0];
        Tensor& gx = t.grad(logits);
        for (int64_t i = 0; i < gx.numel(); ++i)
            gx[i] += g * ((i == k ? 1.0 : 0.0) - probs[i]);
    };
    return id;
}

VarId Tape::scale(VarId x, real_t c) {
    check(x);
    const Tensor& v = val(x);
    Tensor out(v.shape());
    for (int64_t i = 0; i < v.numel(); ++i) out[i] = v[i] * c;
    VarId id = push(std::move(out), nullptr);
    nodes_.back().back = [x, id, c](Tape& t) {
        const Tensor& g = t.grad(id);
        Tensor& gx = t.grad(x);
        for (int64_t i = 0; i < g.numel(); ++i) gx[i] += g[i] * c;
    };
    return id;
}

VarId Tape::sum(const std::vector<VarId>& scalars) {
    if (scalars.empty()) throw UsageError("sum of empty list");
    real_t s = 0.0;
    for (VarId v : scalars) {
        check(v);
        if (val(v).numel() != 1) throw UsageError("sum expects scalar nodes");
        s += val(v)[0];
    }
    VarId id = push(Tensor::scalar(s), nullptr);
    std::vector<VarId> vs = scalars;
    nodes_.back().back = [vs, id](Tape& t) {
        real_t g = t.grad(id)[0];
        for (VarId v : vs) t.grad(v)[0] += g;
    };
    return id;
}

}  // namespace dancer
