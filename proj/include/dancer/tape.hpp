#pragma once

#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "dancer/tensor.hpp"

namespace dancer {

// A named trainable tensor with persistent gradient storage.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    Parameter() = default;
    Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)) {
        grad = Tensor::zeros(value.shape());
    }
};

// Registry of parameters for one model; names must be unique. Storage is a
// deque so references handed out by add() stay valid as the set grows.
class ParamSet {
  public:
    Parameter& add(const std::string& name, std::vector<int64_t> shape);
    Parameter& operator[](size_t i) { return params_[i]; }
    const Parameter& operator[](size_t i) const { return params_[i]; }
    size_t size() const { return params_.size(); }
    Parameter* find(const std::string& name);
    const Parameter* find(const std::string& name) const;
    void zero_grad();
    // Copies values from another set; shapes and names must match exactly.
    void copy_values_from(const ParamSet& other);
    uint64_t value_checksum() const;

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

  private:
    std::deque<Parameter> params_;
};

using VarId = int32_t;

// Reverse-mode tape. Ops compute values eagerly and record a pull-back
// closure; backward() runs the closures in reverse creation order.
// Leaf nodes alias Parameter storage so gradients land in Parameter::grad.
class Tape {
  public:
    VarId leaf(Parameter& p);
    VarId constant(Tensor t);

    const Tensor& val(VarId id) const {
        const Node& n = nodes_[static_cast<size_t>(id)];
        return n.ext_val ? *n.ext_val : n.own_val;
    }
    Tensor& grad(VarId id) {
        Node& n = nodes_[static_cast<size_t>(id)];
        return n.ext_grad ? *n.ext_grad : n.own_grad;
    }

    size_t size() const { return nodes_.size(); }

    // Seeds d(loss)/d(loss) = 1 and sweeps the tape once. loss must be a
    // scalar node. A tape can be consumed only once.
    void backward(VarId loss);

    // --- ops ---
    VarId embedding_row(VarId table, int64_t row);
    VarId matvec(VarId A, VarId x);                   // A (m x n) * x (n) -> m
    VarId matvec_t(VarId A, VarId x);                 // A^T (n x m)...: A (m x n), x (m) -> n
    VarId matmul_nt(VarId A, VarId B);                // A (m x k) * B^T (n x k) -> (m x n)
    VarId add(VarId a, VarId b);                      // same shape
    VarId mul(VarId a, VarId b);                      // elementwise
    VarId sigmoid(VarId x);
    VarId tanh_(VarId x);
    VarId concat(VarId a, VarId b);                   // vectors
    VarId slice(VarId x, int64_t offset, int64_t len);
    VarId stack_rows(const std::vector<VarId>& rows); // k vectors (n) -> (k x n)
    VarId softmax(VarId x);                           // vector softmax
    VarId log_prob_pick(VarId logits, int64_t k);     // scalar log softmax(logits)[k]
    VarId scale(VarId x, real_t c);                   // constant scale
    VarId sum(const std::vector<VarId>& scalars);     // scalar sum

  private:
    // Leaf nodes alias external (Parameter) storage via ext_*; computed nodes
    // own their buffers. Pointer targets live outside the node vector, so
    // reallocation is safe.
    struct Node {
        Tensor own_val;
        Tensor own_grad;
        const Tensor* ext_val = nullptr;
        Tensor* ext_grad = nullptr;
        std::function<void(Tape&)> back;
    };

    VarId push(Tensor value, std::function<void(Tape&)> back);
    void check(VarId id) const;

    std::vector<Node> nodes_;
    bool consumed_ = false;
};

}  // namespace dancer
