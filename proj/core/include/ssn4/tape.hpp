#pragma once

#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ssn4/tensor.hpp"

namespace ssn4 {

// Trainable tensor with an accumulated gradient of identical shape.
// Gradients accumulate across backward() calls; the optimizer zeroes them
// after each step.
struct Parameter {
    Tensor value;
    Tensor grad;
    std::string name;

    Parameter(std::string param_name, Tensor initial)
        : value(std::move(initial)),
          grad(Tensor::zeros(value.shape())),
          name(std::move(param_name)) {}

    void zero_grad() { grad.fill(0.0); }
    std::size_t size() const { return value.size(); }
};

// Handle to a node on a Tape.
struct Var {
    int id = -1;
};

// Reverse-mode tape. Records each primitive with enough context to replay
// adjoints in exact reverse execution order. A tape is confined to one
// forward/backward pass; parameters persist across tapes via watch().
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Leaf without gradient flow.
    Var constant(Tensor t);
    // Leaf whose adjoint is added to p.grad by backward(). Idempotent per tape.
    Var watch(Parameter& p);

    const Tensor& value(Var v) const { return nodes_[check(v)].value; }
    const Tensor& grad(Var v) const { return nodes_[check(v)].grad; }
    std::size_t node_count() const { return nodes_.size(); }

    // --- primitives (all record adjoints) ---
    Var add(Var a, Var b);       // same shape
    Var sub(Var a, Var b);       // same shape
    Var mul(Var a, Var b);       // elementwise, same shape
    Var scale(Var a, double c);  // c * a
    Var matmul(Var a, Var b);    // (p,q) x (q,s) -> (p,s)
    Var matvec(Var w, Var x);    // (p,q) x (q) -> (p)
    Var transpose(Var a);        // (p,q) -> (q,p)
    Var tanh_elem(Var a);
    Var sigmoid_elem(Var a);
    Var softmax_rows(Var a);        // rank 1 = single row, or rank 2 rowwise
    Var logsumexp_row(Var a);       // rank-1 -> scalar, max-shifted
    Var logsumexp_rows(Var a);      // (p,q) -> (p), per-row logsumexp
    Var concat(std::span<const Var> xs);  // rank-1 vectors, axis 0
    Var stack_cols(std::span<const Var> xs);  // n vectors of length p -> (p,n)
    Var stack_rows(std::span<const Var> xs);  // n vectors of length q -> (n,q)
    Var flatten(Var a);             // row-major -> rank-1
    Var slice_row(Var a, int row);  // (p,q) -> (q)
    Var pick(Var a, std::size_t flat_index);  // -> scalar
    Var broadcast_col(Var v, int cols);  // (p) -> (p,cols), copies v per column
    Var sum(Var a);  // -> scalar

    // Seeds d(loss)/d(loss) = 1, replays adjoints in reverse order, then adds
    // each watched leaf's adjoint into its Parameter::grad. Node adjoints are
    // recomputed from scratch per call, so calling twice without zeroing the
    // parameter gradients doubles them.
    void backward(Var loss);

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::function<void()> back;  // empty for leaves
        Parameter* param = nullptr;
    };

    int check(Var v) const;
    Var push(Tensor value, std::function<void()> back = {}, Parameter* param = nullptr);
    Tensor& grad_mut(int id) { return nodes_[static_cast<std::size_t>(id)].grad; }
    const Tensor& val(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }

    std::vector<Node> nodes_;
    std::unordered_map<Parameter*, int> watched_;
};

// Central-difference verification of taped gradients.
//
// `run` must perform one full forward+backward pass over fresh tape state,
// accumulating into the given parameters' grads, and return the loss value.
// Returns max over all parameter coordinates of
//   |g_ad - g_fd| / max(1, |g_ad|, |g_fd|).
// All parameter grads are zeroed on return.
double grad_check(const std::function<double()>& run,
                  std::span<Parameter* const> params, double eps);

}  // namespace ssn4
