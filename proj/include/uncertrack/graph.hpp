// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "uncertrack/params.hpp"
#include "uncertrack/tensor.hpp"

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace uncertrack {

/// Handle to a node in a Graph.
struct Var {
    static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    std::size_t id = kNone;
    bool valid() const { return id != kNone; }
};

/// Reverse-mode tape over Tensor2 values.
///
/// Nodes are appended in evaluation order, so walking them backwards is a
/// valid topological order. Parameter leaves reference the weights they were
/// bound to; after backward() their gradients can be collected into a GradSet.
/// A Graph is single-use: build, backward once, read gradients, discard.
class Graph {
public:
    using BackwardFn = std::function<void(Graph&, std::size_t self)>;

    Var constant(Tensor2 value);
    /// Leaf referencing an external weight tensor (not copied; must outlive the graph).
    Var parameter(const Tensor2& weight, std::size_t block, std::size_t tensor);
    /// Appends a computed node. `backward` is dropped if no input requires grad.
    Var push(Tensor2 value, bool requires_grad, BackwardFn backward);

    const Tensor2& value(Var v) const;
    bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
    /// Gradient accumulated at v by backward(); zero-shaped tensor if none reached it.
    const Tensor2& grad(Var v) const;
    /// Mutable gradient of v, allocated (zeroed) on first use.
    Tensor2& grad_ref(Var v);
    Tensor2& grad_ref(std::size_t id) { return grad_ref(Var{id}); }

    /// Seeds d(root)/d(root) = seed (root must be 1x1) and propagates.
    void backward(Var root, double seed = 1.0);
    /// Adds parameter-leaf gradients into `set` (indexed [block][tensor]).
    void collect_param_grads(GradSet& set) const;

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor2 value;
        const Tensor2* external = nullptr;
        Tensor2 grad;
        BackwardFn backward;
        bool requires_grad = false;
        std::size_t block = Var::kNone;
        std::size_t tensor = Var::kNone;
        std::size_t value_size() const { return external ? external->size() : value.size(); }
    };
    std::vector<Node> nodes_;
    Tensor2 empty_;
};

enum class Activation { identity, relu, sigmoid, tanh };

namespace ops {

/// y = x W^T + b, x: n x in, W: out x in, b: 1 x out (optional).
Var linear(Graph& g, Var x, Var weight, Var bias = {});
Var activate(Graph& g, Var x, Activation act);
Var relu(Graph& g, Var x);
Var sigmoid(Graph& g, Var x);
Var tanh(Graph& g, Var x);
Var abs(Graph& g, Var x);
Var add(Graph& g, Var a, Var b);
Var sub(Graph& g, Var a, Var b);
Var mul(Graph& g, Var a, Var b);
Var scale(Graph& g, Var x, double c);
Var concat_cols(Graph& g, std::span<const Var> parts);
Var concat_cols(Graph& g, std::initializer_list<Var> parts);
Var slice_cols(Graph& g, Var x, std::size_t begin, std::size_t count);
/// out[i] = x[index[i]]; backward scatter-adds.
Var gather_rows(Graph& g, Var x, std::span<const std::size_t> index);
/// out[r] = sum over i with segment[i] == r of x[i]; rows with no members are zero.
Var segment_sum(Graph& g, Var x, std::span<const std::size_t> segment, std::size_t num_segments);
/// Softmax of a column vector within each segment.
Var segment_softmax(Graph& g, Var x, std::span<const std::size_t> segment, std::size_t num_segments);
/// Row i of v scaled by w[i] (w: n x 1).
Var scale_rows(Graph& g, Var v, Var w);
/// logit(clamp(s)); zero gradient where the clamp is active.
Var logit_clamped(Graph& g, Var s);
/// A x for a constant matrix A.
Var left_multiply(Graph& g, const Tensor2& a, Var x);
Var sum_all(Graph& g, Var x);
/// Mean smooth-L1 over entries where mask != 0; 0 if the mask is empty.
Var smooth_l1_masked(Graph& g, Var pred, const Tensor2& target, const Tensor2& mask, double beta);
/// Mean BCE of clamped scores (n x 1) against labels (n x 1).
Var bce_mean(Graph& g, Var scores, const Tensor2& labels);

}  // namespace ops
}  // namespace uncertrack
