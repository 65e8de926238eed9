// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#include "uncertrack/graph.hpp"

#include "uncertrack/errors.hpp"
#include "uncertrack/functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace uncertrack {

Var Graph::constant(Tensor2 value) {
    Node n;
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
}

Var Graph::parameter(const Tensor2& weight, std::size_t block, std::size_t tensor) {
    Node n;
    n.external = &weight;
    n.requires_grad = true;
    n.block = block;
    n.tensor = tensor;
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
}

Var Graph::push(Tensor2 value, bool requires_grad, BackwardFn backward) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    if (requires_grad) {
        n.backward = std::move(backward);
    }
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
}

const Tensor2& Graph::value(Var v) const {
    const Node& n = nodes_.at(v.id);
    return n.external ? *n.external : n.value;
}

const Tensor2& Graph::grad(Var v) const {
    const Node& n = nodes_.at(v.id);
    return n.grad.empty() ? empty_ : n.grad;
}

Tensor2& Graph::grad_ref(Var v) {
    Node& n = nodes_[v.id];
    if (n.grad.empty()) {
        const Tensor2& val = n.external ? *n.external : n.value;
        n.grad = Tensor2(val.rows(), val.cols());
    }
    return n.grad;
}

void Graph::backward(Var root, double seed) {
    const Tensor2& root_value = value(root);
    if (root_value.size() != 1) {
        throw PreconditionError("Graph::backward: root must be a scalar, got " + root_value.shape_string());
    }
    grad_ref(root)[0] += seed;
    for (std::size_t i = root.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (n.backward && !n.grad.empty()) {
            n.backward(*this, i);
        }
    }
}

void Graph::collect_param_grads(GradSet& set) const {
    for (const Node& n : nodes_) {
        if (n.block == Var::kNone || n.grad.empty()) {
            continue;
        }
        set.at(n.block).at(n.tensor).map() += n.grad.map();
    }
}

namespace ops {
namespace {

bool any_requires(const Graph& g, std::initializer_list<Var> vars) {
    for (Var v : vars) {
        if (v.valid() && g.requires_grad(v)) {
            return true;
        }
    }
    return false;
}

void require_same_shape(const Tensor2& a, const Tensor2& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ConfigError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " + b.shape_string());
    }
}

template <typename Forward, typename Derivative>
Var unary(Graph& g, Var x, Forward f, Derivative df) {
    const Tensor2& xv = g.value(x);
    Tensor2 out(xv.rows(), xv.cols());
    for (std::size_t i = 0; i < xv.size(); ++i) {
        out[i] = f(xv[i]);
    }
    return g.push(std::move(out), g.requires_grad(x), [x, df](Graph& gr, std::size_t self) {
        const Tensor2& gy = gr.grad(Var{self});
        const Tensor2& y = gr.value(Var{self});
        const Tensor2& xin = gr.value(x);
        Tensor2& gx = gr.grad_ref(x);
        for (std::size_t i = 0; i < gy.size(); ++i) {
            gx[i] += gy[i] * df(xin[i], y[i]);
        }
    });
}

}  // namespace

Var linear(Graph& g, Var x, Var weight, Var bias) {
    const Tensor2& xv = g.value(x);
    const Tensor2& wv = g.value(weight);
    if (xv.cols() != wv.cols()) {
        throw ConfigError("linear: input has " + std::to_string(xv.cols()) + " columns, weight expects " +
                          std::to_string(wv.cols()));
    }
    Tensor2 out(xv.rows(), wv.rows());
    if (xv.rows() > 0) {
        out.map().noalias() = xv.map() * wv.map().transpose();
    }
    if (bias.valid()) {
        const Tensor2& bv = g.value(bias);
        if (bv.size() != wv.rows()) {
            throw ConfigError("linear: bias size " + std::to_string(bv.size()) + " does not match output " +
                              std::to_string(wv.rows()));
        }
        for (std::size_t r = 0; r < out.rows(); ++r) {
            for (std::size_t c = 0; c < out.cols(); ++c) {
                out(r, c) += bv[c];
            }
        }
    }
    return g.push(std::move(out), any_requires(g, {x, weight, bias}), [x, weight, bias](Graph& gr, std::size_t self) {
        const Tensor2& gy = gr.grad(Var{self});
        if (gy.rows() == 0) {
            return;
        }
        if (gr.requires_grad(x)) {
            gr.grad_ref(x).map().noalias() += gy.map() * gr.value(weight).map();
        }
        if (gr.requires_grad(weight)) {
            gr.grad_ref(weight).map().noalias() += gy.map().transpose() * gr.value(x).map();
        }
        if (bias.valid() && gr.requires_grad(bias)) {
            Tensor2& gb = gr.grad_ref(bias);
            for (std::size_t r = 0; r < gy.rows(); ++r) {
                for (std::size_t c = 0; c < gy.cols(); ++c) {
                    gb[c] += gy(r, c);
                }
            }
        }
    });
}

Var activate(Graph& g, Var x, Activation act) {
    switch (act) {
        case Activation::identity:
            return x;
        case Activation::relu:
            return relu(g, x);
        case Activation::sigmoid:
            return sigmoid(g, x);
        case Activation::tanh:
            return tanh(g, x);
    }
    return x;
}

Var relu(Graph& g, Var x) {
    return unary(
        g, x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double in, double) { return in > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(Graph& g, Var x) {
    return unary(
        g, x, [](double v) { return uncertrack::sigmoid(v); }, [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Graph& g, Var x) {
    return unary(
        g, x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var abs(Graph& g, Var x) {
    return unary(
        g, x, [](double v) { return std::abs(v); },
        [](double in, double) { return in > 0.0 ? 1.0 : (in < 0.0 ? -1.0 : 0.0); });
}

Var add(Graph& g, Var a, Var b) {
    const Tensor2& av = g.value(a);
    const Tensor2& bv = g.value(b);
    require_same_shape(av, bv, "add");
    Tensor2 out = av;
    out.map() += bv.map();
    return g.push(std::move(out), any_requires(g, {a, b}), [a, b](Graph& gr, std::size_t self) {
        const Tensor2& gy = gr.grad(Var{self});
        if (gr.requires_grad(a)) gr.grad_ref(a).map() += gy.map();
        if (gr.requires_grad(b)) gr.grad_ref(b).map() += gy.map();
    });
}

Var sub(Graph& g, Var a, Var b) {
    const Tensor2& av = g.value(a);
    const Tensor2& bv = g.value(b);
    require_same_shape(av, bv, "sub");
    Tensor2 out = av;
    out.map() -= bv.map();
    return g.push(std::move(out), any_requires(g, {a, b}), [a, b](Graph& gr, std::size_t self) {
        const Tensor2& gy = gr.grad(Var{self});
        if (gr.requires_grad(a)) gr.grad_ref(a).map() += gy.map();
        if (gr.requires_grad(b)) gr.grad_ref(b).map() -= gy.map();
    });
}

Var mul(Graph& g, Var a, Var b) {
    const Tensor2& av = g.value(a);
    const Tensor2& bv = g.value(b);
    require_same_shape(av, bv, "mul");
    Tensor2 out = av;
    out.map().array() *= bv.map().array();
    return g.push(std::move(out), any_requires(g, {a, b}), [a, b](Graph& gr, std::size_t self) {
        const Tensor2& gy = gr.grad(Var{self});
        if (gr.requires_grad(a)) gr.grad_ref(a).map().array() += gy.map().array() * gr.value(b).map().array();
        if (gr.requires_grad(b)) gr.grad_ref(b).map().array() += gy.map().array() * gr.value(a).map().array();
    });
}

Var scale(Graph& g, Var x, double c) {
    Tensor2 out = g.value(x);
    out.map() *= c;
    return g.push(std::move(out), g.requires_grad(x), [x, c](Graph& gr, std::size_t self) {
        gr.grad_ref(x).map() += c * gr.grad(Var{self}).map();
    });
}

Var concat_cols(Graph& g, std::span<const Var> parts) {
    if (parts.empty()) {
        throw ConfigError("concat_cols: no inputs");
    }
    const std::size_t rows = g.value(parts[0]).rows();
    std::size_t cols = 0;
    bool needs = false;
    for (Var p : parts) {
        if (g.value(p).rows() != rows) {
            throw ConfigError("concat_cols: row count mismatch");
        }
        cols += g.value(p).cols();
        needs = needs || g.requires_grad(p);
    }
    Tensor2 out(rows, cols);
    std::size_t offset = 0;
    for (Var p : parts) {
        const Tensor2& pv = g.value(p);
        for (std::size_t r = 0; r < rows; ++r) {
            std::copy(pv.row(r).begin(), pv.row(r).end(), out.row(r).begin() + static_cast<std::ptrdiff_t>(offset));
        }
        offset += pv.cols();
    }
    std::vector<Var> inputs(parts.begin(), parts.end());
    return g.push(std::move(out), needs, [inputs = std::move(inputs)](Graph& gr, std::size_t self) {
        const Tensor2& gy = gr.grad(Var{self});
        std::size_t off = 0;
        for (Var p : inputs) {
            const std::size_t c = gr.value(p).cols();
            if (gr.requires_grad(p)) {
                Tensor2& gp = gr.grad_ref(p);
                for (std::size_t r = 0; r < gy.rows(); ++r) {
                    for (std::size_t j = 0; j < c; ++j) {
                        gp(r, j) += gy(r, off + j);
                    }
                }
            }
            off += c;
        }
    });
}

Var concat_cols(Graph& g, std::initializer_list<Var> parts) {
    return concat_cols(g, std::span<const Var>(parts.begin(), parts.size()));
}

Var slice_cols(Graph& g, Var x, std::size_t begin, std::size_t count) {
    const Tensor2& xv = g.value(x);
    if (begin + count > xv.cols()) {
        throw ConfigError("slice_cols: range exceeds " + xv.shape_string());
    }
    Tensor2 out(xv.rows(), count);
    for (std::size_t r = 0; r < xv.rows(); ++r) {
        for (std::size_t j = 0; j < count; ++j) {
            out(r, j) = xv(r, begin + j);
        }
    }
    return g.push(std::move(out), g.requires_grad(x), [x, begin, count](Graph& gr, std::size_t self) {
        const Tensor2& gy = gr.grad(Var{self});
        Tensor2& gx = gr.grad_ref(x);
        for (std::size_t r = 0; r < gy.rows(); ++r) {
            for (std::size_t j = 0; j < count; ++j) {
                gx(r, begin + j) += gy(r, j);
            }
        }
    });
}

Var gather_rows(Graph& g, Var x, std::span<const std::size_t> index) {
    const Tensor2& xv = g.value(x);
    Tensor2 out(index.size(), xv.cols());
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (index[i] >= xv.rows()) {
            throw ConfigError("gather_rows: index out of range");
        }
        std::copy(xv.row(index[i]).begin(), xv.row(index[i]).end(), out.row(i).begin());
    }
    std::vector<std::size_t> idx(index.begin(), index.end());
    return g.push(std::move(out), g.requires_grad(x), [x, idx = std::move(idx)](Graph& gr, std::size_t self) {
        const Tensor2& gy = gr.grad(Var{self});
        Tensor2& gx = gr.grad_ref(x);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            auto src = gy.row(i);
            auto dst = gx.row(idx[i]);
            for (std::size_t j = 0; j < src.size(); ++j) {
                dst[j] += src[j];
            }
        }
    });
}

Var segment_sum(Graph& g, Var x, std::span<const std::size_t> segment, std::size_t num_segments) {
    const Tensor2& xv = g.value(x);
    if (segment.size() != xv.rows()) {
        throw ConfigError("segment_sum: segment ids do not match rows");
    }
    Tensor2 out(num_segments, xv.cols());
    for (std::size_t i = 0; i < segment.size(); ++i) {
        if (segment[i] >= num_segments) {
            throw ConfigError("segment_sum: segment id out of range");
        }
        auto src = xv.row(i);
        auto dst = out.row(segment[i]);
        for (std::size_t j = 0; j < src.size(); ++j) {
            dst[j] += src[j];
        }
    }
    std::vector<std::size_t> seg(segment.begin(), segment.end());
    return g.push(std::move(out), g.requires_grad(x), [x, seg = std::move(seg)](Graph& gr, std::size_t self) {
        const Tensor2& gy = gr.grad(Var{self});
        Tensor2& gx = gr.grad_ref(x);
        for (std::size_t i = 0; i < seg.size(); ++i) {
            auto src = gy.row(seg[i]);
            auto dst = gx.row(i);
            for (std::size_t j = 0; j < src.size(); ++j) {
                dst[j] += src[j];
            }
        }
    });
}

Var segment_softmax(Graph& g, Var x, std::span<const std::size_t> segment, std::size_t num_segments) {
    const Tensor2& xv = g.value(x);
    if (xv.cols() != 1 || segment.size() != xv.rows()) {
        throw ConfigError("segment_softmax: expects a column vector with one segment id per row");
    }
    std::vector<double> max_v(num_segments, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < segment.size(); ++i) {
        max_v.at(segment[i]) = std::max(max_v[segment[i]], xv[i]);
    }
    Tensor2 out(xv.rows(), 1);
    std::vector<double> total(num_segments, 0.0);
    for (std::size_t i = 0; i < segment.size(); ++i) {
        out[i] = std::exp(xv[i] - max_v[segment[i]]);
        total[segment[i]] += out[i];
    }
    for (std::size_t i = 0; i < segment.size(); ++i) {
        out[i] /= total[segment[i]];
    }
    std::vector<std::size_t> seg(segment.begin(), segment.end());
    return g.push(std::move(out), g.requires_grad(x),
                  [x, seg = std::move(seg), num_segments](Graph& gr, std::size_t self) {
                      const Tensor2& gy = gr.grad(Var{self});
                      const Tensor2& y = gr.value(Var{self});
                      std::vector<double> dot(num_segments, 0.0);
                      for (std::size_t i = 0; i < seg.size(); ++i) {
                          dot[seg[i]] += gy[i] * y[i];
                      }
                      Tensor2& gx = gr.grad_ref(x);
                      for (std::size_t i = 0; i < seg.size(); ++i) {
                          gx[i] += y[i] * (gy[i] - dot[seg[i]]);
                      }
                  });
}

Var scale_rows(Graph& g, Var v, Var w) {
    const Tensor2& vv = g.value(v);
    const Tensor2& wv = g.value(w);
    if (wv.cols() != 1 || wv.rows() != vv.rows()) {
        throw ConfigError("scale_rows: weight must be a column with one entry per row");
    }
    Tensor2 out = vv;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        for (double& e : out.row(r)) {
            e *= wv[r];
        }
    }
    return g.push(std::move(out), any_requires(g, {v, w}), [v, w](Graph& gr, std::size_t self) {
        const Tensor2& gy = gr.grad(Var{self});
        if (gr.requires_grad(v)) {
            const Tensor2& wv2 = gr.value(w);
            Tensor2& gv = gr.grad_ref(v);
            for (std::size_t r = 0; r < gy.rows(); ++r) {
                for (std::size_t j = 0; j < gy.cols(); ++j) {
                    gv(r, j) += gy(r, j) * wv2[r];
                }
            }
        }
        if (gr.requires_grad(w)) {
            const Tensor2& vv2 = gr.value(v);
            Tensor2& gw = gr.grad_ref(w);
            for (std::size_t r = 0; r < gy.rows(); ++r) {
                double acc = 0.0;
                for (std::size_t j = 0; j < gy.cols(); ++j) {
                    acc += gy(r, j) * vv2(r, j);
                }
                gw[r] += acc;
            }
        }
    });
}

Var logit_clamped(Graph& g, Var s) {
    return unary(
        g, s, [](double v) { return logit(clamp_score(v)); },
        [](double in, double) {
            if (in < kScoreClamp || in > 1.0 - kScoreClamp) {
                return 0.0;
            }
            return 1.0 / (in * (1.0 - in));
        });
}

Var left_multiply(Graph& g, const Tensor2& a, Var x) {
    const Tensor2& xv = g.value(x);
    if (a.cols() != xv.rows()) {
        throw ConfigError("left_multiply: " + a.shape_string() + " times " + xv.shape_string());
    }
    Tensor2 out(a.rows(), xv.cols());
    if (out.size() > 0) {
        out.map().noalias() = a.map() * xv.map();
    }
    return g.push(std::move(out), g.requires_grad(x), [a, x](Graph& gr, std::size_t self) {
        const Tensor2& gy = gr.grad(Var{self});
        if (gy.size() > 0) {
            gr.grad_ref(x).map().noalias() += a.map().transpose() * gy.map();
        }
    });
}

Var sum_all(Graph& g, Var x) {
    const Tensor2& xv = g.value(x);
    Tensor2 out(1, 1);
    for (double v : xv.values()) {
        out[0] += v;
    }
    return g.push(std::move(out), g.requires_grad(x), [x](Graph& gr, std::size_t self) {
        const double gy = gr.grad(Var{self})[0];
        Tensor2& gx = gr.grad_ref(x);
        for (double& v : gx.values()) {
            v += gy;
        }
    });
}

Var smooth_l1_masked(Graph& g, Var pred, const Tensor2& target, const Tensor2& mask, double beta) {
    const Tensor2& pv = g.value(pred);
    require_same_shape(pv, target, "smooth_l1_masked");
    require_same_shape(pv, mask, "smooth_l1_masked");
    if (!(beta > 0.0)) {
        throw PreconditionError("smooth_l1: beta must be positive");
    }
    double count = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < pv.size(); ++i) {
        if (mask[i] != 0.0) {
            total += smooth_l1_elem(pv[i] - target[i], beta);
            count += 1.0;
        }
    }
    Tensor2 out(1, 1);
    out[0] = count > 0.0 ? total / count : 0.0;
    return g.push(std::move(out), g.requires_grad(pred), [pred, target, mask, beta, count](Graph& gr, std::size_t self) {
        if (count == 0.0) {
            return;
        }
        const double gy = gr.grad(Var{self})[0] / count;
        const Tensor2& p = gr.value(pred);
        Tensor2& gp = gr.grad_ref(pred);
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (mask[i] != 0.0) {
                gp[i] += gy * smooth_l1_grad(p[i] - target[i], beta);
            }
        }
    });
}

Var bce_mean(Graph& g, Var scores, const Tensor2& labels) {
    const Tensor2& sv = g.value(scores);
    require_same_shape(sv, labels, "bce_mean");
    if (sv.size() == 0) {
        throw PreconditionError("bce_mean: no scores");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < sv.size(); ++i) {
        total += bce(sv[i], labels[i]);
    }
    const double n = static_cast<double>(sv.size());
    Tensor2 out(1, 1);
    out[0] = total / n;
    return g.push(std::move(out), g.requires_grad(scores), [scores, labels, n](Graph& gr, std::size_t self) {
        const double gy = gr.grad(Var{self})[0] / n;
        const Tensor2& s = gr.value(scores);
        Tensor2& gs = gr.grad_ref(scores);
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] < kScoreClamp || s[i] > 1.0 - kScoreClamp) {
                continue;
            }
            // d/ds of -(y log s + (1-y) log(1-s))
            gs[i] += gy * (-(labels[i] / s[i]) + (1.0 - labels[i]) / (1.0 - s[i]));
        }
    });
}

}  // namespace ops
}  // namespace uncertrack
