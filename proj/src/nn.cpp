// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#include "uncertrack/nn.hpp"

#include "uncertrack/errors.hpp"

namespace uncertrack {

ParamBinding bind_params(Graph& g, const std::vector<ParamBlock>& blocks) {
    ParamBinding bound(blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        bound[b].reserve(blocks[b].weights.size());
        for (std::size_t t = 0; t < blocks[b].weights.size(); ++t) {
            bound[b].push_back(g.parameter(blocks[b].weights[t], b, t));
        }
    }
    return bound;
}

MlpParams add_mlp(std::vector<ParamBlock>& blocks, std::string name, std::vector<std::size_t> dims,
                  std::vector<Activation> activations) {
    if (dims.size() < 2 || activations.size() != dims.size() - 1) {
        throw ConfigError("add_mlp(" + name + "): need one activation per layer");
    }
    MlpParams mlp;
    mlp.block = blocks.size();
    mlp.dims = std::move(dims);
    mlp.activations = std::move(activations);
    ParamBlock block(std::move(name));
    for (std::size_t l = 0; l + 1 < mlp.dims.size(); ++l) {
        block.add_tensor(mlp.dims[l + 1], mlp.dims[l]);
        block.add_tensor(1, mlp.dims[l + 1]);
    }
    blocks.push_back(std::move(block));
    return mlp;
}

GruParams add_gru(std::vector<ParamBlock>& blocks, std::string name, std::size_t input_dim, std::size_t hidden_dim) {
    GruParams gru{blocks.size(), input_dim, hidden_dim};
    ParamBlock block(std::move(name));
    block.add_tensor(3 * hidden_dim, input_dim);
    block.add_tensor(3 * hidden_dim, hidden_dim);
    block.add_tensor(1, 3 * hidden_dim);
    block.add_tensor(1, 3 * hidden_dim);
    blocks.push_back(std::move(block));
    return gru;
}

void init_mlp(std::vector<ParamBlock>& blocks, const MlpParams& mlp, std::mt19937_64& rng) {
    auto& block = blocks.at(mlp.block);
    for (std::size_t l = 0; l + 1 < mlp.dims.size(); ++l) {
        init_uniform_fan_in(block.weights[2 * l], rng);
        block.weights[2 * l + 1].fill(0.0);
    }
}

void init_gru(std::vector<ParamBlock>& blocks, const GruParams& gru, std::mt19937_64& rng) {
    auto& block = blocks.at(gru.block);
    init_uniform_fan_in(block.weights[0], rng);
    init_uniform_fan_in(block.weights[1], rng);
    block.weights[2].fill(0.0);
    block.weights[3].fill(0.0);
}

Var mlp_forward(Graph& g, const ParamBinding& bound, const MlpParams& mlp, Var x) {
    if (g.value(x).cols() != mlp.input_dim()) {
        throw ConfigError("mlp_forward: input dim " + std::to_string(g.value(x).cols()) + " but layer expects " +
                          std::to_string(mlp.input_dim()));
    }
    const auto& vars = bound.at(mlp.block);
    Var h = x;
    for (std::size_t l = 0; l < mlp.activations.size(); ++l) {
        h = ops::linear(g, h, vars[2 * l], vars[2 * l + 1]);
        h = ops::activate(g, h, mlp.activations[l]);
    }
    return h;
}

Var gru_step(Graph& g, const ParamBinding& bound, const GruParams& gru, Var x, Var h_prev) {
    const Tensor2& xv = g.value(x);
    const Tensor2& hv = g.value(h_prev);
    if (xv.cols() != gru.input_dim || hv.cols() != gru.hidden_dim || xv.rows() != hv.rows()) {
        throw ConfigError("gru_step: got x " + xv.shape_string() + ", h " + hv.shape_string() + "; expected input " +
                          std::to_string(gru.input_dim) + ", hidden " + std::to_string(gru.hidden_dim));
    }
    const auto& vars = bound.at(gru.block);
    const std::size_t h = gru.hidden_dim;
    Var gx = ops::linear(g, x, vars[0], vars[2]);
    Var gh = ops::linear(g, h_prev, vars[1], vars[3]);
    Var z = ops::sigmoid(g, ops::add(g, ops::slice_cols(g, gx, 0, h), ops::slice_cols(g, gh, 0, h)));
    Var r = ops::sigmoid(g, ops::add(g, ops::slice_cols(g, gx, h, h), ops::slice_cols(g, gh, h, h)));
    Var n = ops::tanh(g, ops::add(g, ops::slice_cols(g, gx, 2 * h, h), ops::mul(g, r, ops::slice_cols(g, gh, 2 * h, h))));
    // n + z * (h_prev - n) == (1 - z) * n + z * h_prev
    return ops::add(g, n, ops::mul(g, z, ops::sub(g, h_prev, n)));
}

}  // namespace uncertrack
