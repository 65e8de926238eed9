// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "uncertrack/graph.hpp"
#include "uncertrack/params.hpp"

#include <random>
#include <string>
#include <vector>

namespace uncertrack {

/// Graph leaves for every tensor of every block, indexed [block][tensor].
using ParamBinding = std::vector<std::vector<Var>>;

ParamBinding bind_params(Graph& g, const std::vector<ParamBlock>& blocks);

/// Layer stack stored in one ParamBlock as [W0, b0, W1, b1, ...].
struct MlpParams {
    std::size_t block = 0;
    std::vector<std::size_t> dims;  // input dim followed by each layer's output dim
    std::vector<Activation> activations;

    std::size_t input_dim() const { return dims.front(); }
    std::size_t output_dim() const { return dims.back(); }
};

/// GRU cell stored in one ParamBlock as [W_x (3H x in), W_h (3H x H), b_x (1 x 3H), b_h (1 x 3H)].
/// Gate rows are ordered update, reset, candidate.
struct GruParams {
    std::size_t block = 0;
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
};

MlpParams add_mlp(std::vector<ParamBlock>& blocks, std::string name, std::vector<std::size_t> dims,
                  std::vector<Activation> activations);
GruParams add_gru(std::vector<ParamBlock>& blocks, std::string name, std::size_t input_dim, std::size_t hidden_dim);

/// Fan-in uniform weights, zero biases.
void init_mlp(std::vector<ParamBlock>& blocks, const MlpParams& mlp, std::mt19937_64& rng);
void init_gru(std::vector<ParamBlock>& blocks, const GruParams& gru, std::mt19937_64& rng);

/// Rows of x are independent samples.
Var mlp_forward(Graph& g, const ParamBinding& bound, const MlpParams& mlp, Var x);

/// Standard GRU step (reset gate applied to the recurrent term of the candidate):
///   z = sig(Wz x + Uz h + bz), r = sig(Wr x + Ur h + br)
///   n = tanh(Wn x + bn + r * (Un h + bhn)),  h' = (1 - z) * n + z * h
Var gru_step(Graph& g, const ParamBinding& bound, const GruParams& gru, Var x, Var h_prev);

}  // namespace uncertrack
