// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "uncertrack/tensor.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace uncertrack {

/// A named group of learnable tensors with their gradients and Adam moments.
/// grads, adam_m and adam_v always mirror the shapes of weights.
struct ParamBlock {
    std::string name;
    std::vector<Tensor2> weights;
    std::vector<Tensor2> grads;
    std::vector<Tensor2> adam_m;
    std::vector<Tensor2> adam_v;

    explicit ParamBlock(std::string block_name = {}) : name(std::move(block_name)) {}

    /// Appends a zero tensor (with zeroed grad and moments); returns its index.
    std::size_t add_tensor(std::size_t rows, std::size_t cols);
    void zero_grads();
    std::size_t num_values() const;
};

/// Per-tensor gradient storage mirroring a list of ParamBlocks.
using GradSet = std::vector<std::vector<Tensor2>>;

GradSet make_grad_set(const std::vector<ParamBlock>& blocks);
void zero_grad_set(GradSet& grads);
/// grads of each block += set. Blocks and set must mirror each other.
void accumulate_grads(std::vector<ParamBlock>& blocks, const GradSet& set);

/// Uniform(-sqrt(1/fan_in), sqrt(1/fan_in)) for a weight of shape out x fan_in.
void init_uniform_fan_in(Tensor2& weight, std::mt19937_64& rng);

std::size_t count_values(const std::vector<ParamBlock>& blocks);

}  // namespace uncertrack
