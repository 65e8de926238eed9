// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#include "uncertrack/params.hpp"

#include "uncertrack/errors.hpp"

#include <cmath>

namespace uncertrack {

std::size_t ParamBlock::add_tensor(std::size_t rows, std::size_t cols) {
    weights.emplace_back(rows, cols);
    grads.emplace_back(rows, cols);
    adam_m.emplace_back(rows, cols);
    adam_v.emplace_back(rows, cols);
    return weights.size() - 1;
}

void ParamBlock::zero_grads() {
    for (auto& g : grads) {
        g.fill(0.0);
    }
}

std::size_t ParamBlock::num_values() const {
    std::size_t n = 0;
    for (const auto& w : weights) {
        n += w.size();
    }
    return n;
}

GradSet make_grad_set(const std::vector<ParamBlock>& blocks) {
    GradSet set;
    set.reserve(blocks.size());
    for (const auto& b : blocks) {
        std::vector<Tensor2> tensors;
        tensors.reserve(b.weights.size());
        for (const auto& w : b.weights) {
            tensors.emplace_back(w.rows(), w.cols());
        }
        set.push_back(std::move(tensors));
    }
    return set;
}

void zero_grad_set(GradSet& grads) {
    for (auto& block : grads) {
        for (auto& t : block) {
            t.fill(0.0);
        }
    }
}

void accumulate_grads(std::vector<ParamBlock>& blocks, const GradSet& set) {
    if (set.size() != blocks.size()) {
        throw ConfigError("accumulate_grads: block count mismatch");
    }
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        for (std::size_t t = 0; t < blocks[b].grads.size(); ++t) {
            blocks[b].grads[t].map() += set[b][t].map();
        }
    }
}

void init_uniform_fan_in(Tensor2& weight, std::mt19937_64& rng) {
    const double bound = std::sqrt(1.0 / static_cast<double>(weight.cols()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : weight.values()) {
        v = dist(rng);
    }
}

std::size_t count_values(const std::vector<ParamBlock>& blocks) {
    std::size_t n = 0;
    for (const auto& b : blocks) {
        n += b.num_values();
    }
    return n;
}

}  // namespace uncertrack
