// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "uncertrack/nn.hpp"
#include "uncertrack/params.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace uncertrack {

/// Architecture and matching hyperparameters shared by every module of the model.
struct ModelConfig {
    std::size_t field_dim = 32;    // per-field embedding width (velocity, size, heading, score)
    std::size_t det_dim = 64;      // x_det
    std::size_t mov_dim = 32;      // x_mov
    std::size_t aff_mot_dim = 64;  // a_mot
    std::size_t hidden_dim = 64;   // GRU_mot / GRU_aff state
    std::size_t aff_hidden = 64;   // hidden width of the affinity scorer
    std::size_t dec_hidden = 64;   // hidden width of the decoder
    std::size_t pred_steps = 6;    // 3 s at 0.5 s
    std::size_t top_k = 10;
    double theta_d = 10.0;
    bool use_asu = true;           // feed GRU_aff state into GRU_mot
    bool use_msa = true;           // aggregate top-K candidates; otherwise keep only the best one
    bool learned_init = false;     // learned birth state instead of zeros
    bool birth_update = true;      // a detection without candidates is updated once from the birth state
    bool invariant_inputs = false; // feed only rotation-invariant quantities (speed, |offset|, no heading)

    std::size_t input_dim() const { return det_dim + mov_dim; }
    std::size_t aff_dim() const { return aff_mot_dim + det_dim; }
    /// Effective candidate count: K without aggregation is 1.
    std::size_t candidates() const { return use_msa ? top_k : 1; }
};

/// All learnable parameters plus the layer descriptors that index into them.
struct ModelParams {
    ModelConfig config;
    std::vector<ParamBlock> blocks;

    MlpParams embed_velo;
    MlpParams embed_size;
    MlpParams embed_head;
    MlpParams embed_score;
    MlpParams fuse;
    MlpParams movement;
    MlpParams long_term;
    MlpParams affinity;
    std::optional<GruParams> gru_aff;
    GruParams gru_mot;
    std::optional<MlpParams> gate_mot;
    std::optional<MlpParams> gate_aff;
    MlpParams decoder;
    std::optional<std::size_t> init_block;  // [h_mot0 (H x 1), h_aff0 (H x 1)]

    const ParamBlock& block(const std::string& name) const;
    ParamBlock& block(const std::string& name);
};

/// Builds the parameter layout for `config` with zero weights.
ModelParams make_model_layout(const ModelConfig& config);
/// Layout plus fan-in uniform initialization drawn from `seed`.
ModelParams make_model(const ModelConfig& config, std::uint64_t seed);
/// Sets every weight and bias to zero.
void zero_weights(ModelParams& model);

}  // namespace uncertrack
