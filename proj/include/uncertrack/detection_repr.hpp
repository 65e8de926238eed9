// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "uncertrack/detection.hpp"
#include "uncertrack/graph.hpp"
#include "uncertrack/model.hpp"

#include <span>

namespace uncertrack::repr {

/// Unary features of a batch of detections, one row each: velocity, size,
/// (cos, sin) of heading, score. Position is never part of them.
struct UnaryInputs {
    Tensor2 velo;   // n x 2
    Tensor2 size;   // n x 3
    Tensor2 head;   // n x 2
    Tensor2 score;  // n x 1
};

UnaryInputs unary_inputs(std::span<const Detection> dets, const ModelConfig& config);

/// x_det = MLP_fus([MLP_velo(v); MLP_size(s); MLP_head(h); MLP_score(c)]), n x det_dim.
Var embed_detections(Graph& g, const ParamBinding& bound, const ModelParams& model, std::span<const Detection> dets);

/// Raw offsets pos_curr - pos_prev for each (prev, curr) pair, n x 2.
Tensor2 movement_offsets(std::span<const Vec2> offsets, const ModelConfig& config);

/// x_mov = MLP_mov(offset), n x mov_dim.
Var movement_features(Graph& g, const ParamBinding& bound, const ModelParams& model, const Tensor2& offsets);

/// x = [x_det ; x_mov] row-wise.
Var compose_input(Graph& g, Var x_det, Var x_mov);

/// Single-detection forms.
Var embed_detection(Graph& g, const ParamBinding& bound, const ModelParams& model, const Detection& d);

struct MovementFeature {
    Var x_mov;
    Vec2 raw_offset;
};

/// Requires d_prev.frame == d_curr.frame - 1.
MovementFeature movement_feature(Graph& g, const ParamBinding& bound, const ModelParams& model,
                                 const Detection& d_prev, const Detection& d_curr);

}  // namespace uncertrack::repr
