// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#include "uncertrack/detection_repr.hpp"

#include "uncertrack/errors.hpp"

#include <cmath>

namespace uncertrack::repr {

UnaryInputs unary_inputs(std::span<const Detection> dets, const ModelConfig& config) {
    const std::size_t n = dets.size();
    UnaryInputs in{Tensor2(n, 2), Tensor2(n, 3), Tensor2(n, 2), Tensor2(n, 1)};
    for (std::size_t i = 0; i < n; ++i) {
        const Detection& d = dets[i];
        if (config.invariant_inputs) {
            in.velo(i, 0) = d.velo.norm();
        } else {
            in.velo(i, 0) = d.velo.x;
            in.velo(i, 1) = d.velo.y;
            in.head(i, 0) = std::cos(d.heading);
            in.head(i, 1) = std::sin(d.heading);
        }
        for (std::size_t k = 0; k < 3; ++k) {
            in.size(i, k) = d.size[k];
        }
        in.score(i, 0) = d.score;
    }
    return in;
}

Var embed_detections(Graph& g, const ParamBinding& bound, const ModelParams& model, std::span<const Detection> dets) {
    UnaryInputs in = unary_inputs(dets, model.config);
    Var velo = mlp_forward(g, bound, model.embed_velo, g.constant(std::move(in.velo)));
    Var size = mlp_forward(g, bound, model.embed_size, g.constant(std::move(in.size)));
    Var head = mlp_forward(g, bound, model.embed_head, g.constant(std::move(in.head)));
    Var score = mlp_forward(g, bound, model.embed_score, g.constant(std::move(in.score)));
    return mlp_forward(g, bound, model.fuse, ops::concat_cols(g, {velo, size, head, score}));
}

Tensor2 movement_offsets(std::span<const Vec2> offsets, const ModelConfig& config) {
    Tensor2 out(offsets.size(), 2);
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        if (config.invariant_inputs) {
            out(i, 0) = offsets[i].norm();
        } else {
            out(i, 0) = offsets[i].x;
            out(i, 1) = offsets[i].y;
        }
    }
    return out;
}

Var movement_features(Graph& g, const ParamBinding& bound, const ModelParams& model, const Tensor2& offsets) {
    return mlp_forward(g, bound, model.movement, g.constant(offsets));
}

Var compose_input(Graph& g, Var x_det, Var x_mov) { return ops::concat_cols(g, {x_det, x_mov}); }

Var embed_detection(Graph& g, const ParamBinding& bound, const ModelParams& model, const Detection& d) {
    return embed_detections(g, bound, model, std::span<const Detection>(&d, 1));
}

MovementFeature movement_feature(Graph& g, const ParamBinding& bound, const ModelParams& model,
                                 const Detection& d_prev, const Detection& d_curr) {
    if (d_prev.frame != d_curr.frame - 1) {
        throw PreconditionError("movement_feature: detections must come from consecutive frames (got " +
                                std::to_string(d_prev.frame) + " and " + std::to_string(d_curr.frame) + ")");
    }
    const Vec2 offset = d_curr.pos - d_prev.pos;
    const Tensor2 raw = movement_offsets(std::span<const Vec2>(&offset, 1), model.config);
    return {movement_features(g, bound, model, raw), offset};
}

}  // namespace uncertrack::repr
