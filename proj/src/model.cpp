// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#include "uncertrack/model.hpp"

#include "uncertrack/errors.hpp"

#include <random>

namespace uncertrack {

const ParamBlock& ModelParams::block(const std::string& name) const {
    for (const auto& b : blocks) {
        if (b.name == name) {
            return b;
        }
    }
    throw ConfigError("model has no parameter block '" + name + "'");
}

ParamBlock& ModelParams::block(const std::string& name) {
    return const_cast<ParamBlock&>(static_cast<const ModelParams&>(*this).block(name));
}

ModelParams make_model_layout(const ModelConfig& c) {
    if (c.top_k < 1) {
        throw ConfigError("top_k must be >= 1");
    }
    if (!(c.theta_d > 0.0)) {
        throw ConfigError("theta_d must be positive");
    }
    using A = Activation;
    ModelParams m;
    m.config = c;
    auto& b = m.blocks;
    m.embed_velo = add_mlp(b, "mlp_velo", {2, c.field_dim}, {A::relu});
    m.embed_size = add_mlp(b, "mlp_size", {3, c.field_dim}, {A::relu});
    m.embed_head = add_mlp(b, "mlp_head", {2, c.field_dim}, {A::relu});
    m.embed_score = add_mlp(b, "mlp_score", {1, c.field_dim}, {A::relu});
    m.fuse = add_mlp(b, "mlp_fus", {4 * c.field_dim, c.det_dim}, {A::relu});
    m.movement = add_mlp(b, "mlp_mov", {2, c.mov_dim}, {A::relu});
    m.long_term = add_mlp(b, "mlp_mot", {c.mov_dim + c.hidden_dim, c.aff_mot_dim}, {A::relu});
    m.affinity = add_mlp(b, "mlp_aff", {c.aff_dim(), c.aff_hidden, 1}, {A::relu, A::identity});
    if (c.use_asu) {
        m.gru_aff = add_gru(b, "gru_aff", c.aff_dim(), c.hidden_dim);
    }
    m.gru_mot = add_gru(b, "gru_mot", c.input_dim() + (c.use_asu ? c.hidden_dim : 0), c.hidden_dim);
    if (c.use_msa) {
        m.gate_mot = add_mlp(b, "gate_mot", {2 * c.hidden_dim + c.input_dim(), c.hidden_dim}, {A::sigmoid});
        if (c.use_asu) {
            m.gate_aff = add_mlp(b, "gate_aff", {2 * c.hidden_dim + c.aff_dim(), c.hidden_dim}, {A::sigmoid});
        }
    }
    m.decoder = add_mlp(b, "mlp_dec", {c.hidden_dim, c.dec_hidden, 2 * c.pred_steps}, {A::relu, A::identity});
    if (c.learned_init) {
        m.init_block = b.size();
        ParamBlock init("init_state");
        init.add_tensor(c.hidden_dim, 1);
        init.add_tensor(c.hidden_dim, 1);
        b.push_back(std::move(init));
    }
    return m;
}

ModelParams make_model(const ModelConfig& config, std::uint64_t seed) {
    ModelParams m = make_model_layout(config);
    std::mt19937_64 rng(seed);
    for (const MlpParams* mlp : {&m.embed_velo, &m.embed_size, &m.embed_head, &m.embed_score, &m.fuse, &m.movement,
                                 &m.long_term, &m.affinity}) {
        init_mlp(m.blocks, *mlp, rng);
    }
    if (m.gru_aff) {
        init_gru(m.blocks, *m.gru_aff, rng);
    }
    init_gru(m.blocks, m.gru_mot, rng);
    if (m.gate_mot) {
        init_mlp(m.blocks, *m.gate_mot, rng);
    }
    if (m.gate_aff) {
        init_mlp(m.blocks, *m.gate_aff, rng);
    }
    init_mlp(m.blocks, m.decoder, rng);
    // init_state starts at zero, i.e. identical to the zero birth state.
    return m;
}

void zero_weights(ModelParams& model) {
    for (auto& b : model.blocks) {
        for (auto& w : b.weights) {
            w.fill(0.0);
        }
    }
}

}  // namespace uncertrack
