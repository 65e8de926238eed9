// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "uncertrack/detection.hpp"
#include "uncertrack/model.hpp"
#include "uncertrack/tensor.hpp"

#include <random>

namespace uncertrack::fixtures {

inline Tensor2 random_tensor(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double lo = -1.0,
                             double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Tensor2 t(rows, cols);
    for (auto& v : t.values()) {
        v = u(rng);
    }
    return t;
}

/// Narrow layers so randomized checks stay fast.
inline ModelConfig small_model_config() {
    ModelConfig c;
    c.field_dim = 6;
    c.det_dim = 8;
    c.mov_dim = 5;
    c.aff_mot_dim = 7;
    c.hidden_dim = 9;
    c.aff_hidden = 10;
    c.dec_hidden = 8;
    c.top_k = 4;
    return c;
}

/// `n` detections with random kinematics, positions uniform in [-extent, extent]^2.
inline DetectionFrame random_frame(std::size_t n, int frame, double extent, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> pos(-extent, extent);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DetectionFrame out;
    for (std::size_t i = 0; i < n; ++i) {
        Detection d;
        d.pos = {pos(rng), pos(rng)};
        d.velo = {8.0 * u(rng) - 4.0, 8.0 * u(rng) - 4.0};
        d.size = {3.0 + 2.0 * u(rng), 1.5 + u(rng), 1.2 + u(rng)};
        d.heading = 6.0 * u(rng) - 3.0;
        d.score = 0.05 + 0.9 * u(rng);
        d.frame = frame;
        d.local_index = i;
        out.push_back(d);
    }
    return out;
}

}  // namespace uncertrack::fixtures
