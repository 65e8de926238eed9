// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "uncertrack/geometry.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace uncertrack {

/// One detector output at one frame: position, velocity, size, heading, score.
struct Detection {
    Vec2 pos;
    Vec2 velo;
    std::array<double, 3> size{};  // length, width, height
    double heading = 0.0;
    double score = 0.5;
    int frame = 0;
    std::size_t local_index = 0;
};

using DetectionFrame = std::vector<Detection>;

}  // namespace uncertrack
