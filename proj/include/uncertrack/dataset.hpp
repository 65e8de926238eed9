// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "uncertrack/detection.hpp"
#include "uncertrack/tensor.hpp"
#include "uncertrack/world.hpp"

#include <cstddef>
#include <vector>

namespace uncertrack {

/// T_obs observed frames of one world plus the ground-truth futures of the
/// detections at the last observed frame T.
struct Sequence {
    std::vector<DetectionFrame> frames;
    std::vector<std::vector<int>> true_ids;  // parallel to frames; sim::kFalsePositive for FPs
    Tensor2 future;       // N_T x 2*pred_steps, absolute GT waypoints (x0, y0, x1, y1, ...)
    Tensor2 future_mask;  // 1 where the waypoint exists and the detection is a true positive
    std::size_t world = 0;
    int start_frame = 0;

    const DetectionFrame& last() const { return frames.back(); }
    /// Labels for the gated pairs of transition t-1 -> t.
    bool same_agent(std::size_t t, std::size_t prev_index, std::size_t curr_index) const;
    /// Detections at T that have at least one supervised waypoint.
    std::size_t num_supervised() const;
    /// Detections at T with every future waypoint present.
    bool has_full_future(std::size_t n) const;
};

struct SequenceOptions {
    int t_obs = 20;
    std::size_t max_detections = 100;  // per frame, highest scores kept
    std::size_t pred_steps = 6;
    double pred_interval = 0.5;  // s between waypoints
};

/// Frame offset between consecutive future waypoints at the log's frame rate.
int waypoint_stride(double frame_rate, double pred_interval);

/// Observed frames [start, start + t_obs). Requires them to exist in the log.
Sequence extract_sequence(const sim::WorldLog& log, int start, const SequenceOptions& options,
                          std::size_t world_index = 0);

/// Start frames for which all t_obs frames exist.
std::vector<int> valid_starts(const sim::WorldLog& log, int t_obs);

}  // namespace uncertrack
