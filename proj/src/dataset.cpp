// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#include "uncertrack/dataset.hpp"

#include "uncertrack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace uncertrack {

bool Sequence::same_agent(std::size_t t, std::size_t prev_index, std::size_t curr_index) const {
    const int curr_id = true_ids.at(t).at(curr_index);
    return curr_id != sim::kFalsePositive && curr_id == true_ids.at(t - 1).at(prev_index);
}

std::size_t Sequence::num_supervised() const {
    std::size_t count = 0;
    for (std::size_t n = 0; n < future_mask.rows(); ++n) {
        const auto row = future_mask.row(n);
        if (std::any_of(row.begin(), row.end(), [](double m) { return m != 0.0; })) {
            ++count;
        }
    }
    return count;
}

bool Sequence::has_full_future(std::size_t n) const {
    const auto row = future_mask.row(n);
    return std::all_of(row.begin(), row.end(), [](double m) { return m != 0.0; });
}

int waypoint_stride(double frame_rate, double pred_interval) {
    const int stride = static_cast<int>(std::lround(frame_rate * pred_interval));
    if (stride < 1) {
        throw ConfigError("frame rate too low for the waypoint interval");
    }
    return stride;
}

Sequence extract_sequence(const sim::WorldLog& log, int start, const SequenceOptions& options,
                          std::size_t world_index) {
    if (options.t_obs < 2) {
        throw PreconditionError("extract_sequence: T_obs must be >= 2");
    }
    if (start < 0 || start + options.t_obs > log.num_frames()) {
        throw PreconditionError("extract_sequence: frames [" + std::to_string(start) + ", " +
                                std::to_string(start + options.t_obs) + ") not in log");
    }
    Sequence seq;
    seq.world = world_index;
    seq.start_frame = start;
    for (int f = start; f < start + options.t_obs; ++f) {
        const auto& src = log.frames[static_cast<std::size_t>(f)];
        std::vector<std::size_t> keep(src.size());
        std::iota(keep.begin(), keep.end(), 0);
        if (keep.size() > options.max_detections) {
            std::stable_sort(keep.begin(), keep.end(),
                             [&](std::size_t a, std::size_t b) { return src[a].det.score > src[b].det.score; });
            keep.resize(options.max_detections);
            std::sort(keep.begin(), keep.end());
        }
        DetectionFrame frame;
        std::vector<int> ids;
        for (std::size_t i : keep) {
            Detection d = src[i].det;
            d.local_index = frame.size();
            frame.push_back(d);
            ids.push_back(src[i].true_id);
        }
        seq.frames.push_back(std::move(frame));
        seq.true_ids.push_back(std::move(ids));
    }

    const int t_last = start + options.t_obs - 1;
    const int stride = waypoint_stride(log.frame_rate, options.pred_interval);
    const auto& last = seq.frames.back();
    seq.future = Tensor2(last.size(), 2 * options.pred_steps);
    seq.future_mask = Tensor2(last.size(), 2 * options.pred_steps);
    for (std::size_t n = 0; n < last.size(); ++n) {
        const int id = seq.true_ids.back()[n];
        if (id == sim::kFalsePositive) {
            continue;
        }
        const sim::AgentTrack* agent = log.find_agent(id);
        if (agent == nullptr) {
            continue;
        }
        for (std::size_t k = 0; k < options.pred_steps; ++k) {
            const int f = t_last + stride * static_cast<int>(k + 1);
            if (!agent->alive(f)) {
                continue;
            }
            const Vec2 p = agent->at(f).pos;
            seq.future(n, 2 * k) = p.x;
            seq.future(n, 2 * k + 1) = p.y;
            seq.future_mask(n, 2 * k) = 1.0;
            seq.future_mask(n, 2 * k + 1) = 1.0;
        }
    }
    return seq;
}

std::vector<int> valid_starts(const sim::WorldLog& log, int t_obs) {
    std::vector<int> starts;
    for (int s = 0; s + t_obs <= log.num_frames(); ++s) {
        starts.push_back(s);
    }
    return starts;
}

}  // namespace uncertrack
