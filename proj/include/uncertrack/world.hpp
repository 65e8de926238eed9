// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "uncertrack/detection.hpp"
#include "uncertrack/geometry.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace uncertrack::sim {

enum class MotionClass { constant_velocity, constant_turn, accelerating, stop_and_go };

std::string_view motion_name(MotionClass m);
MotionClass parse_motion(std::string_view name);

struct AgentState {
    Vec2 pos;
    Vec2 velo;
    double heading = 0.0;
    std::array<double, 3> size{};
};

/// Ground-truth agent alive on frames [birth_frame, death_frame].
/// pos(t+1) = pos(t) + velo(t) * dt; heading = atan2(velo) when speed > 0.1 m/s.
struct AgentTrack {
    int agent_id = 0;
    MotionClass motion = MotionClass::constant_velocity;
    int birth_frame = 0;
    int death_frame = 0;
    std::vector<AgentState> states;  // one per frame in [birth_frame, death_frame]

    bool alive(int frame) const { return frame >= birth_frame && frame <= death_frame; }
    const AgentState& at(int frame) const { return states.at(static_cast<std::size_t>(frame - birth_frame)); }
};

struct MotionMix {
    double constant_velocity = 0.4;
    double constant_turn = 0.3;
    double accelerating = 0.15;
    double stop_and_go = 0.15;
};

struct WorldConfig {
    int num_agents = 12;
    int num_frames = 200;
    double frame_rate = 10.0;
    double area = 60.0;  // side of the square agents are placed in (m)
    MotionMix motion_mix;
    double speed_min = 1.0;
    double speed_max = 8.0;
    int min_lifespan = 35;  // T_obs + T_pred * frame_rate / 2
};

/// Kinematics of a single agent, independent of spawning randomness.
struct MotionSpec {
    MotionClass motion = MotionClass::constant_velocity;
    Vec2 start;
    double direction = 0.0;  // rad
    double speed = 5.0;      // m/s
    double turn_rate = 0.0;  // rad/s, constant_turn
    double accel = 0.0;      // m/s^2, accelerating
    double max_speed = 15.0;
    int cruise_frames = 30;  // stop_and_go phases
    int stop_frames = 10;
    int phase_offset = 0;
};

/// States for `num_frames` consecutive frames following `spec`.
std::vector<AgentState> simulate_motion(const MotionSpec& spec, int num_frames, double frame_rate,
                                        std::array<double, 3> size);

std::vector<AgentTrack> generate_world(const WorldConfig& config, std::uint64_t seed);

struct NoiseConfig {
    double pos_sigma = 0.3;
    double velo_sigma = 0.3;
    double heading_sigma = 0.05;
    double size_sigma = 0.1;
    double miss_rate = 0.1;
    double fp_rate = 1.0;
    double fp_cluster_sigma = 2.0;
    double fp_velo_sigma = 1.0;  // FP velocity spread around the agent it clusters on
    double score_tp_mean = 0.8;
    double score_fp_mean = 0.4;
    double score_sigma = 0.1;
    double burst_prob = 0.02;  // per agent per frame
    double burst_pos_factor = 4.0;

    static NoiseConfig zero();
    void validate() const;
};

inline constexpr int kFalsePositive = -1;

struct WorldDetection {
    Detection det;
    int true_id = kFalsePositive;
    bool is_false_positive() const { return true_id == kFalsePositive; }
};

struct WorldLog {
    double frame_rate = 10.0;
    std::uint64_t rng_seed = 0;
    std::vector<AgentTrack> tracks;
    std::vector<std::vector<WorldDetection>> frames;

    int num_frames() const { return static_cast<int>(frames.size()); }
    const AgentTrack* find_agent(int agent_id) const;
    DetectionFrame detections(int frame) const;
};

WorldLog corrupt_to_detections(const std::vector<AgentTrack>& tracks, int num_frames, double frame_rate,
                               const NoiseConfig& noise, std::uint64_t seed);

/// Convenience: generate + corrupt with sub-streams "world" and "noise" of `seed`.
WorldLog simulate_world(const WorldConfig& world, const NoiseConfig& noise, std::uint64_t seed);

struct AffinityLabel {
    std::size_t prev_index = 0;
    std::size_t curr_index = 0;
    double distance = 0.0;
    int label = 0;
};

/// Labels for every pair (d_prev at t-1, d_curr at t) within theta_d, ordered by
/// curr_index then prev_index. Label 1 iff both are true positives of one agent.
std::vector<AffinityLabel> make_affinity_labels(const WorldLog& log, int t, double theta_d);

}  // namespace uncertrack::sim
