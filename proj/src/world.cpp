// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#include "uncertrack/world.hpp"

#include "uncertrack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace uncertrack::sim {

std::string_view motion_name(MotionClass m) {
    switch (m) {
        case MotionClass::constant_velocity:
            return "constant_velocity";
        case MotionClass::constant_turn:
            return "constant_turn";
        case MotionClass::accelerating:
            return "accelerating";
        case MotionClass::stop_and_go:
            return "stop_and_go";
    }
    return "constant_velocity";
}

MotionClass parse_motion(std::string_view name) {
    for (auto m : {MotionClass::constant_velocity, MotionClass::constant_turn, MotionClass::accelerating,
                   MotionClass::stop_and_go}) {
        if (motion_name(m) == name) {
            return m;
        }
    }
    throw ConfigError("unknown motion class '" + std::string(name) + "'");
}

namespace {

std::vector<double> speed_profile(const MotionSpec& spec, int n, double dt) {
    std::vector<double> speed(static_cast<std::size_t>(n));
    switch (spec.motion) {
        case MotionClass::accelerating:
            for (int k = 0; k < n; ++k) {
                speed[k] = std::clamp(spec.speed + spec.accel * k * dt, 0.5, spec.max_speed);
            }
            break;
        case MotionClass::stop_and_go: {
            // cruise -> brake at 3 m/s^2 -> stand -> accelerate at 2 m/s^2 -> cruise ...
            enum Phase { cruise, brake, stand, go };
            Phase phase = cruise;
            int left = spec.cruise_frames - spec.phase_offset % std::max(spec.cruise_frames, 1);
            double s = spec.speed;
            for (int k = 0; k < n; ++k) {
                speed[k] = s;
                switch (phase) {
                    case cruise:
                        if (--left <= 0) phase = brake;
                        break;
                    case brake:
                        s = std::max(0.0, s - 3.0 * dt);
                        if (s == 0.0) {
                            phase = stand;
                            left = spec.stop_frames;
                        }
                        break;
                    case stand:
                        if (--left <= 0) phase = go;
                        break;
                    case go:
                        s = std::min(spec.speed, s + 2.0 * dt);
                        if (s == spec.speed) {
                            phase = cruise;
                            left = spec.cruise_frames;
                        }
                        break;
                }
            }
            break;
        }
        default:
            std::fill(speed.begin(), speed.end(), spec.speed);
    }
    return speed;
}

}  // namespace

std::vector<AgentState> simulate_motion(const MotionSpec& spec, int num_frames, double frame_rate,
                                        std::array<double, 3> size) {
    if (num_frames < 1 || !(frame_rate > 0.0)) {
        throw ConfigError("simulate_motion: need num_frames >= 1 and frame_rate > 0");
    }
    const double dt = 1.0 / frame_rate;
    // One extra position so the last frame's velocity is defined by its successor.
    std::vector<Vec2> pos(static_cast<std::size_t>(num_frames) + 1);
    const Vec2 dir{std::cos(spec.direction), std::sin(spec.direction)};
    if (spec.motion == MotionClass::constant_turn && spec.turn_rate != 0.0) {
        const double radius = spec.speed / spec.turn_rate;  // signed
        const Vec2 center = spec.start + radius * Vec2{-std::sin(spec.direction), std::cos(spec.direction)};
        for (std::size_t k = 0; k < pos.size(); ++k) {
            const double theta = spec.direction + spec.turn_rate * static_cast<double>(k) * dt;
            pos[k] = center + radius * Vec2{std::sin(theta), -std::cos(theta)};
        }
    } else if (spec.motion == MotionClass::constant_velocity || spec.motion == MotionClass::constant_turn) {
        for (std::size_t k = 0; k < pos.size(); ++k) {
            pos[k] = spec.start + (spec.speed * static_cast<double>(k) * dt) * dir;
        }
    } else {
        const auto speed = speed_profile(spec, num_frames, dt);
        pos[0] = spec.start;
        for (int k = 0; k < num_frames; ++k) {
            pos[k + 1] = pos[k] + (speed[k] * dt) * dir;
        }
    }

    std::vector<AgentState> states(static_cast<std::size_t>(num_frames));
    double heading = spec.direction;
    for (std::size_t k = 0; k < states.size(); ++k) {
        AgentState& s = states[k];
        s.pos = pos[k];
        s.velo = (pos[k + 1] - pos[k]) * frame_rate;
        if (s.velo.norm() > 0.1) {
            heading = std::atan2(s.velo.y, s.velo.x);
        }
        s.heading = heading;
        s.size = size;
    }
    return states;
}

std::vector<AgentTrack> generate_world(const WorldConfig& config, std::uint64_t seed) {
    if (config.num_agents < 1) {
        throw PreconditionError("generate_world: num_agents must be >= 1, got " + std::to_string(config.num_agents));
    }
    if (!(config.frame_rate > 0.0) || config.num_frames < 1) {
        throw ConfigError("generate_world: frame_rate and num_frames must be positive");
    }
    if (config.min_lifespan < 1 || config.num_frames < config.min_lifespan) {
        throw ConfigError("generate_world: num_frames " + std::to_string(config.num_frames) +
                          " cannot hold the minimum agent lifespan " + std::to_string(config.min_lifespan));
    }
    if (!(config.speed_min >= 0.0 && config.speed_max >= config.speed_min)) {
        throw ConfigError("generate_world: need 0 <= speed_min <= speed_max");
    }
    const auto& mix = config.motion_mix;
    const std::array<double, 4> weights{mix.constant_velocity, mix.constant_turn, mix.accelerating, mix.stop_and_go};
    if (std::any_of(weights.begin(), weights.end(), [](double w) { return w < 0.0; }) ||
        weights[0] + weights[1] + weights[2] + weights[3] <= 0.0) {
        throw ConfigError("generate_world: motion_mix weights must be non-negative with a positive sum");
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::discrete_distribution<int> pick_motion(weights.begin(), weights.end());
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
    auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

    std::vector<AgentTrack> tracks;
    tracks.reserve(static_cast<std::size_t>(config.num_agents));
    for (int id = 0; id < config.num_agents; ++id) {
        AgentTrack track;
        track.agent_id = id;
        track.motion = static_cast<MotionClass>(pick_motion(rng));
        const int lifespan = uniform_int(config.min_lifespan, config.num_frames);
        track.birth_frame = uniform_int(0, config.num_frames - lifespan);
        track.death_frame = track.birth_frame + lifespan - 1;

        MotionSpec spec;
        spec.motion = track.motion;
        spec.direction = uniform(-std::numbers::pi, std::numbers::pi);
        spec.speed = uniform(config.speed_min, config.speed_max);
        spec.max_speed = config.speed_max + 5.0;
        const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
        spec.turn_rate = sign * uniform(0.1, 0.35);
        spec.accel = sign * uniform(0.8, 2.0);
        spec.cruise_frames = uniform_int(15, 40);
        spec.stop_frames = uniform_int(5, 20);
        spec.phase_offset = uniform_int(0, 39);
        if (track.motion == MotionClass::stop_and_go) {
            spec.speed = std::max(spec.speed, 3.0);
        }
        const std::array<double, 3> size{uniform(3.5, 5.5), uniform(1.6, 2.2), uniform(1.4, 2.0)};
        const Vec2 mid{uniform(-0.5, 0.5) * config.area, uniform(-0.5, 0.5) * config.area};

        track.states = simulate_motion(spec, lifespan, config.frame_rate, size);
        // Place the agent so that it is inside the area halfway through its life.
        const Vec2 shift = mid - track.states[track.states.size() / 2].pos;
        for (auto& s : track.states) {
            s.pos = s.pos + shift;
        }
        tracks.push_back(std::move(track));
    }
    return tracks;
}

NoiseConfig NoiseConfig::zero() {
    NoiseConfig n;
    n.pos_sigma = n.velo_sigma = n.heading_sigma = n.size_sigma = 0.0;
    n.miss_rate = n.fp_rate = n.fp_cluster_sigma = n.fp_velo_sigma = 0.0;
    n.score_tp_mean = n.score_fp_mean = n.score_sigma = 0.0;
    n.burst_prob = 0.0;
    return n;
}

void NoiseConfig::validate() const {
    for (double s : {pos_sigma, velo_sigma, heading_sigma, size_sigma, fp_cluster_sigma, fp_velo_sigma, score_sigma,
                     fp_rate}) {
        if (!(s >= 0.0)) {
            throw ConfigError("NoiseConfig: sigmas and fp_rate must be >= 0");
        }
    }
    for (double p : {miss_rate, burst_prob, score_tp_mean, score_fp_mean}) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ConfigError("NoiseConfig: probabilities and score means must lie in [0, 1]");
        }
    }
}

const AgentTrack* WorldLog::find_agent(int agent_id) const {
    for (const auto& t : tracks) {
        if (t.agent_id == agent_id) {
            return &t;
        }
    }
    return nullptr;
}

DetectionFrame WorldLog::detections(int frame) const {
    DetectionFrame out;
    for (const auto& d : frames.at(static_cast<std::size_t>(frame))) {
        out.push_back(d.det);
    }
    return out;
}

WorldLog corrupt_to_detections(const std::vector<AgentTrack>& tracks, int num_frames, double frame_rate,
                               const NoiseConfig& noise, std::uint64_t seed) {
    noise.validate();
    WorldLog log;
    log.frame_rate = frame_rate;
    log.rng_seed = seed;
    log.tracks = tracks;
    log.frames.resize(static_cast<std::size_t>(std::max(num_frames, 0)));

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto gauss = [&](double sigma) { return sigma > 0.0 ? sigma * normal(rng) : 0.0; };
    auto score = [&](double mean) { return std::clamp(mean + gauss(noise.score_sigma), 1e-3, 1.0 - 1e-3); };

    Vec2 lo{-30.0, -30.0};
    Vec2 hi{30.0, 30.0};
    if (!tracks.empty() && !tracks.front().states.empty()) {
        lo = hi = tracks.front().states.front().pos;
        for (const auto& t : tracks) {
            for (const auto& s : t.states) {
                lo = {std::min(lo.x, s.pos.x), std::min(lo.y, s.pos.y)};
                hi = {std::max(hi.x, s.pos.x), std::max(hi.y, s.pos.y)};
            }
        }
    }

    std::map<int, int> burst_left;
    for (int f = 0; f < num_frames; ++f) {
        auto& frame = log.frames[static_cast<std::size_t>(f)];
        std::vector<const AgentTrack*> live;
        for (const auto& t : tracks) {
            if (t.alive(f)) {
                live.push_back(&t);
            }
        }
        for (const AgentTrack* t : live) {
            int& burst = burst_left[t->agent_id];
            if (burst == 0 && noise.burst_prob > 0.0 && unit(rng) < noise.burst_prob) {
                burst = std::uniform_int_distribution<int>(2, 4)(rng);
            }
            const double pos_sigma = noise.pos_sigma * (burst > 0 ? noise.burst_pos_factor : 1.0);
            if (burst > 0) {
                --burst;
            }
            if (noise.miss_rate > 0.0 && unit(rng) < noise.miss_rate) {
                continue;
            }
            const AgentState& s = t->at(f);
            WorldDetection wd;
            wd.true_id = t->agent_id;
            wd.det.pos = s.pos + Vec2{gauss(pos_sigma), gauss(pos_sigma)};
            wd.det.velo = s.velo + Vec2{gauss(noise.velo_sigma), gauss(noise.velo_sigma)};
            wd.det.heading = s.heading + gauss(noise.heading_sigma);
            for (std::size_t i = 0; i < 3; ++i) {
                wd.det.size[i] = std::max(0.1, s.size[i] + gauss(noise.size_sigma));
            }
            wd.det.score = score(noise.score_tp_mean);
            frame.push_back(wd);
        }
        if (noise.fp_rate > 0.0) {
            const int count = std::poisson_distribution<int>(noise.fp_rate)(rng);
            for (int i = 0; i < count; ++i) {
                WorldDetection wd;
                wd.true_id = kFalsePositive;
                if (live.empty()) {
                    // No agent to cluster on: uniform over the agents' overall extent.
                    wd.det.pos = Vec2{lo.x + unit(rng) * (hi.x - lo.x), lo.y + unit(rng) * (hi.y - lo.y)};
                    wd.det.velo = Vec2{gauss(noise.fp_velo_sigma), gauss(noise.fp_velo_sigma)};
                    wd.det.heading = wrap_angle(unit(rng) * 2.0 * std::numbers::pi);
                    const std::array<double, 3> base{4.5, 1.9, 1.7};
                    for (std::size_t k = 0; k < 3; ++k) {
                        wd.det.size[k] = std::max(0.1, base[k] + gauss(3.0 * noise.size_sigma));
                    }
                } else {
                    const auto j = std::uniform_int_distribution<std::size_t>(0, live.size() - 1)(rng);
                    const AgentState& s = live[j]->at(f);
                    wd.det.pos = s.pos + Vec2{gauss(noise.fp_cluster_sigma), gauss(noise.fp_cluster_sigma)};
                    wd.det.velo = s.velo + Vec2{gauss(noise.fp_velo_sigma), gauss(noise.fp_velo_sigma)};
                    wd.det.heading = s.heading + gauss(3.0 * noise.heading_sigma);
                    for (std::size_t k = 0; k < 3; ++k) {
                        wd.det.size[k] = std::max(0.1, s.size[k] + gauss(3.0 * noise.size_sigma));
                    }
                }
                wd.det.score = score(noise.score_fp_mean);
                frame.push_back(wd);
            }
        }
        std::shuffle(frame.begin(), frame.end(), rng);
        for (std::size_t i = 0; i < frame.size(); ++i) {
            frame[i].det.frame = f;
            frame[i].det.local_index = i;
        }
    }
    return log;
}

WorldLog simulate_world(const WorldConfig& world, const NoiseConfig& noise, std::uint64_t seed) {
    auto tracks = generate_world(world, derive_seed(seed, "world"));
    auto log = corrupt_to_detections(tracks, world.num_frames, world.frame_rate, noise, derive_seed(seed, "noise"));
    log.rng_seed = seed;
    return log;
}

std::vector<AffinityLabel> make_affinity_labels(const WorldLog& log, int t, double theta_d) {
    if (t < 1 || t >= log.num_frames()) {
        throw PreconditionError("make_affinity_labels: frames t-1 and t must exist");
    }
    const auto& prev = log.frames[static_cast<std::size_t>(t - 1)];
    const auto& curr = log.frames[static_cast<std::size_t>(t)];
    const double gate = theta_d * theta_d;
    std::vector<AffinityLabel> labels;
    for (std::size_t n = 0; n < curr.size(); ++n) {
        for (std::size_t m = 0; m < prev.size(); ++m) {
            const double d2 = squared_distance(curr[n].det.pos, prev[m].det.pos);
            if (d2 > gate) {
                continue;
            }
            AffinityLabel l;
            l.prev_index = m;
            l.curr_index = n;
            l.distance = std::sqrt(d2);
            l.label = (!curr[n].is_false_positive() && curr[n].true_id == prev[m].true_id) ? 1 : 0;
            labels.push_back(l);
        }
    }
    return labels;
}

}  // namespace uncertrack::sim
