// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "uncertrack/dataset.hpp"
#include "uncertrack/graph.hpp"
#include "uncertrack/model.hpp"
#include "uncertrack/motion_encoder.hpp"

#include <memory>
#include <random>
#include <span>
#include <vector>

namespace uncertrack::forecast {

struct Forecast {
    std::size_t curr_index = 0;
    std::vector<Vec2> waypoints;
    double frame_interval = 0.5;
};

/// Social interaction plug-in: maps per-detection encodings (rows) to decoder
/// inputs. Implementations must be permutation-equivariant over rows.
class SocialInteraction {
public:
    virtual ~SocialInteraction() = default;
    virtual Var apply(Graph& g, Var encodings, std::span<const Vec2> positions) const = 0;
};

class IdentitySocial final : public SocialInteraction {
public:
    Var apply(Graph& g, Var encodings, std::span<const Vec2> positions) const override;
};

/// Subtracts the mean encoding of the other detections within `radius`.
class MeanPoolSocial final : public SocialInteraction {
public:
    explicit MeanPoolSocial(double radius = 10.0) : radius_(radius) {}
    Var apply(Graph& g, Var encodings, std::span<const Vec2> positions) const override;

private:
    double radius_;
};

/// Waypoints (n x 2*pred_steps) = position at T + MLP_dec(p); each step is a
/// direct offset from the current position. With invariant inputs the offsets
/// are taken along and across each detection's velocity.
Var decode_trajectory(Graph& g, const ParamBinding& bound, const ModelParams& model, Var p,
                      std::span<const Vec2> positions, std::span<const Vec2> velocities = {});

std::vector<Forecast> to_forecasts(const Tensor2& waypoints, double frame_interval = 0.5);

struct LossTerms {
    Var total;
    Var traj;  // invalid when no detection is supervised
    Var aff;   // mean over transitions of the per-transition BCE; invalid without gated pairs
    double traj_value = 0.0;
    double aff_value = 0.0;
    double total_value = 0.0;
};

/// l = l_traj + lambda * (sum_t l_aff^t) / (T_obs - 1).
/// frame_scores[t] / frame_labels[t] hold the gated pairs of transition t
/// (invalid / empty when a transition has none). Throws PreconditionError on
/// a batch with neither supervised waypoints nor gated pairs.
LossTerms total_loss(Graph& g, Var waypoints, const Tensor2& target, const Tensor2& mask,
                     std::span<const Var> frame_scores, std::span<const Tensor2> frame_labels, double lambda,
                     std::size_t t_obs, double beta = 1.0);

/// Linear decay from lambda_start to lambda_end over the first ceil(E/2)
/// epochs, then constant.
double lambda_schedule(int epoch, int total_epochs, double lambda_start = 1.0, double lambda_end = 0.1);

/// Learning rate after the decays at epoch boundaries ceil(E*i/(count+1)), i = 1..count.
double learning_rate(int epoch, int total_epochs, double lr0, double decay, int decay_count);
int decays_before(int epoch, int total_epochs, int decay_count);

/// Rotates every position, velocity, heading and GT waypoint by `angle`,
/// then optionally negates the y components (and headings).
void transform_sequence(Sequence& seq, double angle, bool flip_y);
/// One random angle in [0, 2pi) and an independent 50% flip per sequence.
void augment_batch(std::span<Sequence> batch, std::mt19937_64& rng);

/// Everything produced by one forward pass over a sequence.
struct SequenceForward {
    encoder::SequenceEncoding encoding;
    Var waypoints;
    LossTerms loss;
};

SequenceForward forward_sequence(Graph& g, const ParamBinding& bound, const ModelParams& model,
                                 const SocialInteraction& social, const Sequence& seq, double lambda);

/// Forecasts for the detections at the last frame (no loss).
std::vector<Forecast> predict(const ModelParams& model, const SocialInteraction& social,
                              std::span<const DetectionFrame> frames);

}  // namespace uncertrack::forecast
