// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "uncertrack/dataset.hpp"
#include "uncertrack/forecaster.hpp"
#include "uncertrack/model.hpp"
#include "uncertrack/world.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace uncertrack {

struct TrainConfig {
    std::size_t batch_sequences = 128;
    std::size_t max_detections = 100;
    int t_obs = 20;
    std::size_t top_k = 10;
    double theta_d = 10.0;
    std::size_t hidden_dim = 64;
    std::size_t det_dim = 64;
    std::size_t mov_dim = 32;
    std::size_t aff_mot_dim = 64;
    std::size_t dec_hidden = 64;
    double lr = 0.003;
    double lr_decay = 0.6;
    int lr_decay_count = 6;
    int epochs = 20;
    double lambda_start = 1.0;
    double lambda_end = 0.1;
    std::uint64_t seed = 1;
    bool augmentation = true;
    bool use_asu = true;
    bool use_msa = true;
    bool learned_init = false;
    bool birth_update = true;
    bool invariant_inputs = false;
    std::size_t sequences_per_world = 32;  // random start frames drawn per world per epoch
    std::size_t threads = 1;

    /// B=16, 10 epochs.
    static TrainConfig desk();
    ModelConfig model_config() const;
    SequenceOptions sequence_options() const;
    void validate() const;
};

struct EpochStats {
    int epoch = 0;
    double l_traj = 0.0;  // mean over sequences
    double l_aff = 0.0;
    double lambda = 0.0;
    double lr = 0.0;
};

void write_loss_csv(std::ostream& out, std::span<const EpochStats> curve);

struct TrainResult {
    ModelParams model;
    std::vector<EpochStats> curve;
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// Start frames whose observation window and full prediction horizon lie
/// inside the log; falls back to every observable start when none does.
std::vector<int> training_starts(const sim::WorldLog& log, const SequenceOptions& options);

/// Adam over mini-batches of B sequences; each sequence starts at a random
/// frame. Per-sequence gradients are summed in batch order, so the result does
/// not depend on `threads`. Throws NumericalError on a non-finite loss.
TrainResult train(const TrainConfig& config, std::span<const sim::WorldLog> worlds,
                  const EpochCallback& on_epoch = {});

/// Mean loss of `model` over `batch` with gradients accumulated into the
/// model's blocks (scaled by 1/|batch|). Returns {l_traj, l_aff, total} means.
struct BatchLoss {
    double l_traj = 0.0;
    double l_aff = 0.0;
    double total = 0.0;
};
BatchLoss batch_loss(ModelParams& model, const forecast::SocialInteraction& social, std::span<const Sequence> batch,
                     double lambda, bool with_grad, std::size_t threads = 1);

}  // namespace uncertrack
