// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#include "uncertrack/training.hpp"

#include "uncertrack/errors.hpp"
#include "uncertrack/geometry.hpp"
#include "uncertrack/graph.hpp"
#include "uncertrack/optim.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace uncertrack {

TrainConfig TrainConfig::desk() {
    TrainConfig c;
    c.batch_sequences = 16;
    c.epochs = 10;
    return c;
}

ModelConfig TrainConfig::model_config() const {
    ModelConfig m;
    m.det_dim = det_dim;
    m.mov_dim = mov_dim;
    m.aff_mot_dim = aff_mot_dim;
    m.hidden_dim = hidden_dim;
    m.aff_hidden = hidden_dim;
    m.dec_hidden = dec_hidden;
    m.top_k = top_k;
    m.theta_d = theta_d;
    m.use_asu = use_asu;
    m.use_msa = use_msa;
    m.learned_init = learned_init;
    m.birth_update = birth_update;
    m.invariant_inputs = invariant_inputs;
    return m;
}

SequenceOptions TrainConfig::sequence_options() const {
    SequenceOptions o;
    o.t_obs = t_obs;
    o.max_detections = max_detections;
    return o;
}

void TrainConfig::validate() const {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) {
            throw ConfigError("invalid train config: " + what);
        }
    };
    require(batch_sequences >= 1, "batch_sequences must be >= 1");
    require(max_detections >= 1, "max_detections must be >= 1");
    require(t_obs >= 2, "t_obs must be >= 2");
    require(top_k >= 1, "top_k must be >= 1");
    require(theta_d > 0.0, "theta_d must be > 0");
    require(hidden_dim >= 1 && det_dim >= 1 && mov_dim >= 1 && aff_mot_dim >= 1 && dec_hidden >= 1,
            "layer widths must be >= 1");
    require(lr > 0.0, "lr must be > 0");
    require(lr_decay > 0.0 && lr_decay <= 1.0, "lr_decay must be in (0, 1]");
    require(lr_decay_count >= 0, "lr_decay_count must be >= 0");
    require(epochs >= 1, "epochs must be >= 1");
    require(sequences_per_world >= 1, "sequences_per_world must be >= 1");
    require(threads >= 1, "threads must be >= 1");
}

void write_loss_csv(std::ostream& out, std::span<const EpochStats> curve) {
    out << "epoch,l_traj,l_aff,lambda,lr\n";
    out.precision(17);
    for (const auto& e : curve) {
        out << e.epoch << ',' << e.l_traj << ',' << e.l_aff << ',' << e.lambda << ',' << e.lr << '\n';
    }
}

std::vector<int> training_starts(const sim::WorldLog& log, const SequenceOptions& options) {
    const int horizon = waypoint_stride(log.frame_rate, options.pred_interval) * static_cast<int>(options.pred_steps);
    std::vector<int> starts;
    for (int s = 0; s + options.t_obs + horizon <= log.num_frames(); ++s) {
        starts.push_back(s);
    }
    return starts.empty() ? valid_starts(log, options.t_obs) : starts;
}

namespace {

struct SequenceResult {
    bool used = false;
    double l_traj = 0.0;
    double l_aff = 0.0;
    double total = 0.0;
    GradSet grads;
    std::string error;
};

void run_sequence(const ModelParams& model, const forecast::SocialInteraction& social, const Sequence& seq,
                  double lambda, double weight, bool with_grad, SequenceResult& out, GradSet* shared) {
    Graph g;
    const ParamBinding bound = bind_params(g, model.blocks);
    forecast::SequenceForward fwd;
    try {
        fwd = forecast::forward_sequence(g, bound, model, social, seq, lambda);
    } catch (const PreconditionError&) {
        // No supervised detection and no gated pair: contributes nothing.
        return;
    }
    out.used = true;
    out.l_traj = fwd.loss.traj_value;
    out.l_aff = fwd.loss.aff_value;
    out.total = fwd.loss.total_value;
    if (!std::isfinite(out.total)) {
        std::ostringstream msg;
        msg << "non-finite loss (l_traj=" << out.l_traj << ", l_aff=" << out.l_aff << ") on world " << seq.world
            << " start frame " << seq.start_frame;
        out.error = msg.str();
        return;
    }
    if (with_grad) {
        g.backward(fwd.loss.total, weight);
        if (shared != nullptr) {
            g.collect_param_grads(*shared);
        } else {
            out.grads = make_grad_set(model.blocks);
            g.collect_param_grads(out.grads);
        }
    }
}

}  // namespace

BatchLoss batch_loss(ModelParams& model, const forecast::SocialInteraction& social, std::span<const Sequence> batch,
                     double lambda, bool with_grad, std::size_t threads) {
    if (batch.empty()) {
        throw PreconditionError("batch_loss: empty batch");
    }
    const double weight = 1.0 / static_cast<double>(batch.size());
    std::vector<SequenceResult> results(batch.size());
    GradSet total = make_grad_set(model.blocks);
    if (threads <= 1) {
        for (std::size_t i = 0; i < batch.size(); ++i) {
            run_sequence(model, social, batch[i], lambda, weight, with_grad, results[i], &total);
            if (!results[i].error.empty()) {
                throw NumericalError(results[i].error);
            }
        }
    } else {
        std::vector<std::thread> workers;
        const std::size_t n = std::min(threads, batch.size());
        for (std::size_t w = 0; w < n; ++w) {
            workers.emplace_back([&, w] {
                for (std::size_t i = w; i < batch.size(); i += n) {
                    run_sequence(model, social, batch[i], lambda, weight, with_grad, results[i], nullptr);
                }
            });
        }
        for (auto& t : workers) {
            t.join();
        }
        for (auto& r : results) {
            if (!r.error.empty()) {
                throw NumericalError(r.error);
            }
            if (with_grad && r.used) {
                for (std::size_t b = 0; b < total.size(); ++b) {
                    for (std::size_t t = 0; t < total[b].size(); ++t) {
                        total[b][t].map() += r.grads[b][t].map();
                    }
                }
            }
        }
    }
    if (with_grad) {
        accumulate_grads(model.blocks, total);
    }
    BatchLoss out;
    for (const auto& r : results) {
        out.l_traj += r.l_traj * weight;
        out.l_aff += r.l_aff * weight;
        out.total += r.total * weight;
    }
    return out;
}

TrainResult train(const TrainConfig& config, std::span<const sim::WorldLog> worlds, const EpochCallback& on_epoch) {
    config.validate();
    if (worlds.empty()) {
        throw PreconditionError("train: no worlds");
    }
    const SequenceOptions opts = config.sequence_options();
    std::vector<std::vector<int>> starts;
    for (const auto& w : worlds) {
        if (w.num_frames() < opts.t_obs) {
            throw PreconditionError("train: world shorter than t_obs");
        }
        starts.push_back(training_starts(w, opts));
    }

    TrainResult result;
    result.model = make_model(config.model_config(), derive_seed(config.seed, "init"));
    ModelParams& model = result.model;
    const forecast::IdentitySocial social;
    std::mt19937_64 order_rng(derive_seed(config.seed, "batch-order"));
    std::mt19937_64 augment_rng(derive_seed(config.seed, "augment"));
    AdamOptions adam;
    std::uint64_t step = 0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const double lambda = forecast::lambda_schedule(epoch, config.epochs, config.lambda_start, config.lambda_end);
        adam.lr = forecast::learning_rate(epoch, config.epochs, config.lr, config.lr_decay, config.lr_decay_count);

        std::vector<std::pair<std::size_t, int>> samples;
        for (std::size_t w = 0; w < worlds.size(); ++w) {
            std::uniform_int_distribution<std::size_t> pick(0, starts[w].size() - 1);
            for (std::size_t i = 0; i < config.sequences_per_world; ++i) {
                samples.emplace_back(w, starts[w][pick(order_rng)]);
            }
        }
        std::shuffle(samples.begin(), samples.end(), order_rng);

        EpochStats stats;
        stats.epoch = epoch + 1;
        stats.lambda = lambda;
        stats.lr = adam.lr;
        double seen = 0.0;
        for (std::size_t begin = 0; begin < samples.size(); begin += config.batch_sequences) {
            const std::size_t end = std::min(samples.size(), begin + config.batch_sequences);
            std::vector<Sequence> batch;
            for (std::size_t i = begin; i < end; ++i) {
                batch.push_back(extract_sequence(worlds[samples[i].first], samples[i].second, opts, samples[i].first));
            }
            if (config.augmentation) {
                forecast::augment_batch(batch, augment_rng);
            }
            const BatchLoss loss = batch_loss(model, social, batch, lambda, true, config.threads);
            const double n = static_cast<double>(batch.size());
            stats.l_traj += loss.l_traj * n;
            stats.l_aff += loss.l_aff * n;
            seen += n;
            adam_step(model.blocks, adam, ++step);
        }
        stats.l_traj /= seen;
        stats.l_aff /= seen;
        result.curve.push_back(stats);
        if (on_epoch) {
            on_epoch(stats);
        }
    }
    return result;
}

}  // namespace uncertrack
