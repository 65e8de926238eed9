// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#include "uncertrack/forecaster.hpp"

#include "uncertrack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace uncertrack::forecast {

Var IdentitySocial::apply(Graph&, Var encodings, std::span<const Vec2>) const { return encodings; }

Var MeanPoolSocial::apply(Graph& g, Var encodings, std::span<const Vec2> positions) const {
    const std::size_t n = positions.size();
    if (g.value(encodings).rows() != n) {
        throw ConfigError("MeanPoolSocial: one position per encoding row required");
    }
    // p = (I - M) h, M averaging over neighbours within the radius (self excluded).
    Tensor2 pool(n, n);
    const double r2 = radius_ * radius_;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> nbrs;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i && squared_distance(positions[i], positions[j]) <= r2) {
                nbrs.push_back(j);
            }
        }
        pool(i, i) = 1.0;
        for (std::size_t j : nbrs) {
            pool(i, j) = -1.0 / static_cast<double>(nbrs.size());
        }
    }
    return ops::left_multiply(g, pool, encodings);
}

Var decode_trajectory(Graph& g, const ParamBinding& bound, const ModelParams& model, Var p,
                      std::span<const Vec2> positions, std::span<const Vec2> velocities) {
    const std::size_t steps = model.config.pred_steps;
    Tensor2 origin(positions.size(), 2 * steps);
    for (std::size_t n = 0; n < positions.size(); ++n) {
        for (std::size_t k = 0; k < steps; ++k) {
            origin(n, 2 * k) = positions[n].x;
            origin(n, 2 * k + 1) = positions[n].y;
        }
    }
    Var offsets = mlp_forward(g, bound, model.decoder, p);
    if (model.config.invariant_inputs) {
        if (velocities.size() != positions.size()) {
            throw PreconditionError("decode_trajectory: invariant inputs need one velocity per detection");
        }
        // Offsets are (along, across) the direction of motion; rotate them into the world frame.
        Tensor2 cos_t(positions.size(), 2 * steps);
        Tensor2 sin_t(positions.size(), 2 * steps);
        for (std::size_t n = 0; n < positions.size(); ++n) {
            const double speed = velocities[n].norm();
            const double c = speed > 1e-9 ? velocities[n].x / speed : 1.0;
            const double s = speed > 1e-9 ? velocities[n].y / speed : 0.0;
            for (std::size_t j = 0; j < 2 * steps; ++j) {
                cos_t(n, j) = c;
                sin_t(n, j) = s;
            }
        }
        Tensor2 quarter(2 * steps, 2 * steps);  // (x, y) -> (-y, x)
        for (std::size_t k = 0; k < steps; ++k) {
            quarter(2 * k, 2 * k + 1) = -1.0;
            quarter(2 * k + 1, 2 * k) = 1.0;
        }
        Var turned = ops::linear(g, offsets, g.constant(std::move(quarter)));
        offsets = ops::add(g, ops::mul(g, offsets, g.constant(std::move(cos_t))),
                           ops::mul(g, turned, g.constant(std::move(sin_t))));
    }
    return ops::add(g, g.constant(std::move(origin)), offsets);
}

std::vector<Forecast> to_forecasts(const Tensor2& waypoints, double frame_interval) {
    std::vector<Forecast> out;
    out.reserve(waypoints.rows());
    for (std::size_t n = 0; n < waypoints.rows(); ++n) {
        Forecast f;
        f.curr_index = n;
        f.frame_interval = frame_interval;
        for (std::size_t k = 0; 2 * k + 1 < waypoints.cols(); ++k) {
            f.waypoints.push_back({waypoints(n, 2 * k), waypoints(n, 2 * k + 1)});
        }
        out.push_back(std::move(f));
    }
    return out;
}

LossTerms total_loss(Graph& g, Var waypoints, const Tensor2& target, const Tensor2& mask,
                     std::span<const Var> frame_scores, std::span<const Tensor2> frame_labels, double lambda,
                     std::size_t t_obs, double beta) {
    if (t_obs < 2) {
        throw PreconditionError("total_loss: T_obs must be >= 2");
    }
    if (frame_scores.size() != frame_labels.size()) {
        throw PreconditionError("total_loss: one label set per score set required");
    }
    LossTerms terms;
    const bool supervised = std::any_of(mask.values().begin(), mask.values().end(), [](double m) { return m != 0.0; });
    if (supervised) {
        terms.traj = ops::smooth_l1_masked(g, waypoints, target, mask, beta);
    }
    Var aff_sum;
    for (std::size_t t = 0; t < frame_scores.size(); ++t) {
        if (!frame_scores[t].valid() || frame_labels[t].size() == 0) {
            continue;
        }
        Var l = ops::bce_mean(g, frame_scores[t], frame_labels[t]);
        aff_sum = aff_sum.valid() ? ops::add(g, aff_sum, l) : l;
    }
    if (!supervised && !aff_sum.valid()) {
        throw PreconditionError("total_loss: degenerate batch with no supervised forecasts and no gated pairs");
    }
    if (aff_sum.valid()) {
        terms.aff = ops::scale(g, aff_sum, 1.0 / static_cast<double>(t_obs - 1));
        terms.aff_value = g.value(terms.aff)[0];
    }
    if (supervised) {
        terms.traj_value = g.value(terms.traj)[0];
    }
    if (supervised && aff_sum.valid()) {
        terms.total = ops::add(g, terms.traj, ops::scale(g, terms.aff, lambda));
    } else if (supervised) {
        terms.total = terms.traj;
    } else {
        terms.total = ops::scale(g, terms.aff, lambda);
    }
    terms.total_value = g.value(terms.total)[0];
    return terms;
}

double lambda_schedule(int epoch, int total_epochs, double lambda_start, double lambda_end) {
    if (total_epochs < 1 || epoch < 0) {
        throw PreconditionError("lambda_schedule: need epoch >= 0 and total_epochs >= 1");
    }
    const int window = (total_epochs + 1) / 2;
    if (epoch >= window) {
        return lambda_end;
    }
    return lambda_start + (lambda_end - lambda_start) * static_cast<double>(epoch) / static_cast<double>(window);
}

int decays_before(int epoch, int total_epochs, int decay_count) {
    int k = 0;
    for (int i = 1; i <= decay_count; ++i) {
        // ceil(E * i / (count + 1))
        const int boundary = (total_epochs * i + decay_count) / (decay_count + 1);
        if (epoch >= boundary) {
            ++k;
        }
    }
    return k;
}

double learning_rate(int epoch, int total_epochs, double lr0, double decay, int decay_count) {
    return lr0 * std::pow(decay, decays_before(epoch, total_epochs, decay_count));
}

void transform_sequence(Sequence& seq, double angle, bool flip_y) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    auto rot = [&](Vec2 v) {
        Vec2 r{c * v.x - s * v.y, s * v.x + c * v.y};
        if (flip_y) {
            r.y = -r.y;
        }
        return r;
    };
    for (auto& frame : seq.frames) {
        for (auto& d : frame) {
            d.pos = rot(d.pos);
            d.velo = rot(d.velo);
            d.heading = wrap_angle(flip_y ? -(d.heading + angle) : d.heading + angle);
        }
    }
    for (std::size_t n = 0; n < seq.future.rows(); ++n) {
        for (std::size_t k = 0; 2 * k + 1 < seq.future.cols(); ++k) {
            const Vec2 p = rot({seq.future(n, 2 * k), seq.future(n, 2 * k + 1)});
            seq.future(n, 2 * k) = p.x;
            seq.future(n, 2 * k + 1) = p.y;
        }
    }
}

void augment_batch(std::span<Sequence> batch, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::bernoulli_distribution flip(0.5);
    for (auto& seq : batch) {
        const double a = angle(rng);
        const bool f = flip(rng);
        transform_sequence(seq, a, f);
    }
}

SequenceForward forward_sequence(Graph& g, const ParamBinding& bound, const ModelParams& model,
                                 const SocialInteraction& social, const Sequence& seq, double lambda) {
    SequenceForward out;
    out.encoding = encoder::encode_sequence(g, bound, model, seq.frames);
    const auto& last = seq.last();
    std::vector<Vec2> positions;
    std::vector<Vec2> velocities;
    positions.reserve(last.size());
    velocities.reserve(last.size());
    for (const auto& d : last) {
        positions.push_back(d.pos);
        velocities.push_back(d.velo);
    }
    Var p = social.apply(g, out.encoding.final_state.h_mot, positions);
    out.waypoints = decode_trajectory(g, bound, model, p, positions, velocities);

    std::vector<Var> scores(seq.frames.size());
    std::vector<Tensor2> labels(seq.frames.size());
    for (std::size_t t = 1; t < seq.frames.size(); ++t) {
        const auto& trace = out.encoding.frames[t];
        if (trace.pairs.empty()) {
            continue;
        }
        scores[t] = trace.features.scores;
        labels[t] = Tensor2(trace.pairs.size(), 1);
        for (std::size_t i = 0; i < trace.pairs.size(); ++i) {
            labels[t][i] = seq.same_agent(t, trace.pairs[i].prev_index, trace.pairs[i].curr_index) ? 1.0 : 0.0;
        }
    }
    out.loss = total_loss(g, out.waypoints, seq.future, seq.future_mask, scores, labels, lambda, seq.frames.size());
    return out;
}

std::vector<Forecast> predict(const ModelParams& model, const SocialInteraction& social,
                              std::span<const DetectionFrame> frames) {
    Graph g;
    const ParamBinding bound = bind_params(g, model.blocks);
    const auto enc = encoder::encode_sequence(g, bound, model, frames);
    std::vector<Vec2> positions;
    std::vector<Vec2> velocities;
    for (const auto& d : frames.back()) {
        positions.push_back(d.pos);
        velocities.push_back(d.velo);
    }
    Var p = social.apply(g, enc.final_state.h_mot, positions);
    return to_forecasts(g.value(decode_trajectory(g, bound, model, p, positions, velocities)));
}

}  // namespace uncertrack::forecast
