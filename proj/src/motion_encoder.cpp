// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#include "uncertrack/motion_encoder.hpp"

#include "uncertrack/detection_repr.hpp"
#include "uncertrack/errors.hpp"

#include <algorithm>
#include <numeric>

namespace uncertrack::encoder {

using affinity::CandidateLink;

TrackStates init_tracks(Graph& g, const ParamBinding& bound, const ModelParams& model, std::size_t n) {
    const std::size_t h = model.config.hidden_dim;
    TrackStates s;
    s.age.assign(n, 0);
    if (model.init_block) {
        Var ones = g.constant(Tensor2(n, 1, 1.0));
        const auto& vars = bound.at(*model.init_block);
        s.h_mot = ops::linear(g, ones, vars[0]);
        s.h_aff = ops::linear(g, ones, vars[1]);
    } else {
        s.h_mot = g.constant(Tensor2(n, h));
        s.h_aff = g.constant(Tensor2(n, h));
    }
    return s;
}

AsuOutput asu_update(Graph& g, const ParamBinding& bound, const ModelParams& model, Var x, Var a, Var h_mot_prev,
                     Var h_aff_prev) {
    AsuOutput out;
    if (model.config.use_asu) {
        out.h_aff = gru_step(g, bound, *model.gru_aff, a, h_aff_prev);
        out.h_mot = gru_step(g, bound, model.gru_mot, ops::concat_cols(g, {x, out.h_aff}), h_mot_prev);
    } else {
        out.h_mot = gru_step(g, bound, model.gru_mot, x, h_mot_prev);
    }
    return out;
}

MsaOutput msa_aggregate(Graph& g, const ParamBinding& bound, const ModelParams& model, const MsaInputs& in) {
    if (!model.gate_mot) {
        throw ConfigError("msa_aggregate: model was built without aggregation gates");
    }
    const bool asu = model.config.use_asu;
    const std::size_t num_links = in.links.size();
    std::vector<std::size_t> order(num_links);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        const auto& a = in.links[i];
        const auto& b = in.links[j];
        if (a.curr_index != b.curr_index) {
            return a.curr_index < b.curr_index;
        }
        return affinity::ranks_before(a, b);
    });
    const bool identity = std::is_sorted(order.begin(), order.end());
    auto canon = [&](Var v) { return identity ? v : ops::gather_rows(g, v, order); };

    std::vector<std::size_t> segment(num_links);
    for (std::size_t i = 0; i < num_links; ++i) {
        segment[i] = in.links[order[i]].curr_index;
    }

    MsaOutput out;
    out.order = order;
    Var scores = canon(in.scores);
    Var h_mot_k = canon(in.h_mot_k);
    Var h_mot_prev = canon(in.h_mot_prev);
    Var x = canon(in.x);
    out.alpha = ops::segment_softmax(g, ops::logit_clamped(g, scores), segment, in.num_curr);
    out.g_mot = mlp_forward(g, bound, *model.gate_mot, ops::concat_cols(g, {h_mot_k, h_mot_prev, x}));
    out.h_mot = ops::segment_sum(g, ops::scale_rows(g, ops::mul(g, out.g_mot, h_mot_k), out.alpha), segment,
                                 in.num_curr);
    if (asu) {
        Var h_aff_k = canon(in.h_aff_k);
        Var h_aff_prev = canon(in.h_aff_prev);
        Var a = canon(in.a);
        out.g_aff = mlp_forward(g, bound, *model.gate_aff, ops::concat_cols(g, {h_aff_k, h_aff_prev, a}));
        out.h_aff = ops::segment_sum(g, ops::scale_rows(g, ops::mul(g, out.g_aff, h_aff_k), out.alpha), segment,
                                     in.num_curr);
    }
    return out;
}

namespace {

// Adds the learned birth state to rows of detections without candidates.
Var add_birth_state(Graph& g, const ParamBinding& bound, const ModelParams& model, Var states,
                    std::span<const std::size_t> births, std::size_t n, std::size_t which) {
    if (!model.init_block || births.empty()) {
        return states;
    }
    Tensor2 mask(n, 1);
    for (std::size_t b : births) {
        mask[b] = 1.0;
    }
    Var birth = ops::linear(g, g.constant(std::move(mask)), bound.at(*model.init_block)[which]);
    return ops::add(g, states, birth);
}

// States of newly born detections scattered into n rows (zero elsewhere).
// With birth_update the detection's own observation is applied once to the
// initial state, with zero movement and affinity features.
TrackStates birth_states(Graph& g, const ParamBinding& bound, const ModelParams& model, Var x_det,
                         std::span<const std::size_t> births, std::size_t n) {
    const ModelConfig& cfg = model.config;
    TrackStates s;
    s.age.assign(n, 0);
    if (!cfg.birth_update) {
        s.h_mot = add_birth_state(g, bound, model, g.constant(Tensor2(n, cfg.hidden_dim)), births, n, 0);
        s.h_aff = add_birth_state(g, bound, model, g.constant(Tensor2(n, cfg.hidden_dim)), births, n, 1);
        return s;
    }
    const TrackStates init = init_tracks(g, bound, model, births.size());
    Var x = repr::compose_input(g, ops::gather_rows(g, x_det, births), g.constant(Tensor2(births.size(), cfg.mov_dim)));
    Var a = g.constant(Tensor2(births.size(), cfg.aff_dim()));
    const AsuOutput upd = asu_update(g, bound, model, x, a, init.h_mot, cfg.use_asu ? init.h_aff : Var{});
    s.h_mot = ops::segment_sum(g, upd.h_mot, births, n);
    s.h_aff = cfg.use_asu ? ops::segment_sum(g, upd.h_aff, births, n) : g.constant(Tensor2(n, cfg.hidden_dim));
    return s;
}

}  // namespace

SequenceEncoding encode_sequence(Graph& g, const ParamBinding& bound, const ModelParams& model,
                                 std::span<const DetectionFrame> frames) {
    if (frames.size() < 2) {
        throw PreconditionError("encode_sequence: need at least 2 observed frames");
    }
    const ModelConfig& cfg = model.config;
    SequenceEncoding enc;
    enc.frames.resize(frames.size());

    Var x_det_prev = repr::embed_detections(g, bound, model, frames[0]);
    TrackStates state;
    {
        std::vector<std::size_t> all(frames[0].size());
        std::iota(all.begin(), all.end(), 0);
        state = birth_states(g, bound, model, x_det_prev, all, all.size());
    }

    for (std::size_t t = 1; t < frames.size(); ++t) {
        const auto& prev = frames[t - 1];
        const auto& curr = frames[t];
        FrameTrace& trace = enc.frames[t];
        Var x_det_curr = repr::embed_detections(g, bound, model, curr);
        trace.pairs = affinity::gate_candidates(prev, curr, cfg.theta_d);
        trace.candidates.resize(curr.size());
        for (std::size_t n = 0; n < curr.size(); ++n) {
            trace.candidates[n].curr_index = n;
        }

        TrackStates next;
        next.age.assign(curr.size(), 0);
        Var linked_mot;
        Var linked_aff;
        if (!trace.pairs.empty()) {
            trace.features = affinity::score_links(g, bound, model, trace.pairs, prev, curr, x_det_prev, x_det_curr,
                                                   state.h_mot);
            const Tensor2& score_values = g.value(trace.features.scores);
            std::vector<CandidateLink> all;
            all.reserve(trace.pairs.size());
            for (std::size_t p = 0; p < trace.pairs.size(); ++p) {
                const auto& pair = trace.pairs[p];
                all.push_back({pair.prev_index, pair.curr_index, score_values[p], pair.distance, p});
            }
            trace.candidates = affinity::top_k_select(all, curr.size(), cfg.candidates());
            for (const auto& set : trace.candidates) {
                trace.links.insert(trace.links.end(), set.links.begin(), set.links.end());
            }
        }

        if (!trace.links.empty()) {
            std::vector<std::size_t> link_pair;
            std::vector<std::size_t> link_prev;
            std::vector<std::size_t> link_curr;
            for (const auto& l : trace.links) {
                link_pair.push_back(l.pair_index);
                link_prev.push_back(l.prev_index);
                link_curr.push_back(l.curr_index);
            }
            Var x = repr::compose_input(g, ops::gather_rows(g, x_det_curr, link_curr),
                                        ops::gather_rows(g, trace.features.x_mov, link_pair));
            Var a = ops::gather_rows(g, trace.features.a, link_pair);
            Var h_mot_prev = ops::gather_rows(g, state.h_mot, link_prev);
            Var h_aff_prev = cfg.use_asu ? ops::gather_rows(g, state.h_aff, link_prev) : Var{};
            const AsuOutput upd = asu_update(g, bound, model, x, a, h_mot_prev, h_aff_prev);

            if (cfg.use_msa) {
                MsaInputs in;
                in.links = trace.links;
                in.num_curr = curr.size();
                in.scores = ops::gather_rows(g, trace.features.scores, link_pair);
                in.h_mot_k = upd.h_mot;
                in.h_mot_prev = h_mot_prev;
                in.x = x;
                in.h_aff_k = upd.h_aff;
                in.h_aff_prev = h_aff_prev;
                in.a = a;
                const MsaOutput agg = msa_aggregate(g, bound, model, in);
                const Tensor2& alpha = g.value(agg.alpha);
                trace.alpha.assign(trace.links.size(), 0.0);
                for (std::size_t i = 0; i < agg.order.size(); ++i) {
                    trace.alpha[agg.order[i]] = alpha[i];
                }
                linked_mot = agg.h_mot;
                linked_aff = cfg.use_asu ? agg.h_aff : Var{};
            } else {
                // Single best candidate: its updated state is used directly.
                trace.alpha.assign(trace.links.size(), 1.0);
                linked_mot = ops::segment_sum(g, upd.h_mot, link_curr, curr.size());
                linked_aff = cfg.use_asu ? ops::segment_sum(g, upd.h_aff, link_curr, curr.size()) : Var{};
            }
            for (const auto& set : trace.candidates) {
                if (!set.links.empty()) {
                    next.age[set.curr_index] = state.age[set.links.front().prev_index] + 1;
                }
            }
        }

        std::vector<std::size_t> births;
        for (const auto& set : trace.candidates) {
            if (set.links.empty()) {
                births.push_back(set.curr_index);
            }
        }
        if (births.size() == curr.size()) {
            TrackStates born = birth_states(g, bound, model, x_det_curr, births, curr.size());
            next.h_mot = born.h_mot;
            next.h_aff = born.h_aff;
        } else if (births.empty()) {
            next.h_mot = linked_mot;
            next.h_aff = cfg.use_asu ? linked_aff : g.constant(Tensor2(curr.size(), cfg.hidden_dim));
        } else {
            const TrackStates born = birth_states(g, bound, model, x_det_curr, births, curr.size());
            next.h_mot = ops::add(g, linked_mot, born.h_mot);
            next.h_aff = cfg.use_asu ? ops::add(g, linked_aff, born.h_aff) : born.h_aff;
        }
        state = std::move(next);
        x_det_prev = x_det_curr;
    }
    enc.final_state = std::move(state);
    return enc;
}

}  // namespace uncertrack::encoder
