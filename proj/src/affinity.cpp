// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#include "uncertrack/affinity.hpp"

#include "uncertrack/detection_repr.hpp"
#include "uncertrack/errors.hpp"

#include <algorithm>
#include <cmath>

namespace uncertrack::affinity {

std::vector<GatedPair> gate_candidates(std::span<const Detection> prev, std::span<const Detection> curr,
                                       double theta_d) {
    if (!(theta_d > 0.0)) {
        throw PreconditionError("gate_candidates: theta_d must be positive");
    }
    const double gate = theta_d * theta_d;
    std::vector<GatedPair> pairs;
    for (std::size_t n = 0; n < curr.size(); ++n) {
        for (std::size_t m = 0; m < prev.size(); ++m) {
            const double d2 = squared_distance(curr[n].pos, prev[m].pos);
            if (d2 <= gate) {
                pairs.push_back({m, n, std::sqrt(d2)});
            }
        }
    }
    return pairs;
}

Var short_term_feature(Graph& g, Var x_det_curr, Var x_det_prev) {
    return ops::abs(g, ops::sub(g, x_det_curr, x_det_prev));
}

Var long_term_feature(Graph& g, const ParamBinding& bound, const ModelParams& model, Var x_mov, Var h_mot_prev) {
    return mlp_forward(g, bound, model.long_term, ops::concat_cols(g, {x_mov, h_mot_prev}));
}

PairFeatures score_links(Graph& g, const ParamBinding& bound, const ModelParams& model,
                         std::span<const GatedPair> pairs, std::span<const Detection> prev,
                         std::span<const Detection> curr, Var x_det_prev, Var x_det_curr, Var h_mot_prev) {
    if (pairs.empty()) {
        throw PreconditionError("score_links: no pairs");
    }
    std::vector<std::size_t> prev_idx;
    std::vector<std::size_t> curr_idx;
    std::vector<Vec2> offsets;
    prev_idx.reserve(pairs.size());
    curr_idx.reserve(pairs.size());
    offsets.reserve(pairs.size());
    for (const auto& p : pairs) {
        prev_idx.push_back(p.prev_index);
        curr_idx.push_back(p.curr_index);
        offsets.push_back(curr[p.curr_index].pos - prev[p.prev_index].pos);
    }
    PairFeatures f;
    f.x_mov = repr::movement_features(g, bound, model, repr::movement_offsets(offsets, model.config));
    f.a_det = short_term_feature(g, ops::gather_rows(g, x_det_curr, curr_idx), ops::gather_rows(g, x_det_prev, prev_idx));
    f.a_mot = long_term_feature(g, bound, model, f.x_mov, ops::gather_rows(g, h_mot_prev, prev_idx));
    f.a = ops::concat_cols(g, {f.a_mot, f.a_det});
    f.scores = ops::sigmoid(g, mlp_forward(g, bound, model.affinity, f.a));
    return f;
}

bool ranks_before(const CandidateLink& a, const CandidateLink& b) {
    if (a.score != b.score) {
        return a.score > b.score;
    }
    if (a.distance != b.distance) {
        return a.distance < b.distance;
    }
    return a.prev_index < b.prev_index;
}

std::vector<CandidateSet> top_k_select(std::span<const CandidateLink> links, std::size_t num_curr, std::size_t k) {
    if (k < 1) {
        throw PreconditionError("top_k_select: K must be >= 1");
    }
    std::vector<CandidateSet> sets(num_curr);
    for (std::size_t n = 0; n < num_curr; ++n) {
        sets[n].curr_index = n;
    }
    for (const auto& l : links) {
        if (l.curr_index >= num_curr) {
            throw PreconditionError("top_k_select: curr_index out of range");
        }
        sets[l.curr_index].links.push_back(l);
    }
    for (auto& s : sets) {
        std::sort(s.links.begin(), s.links.end(), ranks_before);
        if (s.links.size() > k) {
            s.links.resize(k);
        }
    }
    return sets;
}

}  // namespace uncertrack::affinity
