// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "uncertrack/detection.hpp"
#include "uncertrack/graph.hpp"
#include "uncertrack/model.hpp"

#include <span>
#include <vector>

namespace uncertrack::affinity {

struct GatedPair {
    std::size_t prev_index = 0;
    std::size_t curr_index = 0;
    double distance = 0.0;
};

/// All pairs with positional distance <= theta_d (compared on squared
/// distances, boundary inclusive), ordered by curr_index then prev_index.
std::vector<GatedPair> gate_candidates(std::span<const Detection> prev, std::span<const Detection> curr, double theta_d);

/// a_det = |x_det_curr - x_det_prev| row-wise.
Var short_term_feature(Graph& g, Var x_det_curr, Var x_det_prev);

/// a_mot = MLP_mot([x_mov ; h_mot_prev]) row-wise.
Var long_term_feature(Graph& g, const ParamBinding& bound, const ModelParams& model, Var x_mov, Var h_mot_prev);

/// Per-pair features and scores for every gated pair (rows follow `pairs`).
struct PairFeatures {
    Var x_mov;   // P x mov_dim
    Var a_det;   // P x det_dim
    Var a_mot;   // P x aff_mot_dim
    Var a;       // P x (aff_mot_dim + det_dim), [a_mot ; a_det]
    Var scores;  // P x 1, sigmoid(MLP_aff(a))
};

/// x_det_prev/x_det_curr: embeddings of the two frames; h_mot_prev: states of
/// the previous frame's detections. `pairs` must be non-empty.
PairFeatures score_links(Graph& g, const ParamBinding& bound, const ModelParams& model,
                         std::span<const GatedPair> pairs, std::span<const Detection> prev,
                         std::span<const Detection> curr, Var x_det_prev, Var x_det_curr, Var h_mot_prev);

struct CandidateLink {
    std::size_t prev_index = 0;
    std::size_t curr_index = 0;
    double score = 0.0;
    double distance = 0.0;
    std::size_t pair_index = 0;  // row in the PairFeatures tensors
};

struct CandidateSet {
    std::size_t curr_index = 0;
    std::vector<CandidateLink> links;  // <= K, best first
};

/// Candidate ranking: higher score, then smaller distance, then smaller prev_index.
bool ranks_before(const CandidateLink& a, const CandidateLink& b);

/// Keeps the K best links per current detection; one CandidateSet per index in
/// [0, num_curr), empty when the detection has no gated predecessor.
std::vector<CandidateSet> top_k_select(std::span<const CandidateLink> links, std::size_t num_curr, std::size_t k);

}  // namespace uncertrack::affinity
