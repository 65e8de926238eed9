// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "uncertrack/affinity.hpp"
#include "uncertrack/detection.hpp"
#include "uncertrack/graph.hpp"
#include "uncertrack/model.hpp"

#include <span>
#include <vector>

namespace uncertrack::encoder {

/// Per-detection hidden states of one frame, one row per detection.
/// h_aff is only meaningful when the model uses ASU.
struct TrackStates {
    Var h_mot;
    Var h_aff;
    std::vector<int> age;
};

/// Birth states for n detections: zeros, or the learned initial state.
TrackStates init_tracks(Graph& g, const ParamBinding& bound, const ModelParams& model, std::size_t n);

struct AsuOutput {
    Var h_mot;  // h_mot_k
    Var h_aff;  // h_aff_k; invalid without ASU
};

/// Per-candidate state update, rows are candidate links:
///   h_aff_k = GRU_aff(a, h_aff_prev)
///   h_mot_k = GRU_mot([x ; h_aff_k], h_mot_prev)
/// Without ASU the uncertainty input is dropped: h_mot_k = GRU_mot(x, h_mot_prev).
AsuOutput asu_update(Graph& g, const ParamBinding& bound, const ModelParams& model, Var x, Var a, Var h_mot_prev,
                     Var h_aff_prev);

/// Rows are candidate links; `links` gives each row's detection, score, distance.
struct MsaInputs {
    std::vector<affinity::CandidateLink> links;
    std::size_t num_curr = 0;
    Var scores;      // s_k, L x 1
    Var h_mot_k;     // L x H
    Var h_mot_prev;  // L x H, state of the candidate's predecessor
    Var x;           // L x input_dim
    Var h_aff_k;     // L x H (ASU only)
    Var h_aff_prev;  // L x H (ASU only)
    Var a;           // L x aff_dim (ASU only)
};

struct MsaOutput {
    Var h_mot;  // num_curr x H; zero rows for detections without candidates
    Var h_aff;
    Var alpha;  // L x 1, in the canonical candidate order
    Var g_mot;
    Var g_aff;
    std::vector<std::size_t> order;  // canonical order: row i of alpha is input row order[i]
};

/// Softmax-of-logit weighted, gated aggregation over each detection's candidates:
///   alpha = softmax_k(logit(clamp(s_k)))
///   h_mot = sum_k alpha_k * (sigmoid(W_mot [h_mot_k ; h_mot_prev_k ; x_k] + b) . h_mot_k)
///   h_aff = sum_k alpha_k * (sigmoid(W_aff [h_aff_k ; h_aff_prev_k ; a_k] + b) . h_aff_k)
/// Summation runs in canonical candidate order (score desc, distance, prev_index).
MsaOutput msa_aggregate(Graph& g, const ParamBinding& bound, const ModelParams& model, const MsaInputs& in);

/// Everything computed for one frame transition t-1 -> t.
struct FrameTrace {
    std::vector<affinity::GatedPair> pairs;
    affinity::PairFeatures features;                // valid when pairs is non-empty
    std::vector<affinity::CandidateSet> candidates;  // one per detection at t
    std::vector<affinity::CandidateLink> links;     // flattened candidates, detection-major
    std::vector<double> alpha;                      // per link
};

struct SequenceEncoding {
    std::vector<FrameTrace> frames;  // frames[0] is the first observed frame (no links)
    TrackStates final_state;
};

/// Runs gate -> embed -> score -> top-K -> ASU -> MSA over the frames in order.
/// Detections without candidates (and every detection of the first frame)
/// start from init_tracks; with birth_update they also take one update from
/// their own observation. Requires at least 2 frames.
SequenceEncoding encode_sequence(Graph& g, const ParamBinding& bound, const ModelParams& model,
                                 std::span<const DetectionFrame> frames);

}  // namespace uncertrack::encoder
