// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

// Straight-line reimplementations used as test oracles. They share no code
// with the library: plain vectors, explicit loops, no graph.

#pragma once

#include <cstddef>
#include <vector>

namespace oracle {

using Vector = std::vector<double>;
using Matrix = std::vector<Vector>;  // row-major, Matrix[r][c]

struct MsaCandidate {
    double score = 0.0;
    Vector h_mot;
    Vector h_mot_prev;
    Vector x;
    Vector h_aff;
    Vector h_aff_prev;
    Vector a;
};

struct Gate {
    Matrix weight;  // H x in
    Vector bias;    // H
};

struct MsaResult {
    Vector alpha;
    Vector h_mot;
    Vector h_aff;
};

/// alpha_k proportional to exp(logit(clamp(s_k))) = s/(1-s);
/// h = sum_k alpha_k * sigmoid(W [h_k ; h_prev_k ; z_k] + b) * h_k.
MsaResult msa_aggregate(const std::vector<MsaCandidate>& candidates, const Gate& gate_mot, const Gate* gate_aff);

struct TransitionPairs {
    Vector scores;
    Vector labels;
};

struct LossResult {
    double traj = 0.0;
    double aff = 0.0;  // already divided by (t_obs - 1)
    double total = 0.0;
};

/// l = mean smooth-L1 over masked entries + lambda * sum_t mean BCE_t / (t_obs - 1).
LossResult total_loss(const Matrix& waypoints, const Matrix& target, const Matrix& mask,
                      const std::vector<TransitionPairs>& transitions, double lambda, int t_obs, double beta = 1.0);

/// Linear from start to end over ceil(E / 2) epochs, end afterwards.
double lambda_schedule(int epoch, int total_epochs, double start = 1.0, double end = 0.1);

/// Sum of squared residuals of independent least-squares lines x(k), y(k).
double line_fit_residual(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace oracle
