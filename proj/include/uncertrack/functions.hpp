// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

namespace uncertrack {

/// Scores are clamped into [kScoreClamp, 1 - kScoreClamp] before logit and BCE.
inline constexpr double kScoreClamp = 1e-7;

double sigmoid(double x);
/// Inverse sigmoid. Throws std::domain_error outside the open interval (0, 1).
double logit(double y);
double clamp_score(double s);

/// Softmax over the entries whose mask is true; masked entries are exactly 0.
/// Throws PreconditionError when no entry is active.
std::vector<double> masked_softmax(std::span<const double> scores, std::span<const bool> mask);

/// Mean over components of the Huber-style smooth L1 penalty.
double smooth_l1(std::span<const double> pred, std::span<const double> target, double beta = 1.0);
double smooth_l1_elem(double d, double beta);
double smooth_l1_grad(double d, double beta);

/// Binary cross entropy of one clamped score against a {0,1} label.
double bce(double score, double label);

}  // namespace uncertrack
