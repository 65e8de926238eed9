// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#include "uncertrack/functions.hpp"

#include "uncertrack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace uncertrack {

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double logit(double y) {
    if (!(y > 0.0 && y < 1.0)) {
        throw std::domain_error("logit: argument must lie in (0, 1), got " + std::to_string(y));
    }
    return std::log(y) - std::log1p(-y);
}

double clamp_score(double s) { return std::clamp(s, kScoreClamp, 1.0 - kScoreClamp); }

std::vector<double> masked_softmax(std::span<const double> scores, std::span<const bool> mask) {
    if (scores.size() != mask.size()) {
        throw PreconditionError("masked_softmax: scores and mask differ in length");
    }
    double max_score = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (mask[i]) {
            max_score = std::max(max_score, scores[i]);
            any = true;
        }
    }
    if (!any) {
        throw PreconditionError("masked_softmax: mask has no active entry");
    }
    std::vector<double> out(scores.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (mask[i]) {
            out[i] = std::exp(scores[i] - max_score);
            total += out[i];
        }
    }
    for (double& v : out) {
        v /= total;
    }
    return out;
}

double smooth_l1_elem(double d, double beta) {
    const double a = std::abs(d);
    return a < beta ? 0.5 * d * d / beta : a - 0.5 * beta;
}

double smooth_l1_grad(double d, double beta) {
    if (std::abs(d) < beta) {
        return d / beta;
    }
    return d > 0.0 ? 1.0 : -1.0;
}

double smooth_l1(std::span<const double> pred, std::span<const double> target, double beta) {
    if (pred.size() != target.size()) {
        throw PreconditionError("smooth_l1: prediction and target lengths differ");
    }
    if (!(beta > 0.0)) {
        throw PreconditionError("smooth_l1: beta must be positive");
    }
    if (pred.empty()) {
        return 0.0;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        total += smooth_l1_elem(pred[i] - target[i], beta);
    }
    return total / static_cast<double>(pred.size());
}

double bce(double score, double label) {
    const double s = clamp_score(score);
    return -(label * std::log(s) + (1.0 - label) * std::log1p(-s));
}

}  // namespace uncertrack
