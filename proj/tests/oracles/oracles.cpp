// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oracle {

namespace {

constexpr double kClamp = 1e-7;

double clamp01(double s) { return std::min(std::max(s, kClamp), 1.0 - kClamp); }

Vector gate_times(const Gate& gate, const Vector& h, const Vector& h_prev, const Vector& z) {
    Vector input;
    input.insert(input.end(), h.begin(), h.end());
    input.insert(input.end(), h_prev.begin(), h_prev.end());
    input.insert(input.end(), z.begin(), z.end());
    Vector out(gate.bias.size());
    for (std::size_t r = 0; r < out.size(); ++r) {
        if (gate.weight[r].size() != input.size()) {
            throw std::invalid_argument("oracle gate: width mismatch");
        }
        double pre = gate.bias[r];
        for (std::size_t c = 0; c < input.size(); ++c) {
            pre += gate.weight[r][c] * input[c];
        }
        out[r] = 1.0 / (1.0 + std::exp(-pre)) * h[r];
    }
    return out;
}

}  // namespace

MsaResult msa_aggregate(const std::vector<MsaCandidate>& candidates, const Gate& gate_mot, const Gate* gate_aff) {
    MsaResult r;
    double odds_sum = 0.0;
    for (const auto& c : candidates) {
        const double s = clamp01(c.score);
        odds_sum += s / (1.0 - s);
    }
    const std::size_t h = gate_mot.bias.size();
    r.h_mot.assign(h, 0.0);
    if (gate_aff) {
        r.h_aff.assign(h, 0.0);
    }
    for (const auto& c : candidates) {
        const double s = clamp01(c.score);
        const double alpha = s / (1.0 - s) / odds_sum;
        r.alpha.push_back(alpha);
        const Vector gm = gate_times(gate_mot, c.h_mot, c.h_mot_prev, c.x);
        for (std::size_t i = 0; i < h; ++i) {
            r.h_mot[i] += alpha * gm[i];
        }
        if (gate_aff) {
            const Vector ga = gate_times(*gate_aff, c.h_aff, c.h_aff_prev, c.a);
            for (std::size_t i = 0; i < h; ++i) {
                r.h_aff[i] += alpha * ga[i];
            }
        }
    }
    return r;
}

LossResult total_loss(const Matrix& waypoints, const Matrix& target, const Matrix& mask,
                      const std::vector<TransitionPairs>& transitions, double lambda, int t_obs, double beta) {
    LossResult r;
    double sum = 0.0;
    int count = 0;
    for (std::size_t n = 0; n < waypoints.size(); ++n) {
        for (std::size_t j = 0; j < waypoints[n].size(); ++j) {
            if (mask[n][j] == 0.0) {
                continue;
            }
            const double d = std::abs(waypoints[n][j] - target[n][j]);
            sum += d < beta ? 0.5 * d * d / beta : d - 0.5 * beta;
            ++count;
        }
    }
    if (count > 0) {
        r.traj = sum / count;
    }
    double aff = 0.0;
    for (const auto& t : transitions) {
        if (t.scores.empty()) {
            continue;
        }
        double bce = 0.0;
        for (std::size_t i = 0; i < t.scores.size(); ++i) {
            const double s = clamp01(t.scores[i]);
            bce += -(t.labels[i] * std::log(s) + (1.0 - t.labels[i]) * std::log(1.0 - s));
        }
        aff += bce / static_cast<double>(t.scores.size());
    }
    r.aff = aff / (t_obs - 1);
    r.total = r.traj + lambda * r.aff;
    return r;
}

double lambda_schedule(int epoch, int total_epochs, double start, double end) {
    const double window = std::ceil(total_epochs / 2.0);
    if (epoch >= window) {
        return end;
    }
    const double frac = epoch / window;
    return start * (1.0 - frac) + end * frac;
}

double line_fit_residual(const std::vector<double>& xs, const std::vector<double>& ys) {
    // Normal equations for [1 k] solved by Cramer's rule, one axis at a time.
    const std::size_t n = xs.size();
    double sk = 0.0;
    double skk = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sk += static_cast<double>(k);
        skk += static_cast<double>(k * k);
    }
    const double det = static_cast<double>(n) * skk - sk * sk;
    double ssr = 0.0;
    for (const auto* v : {&xs, &ys}) {
        double sv = 0.0;
        double skv = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            sv += (*v)[k];
            skv += static_cast<double>(k) * (*v)[k];
        }
        const double c0 = (skk * sv - sk * skv) / det;
        const double c1 = (static_cast<double>(n) * skv - sk * sv) / det;
        for (std::size_t k = 0; k < n; ++k) {
            const double e = (*v)[k] - (c0 + c1 * static_cast<double>(k));
            ssr += e * e;
        }
    }
    return ssr;
}

}  // namespace oracle
