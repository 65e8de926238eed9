// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#include "uncertrack/optim.hpp"

#include "uncertrack/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace uncertrack {

void adam_step(std::vector<ParamBlock>& blocks, const AdamOptions& options, std::uint64_t step) {
    if (step < 1) {
        throw PreconditionError("adam_step: step must be >= 1");
    }
    for (const auto& block : blocks) {
        for (std::size_t t = 0; t < block.grads.size(); ++t) {
            if (!block.grads[t].all_finite()) {
                throw NumericalError("adam_step: non-finite gradient in block '" + block.name + "' tensor " +
                                     std::to_string(t));
            }
        }
    }
    const double s = static_cast<double>(step);
    const double bc1 = 1.0 - std::pow(options.beta1, s);
    const double bc2 = 1.0 - std::pow(options.beta2, s);
    for (auto& block : blocks) {
        for (std::size_t t = 0; t < block.weights.size(); ++t) {
            auto w = block.weights[t].values();
            auto g = block.grads[t].values();
            auto m = block.adam_m[t].values();
            auto v = block.adam_v[t].values();
            for (std::size_t i = 0; i < w.size(); ++i) {
                m[i] = options.beta1 * m[i] + (1.0 - options.beta1) * g[i];
                v[i] = options.beta2 * v[i] + (1.0 - options.beta2) * g[i] * g[i];
                const double m_hat = m[i] / bc1;
                const double v_hat = v[i] / bc2;
                w[i] -= options.lr * m_hat / (std::sqrt(v_hat) + options.eps);
            }
        }
        block.zero_grads();
    }
}

const GradCheckEntry* GradCheckReport::worst() const {
    if (entries.empty()) {
        return nullptr;
    }
    return &*std::max_element(entries.begin(), entries.end(),
                              [](const auto& a, const auto& b) { return a.error < b.error; });
}

std::vector<GradCheckEntry> GradCheckReport::failures(double threshold) const {
    std::vector<GradCheckEntry> out;
    std::copy_if(entries.begin(), entries.end(), std::back_inserter(out),
                 [threshold](const auto& e) { return e.error >= threshold; });
    return out;
}

double gradient_error(double analytic, double numeric) {
    const double diff = std::abs(analytic - numeric);
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    if (scale < 1e-6) {
        return diff;
    }
    return diff / scale;
}

GradCheckReport grad_check(const LossFn& loss_fn, std::vector<ParamBlock>& blocks, std::size_t samples, double eps,
                           std::uint64_t seed, bool skip_kinks) {
    if (!(eps > 0.0)) {
        throw PreconditionError("grad_check: eps must be > 0");
    }
    for (auto& b : blocks) {
        b.zero_grads();
    }
    loss_fn(true);

    std::vector<std::size_t> nonempty;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (blocks[b].num_values() > 0) {
            nonempty.push_back(b);
        }
    }
    GradCheckReport report;
    if (nonempty.empty()) {
        return report;
    }
    // Five-point central difference, truncation error O(h^4).
    auto central = [&](double& w, double h) {
        const double original = w;
        auto at = [&](double offset) {
            w = original + offset;
            return loss_fn(false);
        };
        const double d1 = at(h) - at(-h);
        const double d2 = at(2.0 * h) - at(-2.0 * h);
        w = original;
        return (8.0 * d1 - d2) / (12.0 * h);
    };
    constexpr int kMaxDraws = 20;
    std::mt19937_64 rng(seed);
    for (std::size_t s = 0; s < samples; ++s) {
        const std::size_t b = nonempty[s % nonempty.size()];
        ParamBlock& block = blocks[b];
        std::uniform_int_distribution<std::size_t> pick(0, block.num_values() - 1);
        for (int draw = 0; draw < kMaxDraws; ++draw) {
            std::size_t flat = pick(rng);
            std::size_t t = 0;
            while (flat >= block.weights[t].size()) {
                flat -= block.weights[t].size();
                ++t;
            }
            double& w = block.weights[t][flat];
            GradCheckEntry e;
            e.block = block.name;
            e.tensor = t;
            e.index = flat;
            e.analytic = block.grads[t][flat];
            e.numeric = central(w, eps);
            e.error = gradient_error(e.analytic, e.numeric);
            if (skip_kinks && draw + 1 < kMaxDraws) {
                // A ReLU kink or clamp inside [w - 2 eps, w + 2 eps] makes the
                // estimate depend on the step; a smooth point does not.
                const double fine = central(w, eps / 4.0);
                if (gradient_error(e.numeric, fine) > 1e-4) {
                    report.skipped.push_back(std::move(e));
                    continue;
                }
            }
            report.max_error = std::max(report.max_error, e.error);
            report.entries.push_back(std::move(e));
            break;
        }
    }
    return report;
}

}  // namespace uncertrack
