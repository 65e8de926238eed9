// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "uncertrack/params.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace uncertrack {

struct AdamOptions {
    double lr = 0.003;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Bias-corrected Adam update of every block, then zeroes the gradients.
/// Throws NumericalError naming the block if any gradient is non-finite;
/// in that case no weight is modified.
void adam_step(std::vector<ParamBlock>& blocks, const AdamOptions& options, std::uint64_t step);

struct GradCheckEntry {
    std::string block;
    std::size_t tensor = 0;
    std::size_t index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double error = 0.0;
};

struct GradCheckReport {
    double max_error = 0.0;
    std::vector<GradCheckEntry> entries;
    std::vector<GradCheckEntry> skipped;  // draws whose finite difference straddled a kink
    const GradCheckEntry* worst() const;
    /// Entries with error >= threshold.
    std::vector<GradCheckEntry> failures(double threshold) const;
};

/// Scalar loss; when `with_grad` is true it must also add d(loss)/d(weights)
/// into the blocks' grads (which grad_check zeroes beforehand).
using LossFn = std::function<double(bool with_grad)>;

/// Relative error |a - n| / max(|a|, |n|), falling back to |a - n| when both
/// magnitudes are below 1e-6.
double gradient_error(double analytic, double numeric);

/// Compares analytic gradients to five-point central differences at `samples`
/// parameters drawn round-robin across blocks (so every block is covered).
/// With `skip_kinks`, a draw whose central difference changes with the step
/// (eps vs eps/4) is not differentiable there; it is recorded in `skipped`
/// and replaced by another draw from the same block.
GradCheckReport grad_check(const LossFn& loss_fn, std::vector<ParamBlock>& blocks, std::size_t samples, double eps,
                           std::uint64_t seed = 0, bool skip_kinks = true);

}  // namespace uncertrack
