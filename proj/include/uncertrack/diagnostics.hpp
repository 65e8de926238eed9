// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "uncertrack/dataset.hpp"
#include "uncertrack/model.hpp"
#include "uncertrack/world.hpp"

#include <iosfwd>

namespace uncertrack::diag {

/// One JSON line per gated pair of every transition in the window:
/// {"frame", "prev_index", "curr_index", "score", "label"}.
void write_affinity_dump(std::ostream& out, const ModelParams& model, const sim::WorldLog& log, int start,
                         const SequenceOptions& options);

/// One JSON line per detection at the last observed frame holding the chain
/// obtained by following the highest-weight candidate back through the window.
void write_implicit_tracks(std::ostream& out, const ModelParams& model, const sim::WorldLog& log, int start,
                           const SequenceOptions& options);

}  // namespace uncertrack::diag
