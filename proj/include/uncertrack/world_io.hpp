// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "uncertrack/world.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace uncertrack::sim {

/// JSONL world format, one object per line:
///   {"type":"world","frame_rate":..,"num_frames":..,"rng_seed":..}
///   {"type":"agent","agent_id":..,"motion":..,"birth_frame":..,"death_frame":..,"states":[...]}
///   {"type":"frame","frame":..,"detections":[{"pos":[x,y],"velo":[vx,vy],"size":[l,w,h],
///                                            "heading":..,"score":..,"true_id":id|"FP"}]}
/// `true_id` is written only when include_ground_truth is set; agent lines likewise.
void write_world_jsonl(std::ostream& out, const WorldLog& log, bool include_ground_truth = true);
WorldLog read_world_jsonl(std::istream& in);

void save_world(const std::filesystem::path& path, const WorldLog& log, bool include_ground_truth = true);
WorldLog load_world(const std::filesystem::path& path);

/// Expands a list of files and directories (directories contribute their *.jsonl, sorted).
std::vector<std::filesystem::path> expand_world_paths(const std::vector<std::filesystem::path>& inputs);
std::vector<WorldLog> load_worlds(const std::vector<std::filesystem::path>& inputs);

}  // namespace uncertrack::sim
