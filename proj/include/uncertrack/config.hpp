// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "uncertrack/evaluation.hpp"
#include "uncertrack/training.hpp"
#include "uncertrack/world.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace uncertrack {

/// Everything a command can be configured with. Keys are the field names of
/// the member structs; world mix weights use the `mix_` prefix.
struct RunConfig {
    sim::WorldConfig world;
    sim::NoiseConfig noise;
    TrainConfig train = TrainConfig::desk();
    eval::EvalOptions eval;
};

/// Sets one key. Throws ConfigError naming the key on an unknown key or a
/// malformed value.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Parses `key = value` lines; blank lines and '#' comments are skipped.
/// Errors name the source, line and key.
void parse_config(std::istream& in, RunConfig& config, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Parses a `key=value` override as given on the command line.
void apply_override(RunConfig& config, const std::string& assignment);

std::vector<std::string> config_keys();
/// Every key with its current value, one `key = value` per line.
void write_config(std::ostream& out, const RunConfig& config);

}  // namespace uncertrack
