// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "uncertrack/params.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace uncertrack {

/// Flat binary weight container:
///   "UNCERTRACK1"
///   per block: u64 name length, name bytes, u64 tensor count,
///              per tensor: u64 rows, u64 cols, rows*cols f64 values
/// All integers and floats little-endian. Adam moments are not stored.
inline constexpr std::string_view kWeightsMagic = "UNCERTRACK1";

struct StoredBlock {
    std::string name;
    std::vector<Tensor2> tensors;
};

std::vector<std::uint8_t> encode_weights(const std::vector<ParamBlock>& blocks);
std::vector<StoredBlock> decode_weights(const std::vector<std::uint8_t>& bytes);

void save_weights(const std::filesystem::path& path, const std::vector<ParamBlock>& blocks);
std::vector<StoredBlock> read_weights(const std::filesystem::path& path);

/// Copies stored tensors into `blocks`. Block names, counts and shapes must
/// match; mismatches raise ConfigError listing both shapes.
void assign_weights(std::vector<ParamBlock>& blocks, const std::vector<StoredBlock>& stored);

}  // namespace uncertrack
