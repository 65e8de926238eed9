// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#include "uncertrack/weights_io.hpp"

#include "uncertrack/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace uncertrack {
namespace {

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

void put_f64(std::vector<std::uint8_t>& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    bool at_end() const { return pos_ == bytes_.size(); }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        }
        pos_ += 8;
        return v;
    }

    double f64() { return std::bit_cast<double>(u64()); }

    std::string str(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) {
            throw ConfigError("weights file truncated at byte " + std::to_string(pos_));
        }
    }

    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_weights(const std::vector<ParamBlock>& blocks) {
    std::vector<std::uint8_t> out(kWeightsMagic.begin(), kWeightsMagic.end());
    for (const auto& b : blocks) {
        put_u64(out, b.name.size());
        out.insert(out.end(), b.name.begin(), b.name.end());
        put_u64(out, b.weights.size());
        for (const auto& w : b.weights) {
            put_u64(out, w.rows());
            put_u64(out, w.cols());
            for (double v : w.values()) {
                put_f64(out, v);
            }
        }
    }
    return out;
}

std::vector<StoredBlock> decode_weights(const std::vector<std::uint8_t>& bytes) {
    Reader in(bytes);
    if (in.str(kWeightsMagic.size()) != kWeightsMagic) {
        throw ConfigError("weights file: bad magic, expected UNCERTRACK1");
    }
    std::vector<StoredBlock> blocks;
    while (!in.at_end()) {
        StoredBlock b;
        b.name = in.str(in.u64());
        const auto count = in.u64();
        for (std::uint64_t t = 0; t < count; ++t) {
            const auto rows = in.u64();
            const auto cols = in.u64();
            Tensor2 w(rows, cols);
            for (double& v : w.values()) {
                v = in.f64();
            }
            b.tensors.push_back(std::move(w));
        }
        blocks.push_back(std::move(b));
    }
    return blocks;
}

void save_weights(const std::filesystem::path& path, const std::vector<ParamBlock>& blocks) {
    const auto bytes = encode_weights(blocks);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw FileError("cannot write weights file: " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<StoredBlock> read_weights(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FileError("file not found: " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_weights(bytes);
}

void assign_weights(std::vector<ParamBlock>& blocks, const std::vector<StoredBlock>& stored) {
    if (stored.size() != blocks.size()) {
        throw ConfigError("weights file has " + std::to_string(stored.size()) + " blocks, model expects " +
                          std::to_string(blocks.size()));
    }
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const auto& s = stored[b];
        auto& block = blocks[b];
        if (s.name != block.name) {
            throw ConfigError("weights block " + std::to_string(b) + " is '" + s.name + "', model expects '" +
                              block.name + "'");
        }
        if (s.tensors.size() != block.weights.size()) {
            throw ConfigError("weights block '" + s.name + "' has " + std::to_string(s.tensors.size()) +
                              " tensors, model expects " + std::to_string(block.weights.size()));
        }
        for (std::size_t t = 0; t < s.tensors.size(); ++t) {
            if (!s.tensors[t].same_shape(block.weights[t])) {
                throw ConfigError("weights block '" + s.name + "' tensor " + std::to_string(t) + ": file shape " +
                                  s.tensors[t].shape_string() + ", model shape " +
                                  block.weights[t].shape_string());
            }
        }
    }
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        for (std::size_t t = 0; t < blocks[b].weights.size(); ++t) {
            blocks[b].weights[t] = stored[b].tensors[t];
        }
    }
}

}  // namespace uncertrack
