// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#include "uncertrack/tensor.hpp"

#include "uncertrack/errors.hpp"

#include <algorithm>
#include <cmath>

namespace uncertrack {

Tensor2 Tensor2::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    Tensor2 t(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != c) {
            throw ConfigError("Tensor2::from_rows: ragged rows");
        }
        for (double v : row) {
            t.values_[i++] = v;
        }
    }
    return t;
}

Tensor2 Tensor2::row_vector(std::span<const double> values) {
    Tensor2 t(1, values.size());
    std::copy(values.begin(), values.end(), t.values_.begin());
    return t;
}

Tensor2 Tensor2::column_vector(std::span<const double> values) {
    Tensor2 t(values.size(), 1);
    std::copy(values.begin(), values.end(), t.values_.begin());
    return t;
}

void Tensor2::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

bool Tensor2::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

std::string Tensor2::shape_string() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

}  // namespace uncertrack
