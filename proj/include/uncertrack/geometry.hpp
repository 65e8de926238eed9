// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace uncertrack {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
    friend Vec2 operator*(double s, Vec2 a) { return {a.x * s, a.y * s}; }
    friend bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }
    double norm() const { return std::hypot(x, y); }
    double squared_norm() const { return x * x + y * y; }
};

inline double squared_distance(Vec2 a, Vec2 b) { return (a - b).squared_norm(); }
inline double distance(Vec2 a, Vec2 b) { return std::sqrt(squared_distance(a, b)); }

/// Wraps an angle into [-pi, pi).
double wrap_angle(double a);

/// Seed for a named random sub-stream (world, init, augment, batch-order, ...).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);

}  // namespace uncertrack
