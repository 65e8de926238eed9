// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "uncertrack/detection.hpp"
#include "uncertrack/forecaster.hpp"
#include "uncertrack/model.hpp"
#include "uncertrack/training.hpp"
#include "uncertrack/world.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace uncertrack::eval {

struct GroundTruthAgent {
    int agent_id = 0;
    Vec2 pos;
};

struct MatchPair {
    std::size_t det_index = 0;
    int agent_id = 0;
    double distance = 0.0;
};

/// Greedy nearest-neighbour matching: repeatedly takes the closest unused
/// (detection, agent) pair; pairs farther than `dist_threshold` are dropped.
/// Ties break on detection index, then agent id.
std::vector<MatchPair> match_for_eval(std::span<const Detection> detections, std::span<const GroundTruthAgent> agents,
                                      double dist_threshold = 2.0);

/// Mean distance between predicted and true final positions in cm; absent
/// for an empty set.
std::optional<double> fde_cm(std::span<const Vec2> predicted, std::span<const Vec2> truth);

/// Sum over both axes of the squared residuals of a least-squares line fit
/// against the step index.
double nonlinearity_residual(std::span<const Vec2> future);
inline bool is_nonlinear(double residual, double threshold = 0.1) { return residual > threshold; }

struct EvalOptions {
    int t_obs = 20;
    std::size_t max_detections = 100;
    double match_threshold = 2.0;  // m
    double nl_threshold = 0.1;     // m^2
    int start_stride = 10;         // frames between evaluated windows
    std::optional<double> target_recall;  // score threshold picked to reach this recall of live agents
    std::size_t threads = 1;
};

struct EvalSample {
    std::size_t world = 0;
    int start_frame = 0;
    std::size_t det_index = 0;
    int agent_id = 0;
    double score = 0.0;
    double error_m = 0.0;
    double residual = 0.0;
};

struct EvalReport {
    std::string variant;
    std::optional<double> fde_cm;
    std::optional<double> nl_fde_cm;
    std::size_t num_sequences = 0;
    std::size_t num_matched = 0;
    std::size_t num_nonlinear = 0;
    std::size_t num_agents = 0;  // live agents with a full future at T, summed over sequences
    std::optional<double> score_threshold;
    std::optional<double> affinity_top1;  // share of detections whose true predecessor scores highest
    std::size_t affinity_count = 0;
    std::vector<EvalSample> samples;

    nlohmann::ordered_json to_json(bool with_samples = false) const;
};

EvalReport evaluate(const ModelParams& model, std::span<const sim::WorldLog> worlds, const EvalOptions& options,
                    const forecast::SocialInteraction& social = forecast::IdentitySocial{});

void write_report_table(std::ostream& out, std::span<const EvalReport> reports);

enum class Variant { baseline, asu, msa, full };
std::string variant_name(Variant v);
Variant parse_variant(const std::string& name);
void apply_variant(TrainConfig& config, Variant v);

struct AblationRow {
    Variant variant = Variant::full;
    std::vector<EvalReport> per_seed;
    double fde_mean = 0.0;
    double fde_std = 0.0;
    double nl_fde_mean = 0.0;
    double nl_fde_std = 0.0;
};

struct AblationReport {
    std::vector<std::uint64_t> seeds;
    std::vector<AblationRow> rows;
    nlohmann::ordered_json to_json() const;
    const AblationRow& row(Variant v) const;
};

using AblationProgress = std::function<void(Variant, std::uint64_t seed, const EvalReport&)>;

/// Trains every variant on `train_worlds` once per seed and evaluates it on
/// `eval_worlds`. Data and seeds are shared across variants.
AblationReport ablation_run(const TrainConfig& base, std::span<const sim::WorldLog> train_worlds,
                            std::span<const sim::WorldLog> eval_worlds, std::span<const Variant> variants,
                            std::span<const std::uint64_t> seeds, const EvalOptions& options,
                            const AblationProgress& progress = {});

void write_ablation_table(std::ostream& out, const AblationReport& report);

}  // namespace uncertrack::eval
