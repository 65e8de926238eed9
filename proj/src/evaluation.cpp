// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#include "uncertrack/evaluation.hpp"

#include "uncertrack/dataset.hpp"
#include "uncertrack/errors.hpp"
#include "uncertrack/graph.hpp"
#include "uncertrack/motion_encoder.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

namespace uncertrack::eval {

std::vector<MatchPair> match_for_eval(std::span<const Detection> detections, std::span<const GroundTruthAgent> agents,
                                      double dist_threshold) {
    if (!(dist_threshold > 0.0)) {
        throw PreconditionError("match_for_eval: distance threshold must be > 0");
    }
    std::vector<MatchPair> all;
    for (std::size_t d = 0; d < detections.size(); ++d) {
        for (const auto& a : agents) {
            const double dist = distance(detections[d].pos, a.pos);
            if (dist <= dist_threshold) {
                all.push_back({d, a.agent_id, dist});
            }
        }
    }
    std::sort(all.begin(), all.end(), [](const MatchPair& x, const MatchPair& y) {
        if (x.distance != y.distance) {
            return x.distance < y.distance;
        }
        if (x.det_index != y.det_index) {
            return x.det_index < y.det_index;
        }
        return x.agent_id < y.agent_id;
    });
    std::vector<bool> det_used(detections.size(), false);
    std::vector<int> agent_used;
    std::vector<MatchPair> out;
    for (const auto& m : all) {
        if (det_used[m.det_index] ||
            std::find(agent_used.begin(), agent_used.end(), m.agent_id) != agent_used.end()) {
            continue;
        }
        det_used[m.det_index] = true;
        agent_used.push_back(m.agent_id);
        out.push_back(m);
    }
    return out;
}

std::optional<double> fde_cm(std::span<const Vec2> predicted, std::span<const Vec2> truth) {
    if (predicted.size() != truth.size()) {
        throw PreconditionError("fde_cm: prediction and truth counts differ");
    }
    if (predicted.empty()) {
        return std::nullopt;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        sum += distance(predicted[i], truth[i]);
    }
    return 100.0 * sum / static_cast<double>(predicted.size());
}

double nonlinearity_residual(std::span<const Vec2> future) {
    const std::size_t n = future.size();
    if (n < 3) {
        return 0.0;
    }
    double t_mean = 0.0;
    Vec2 p_mean;
    for (std::size_t i = 0; i < n; ++i) {
        t_mean += static_cast<double>(i);
        p_mean = p_mean + future[i];
    }
    t_mean /= static_cast<double>(n);
    p_mean = p_mean * (1.0 / static_cast<double>(n));
    double stt = 0.0;
    Vec2 stp;
    for (std::size_t i = 0; i < n; ++i) {
        const double dt = static_cast<double>(i) - t_mean;
        stt += dt * dt;
        stp = stp + (future[i] - p_mean) * dt;
    }
    const Vec2 slope = stp * (1.0 / stt);
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 fit = p_mean + slope * (static_cast<double>(i) - t_mean);
        ssr += squared_distance(future[i], fit);
    }
    return ssr;
}

namespace {

struct AgentTruth {
    GroundTruthAgent at_t;
    Vec2 final_pos;
    double residual = 0.0;
};

struct WindowResult {
    std::size_t world = 0;
    int start = 0;
    DetectionFrame last;
    std::vector<Vec2> final_pred;
    std::vector<AgentTruth> agents;
    std::size_t affinity_hits = 0;
    std::size_t affinity_count = 0;
};

WindowResult evaluate_window(const ModelParams& model, const forecast::SocialInteraction& social,
                             const sim::WorldLog& log, std::size_t world, int start, const SequenceOptions& seq_opts) {
    WindowResult r;
    r.world = world;
    r.start = start;
    const Sequence seq = extract_sequence(log, start, seq_opts, world);
    r.last = seq.last();
    const int t_last = start + seq_opts.t_obs - 1;
    const int stride = waypoint_stride(log.frame_rate, seq_opts.pred_interval);
    for (const auto& track : log.tracks) {
        const int horizon = t_last + stride * static_cast<int>(seq_opts.pred_steps);
        if (!track.alive(t_last) || !track.alive(horizon)) {
            continue;
        }
        AgentTruth a;
        a.at_t = {track.agent_id, track.at(t_last).pos};
        a.final_pos = track.at(horizon).pos;
        std::vector<Vec2> future;
        for (std::size_t k = 1; k <= seq_opts.pred_steps; ++k) {
            future.push_back(track.at(t_last + stride * static_cast<int>(k)).pos);
        }
        a.residual = nonlinearity_residual(future);
        r.agents.push_back(a);
    }

    Graph g;
    const ParamBinding bound = bind_params(g, model.blocks);
    const auto enc = encoder::encode_sequence(g, bound, model, seq.frames);
    std::vector<Vec2> positions;
    std::vector<Vec2> velocities;
    for (const auto& d : r.last) {
        positions.push_back(d.pos);
        velocities.push_back(d.velo);
    }
    const Var p = social.apply(g, enc.final_state.h_mot, positions);
    const Tensor2& wp = g.value(forecast::decode_trajectory(g, bound, model, p, positions, velocities));
    for (std::size_t n = 0; n < wp.rows(); ++n) {
        r.final_pred.push_back({wp(n, wp.cols() - 2), wp(n, wp.cols() - 1)});
    }

    for (std::size_t t = 1; t < seq.frames.size(); ++t) {
        const auto& trace = enc.frames[t];
        const auto& ids = seq.true_ids[t];
        const auto& prev_ids = seq.true_ids[t - 1];
        for (std::size_t n = 0; n < ids.size(); ++n) {
            if (ids[n] == sim::kFalsePositive) {
                continue;
            }
            const auto it = std::find(prev_ids.begin(), prev_ids.end(), ids[n]);
            if (it == prev_ids.end()) {
                continue;
            }
            ++r.affinity_count;
            const auto& links = trace.candidates[n].links;
            if (!links.empty() && links.front().prev_index == static_cast<std::size_t>(it - prev_ids.begin())) {
                ++r.affinity_hits;
            }
        }
    }
    return r;
}

std::vector<MatchPair> match_window(const WindowResult& w, double threshold, std::optional<double> min_score) {
    std::vector<Detection> dets;
    std::vector<std::size_t> index;
    for (std::size_t n = 0; n < w.last.size(); ++n) {
        if (!min_score || w.last[n].score >= *min_score) {
            dets.push_back(w.last[n]);
            index.push_back(n);
        }
    }
    std::vector<GroundTruthAgent> agents;
    for (const auto& a : w.agents) {
        agents.push_back(a.at_t);
    }
    auto matches = match_for_eval(dets, agents, threshold);
    for (auto& m : matches) {
        m.det_index = index[m.det_index];
    }
    return matches;
}

void append_json_optional(nlohmann::ordered_json& j, const char* key, const std::optional<double>& v) {
    j[key] = v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

EvalReport evaluate(const ModelParams& model, std::span<const sim::WorldLog> worlds, const EvalOptions& options,
                    const forecast::SocialInteraction& social) {
    if (options.start_stride < 1) {
        throw ConfigError("evaluate: start_stride must be >= 1");
    }
    SequenceOptions seq_opts;
    seq_opts.t_obs = options.t_obs;
    seq_opts.max_detections = options.max_detections;
    seq_opts.pred_steps = model.config.pred_steps;

    std::vector<std::pair<std::size_t, int>> windows;
    for (std::size_t w = 0; w < worlds.size(); ++w) {
        if (worlds[w].num_frames() < options.t_obs) {
            continue;
        }
        const auto starts = training_starts(worlds[w], seq_opts);
        for (std::size_t i = 0; i < starts.size(); i += static_cast<std::size_t>(options.start_stride)) {
            windows.emplace_back(w, starts[i]);
        }
    }
    std::vector<WindowResult> results(windows.size());
    const std::size_t n_threads = std::max<std::size_t>(1, std::min(options.threads, windows.size()));
    auto work = [&](std::size_t worker) {
        for (std::size_t i = worker; i < windows.size(); i += n_threads) {
            results[i] = evaluate_window(model, social, worlds[windows[i].first], windows[i].first, windows[i].second,
                                         seq_opts);
        }
    };
    if (n_threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < n_threads; ++w) {
            pool.emplace_back(work, w);
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    EvalReport report;
    report.num_sequences = results.size();
    std::size_t hits = 0;
    for (const auto& r : results) {
        report.num_agents += r.agents.size();
        report.affinity_count += r.affinity_count;
        hits += r.affinity_hits;
    }
    if (report.affinity_count > 0) {
        report.affinity_top1 = static_cast<double>(hits) / static_cast<double>(report.affinity_count);
    }

    if (options.target_recall) {
        // Highest score threshold whose matched TPs still cover the target share of live agents.
        std::vector<double> scores;
        for (const auto& r : results) {
            for (const auto& m : match_window(r, options.match_threshold, std::nullopt)) {
                scores.push_back(r.last[m.det_index].score);
            }
        }
        std::sort(scores.begin(), scores.end(), std::greater<>());
        const auto needed = static_cast<std::size_t>(std::ceil(*options.target_recall * report.num_agents));
        if (!scores.empty()) {
            report.score_threshold = scores[std::clamp<std::size_t>(needed, 1, scores.size()) - 1];
        }
    }

    std::vector<Vec2> pred;
    std::vector<Vec2> truth;
    std::vector<Vec2> nl_pred;
    std::vector<Vec2> nl_truth;
    for (const auto& r : results) {
        for (const auto& m : match_window(r, options.match_threshold, report.score_threshold)) {
            const auto agent = std::find_if(r.agents.begin(), r.agents.end(),
                                            [&](const AgentTruth& a) { return a.at_t.agent_id == m.agent_id; });
            EvalSample s;
            s.world = r.world;
            s.start_frame = r.start;
            s.det_index = m.det_index;
            s.agent_id = m.agent_id;
            s.score = r.last[m.det_index].score;
            s.error_m = distance(r.final_pred[m.det_index], agent->final_pos);
            s.residual = agent->residual;
            report.samples.push_back(s);
            pred.push_back(r.final_pred[m.det_index]);
            truth.push_back(agent->final_pos);
            if (is_nonlinear(agent->residual, options.nl_threshold)) {
                nl_pred.push_back(pred.back());
                nl_truth.push_back(truth.back());
            }
        }
    }
    report.num_matched = pred.size();
    report.num_nonlinear = nl_pred.size();
    report.fde_cm = fde_cm(pred, truth);
    report.nl_fde_cm = fde_cm(nl_pred, nl_truth);
    return report;
}

nlohmann::ordered_json EvalReport::to_json(bool with_samples) const {
    nlohmann::ordered_json j;
    j["variant"] = variant;
    append_json_optional(j, "fde_cm", fde_cm);
    append_json_optional(j, "nl_fde_cm", nl_fde_cm);
    j["num_sequences"] = num_sequences;
    j["num_matched"] = num_matched;
    j["num_nonlinear"] = num_nonlinear;
    j["num_agents"] = num_agents;
    append_json_optional(j, "score_threshold", score_threshold);
    append_json_optional(j, "affinity_top1", affinity_top1);
    j["affinity_count"] = affinity_count;
    j["nonlinearity_fit"] = "degree-1 least squares, residual = SSR over x and y";
    if (with_samples) {
        auto& arr = j["samples"] = nlohmann::ordered_json::array();
        for (const auto& s : samples) {
            arr.push_back({{"world", s.world},
                           {"start_frame", s.start_frame},
                           {"det_index", s.det_index},
                           {"agent_id", s.agent_id},
                           {"score", s.score},
                           {"error_m", s.error_m},
                           {"residual", s.residual}});
        }
    }
    return j;
}

namespace {

std::string format_metric(const std::optional<double>& v) {
    if (!v) {
        return "-";
    }
    std::ostringstream s;
    s << std::fixed << std::setprecision(1) << *v;
    return s.str();
}

}  // namespace

void write_report_table(std::ostream& out, std::span<const EvalReport> reports) {
    out << std::left << std::setw(12) << "Method" << std::right << std::setw(14) << "fde@3s (cm)" << std::setw(17)
        << "nl_fde@3s (cm)" << std::setw(10) << "matched" << std::setw(11) << "nonlinear" << '\n';
    for (const auto& r : reports) {
        out << std::left << std::setw(12) << (r.variant.empty() ? "model" : r.variant) << std::right << std::setw(14)
            << format_metric(r.fde_cm) << std::setw(17) << format_metric(r.nl_fde_cm) << std::setw(10)
            << r.num_matched << std::setw(11) << r.num_nonlinear << '\n';
    }
}

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::baseline: return "baseline";
        case Variant::asu: return "+ASU";
        case Variant::msa: return "+MSA";
        case Variant::full: return "full";
    }
    return "full";
}

Variant parse_variant(const std::string& name) {
    if (name == "baseline") {
        return Variant::baseline;
    }
    if (name == "+ASU" || name == "asu") {
        return Variant::asu;
    }
    if (name == "+MSA" || name == "msa") {
        return Variant::msa;
    }
    if (name == "full") {
        return Variant::full;
    }
    throw ConfigError("unknown variant '" + name + "' (expected baseline, asu, msa or full)");
}

void apply_variant(TrainConfig& config, Variant v) {
    config.use_asu = v == Variant::asu || v == Variant::full;
    config.use_msa = v == Variant::msa || v == Variant::full;
}

const AblationRow& AblationReport::row(Variant v) const {
    for (const auto& r : rows) {
        if (r.variant == v) {
            return r;
        }
    }
    throw PreconditionError("ablation report has no row for " + variant_name(v));
}

namespace {

std::pair<double, double> mean_std(const std::vector<double>& xs) {
    if (xs.empty()) {
        return {std::nan(""), std::nan("")};
    }
    double mean = 0.0;
    for (double x : xs) {
        mean += x;
    }
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) {
        var += (x - mean) * (x - mean);
    }
    const double denom = xs.size() > 1 ? static_cast<double>(xs.size() - 1) : 1.0;
    return {mean, std::sqrt(var / denom)};
}

}  // namespace

AblationReport ablation_run(const TrainConfig& base, std::span<const sim::WorldLog> train_worlds,
                            std::span<const sim::WorldLog> eval_worlds, std::span<const Variant> variants,
                            std::span<const std::uint64_t> seeds, const EvalOptions& options,
                            const AblationProgress& progress) {
    AblationReport report;
    report.seeds.assign(seeds.begin(), seeds.end());
    for (Variant v : variants) {
        AblationRow row;
        row.variant = v;
        std::vector<double> fde;
        std::vector<double> nl;
        for (std::uint64_t seed : seeds) {
            TrainConfig cfg = base;
            cfg.seed = seed;
            apply_variant(cfg, v);
            const TrainResult trained = train(cfg, train_worlds);
            EvalReport r = evaluate(trained.model, eval_worlds, options);
            r.variant = variant_name(v);
            r.samples.clear();
            if (r.fde_cm) {
                fde.push_back(*r.fde_cm);
            }
            if (r.nl_fde_cm) {
                nl.push_back(*r.nl_fde_cm);
            }
            if (progress) {
                progress(v, seed, r);
            }
            row.per_seed.push_back(std::move(r));
        }
        std::tie(row.fde_mean, row.fde_std) = mean_std(fde);
        std::tie(row.nl_fde_mean, row.nl_fde_std) = mean_std(nl);
        report.rows.push_back(std::move(row));
    }
    return report;
}

nlohmann::ordered_json AblationReport::to_json() const {
    nlohmann::ordered_json j;
    j["seeds"] = seeds;
    auto& rows_json = j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json row;
        row["variant"] = variant_name(r.variant);
        row["fde_mean_cm"] = r.fde_mean;
        row["fde_std_cm"] = r.fde_std;
        row["nl_fde_mean_cm"] = r.nl_fde_mean;
        row["nl_fde_std_cm"] = r.nl_fde_std;
        auto& per_seed = row["per_seed"] = nlohmann::ordered_json::array();
        for (const auto& s : r.per_seed) {
            per_seed.push_back(s.to_json());
        }
        rows_json.push_back(row);
    }
    return j;
}

void write_ablation_table(std::ostream& out, const AblationReport& report) {
    out << std::left << std::setw(12) << "Method" << std::setw(6) << "ASU" << std::setw(6) << "MSA" << std::right
        << std::setw(22) << "fde@3s (cm)" << std::setw(22) << "nl_fde@3s (cm)" << '\n';
    for (const auto& r : report.rows) {
        const bool asu = r.variant == Variant::asu || r.variant == Variant::full;
        const bool msa = r.variant == Variant::msa || r.variant == Variant::full;
        std::ostringstream f;
        std::ostringstream nl;
        f << std::fixed << std::setprecision(1) << r.fde_mean << " +/- " << r.fde_std;
        nl << std::fixed << std::setprecision(1) << r.nl_fde_mean << " +/- " << r.nl_fde_std;
        out << std::left << std::setw(12) << variant_name(r.variant) << std::setw(6) << (asu ? "x" : "")
            << std::setw(6) << (msa ? "x" : "") << std::right << std::setw(22) << f.str() << std::setw(22) << nl.str()
            << '\n';
    }
}

}  // namespace uncertrack::eval
