// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#include "uncertrack/diagnostics.hpp"

#include "uncertrack/graph.hpp"
#include "uncertrack/motion_encoder.hpp"

#include <optional>
#include <ostream>

#include <json.hpp>

namespace uncertrack::diag {

namespace {

nlohmann::ordered_json id_json(int id) {
    return id == sim::kFalsePositive ? nlohmann::ordered_json("FP") : nlohmann::ordered_json(id);
}

}  // namespace

void write_affinity_dump(std::ostream& out, const ModelParams& model, const sim::WorldLog& log, int start,
                         const SequenceOptions& options) {
    const Sequence seq = extract_sequence(log, start, options);
    Graph g;
    const ParamBinding bound = bind_params(g, model.blocks);
    const auto enc = encoder::encode_sequence(g, bound, model, seq.frames);
    for (std::size_t t = 1; t < seq.frames.size(); ++t) {
        const auto& trace = enc.frames[t];
        if (trace.pairs.empty()) {
            continue;
        }
        const Tensor2& scores = g.value(trace.features.scores);
        for (std::size_t p = 0; p < trace.pairs.size(); ++p) {
            const auto& pair = trace.pairs[p];
            nlohmann::ordered_json j;
            j["frame"] = start + static_cast<int>(t);
            j["prev_index"] = pair.prev_index;
            j["curr_index"] = pair.curr_index;
            j["score"] = scores[p];
            j["label"] = seq.same_agent(t, pair.prev_index, pair.curr_index) ? 1 : 0;
            out << j.dump() << '\n';
        }
    }
}

void write_implicit_tracks(std::ostream& out, const ModelParams& model, const sim::WorldLog& log, int start,
                           const SequenceOptions& options) {
    const Sequence seq = extract_sequence(log, start, options);
    Graph g;
    const ParamBinding bound = bind_params(g, model.blocks);
    const auto enc = encoder::encode_sequence(g, bound, model, seq.frames);
    const std::size_t last = seq.frames.size() - 1;
    for (std::size_t n = 0; n < seq.last().size(); ++n) {
        nlohmann::ordered_json j;
        j["detection"] = n;
        j["frame"] = start + static_cast<int>(last);
        j["true_id"] = id_json(seq.true_ids[last][n]);
        auto& chain = j["chain"] = nlohmann::ordered_json::array();
        std::size_t index = n;
        double alpha = 1.0;
        for (std::size_t t = last;; --t) {
            const Detection& d = seq.frames[t][index];
            chain.push_back({{"frame", start + static_cast<int>(t)},
                             {"index", index},
                             {"pos", {d.pos.x, d.pos.y}},
                             {"true_id", id_json(seq.true_ids[t][index])},
                             {"alpha", alpha}});
            if (t == 0) {
                break;
            }
            const auto& trace = enc.frames[t];
            std::optional<std::size_t> best;
            for (std::size_t l = 0; l < trace.links.size(); ++l) {
                if (trace.links[l].curr_index == index && (!best || trace.alpha[l] > trace.alpha[*best])) {
                    best = l;
                }
            }
            if (!best) {
                break;
            }
            index = trace.links[*best].prev_index;
            alpha = trace.alpha[*best];
        }
        out << j.dump() << '\n';
    }
}

}  // namespace uncertrack::diag
