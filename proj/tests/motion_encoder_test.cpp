// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#include "test_support.hpp"
#include "uncertrack/errors.hpp"
#include "uncertrack/motion_encoder.hpp"

#include <gtest/gtest.h>

using namespace uncertrack;
using testkit::make_detection;

namespace {

struct AsuCase {
    Tensor2 x;
    Tensor2 a;
    Tensor2 h_mot;
    Tensor2 h_aff;
};

AsuCase random_asu_case(const ModelConfig& c, std::size_t rows, std::mt19937_64& rng) {
    return {testkit::random_tensor(rows, c.input_dim(), rng), testkit::random_tensor(rows, c.aff_dim(), rng),
            testkit::random_tensor(rows, c.hidden_dim, rng), testkit::random_tensor(rows, c.hidden_dim, rng)};
}

// One agent moving along x at 1 m per frame; `skip` frames have no detection.
std::vector<DetectionFrame> straight_line(int frames, double y, std::vector<int> skip = {}) {
    std::vector<DetectionFrame> out(static_cast<std::size_t>(frames));
    for (int f = 0; f < frames; ++f) {
        if (std::find(skip.begin(), skip.end(), f) == skip.end()) {
            Detection d = make_detection(static_cast<double>(f), y, f, 0);
            d.velo = {10.0, 0.0};
            out[static_cast<std::size_t>(f)].push_back(d);
        }
    }
    return out;
}

Tensor2 final_h_mot(const ModelParams& model, const std::vector<DetectionFrame>& frames,
                    encoder::SequenceEncoding* enc = nullptr) {
    Graph g;
    const auto bound = bind_params(g, model.blocks);
    auto e = encoder::encode_sequence(g, bound, model, frames);
    const Tensor2 h = g.value(e.final_state.h_mot);
    if (enc != nullptr) {
        *enc = std::move(e);
    }
    return h;
}

}  // namespace

TEST(Asu, ZeroParametersGiveZeroStates) {
    ModelParams model = make_model(fixtures::small_model_config(), 1);
    zero_weights(model);
    std::mt19937_64 rng(1);
    const auto c = random_asu_case(model.config, 3, rng);
    Graph g;
    const auto bound = bind_params(g, model.blocks);
    const auto out = encoder::asu_update(g, bound, model, g.constant(c.x), g.constant(c.a),
                                         g.constant(Tensor2(3, model.config.hidden_dim)),
                                         g.constant(Tensor2(3, model.config.hidden_dim)));
    EXPECT_EQ(g.value(out.h_mot), Tensor2(3, model.config.hidden_dim));
    EXPECT_EQ(g.value(out.h_aff), Tensor2(3, model.config.hidden_dim));
}

TEST(Asu, IdenticalCandidatesGiveIdenticalOutputs) {
    const ModelParams model = make_model(fixtures::small_model_config(), 2);
    std::mt19937_64 rng(2);
    auto c = random_asu_case(model.config, 1, rng);
    auto twice = [](const Tensor2& t) {
        Tensor2 out(2, t.cols());
        for (std::size_t r = 0; r < 2; ++r) {
            std::copy(t.row(0).begin(), t.row(0).end(), out.row(r).begin());
        }
        return out;
    };
    Graph g;
    const auto bound = bind_params(g, model.blocks);
    const auto out = encoder::asu_update(g, bound, model, g.constant(twice(c.x)), g.constant(twice(c.a)),
                                         g.constant(twice(c.h_mot)), g.constant(twice(c.h_aff)));
    const Tensor2& h = g.value(out.h_mot);
    for (std::size_t j = 0; j < h.cols(); ++j) {
        EXPECT_EQ(h(0, j), h(1, j));
    }
}

TEST(Asu, AffinityStateFeedsMotionUpdate) {
    ModelParams model = make_model(fixtures::small_model_config(), 3);
    std::mt19937_64 rng(3);
    const auto c = random_asu_case(model.config, 4, rng);
    // Every gru_aff parameter reaches sum(h_mot) only through GRU_mot's input.
    Graph g;
    const auto bound = bind_params(g, model.blocks);
    const auto out = encoder::asu_update(g, bound, model, g.constant(c.x), g.constant(c.a), g.constant(c.h_mot),
                                         g.constant(c.h_aff));
    g.backward(ops::sum_all(g, out.h_mot));
    GradSet grads = make_grad_set(model.blocks);
    g.collect_param_grads(grads);
    std::size_t gru_aff = 0;
    for (std::size_t b = 0; b < model.blocks.size(); ++b) {
        gru_aff = model.blocks[b].name == "gru_aff" ? b : gru_aff;
    }
    double norm = 0.0;
    for (const auto& t : grads[gru_aff]) {
        for (double v : t.values()) {
            norm += v * v;
        }
    }
    EXPECT_GT(norm, 1e-8);

    const auto fd = grad_check(
        [&](bool with_grad) {
            Graph h;
            const auto b2 = bind_params(h, model.blocks);
            const auto o = encoder::asu_update(h, b2, model, h.constant(c.x), h.constant(c.a), h.constant(c.h_mot),
                                               h.constant(c.h_aff));
            Var s = ops::sum_all(h, o.h_mot);
            if (with_grad) {
                h.backward(s);
                GradSet set = make_grad_set(model.blocks);
                h.collect_param_grads(set);
                accumulate_grads(model.blocks, set);
            }
            return h.value(s)[0];
        },
        model.blocks, 200, 1e-5, 5, false);
    EXPECT_LT(fd.max_error, 1e-4);
    bool seen = false;
    for (const auto& e : fd.entries) {
        seen = seen || e.block == "gru_aff";
    }
    EXPECT_TRUE(seen);
}

TEST(Asu, WithoutAsuMotionIgnoresAffinity) {
    ModelConfig cfg = fixtures::small_model_config();
    cfg.use_asu = false;
    const ModelParams model = make_model(cfg, 4);
    EXPECT_FALSE(model.gru_aff.has_value());
    std::mt19937_64 rng(4);
    const auto c = random_asu_case(cfg, 2, rng);
    Graph g;
    const auto bound = bind_params(g, model.blocks);
    const auto out = encoder::asu_update(g, bound, model, g.constant(c.x), g.constant(c.a), g.constant(c.h_mot), {});
    EXPECT_EQ(g.value(out.h_mot),
              g.value(gru_step(g, bound, model.gru_mot, g.constant(c.x), g.constant(c.h_mot))));
    EXPECT_FALSE(out.h_aff.valid());
}

namespace {

encoder::MsaInputs msa_inputs(Graph& g, const ModelConfig& c, std::vector<double> scores, std::mt19937_64& rng) {
    encoder::MsaInputs in;
    const std::size_t n = scores.size();
    for (std::size_t i = 0; i < n; ++i) {
        in.links.push_back({i, 0, scores[i], 1.0 + static_cast<double>(i), i});
    }
    in.num_curr = 1;
    in.scores = g.constant(Tensor2::column_vector(scores));
    in.h_mot_k = g.constant(testkit::random_tensor(n, c.hidden_dim, rng));
    in.h_mot_prev = g.constant(testkit::random_tensor(n, c.hidden_dim, rng));
    in.x = g.constant(testkit::random_tensor(n, c.input_dim(), rng));
    in.h_aff_k = g.constant(testkit::random_tensor(n, c.hidden_dim, rng));
    in.h_aff_prev = g.constant(testkit::random_tensor(n, c.hidden_dim, rng));
    in.a = g.constant(testkit::random_tensor(n, c.aff_dim(), rng));
    return in;
}

}  // namespace

TEST(Msa, SingleCandidateKeepsGate) {
    const ModelParams model = make_model(fixtures::small_model_config(), 5);
    std::mt19937_64 rng(5);
    Graph g;
    const auto bound = bind_params(g, model.blocks);
    const auto in = msa_inputs(g, model.config, {0.3}, rng);
    const auto out = encoder::msa_aggregate(g, bound, model, in);
    EXPECT_EQ(g.value(out.alpha)[0], 1.0);
    const Tensor2& gate = g.value(out.g_mot);
    const Tensor2& h = g.value(in.h_mot_k);
    for (std::size_t j = 0; j < h.cols(); ++j) {
        EXPECT_DOUBLE_EQ(g.value(out.h_mot)[j], gate[j] * h[j]);
        EXPECT_GT(gate[j], 0.0);
        EXPECT_LT(gate[j], 1.0);
    }
}

TEST(Msa, EqualScoresWithOpenGatesAverage) {
    ModelParams model = make_model(fixtures::small_model_config(), 6);
    for (const char* name : {"gate_mot", "gate_aff"}) {
        auto& block = model.block(name);
        block.weights[0].fill(0.0);
        block.weights[1].fill(60.0);  // sigmoid(60) == 1 in double precision
    }
    std::mt19937_64 rng(6);
    Graph g;
    const auto bound = bind_params(g, model.blocks);
    const auto in = msa_inputs(g, model.config, {0.6, 0.6, 0.6, 0.6}, rng);
    const auto out = encoder::msa_aggregate(g, bound, model, in);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(g.value(out.alpha)[i], 0.25, 1e-15);
    }
    const Tensor2& hm = g.value(in.h_mot_k);
    const Tensor2& ha = g.value(in.h_aff_k);
    for (std::size_t j = 0; j < hm.cols(); ++j) {
        const double mean_mot = (hm(0, j) + hm(1, j) + hm(2, j) + hm(3, j)) / 4.0;
        const double mean_aff = (ha(0, j) + ha(1, j) + ha(2, j) + ha(3, j)) / 4.0;
        EXPECT_NEAR(g.value(out.h_mot)[j], mean_mot, 1e-12);
        EXPECT_NEAR(g.value(out.h_aff)[j], mean_aff, 1e-12);
    }
}

TEST(Msa, WeightsFollowOdds) {
    const ModelParams model = make_model(fixtures::small_model_config(), 7);
    std::mt19937_64 rng(7);
    Graph g;
    const auto bound = bind_params(g, model.blocks);
    const std::vector<double> s{0.2, 0.9, 0.5};
    const auto in = msa_inputs(g, model.config, s, rng);
    const auto out = encoder::msa_aggregate(g, bound, model, in);
    // Canonical order is by score: 0.9, 0.5, 0.2.
    ASSERT_EQ(out.order, (std::vector<std::size_t>{1, 2, 0}));
    const double odds[] = {0.9 / 0.1, 1.0, 0.2 / 0.8};
    const double sum = odds[0] + odds[1] + odds[2];
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(g.value(out.alpha)[i], odds[i] / sum, 1e-14);
    }
}

TEST(Msa, RequiresGates) {
    ModelConfig cfg = fixtures::small_model_config();
    cfg.use_msa = false;
    const ModelParams model = make_model(cfg, 8);
    std::mt19937_64 rng(8);
    Graph g;
    const auto bound = bind_params(g, model.blocks);
    EXPECT_THROW(encoder::msa_aggregate(g, bound, model, msa_inputs(g, cfg, {0.5}, rng)), ConfigError);
}

TEST(Encode, SingleAgentHasOneCandidateWithFullWeight) {
    const ModelParams model = make_model(fixtures::small_model_config(), 9);
    encoder::SequenceEncoding enc;
    const auto frames = straight_line(20, 0.0);
    const Tensor2 h = final_h_mot(model, frames, &enc);
    EXPECT_EQ(h.rows(), 1u);
    EXPECT_TRUE(h.all_finite());
    EXPECT_TRUE(enc.frames[0].links.empty());
    for (std::size_t t = 1; t < 20; ++t) {
        ASSERT_EQ(enc.frames[t].links.size(), 1u) << t;
        EXPECT_EQ(enc.frames[t].alpha[0], 1.0);
    }
    EXPECT_EQ(enc.final_state.age[0], 19);
}

TEST(Encode, DistantAgentsAreIsolated) {
    const ModelParams model = make_model(fixtures::small_model_config(), 10);
    const auto a = straight_line(12, 0.0);
    const auto b = straight_line(12, 30.0);
    std::vector<DetectionFrame> both(12);
    for (std::size_t f = 0; f < 12; ++f) {
        Detection db = b[f][0];
        db.local_index = 1;
        both[f] = {a[f][0], db};
    }
    const Tensor2 ha = final_h_mot(model, a);
    const Tensor2 hb = final_h_mot(model, b);
    const Tensor2 hab = final_h_mot(model, both);
    ASSERT_EQ(hab.rows(), 2u);
    // Batched and single-row matrix products may round differently.
    for (std::size_t j = 0; j < ha.cols(); ++j) {
        EXPECT_NEAR(hab(0, j), ha[j], 1e-12);
        EXPECT_NEAR(hab(1, j), hb[j], 1e-12);
    }
}

TEST(Encode, DroppedFrameStartsNewState) {
    const ModelParams model = make_model(fixtures::small_model_config(), 11);
    encoder::SequenceEncoding enc;
    const auto frames = straight_line(10, 0.0, {5});
    final_h_mot(model, frames, &enc);
    for (std::size_t t = 1; t < 10; ++t) {
        const std::size_t expected = (t == 5 || t == 6) ? 0u : 1u;
        EXPECT_EQ(enc.frames[t].links.size(), expected) << "frame " << t;
    }
    EXPECT_TRUE(enc.frames[5].candidates.empty());
    ASSERT_EQ(enc.frames[6].candidates.size(), 1u);
    EXPECT_TRUE(enc.frames[6].candidates[0].links.empty());
    EXPECT_EQ(enc.final_state.age[0], 3);

    // The post-gap state is what a fresh sequence starting at the gap would give.
    const std::vector<DetectionFrame> fresh(frames.begin() + 6, frames.end());
    const Tensor2 h_gap = final_h_mot(model, frames);
    const Tensor2 h_fresh = final_h_mot(model, fresh);
    for (std::size_t j = 0; j < h_gap.cols(); ++j) {
        EXPECT_NEAR(h_gap[j], h_fresh[j], 1e-12);
    }
}

TEST(Encode, IsolatedFalsePositiveIsBornEveryFrame) {
    const ModelParams model = make_model(fixtures::small_model_config(), 12);
    auto frames = straight_line(6, 0.0);
    for (std::size_t f = 0; f < frames.size(); ++f) {
        Detection fp = make_detection(f % 2 == 0 ? 100.0 : -100.0, 50.0, static_cast<int>(f), 1);
        frames[f].push_back(fp);
    }
    encoder::SequenceEncoding enc;
    final_h_mot(model, frames, &enc);
    for (std::size_t t = 1; t < frames.size(); ++t) {
        EXPECT_EQ(enc.frames[t].candidates[0].links.size(), 1u);
        EXPECT_TRUE(enc.frames[t].candidates[1].links.empty());
    }
    EXPECT_EQ(enc.final_state.age[1], 0);
}

TEST(Encode, BirthWithZeroParametersStaysZero) {
    ModelParams model = make_model(fixtures::small_model_config(), 13);
    zero_weights(model);
    const Tensor2 h = final_h_mot(model, straight_line(5, 0.0, {2}));
    EXPECT_EQ(h, Tensor2(1, model.config.hidden_dim));
}

TEST(Encode, BirthWithoutUpdateUsesZeroState) {
    ModelConfig cfg = fixtures::small_model_config();
    cfg.birth_update = false;
    const ModelParams model = make_model(cfg, 14);
    const Tensor2 h = final_h_mot(model, straight_line(4, 0.0, {2}));
    EXPECT_EQ(h, Tensor2(1, cfg.hidden_dim));
}

TEST(Encode, RequiresTwoFrames) {
    const ModelParams model = make_model(fixtures::small_model_config(), 15);
    Graph g;
    const auto bound = bind_params(g, model.blocks);
    const auto frames = straight_line(1, 0.0);
    EXPECT_THROW(encoder::encode_sequence(g, bound, model, frames), PreconditionError);
}

TEST(Encode, EmptyFinalFrameGivesEmptyEncoding) {
    const ModelParams model = make_model(fixtures::small_model_config(), 16);
    const Tensor2 h = final_h_mot(model, straight_line(4, 0.0, {3}));
    EXPECT_EQ(h.rows(), 0u);
}

TEST(Encode, ForecastLossReachesAffinityScorer) {
    ModelParams model = make_model(fixtures::small_model_config(), 17);
    std::mt19937_64 rng(17);
    std::vector<DetectionFrame> frames;
    for (int f = 0; f < 4; ++f) {
        frames.push_back(fixtures::random_frame(4, f, 4.0, rng));
    }
    const Tensor2 w = testkit::random_tensor(4, model.config.hidden_dim, rng);
    const auto fd = grad_check(
        [&](bool with_grad) {
            Graph g;
            const auto bound = bind_params(g, model.blocks);
            const auto enc = encoder::encode_sequence(g, bound, model, frames);
            Var s = ops::sum_all(g, ops::mul(g, enc.final_state.h_mot, g.constant(w)));
            if (with_grad) {
                g.backward(s);
                GradSet set = make_grad_set(model.blocks);
                g.collect_param_grads(set);
                accumulate_grads(model.blocks, set);
            }
            return g.value(s)[0];
        },
        model.blocks, 200, 1e-5, 3, true);
    EXPECT_LT(fd.max_error, 1e-4);
    Graph g;
    const auto bound = bind_params(g, model.blocks);
    const auto enc = encoder::encode_sequence(g, bound, model, frames);
    g.backward(ops::sum_all(g, ops::mul(g, enc.final_state.h_mot, g.constant(w))));
    GradSet grads = make_grad_set(model.blocks);
    g.collect_param_grads(grads);
    std::size_t aff_block = 0;
    for (std::size_t b = 0; b < model.blocks.size(); ++b) {
        aff_block = model.blocks[b].name == "mlp_aff" ? b : aff_block;
    }
    double aff_norm = 0.0;
    for (const auto& t : grads[aff_block]) {
        for (double v : t.values()) {
            aff_norm += v * v;
        }
    }
    EXPECT_GT(aff_norm, 0.0);
}
