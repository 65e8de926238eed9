// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#include "test_support.hpp"
#include "uncertrack/affinity.hpp"
#include "uncertrack/detection_repr.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace uncertrack;
using testkit::make_detection;

namespace {

struct Scored {
    std::vector<affinity::GatedPair> pairs;
    Tensor2 scores;
    Tensor2 a_det;
};

Scored score_frames(const ModelParams& model, const DetectionFrame& prev, const DetectionFrame& curr,
                    const Tensor2& h_prev) {
    Graph g;
    const auto bound = bind_params(g, model.blocks);
    Scored out;
    out.pairs = affinity::gate_candidates(prev, curr, model.config.theta_d);
    if (out.pairs.empty()) {
        return out;
    }
    const Var xp = repr::embed_detections(g, bound, model, prev);
    const Var xc = repr::embed_detections(g, bound, model, curr);
    const auto f = affinity::score_links(g, bound, model, out.pairs, prev, curr, xp, xc, g.constant(h_prev));
    out.scores = g.value(f.scores);
    out.a_det = g.value(f.a_det);
    return out;
}

DetectionFrame shifted(DetectionFrame frame, Vec2 by) {
    for (auto& d : frame) {
        d.pos = d.pos + by;
    }
    return frame;
}

}  // namespace

TEST(ShortTerm, AbsoluteDifference) {
    Graph g;
    const Var u = g.constant(Tensor2::from_rows({{1.0, -2.0}}));
    const Var v = g.constant(Tensor2::from_rows({{-1.0, 1.0}}));
    EXPECT_EQ(g.value(affinity::short_term_feature(g, u, v)), Tensor2::from_rows({{2.0, 3.0}}));
    EXPECT_EQ(g.value(affinity::short_term_feature(g, v, u)), Tensor2::from_rows({{2.0, 3.0}}));
    EXPECT_EQ(g.value(affinity::short_term_feature(g, u, u)), Tensor2(1, 2));
}

TEST(LongTerm, ZeroWeightsAndBirthState) {
    ModelParams model = make_model(fixtures::small_model_config(), 2);
    std::mt19937_64 rng(1);
    const Tensor2 x_mov = testkit::random_tensor(3, model.config.mov_dim, rng);
    {
        Graph g;
        const auto bound = bind_params(g, model.blocks);
        const Tensor2 h0(3, model.config.hidden_dim);
        const Tensor2 out = g.value(affinity::long_term_feature(g, bound, model, g.constant(x_mov), g.constant(h0)));
        Tensor2 cat(3, model.config.mov_dim + model.config.hidden_dim);
        for (std::size_t r = 0; r < 3; ++r) {
            std::copy(x_mov.row(r).begin(), x_mov.row(r).end(), cat.row(r).begin());
        }
        EXPECT_EQ(out, g.value(mlp_forward(g, bound, model.long_term, g.constant(cat))));
        EXPECT_TRUE(out.all_finite());
    }
    zero_weights(model);
    Graph g;
    const auto bound = bind_params(g, model.blocks);
    const Tensor2 out = g.value(affinity::long_term_feature(
        g, bound, model, g.constant(x_mov), g.constant(testkit::random_tensor(3, model.config.hidden_dim, rng))));
    EXPECT_EQ(out, Tensor2(3, model.config.aff_mot_dim));
}

TEST(LongTerm, GradientWrtPreviousStateMatchesFiniteDifferences) {
    const ModelParams model = make_model(fixtures::small_model_config(), 3);
    std::mt19937_64 rng(2);
    const double err = testkit::max_input_grad_error(
        [&](Graph& g, std::span<const Var> in) {
            const auto bound = bind_params(g, model.blocks);
            return ops::sum_all(g, affinity::long_term_feature(g, bound, model, in[0], in[1]));
        },
        {testkit::random_tensor(4, model.config.mov_dim, rng), testkit::random_tensor(4, model.config.hidden_dim, rng)},
        1e-6);
    EXPECT_LT(err, 1e-4);
}

TEST(Gating, BoundaryIsInclusive) {
    const DetectionFrame prev{make_detection(0.0, 0.0, 0, 0)};
    EXPECT_EQ(affinity::gate_candidates(prev, DetectionFrame{make_detection(0.0, 10.0, 1, 0)}, 10.0).size(), 1u);
    EXPECT_TRUE(affinity::gate_candidates(prev, DetectionFrame{make_detection(0.0, 10.01, 1, 0)}, 10.0).empty());
}

TEST(Gating, OrderedByCurrentThenPrevious) {
    std::mt19937_64 rng(8);
    const auto prev = fixtures::random_frame(30, 0, 15.0, rng);
    const auto curr = fixtures::random_frame(30, 1, 15.0, rng);
    const auto pairs = affinity::gate_candidates(prev, curr, 10.0);
    ASSERT_FALSE(pairs.empty());
    for (std::size_t i = 1; i < pairs.size(); ++i) {
        EXPECT_TRUE(std::tie(pairs[i - 1].curr_index, pairs[i - 1].prev_index) <
                    std::tie(pairs[i].curr_index, pairs[i].prev_index));
    }
    for (const auto& p : pairs) {
        EXPECT_NEAR(p.distance, distance(prev[p.prev_index].pos, curr[p.curr_index].pos), 1e-12);
    }
}

TEST(Scoring, ZeroScorerGivesOneHalf) {
    ModelParams model = make_model(fixtures::small_model_config(), 4);
    for (auto& w : model.block("mlp_aff").weights) {
        w.fill(0.0);
    }
    std::mt19937_64 rng(3);
    const auto prev = fixtures::random_frame(6, 0, 8.0, rng);
    const auto curr = fixtures::random_frame(6, 1, 8.0, rng);
    const auto s = score_frames(model, prev, curr, Tensor2(6, model.config.hidden_dim));
    ASSERT_FALSE(s.pairs.empty());
    for (double v : s.scores.values()) {
        EXPECT_EQ(v, 0.5);
    }
}

TEST(Scoring, ScoresInUnitIntervalAndShortTermNonNegative) {
    const ModelParams model = make_model(fixtures::small_model_config(), 5);
    std::mt19937_64 rng(4);
    const auto prev = fixtures::random_frame(10, 0, 10.0, rng);
    const auto curr = fixtures::random_frame(10, 1, 10.0, rng);
    const auto s = score_frames(model, prev, curr, testkit::random_tensor(10, model.config.hidden_dim, rng));
    ASSERT_EQ(s.scores.rows(), s.pairs.size());
    for (double v : s.scores.values()) {
        EXPECT_GT(v, 0.0);
        EXPECT_LT(v, 1.0);
    }
    for (double v : s.a_det.values()) {
        EXPECT_GE(v, 0.0);
    }
}

TEST(Scoring, InvariantUnderSceneTranslation) {
    const ModelParams model = make_model(fixtures::small_model_config(), 6);
    std::mt19937_64 rng(5);
    const auto prev = fixtures::random_frame(8, 0, 10.0, rng);
    const auto curr = fixtures::random_frame(8, 1, 10.0, rng);
    const Tensor2 h = testkit::random_tensor(8, model.config.hidden_dim, rng);
    const auto a = score_frames(model, prev, curr, h);
    const auto b = score_frames(model, shifted(prev, {250.0, -75.0}), shifted(curr, {250.0, -75.0}), h);
    ASSERT_EQ(a.pairs.size(), b.pairs.size());
    for (std::size_t i = 0; i < a.scores.size(); ++i) {
        EXPECT_NEAR(a.scores[i], b.scores[i], 1e-12);
    }
}

TEST(Scoring, BceGradientMatchesFiniteDifferences) {
    ModelParams model = make_model(fixtures::small_model_config(), 7);
    std::mt19937_64 rng(6);
    const auto prev = fixtures::random_frame(5, 0, 6.0, rng);
    const auto curr = fixtures::random_frame(5, 1, 6.0, rng);
    const Tensor2 h = testkit::random_tensor(5, model.config.hidden_dim, rng);
    const auto pairs = affinity::gate_candidates(prev, curr, model.config.theta_d);
    ASSERT_FALSE(pairs.empty());
    Tensor2 labels(pairs.size(), 1);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        labels[i] = pairs[i].prev_index == pairs[i].curr_index ? 1.0 : 0.0;
    }
    const auto report = testkit::check_block_grads(
        model.blocks,
        [&](Graph& g, const ParamBinding& bound) {
            const Var xp = repr::embed_detections(g, bound, model, prev);
            const Var xc = repr::embed_detections(g, bound, model, curr);
            const auto f = affinity::score_links(g, bound, model, pairs, prev, curr, xp, xc, g.constant(h));
            return ops::bce_mean(g, f.scores, labels);
        },
        150);
    EXPECT_LT(report.max_error, 1e-6);
}

TEST(TopK, KeepsAllWhenFewerThanK) {
    std::vector<affinity::CandidateLink> links;
    for (std::size_t i = 0; i < 3; ++i) {
        links.push_back({i, 0, 0.1 * static_cast<double>(i + 1), 1.0, i});
    }
    const auto sets = affinity::top_k_select(links, 2, 10);
    ASSERT_EQ(sets.size(), 2u);
    ASSERT_EQ(sets[0].links.size(), 3u);
    EXPECT_EQ(sets[0].links[0].prev_index, 2u);
    EXPECT_EQ(sets[0].links[2].prev_index, 0u);
    EXPECT_TRUE(sets[1].links.empty());
    EXPECT_EQ(sets[1].curr_index, 1u);
}

TEST(TopK, TiesBreakOnDistanceThenPrevious) {
    const std::vector<affinity::CandidateLink> links{
        {0, 0, 0.7, 2.0, 0}, {1, 0, 0.7, 1.0, 1}, {3, 0, 0.7, 1.0, 2}, {2, 0, 0.7, 1.0, 3}};
    const auto sets = affinity::top_k_select(links, 1, 10);
    ASSERT_EQ(sets[0].links.size(), 4u);
    EXPECT_EQ(sets[0].links[0].prev_index, 1u);
    EXPECT_EQ(sets[0].links[1].prev_index, 2u);
    EXPECT_EQ(sets[0].links[2].prev_index, 3u);
    EXPECT_EQ(sets[0].links[3].prev_index, 0u);
    EXPECT_TRUE(affinity::ranks_before(links[1], links[0]));
    EXPECT_FALSE(affinity::ranks_before(links[0], links[1]));
}

TEST(TopK, TruncatesToBestK) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<affinity::CandidateLink> links;
    for (std::size_t i = 0; i < 25; ++i) {
        links.push_back({i, 0, u(rng), 10.0 * u(rng), i});
    }
    const auto sets = affinity::top_k_select(links, 1, 10);
    ASSERT_EQ(sets[0].links.size(), 10u);
    auto sorted = links;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
    for (std::size_t i = 0; i < 10; ++i) {
        EXPECT_EQ(sets[0].links[i].prev_index, sorted[i].prev_index);
    }
}
