// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#include "checks/checks.hpp"

#include <gtest/gtest.h>

using namespace uncertrack::checks;

namespace {

void expect_pass(const CheckResult& r, std::size_t min_cases) {
    EXPECT_GE(r.cases, min_cases) << r.name;
    EXPECT_EQ(r.failures, 0u) << r.name << ": " << r.first_failure;
}

}  // namespace

TEST(Oracle, MsaAggregateMatchesTermByTerm) { expect_pass(msa_matches_oracle(8), 8); }

TEST(Oracle, TotalLossMatchesStraightLine) { expect_pass(total_loss_matches_oracle(8), 8); }

TEST(Oracle, LambdaScheduleMatchesClosedForm) { expect_pass(lambda_matches_oracle(20), 20); }
