// Copyright 2026 The kacsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "kac/random.hpp"
#include "kac/stats.hpp"

using kac::Philox4x32;
using kac::Rng;

// Known-answer vectors of the reference Philox4x32-10 implementation.
TEST(Philox, KnownAnswerZero)
{
    auto const out = Philox4x32::bijection({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(out[0], 0x6627e8d5u);
    EXPECT_EQ(out[1], 0xe169c58du);
    EXPECT_EQ(out[2], 0xbc57ac4cu);
    EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerOnes)
{
    auto const out = Philox4x32::bijection({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                           {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(out[0], 0x408f276du);
    EXPECT_EQ(out[1], 0x41c83b0eu);
    EXPECT_EQ(out[2], 0xa20bc7c6u);
    EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPi)
{
    auto const out = Philox4x32::bijection({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                           {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(out[0], 0xd16cfe09u);
    EXPECT_EQ(out[1], 0x94fdccebu);
    EXPECT_EQ(out[2], 0x5001e420u);
    EXPECT_EQ(out[3], 0x24126ea1u);
}

TEST(Philox, SameSeedAndStreamReproduce)
{
    Philox4x32 a(42, 7);
    Philox4x32 b(42, 7);
    for (int k = 0; k < 100; ++k)
        EXPECT_EQ(a(), b());
}

TEST(Philox, StreamsDiffer)
{
    Philox4x32 a(42, 7);
    Philox4x32 b(42, 8);
    int same = 0;
    for (int k = 0; k < 100; ++k)
        same += a() == b();
    EXPECT_LT(same, 3);
}

TEST(Rng, UniformIsOpenInterval)
{
    Rng rng(1);
    for (int k = 0; k < 100000; ++k)
    {
        double const u = rng.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(Rng, NormalMoments)
{
    Rng rng(3);
    kac::RunningStats s;
    kac::RunningStats s4;
    for (int k = 0; k < 200000; ++k)
    {
        double const x = rng.normal();
        s.push(x);
        s4.push(x * x * x * x);
    }
    EXPECT_NEAR(s.mean(), 0.0, 4.0 * s.stderr_of_mean());
    EXPECT_NEAR(s.variance(), 1.0, 0.015);
    EXPECT_NEAR(s4.mean(), 3.0, 4.0 * s4.stderr_of_mean());
}

TEST(Rng, ExponentialMeanAndRejectsBadRate)
{
    Rng rng(5);
    kac::RunningStats s;
    for (int k = 0; k < 100000; ++k)
        s.push(rng.exponential(2.5));
    EXPECT_NEAR(s.mean(), 0.4, 4.0 * s.stderr_of_mean());
    EXPECT_THROW(rng.exponential(0.0), std::invalid_argument);
    EXPECT_THROW(rng.exponential(-1.0), std::invalid_argument);
}

TEST(Rng, IndexCoversRangeUniformly)
{
    Rng rng(9);
    std::vector<int> counts(7, 0);
    int const n = 70000;
    for (int k = 0; k < n; ++k)
        ++counts[rng.index(7)];
    for (int c : counts)
        EXPECT_NEAR(c, n / 7.0, 5.0 * std::sqrt(n / 7.0));
    EXPECT_THROW(rng.index(0), std::invalid_argument);
}

TEST(Substream, DistinctForDistinctInputs)
{
    std::set<std::uint64_t> seen;
    for (std::uint64_t tag = 0; tag < 10; ++tag)
        for (std::uint64_t k = 0; k < 1000; ++k)
            seen.insert(kac::substream(tag, k));
    EXPECT_EQ(seen.size(), 10000u);
}

TEST(RunningStats, MergeMatchesSequential)
{
    Rng rng(11);
    kac::RunningStats all, a, b;
    for (int k = 0; k < 1000; ++k)
    {
        double const x = rng.normal() * 3.0 + 1.0;
        all.push(x);
        (k < 300 ? a : b).push(x);
    }
    a.merge(b);
    EXPECT_EQ(a.count(), all.count());
    EXPECT_NEAR(a.mean(), all.mean(), 1e-12);
    EXPECT_NEAR(a.variance(), all.variance(), 1e-10);
}
