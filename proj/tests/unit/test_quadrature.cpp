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

#include "kac/quadrature.hpp"

using namespace kac;

TEST(GaussHermite, ReproducesNormalMoments)
{
    for (std::size_t n : {1, 2, 5, 10, 40, 100})
    {
        auto const r = gauss_hermite(n);
        ASSERT_EQ(r.order(), n);
        // Exact for polynomials up to degree 2n - 1; E x^{2k} = (2k-1)!!.
        double double_factorial = 1.0;
        for (std::size_t k = 0; k < n && k <= 8; ++k)
        {
            double even = 0.0, odd = 0.0;
            for (std::size_t i = 0; i < n; ++i)
            {
                even += r.weights[i] * std::pow(r.nodes[i], 2.0 * k);
                odd += r.weights[i] * std::pow(r.nodes[i], 2.0 * k + 1);
            }
            EXPECT_NEAR(even, double_factorial, 1e-11 * double_factorial) << "n=" << n << " k=" << k;
            EXPECT_NEAR(odd, 0.0, 1e-10 * double_factorial);
            double_factorial *= 2.0 * k + 1.0;
        }
    }
}

TEST(GaussHermite, IntegratesCosine)
{
    // E cos(x) = exp(-1/2) under the standard normal.
    auto const r = gauss_hermite(30);
    double s = 0.0;
    for (std::size_t i = 0; i < r.order(); ++i)
        s += r.weights[i] * std::cos(r.nodes[i]);
    EXPECT_NEAR(s, std::exp(-0.5), 1e-14);
}

TEST(GaussLegendre, PolynomialsAndLength)
{
    auto const r = gauss_legendre(6);
    double w = 0.0, x10 = 0.0, x11 = 0.0;
    for (std::size_t i = 0; i < r.order(); ++i)
    {
        w += r.weights[i];
        x10 += r.weights[i] * std::pow(r.nodes[i], 10);
        x11 += r.weights[i] * std::pow(r.nodes[i], 11);
    }
    EXPECT_NEAR(w, 2.0, 1e-14);
    EXPECT_NEAR(x10, 2.0 / 11.0, 1e-14);
    EXPECT_NEAR(x11, 0.0, 1e-14);
}

TEST(GaussRules, RejectEmpty)
{
    EXPECT_THROW(gauss_hermite(0), std::invalid_argument);
    EXPECT_THROW(gauss_legendre(0), std::invalid_argument);
}

TEST(TensorNodes, OrderAndWeights)
{
    auto const r = gauss_hermite(3);
    std::vector<std::vector<double>> pts;
    double total = 0.0, second = 0.0;
    for_each_tensor_node(r, 2, [&](std::span<double const> x, double w) {
        pts.emplace_back(x.begin(), x.end());
        total += w;
        second += w * x[0] * x[0] * x[1] * x[1];
    });
    ASSERT_EQ(pts.size(), 9u);
    EXPECT_EQ(pts[0][0], pts[1][0]);
    EXPECT_NE(pts[0][1], pts[1][1]);
    EXPECT_NEAR(total, 1.0, 1e-14);
    EXPECT_NEAR(second, 1.0, 1e-13);

    int visits = 0;
    for_each_tensor_node(r, 0, [&](std::span<double const> x, double w) {
        EXPECT_TRUE(x.empty());
        EXPECT_EQ(w, 1.0);
        ++visits;
    });
    EXPECT_EQ(visits, 1);
}
