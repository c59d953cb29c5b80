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

#include "kac/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace kac {
namespace {

/*
 * Golub-Welsch for an orthonormal family with three-term recurrence
 * sqrt(b_{k+1}) p_{k+1} = (x - a_k) p_k - sqrt(b_k) p_{k-1}; the eigenvalues
 * seed a Newton polish and the weights come from the Christoffel sum
 * 1 / sum_k p_k(x)^2, which keeps full relative accuracy in the tails.
 */
template <class OffDiag>
GaussRule golub_welsch(std::size_t n, OffDiag offdiag, double p0)
{
    if (n == 0)
        throw std::invalid_argument("quadrature order must be >= 1");
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    Eigen::VectorXd sub(static_cast<Eigen::Index>(n > 1 ? n - 1 : 0));
    for (std::size_t k = 1; k < n; ++k)
        sub[static_cast<Eigen::Index>(k - 1)] = offdiag(k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);

    auto christoffel_sum = [&](double x) {
        double prev = 0.0;
        double cur = p0;
        double sum = cur * cur;
        for (std::size_t k = 0; k + 1 < n; ++k)
        {
            double const next = (x * cur - (k > 0 ? offdiag(k) : 0.0) * prev) / offdiag(k + 1);
            prev = cur;
            cur = next;
            sum += cur * cur;
        }
        return sum;
    };

    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        double x = solver.eigenvalues()[static_cast<Eigen::Index>(i)];
        for (int it = 0; it < 3; ++it)
        {
            // Newton on p_n, derivative carried through the recurrence.
            double prev = 0.0, cur = p0, dprev = 0.0, dcur = 0.0;
            for (std::size_t k = 0; k < n; ++k)
            {
                double const b = offdiag(k + 1);
                double const a = k > 0 ? offdiag(k) : 0.0;
                double const next = (x * cur - a * prev) / b;
                double const dnext = (cur + x * dcur - a * dprev) / b;
                prev = cur;
                cur = next;
                dprev = dcur;
                dcur = dnext;
            }
            if (dcur == 0.0)
                break;
            double const step = cur / dcur;
            x -= step;
            if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(x)))
                break;
        }
        rule.nodes[i] = x;
        rule.weights[i] = 1.0 / christoffel_sum(x);
    }
    return rule;
}

} // namespace

GaussRule gauss_hermite(std::size_t n)
{
    // Orthonormal He_k / sqrt(k!) for the standard normal: b_k = k.
    auto rule = golub_welsch(n, [](std::size_t k) { return std::sqrt(static_cast<double>(k)); }, 1.0);
    // Enforce exact antisymmetry of the nodes.
    for (std::size_t i = 0; i < n / 2; ++i)
    {
        double const x = 0.5 * (rule.nodes[n - 1 - i] - rule.nodes[i]);
        double const w = 0.5 * (rule.weights[n - 1 - i] + rule.weights[i]);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1)
        rule.nodes[n / 2] = 0.0;
    return rule;
}

GaussRule gauss_legendre(std::size_t n)
{
    // Orthonormal Legendre on [-1, 1] with dx: b_k = k^2 / (4k^2 - 1), p_0 = 1/sqrt(2).
    auto rule = golub_welsch(
        n,
        [](std::size_t k) {
            auto const kk = static_cast<double>(k);
            return kk / std::sqrt(4.0 * kk * kk - 1.0);
        },
        1.0 / std::numbers::sqrt2);
    for (std::size_t i = 0; i < n / 2; ++i)
    {
        double const x = 0.5 * (rule.nodes[n - 1 - i] - rule.nodes[i]);
        double const w = 0.5 * (rule.weights[n - 1 - i] + rule.weights[i]);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1)
        rule.nodes[n / 2] = 0.0;
    return rule;
}

} // namespace kac
