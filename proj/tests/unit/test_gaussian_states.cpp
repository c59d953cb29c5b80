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
#include <numbers>

#include "kac/gaussian_states.hpp"
#include "support/generators.hpp"

using namespace kac;

namespace {

GaussianComponent random_component(prop::Gen& g, std::size_t n)
{
    Eigen::MatrixXd B(n, n);
    Eigen::VectorXd m(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        m(i) = g.real(-1.0, 1.0);
        for (std::size_t j = 0; j < n; ++j)
            B(i, j) = g.real(-1.0, 1.0);
    }
    Eigen::MatrixXd S = B * B.transpose() + 0.2 * Eigen::MatrixXd::Identity(n, n);
    return {m, S};
}

// Trapezoid integral on a wide 1-D grid, used as an independent oracle.
template <class Fn>
double trapezoid(Fn&& fn, double lo, double hi, int n)
{
    double const h = (hi - lo) / n;
    double s = 0.5 * (fn(lo) + fn(hi));
    for (int k = 1; k < n; ++k)
        s += fn(lo + k * h);
    return s * h;
}

} // namespace

TEST(GaussianComponent, Validation)
{
    GaussianComponent g{Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2)};
    EXPECT_NO_THROW(g.validate());
    g.covariance(0, 1) = 0.5;
    EXPECT_THROW(g.validate(), std::invalid_argument);
    g.covariance(1, 0) = 0.5;
    EXPECT_NO_THROW(g.validate());
    g.covariance(0, 0) = -1.0;
    EXPECT_THROW(g.validate(), std::invalid_argument);

    GaussianMixtureState s{{0.5, 0.4}, {GaussianComponent::isotropic(2, 1.0), GaussianComponent::isotropic(2, 2.0)}};
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s.weights = {0.5, 0.5};
    EXPECT_NO_THROW(s.validate());
}

TEST(ClosedForms, FrozenIsotropicValues)
{
    EXPECT_NEAR(entropy_gaussian_isotropic(2.0, 1.0, 3), 0.460279229160082, 1e-14);
    EXPECT_NEAR(fisher_info_gaussian_isotropic(2.0, 1.0, 3), 1.5, 1e-14);
    EXPECT_EQ(entropy_gaussian_isotropic(0.5, 2.0, 4), 0.0);
    EXPECT_EQ(fisher_info_gaussian_isotropic(0.5, 2.0, 4), 0.0);
    EXPECT_THROW(entropy_gaussian_isotropic(0.0, 1.0, 1), std::invalid_argument);
    EXPECT_THROW(fisher_info_gaussian_isotropic(-1.0, 1.0, 1), std::invalid_argument);
}

TEST(ClosedForms, OneDimensionalQuadratureOracle)
{
    double const m = 0.3, s2 = 0.5, beta = 2.0;
    auto f = [&](double v) { return std::exp(-(v - m) * (v - m) / (2 * s2)) / std::sqrt(2 * std::numbers::pi * s2); };
    auto gamma = [&](double v) { return std::exp(-beta * v * v / 2) * std::sqrt(beta / (2 * std::numbers::pi)); };
    double const H = trapezoid([&](double v) { return f(v) > 0 ? f(v) * std::log(f(v) / gamma(v)) : 0.0; },
                               -12.0, 12.0, 40000);
    double const I = trapezoid(
        [&](double v) {
            double const g = -(v - m) / s2 + beta * v;
            return f(v) * g * g;
        },
        -12.0, 12.0, 40000);
    GaussianComponent const c{Eigen::VectorXd::Constant(1, m), Eigen::MatrixXd::Constant(1, 1, s2)};
    EXPECT_NEAR(entropy_gaussian(c, beta), H, 1e-9);
    EXPECT_NEAR(fisher_info_gaussian(c, beta), I, 1e-9);
}

TEST(ClosedForms, GeneralReducesToIsotropic)
{
    prop::for_all(100, 51, [](prop::Gen& g) {
        std::size_t const n = g.size(1, 6);
        double const a = g.real(0.1, 5.0), beta = g.real(0.2, 4.0);
        auto const c = GaussianComponent::isotropic(n, a);
        EXPECT_NEAR(entropy_gaussian(c, beta), entropy_gaussian_isotropic(a, beta, n), 1e-12 * (1 + n * a * beta));
        EXPECT_NEAR(fisher_info_gaussian(c, beta), fisher_info_gaussian_isotropic(a, beta, n),
                    1e-10 * (1 + n / a + n * a * beta * beta));
    });
}

TEST(ClosedForms, InformationTransformRelation)
{
    prop::for_all(100, 53, [](prop::Gen& g) {
        std::size_t const n = g.size(1, 6);
        double const beta = g.real(0.2, 4.0);
        auto const c = random_component(g, n);
        double const lhs = fisher_info_gaussian(c, beta);
        double const rhs = info_transform_relation(fisher_info_plain_gaussian(c), kinetic_energy(c), n, beta);
        EXPECT_NEAR(lhs, rhs, 1e-9 * (1.0 + std::abs(lhs)));
        EXPECT_GE(entropy_gaussian(c, beta), -1e-12);
        EXPECT_GE(lhs, -1e-9);
    });
}

TEST(Propagation, InternalMatchesDenseMatrix)
{
    prop::for_all(50, 57, [](prop::Gen& g) {
        std::size_t const d = g.size(1, 3), n = g.size(2, 4);
        auto const c = random_component(g, d * n);
        std::size_t const i = g.size(0, n - 2), j = g.size(i + 1, n - 1);
        PairCollision const pc(i, j, g.angle(d));
        Eigen::MatrixXd const M = collision_matrix_dense(pc, n, d);
        auto const out = propagate_component_internal(c, pc);
        EXPECT_LT((out.mean - M * c.mean).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((out.covariance - M * c.covariance * M.transpose()).cwiseAbs().maxCoeff(), 1e-11);
    });
}

TEST(Propagation, ThermostatMatchesLinearMap)
{
    prop::for_all(50, 59, [](prop::Gen& g) {
        std::size_t const d = g.size(1, 3), n = g.size(1, 4);
        double const beta = g.real(0.3, 3.0);
        auto const c = random_component(g, d * n);
        std::size_t const j = g.size(0, n - 1);
        auto const sigma = g.angle(d);
        // v -> A v + B w with w ~ N(0, I/beta).
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(d * n, d * n);
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(d * n, d);
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b)
            {
                A(j * d + a, j * d + b) -= sigma[a] * sigma[b];
                B(j * d + a, b) = sigma[a] * sigma[b];
            }
        auto const out = propagate_component_thermostat(c, j, sigma, beta);
        EXPECT_LT((out.mean - A * c.mean).cwiseAbs().maxCoeff(), 1e-12);
        Eigen::MatrixXd const cov = A * c.covariance * A.transpose() + B * B.transpose() / beta;
        EXPECT_LT((out.covariance - cov).cwiseAbs().maxCoeff(), 1e-11);
    });
}

TEST(Propagation, MaxwellianIsFixed)
{
    Rng rng(4);
    auto c = GaussianComponent::isotropic(6, 0.5);
    for (int k = 0; k < 20; ++k)
        c = propagate_component_thermostat(c, k % 2, sample_scattering_angle(3, rng), 2.0);
    EXPECT_LT((c.covariance - 0.5 * Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(MixtureMC, SingleComponentMatchesClosedForm)
{
    Eigen::VectorXd m(3);
    m << 0.5, -0.2, 0.1;
    Eigen::MatrixXd S(3, 3);
    S << 1.2, 0.3, 0.0, 0.3, 0.8, 0.1, 0.0, 0.1, 0.6;
    GaussianMixtureState s{{1.0}, {GaussianComponent{m, S}}, 1.5};
    auto const r = mixture_functionals_mc(s, 40000, 3);
    EXPECT_LT(std::abs(r.entropy.value - entropy_gaussian(s.components[0], 1.5)) / r.entropy.std_error, 5.0);
    EXPECT_LT(std::abs(r.information.value - fisher_info_gaussian(s.components[0], 1.5)) / r.information.std_error,
              5.0);
    EXPECT_EQ(r.entropy.n_samples, 40000u);
    EXPECT_EQ(r.entropy.rejected, 0u);
}

TEST(MixtureMC, SeparateAndSharedAgree)
{
    GaussianMixtureState s{{0.3, 0.7},
                           {GaussianComponent::isotropic(2, 0.5), GaussianComponent::isotropic(Eigen::Vector2d(1, 0), 2.0)},
                           1.0};
    auto const both = mixture_functionals_mc(s, 5000, 8);
    auto const h = entropy_mixture_mc(s, 5000, 8);
    auto const i = fisher_info_mixture_mc(s, 5000, 8);
    EXPECT_LT(std::abs(both.entropy.value - h.value), 6 * h.std_error);
    EXPECT_LT(std::abs(both.information.value - i.value), 6 * i.std_error);
}

TEST(MixtureMC, IndependentOfWorkers)
{
    GaussianMixtureState s{{0.5, 0.5},
                           {GaussianComponent::isotropic(2, 0.5), GaussianComponent::isotropic(2, 2.0)},
                           1.0};
    MixtureOptions three;
    three.workers = 3;
    auto const a = mixture_functionals_mc(s, 3000, 6);
    auto const b = mixture_functionals_mc(s, 3000, 6, three);
    EXPECT_EQ(a.entropy.value, b.entropy.value);
    EXPECT_EQ(a.information.value, b.information.value);
    EXPECT_EQ(a.information.std_error, b.information.std_error);
}

TEST(MixtureMC, IllConditionedComponentRejected)
{
    Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(2, 2);
    bad(1, 1) = 1e-14;
    GaussianMixtureState s{{0.5, 0.5}, {GaussianComponent::isotropic(2, 1.0), GaussianComponent{Eigen::VectorXd::Zero(2), bad}}, 1.0};
    auto const r = entropy_mixture_mc(s, 2000, 1);
    EXPECT_EQ(r.rejected, 1u);
    EXPECT_NEAR(r.value, 0.0, 1e-12);
}

TEST(MixtureMC, LogDensitySingleComponent)
{
    auto const c = GaussianComponent::isotropic(Eigen::Vector2d(1.0, -1.0), 2.0);
    GaussianMixtureState s{{1.0}, {c}, 1.0};
    Eigen::Vector2d v(0.5, 0.5);
    double const expect = -std::log(2 * std::numbers::pi * 2.0) - (0.25 + 2.25) / 4.0;
    EXPECT_NEAR(mixture_log_density(s, v), expect, 1e-14);
}

TEST(HistoryMixture, ThermostatEnergyFollowsClosedForm)
{
    ThermostatParams p{2, 3, 1.0, 1.0, 1.0};
    auto const init = GaussianComponent::isotropic(6, 2.0);  // E0 = 6
    auto const mix = thermostat_mixture(init, p, 1.5, 3000, 21);
    ASSERT_EQ(mix.components.size(), 3000u);
    EXPECT_NO_THROW(mix.validate());
    double sum = 0.0, sum2 = 0.0;
    for (auto const& c : mix.components)
    {
        double const e = kinetic_energy(c);
        sum += e;
        sum2 += e * e;
    }
    double const n = 3000.0;
    double const mean = sum / n;
    double const se = std::sqrt((sum2 / n - mean * mean) / (n - 1));
    double const expect = 3.0 + 3.0 * std::exp(-1.5 / 2.0);
    EXPECT_LT(std::abs(mean - expect), 5 * se + 1e-12);
}

TEST(HistoryMixture, IndependentOfWorkersAndShape)
{
    ThermostatParams p{2, 2, 1.0, 1.0, 1.0};
    auto const init = GaussianComponent::isotropic(4, 2.0);
    auto const a = thermostat_mixture(init, p, 1.0, 100, 3, 1);
    auto const b = thermostat_mixture(init, p, 1.0, 100, 3, 3);
    for (std::size_t k = 0; k < 100; ++k)
        EXPECT_EQ((a.components[k].covariance - b.components[k].covariance).cwiseAbs().maxCoeff(), 0.0);

    ReservoirParams r{2, 2, 3, 1.0, 1.0, 1.0, 1.0};
    auto const m = reservoir_mixture(init, r, 1.0, 50, 4);
    EXPECT_EQ(m.dim(), 4u);
    EXPECT_NO_THROW(m.validate());
    EXPECT_THROW(thermostat_mixture(GaussianComponent::isotropic(3, 1.0), p, 1.0, 10, 1), std::invalid_argument);
}
