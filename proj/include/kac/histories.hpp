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

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kac/kinematics.hpp"
#include "kac/simulators.hpp"

namespace kac {

// Collision-history expansion of the reservoir semigroup:
//
//   e^{Lt} = e^{-Lambda t} sum_k (Lambda t)^k / k! sum_{alpha in I^k} lambda^alpha R^alpha
//
// Particles are numbered 0..N+M-1 (system first); a pair (i, j) has i < j.

enum class PairClass : std::uint8_t
{
    system,
    reservoir,
    cross,
};

struct ParticlePair
{
    std::size_t i;
    std::size_t j;
};

//! Throws std::invalid_argument for i >= j or j >= N + M.
PairClass classify(ParticlePair pair, ReservoirParams const& p);

/*!
 * Convex weight of one pair: lambda_S / (Lambda (N-1)), lambda_R /
 * (Lambda (M-1)) or mu / (Lambda M) depending on its class. The weights of
 * all (N+M choose 2) pairs sum to one.
 */
double lambda_alpha(ParticlePair pair, ReservoirParams const& p);

//! Probability that a single history step falls in each class.
std::array<double, 3> class_probabilities(ReservoirParams const& p);

struct HistoryTerm
{
    std::vector<ParticlePair> alphas;
    std::vector<ScatteringAngle> sigmas;

    std::size_t length() const { return alphas.size(); }
};

//! k i.i.d. pairs with law lambda_alpha and k i.i.d. angles from `sampler`.
HistoryTerm sample_history(std::size_t k, ReservoirParams const& p, Rng& rng,
                           AngleSampler const& sampler = uniform_sphere);

/*!
 * Top-left dN x dN block of M_k ... M_1 for the history's collision
 * matrices, built by pushing the first dN basis vectors through the sparse
 * block updates. Throws std::length_error if d (N+M) exceeds max_size.
 */
Eigen::MatrixXd block_A(HistoryTerm const& h, ReservoirParams const& p, std::size_t max_size = kDefaultDenseCap);

//! Scalar c(t) with K = c(t) Identity on the system block.
struct KCoefficient
{
    double value;
};

//! c(t) = N/(N+M) + M/(N+M) exp(-mu (N+M) t / (d M)).
KCoefficient k_coefficient_analytic(double t, ReservoirParams const& p);

//! P(K > k_max) for K ~ Poisson(mean).
double poisson_tail(double mean, std::size_t k_max);
//! Smallest k_max with P(K > k_max) < tail_tol.
std::size_t poisson_truncation(double mean, double tail_tol = 1e-6);

struct KEstimate
{
    double t = 0.0;
    double c_mc = 0.0;
    double std_error = 0.0;
    //! Frobenius norm of the off-diagonal part of the averaged A^T A.
    double isotropy_residual = 0.0;
    //! Noise level of that norm under exact isotropy, sqrt(sum of entry variances).
    double isotropy_stderr = 0.0;
    //! Largest |entry| / stderr over the off-diagonal entries.
    double isotropy_max_z = 0.0;
    std::size_t k_max = 0;
    std::size_t n_samples = 0;
    Eigen::MatrixXd mean_matrix;
};

/*!
 * Monte Carlo estimate of c(t) = (1/dN) tr K over histories with
 * k ~ Poisson(Lambda t) truncated at k_max. Throws std::invalid_argument if
 * the Poisson mass beyond k_max is not below 1e-6.
 */
KEstimate k_coefficient_mc(double t, ReservoirParams const& p, std::size_t n_samples, std::size_t k_max,
                           std::uint64_t seed, std::size_t workers = 1);

//! One-step map on the diagonal coefficients (m1, m2) of L(m1, m2).
struct PMatrix
{
    Eigen::Matrix2d matrix;

    static PMatrix from(ReservoirParams const& p);
    //! 1 and 1 - mu (N+M) / (d Lambda M).
    std::array<double, 2> eigenvalues_analytic() const { return eigenvalues_; }
    //! First component of P^k (1, 0)^T in closed form.
    double first_component_power(std::size_t k) const;

  private:
    std::array<double, 2> eigenvalues_{};
    double weight_system_ = 0.0;  // N / (N+M)
};

/*!
 * sigma-averaged update of (m1, m2) under a single collision of the given
 * class: system and reservoir pairs leave it unchanged, a cross pair maps it
 * to (m1 - (m1 - m2)/d, m2 - (m2 - m1)/d) on the two colliding blocks.
 */
std::pair<double, double> single_step_update(double m1, double m2, PairClass cls, ReservoirParams const& p);

//! lambda_alpha-weighted aggregate of single_step_update over every pair,
//! read off at one system block and one reservoir block.
std::pair<double, double> aggregate_step(double m1, double m2, ReservoirParams const& p);

} // namespace kac
