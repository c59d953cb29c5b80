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

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "kac/kinematics.hpp"
#include "kac/simulators.hpp"

namespace kac {

struct GaussianComponent
{
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;

    std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
    //! Throws std::invalid_argument unless the covariance is symmetric
    //! (1e-12 relative) and Cholesky-factorizable.
    void validate() const;

    static GaussianComponent isotropic(std::size_t n, double variance);
    static GaussianComponent isotropic(Eigen::VectorXd mean, double variance);
};

struct GaussianMixtureState
{
    std::vector<double> weights;
    std::vector<GaussianComponent> components;
    double beta_ref = 1.0;

    std::size_t dim() const { return components.empty() ? 0 : components.front().dim(); }
    //! Weights non-negative and summing to one within 1e-12, components valid.
    void validate() const;
};

struct FunctionalEstimate
{
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n_samples = 0;
    std::size_t rejected = 0;  //!< components dropped by the conditioning floor
};

// mean -> M mean, covariance -> M cov M^T with M the pair collision matrix.
GaussianComponent propagate_component_internal(GaussianComponent g, PairCollision const& c);

/*!
 * Collision of particle j with a fresh Maxwellian(beta) partner that is
 * then marginalized out:
 *   v_j -> (1 - s s^T) v_j + s s^T w,   w ~ N(0, I / beta).
 * Exact for fixed sigma: the result is again Gaussian.
 */
GaussianComponent propagate_component_thermostat(GaussianComponent g, std::size_t j, ScatteringAngle const& sigma,
                                                 double beta);

//! (n/2) (beta a - 1 - ln(beta a)); relative entropy of N(0, a I_n) to gamma_beta.
double entropy_gaussian_isotropic(double a, double beta, std::size_t n);
//! n a (1/a - beta)^2; Fisher information of h = f / gamma_beta.
double fisher_info_gaussian_isotropic(double a, double beta, std::size_t n);

//! Closed forms for an arbitrary Gaussian component relative to gamma_beta.
double entropy_gaussian(GaussianComponent const& g, double beta);
double fisher_info_gaussian(GaussianComponent const& g, double beta);
//! Lebesgue Fisher information of the density itself, tr(cov^{-1}).
double fisher_info_plain_gaussian(GaussianComponent const& g);
//! E = (tr cov + |mean|^2) / 2.
double kinetic_energy(GaussianComponent const& g);

//! I_gamma(h) = I(f) + 2 beta^2 (E - d N / beta), with n_dims = d N.
double info_transform_relation(double info_f, double energy, std::size_t n_dims, double beta);

struct MixtureOptions
{
    std::size_t workers = 1;
    double condition_floor = 1e12;
};

// Monte Carlo over samples v ~ f of ln f(v) - ln gamma(v), respectively
// |grad ln f(v) + beta v|^2. Components with condition number above the
// floor are excluded (weights renormalized) and counted in `rejected`.
FunctionalEstimate entropy_mixture_mc(GaussianMixtureState const& state, std::size_t n_samples, std::uint64_t seed,
                                      MixtureOptions const& options = {});
FunctionalEstimate fisher_info_mixture_mc(GaussianMixtureState const& state, std::size_t n_samples,
                                          std::uint64_t seed, MixtureOptions const& options = {});

struct MixtureFunctionals
{
    FunctionalEstimate entropy;
    FunctionalEstimate information;
};

//! Both functionals from one shared sample set.
MixtureFunctionals mixture_functionals_mc(GaussianMixtureState const& state, std::size_t n_samples,
                                          std::uint64_t seed, MixtureOptions const& options = {});

//! Mixture log-density; exposed for quadrature cross-checks.
double mixture_log_density(GaussianMixtureState const& state, Eigen::VectorXd const& v);

/*!
 * Equal-weight mixture of n_histories exact propagations of `initial`
 * along independently sampled thermostat-model histories on [0, t].
 * The result is an unbiased sample of f_t.
 */
GaussianMixtureState thermostat_mixture(GaussianComponent const& initial, ThermostatParams const& p, double t,
                                        std::size_t n_histories, std::uint64_t seed, std::size_t workers = 1);

/*!
 * Same for the reservoir model: `initial` covers the N system particles,
 * the reservoir starts in Maxwellian(beta), and each propagated component
 * is marginalized back onto the system block.
 */
GaussianMixtureState reservoir_mixture(GaussianComponent const& initial, ReservoirParams const& p, double t,
                                       std::size_t n_histories, std::uint64_t seed, std::size_t workers = 1);

} // namespace kac
