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
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kac/random.hpp"

namespace kac {

//! Unit vector on S^{d-1} parameterizing a reflection collision.
class ScatteringAngle
{
  public:
    //! Throws std::invalid_argument unless |sigma| = 1 within 1e-12.
    explicit ScatteringAngle(std::vector<double> sigma);

    std::size_t dim() const { return sigma_.size(); }
    std::span<double const> components() const { return sigma_; }
    double operator[](std::size_t k) const { return sigma_[k]; }

  private:
    std::vector<double> sigma_;
};

/*!
 * Scattering measure rho: writes one unit vector into `out`.
 *
 * Any measure with E[sigma (x) sigma] = Identity / d generates the same
 * process; uniform_sphere is the default, coordinate_axis is a discrete
 * alternative kept for cross-checking that claim.
 */
using AngleSampler = std::function<void(Rng&, std::span<double>)>;

void uniform_sphere(Rng& rng, std::span<double> out);
void coordinate_axis(Rng& rng, std::span<double> out);

ScatteringAngle sample_scattering_angle(std::size_t d, Rng& rng);
ScatteringAngle sample_scattering_angle(std::size_t d, Rng& rng, AngleSampler const& sampler);

//! Velocities of n particles in R^d, stored particle-major.
class MasterState
{
  public:
    MasterState(std::size_t dim, std::size_t n_particles);
    MasterState(std::size_t dim, std::size_t n_particles, std::vector<double> velocities);

    std::size_t dim() const { return dim_; }
    std::size_t n_particles() const { return n_; }
    std::size_t size() const { return v_.size(); }

    std::span<double> particle(std::size_t i) { return {v_.data() + i * dim_, dim_}; }
    std::span<double const> particle(std::size_t i) const { return {v_.data() + i * dim_, dim_}; }
    std::span<double> velocities() { return v_; }
    std::span<double const> velocities() const { return v_; }

  private:
    std::size_t dim_;
    std::size_t n_;
    std::vector<double> v_;
};

struct PairCollision
{
    //! Throws std::invalid_argument unless i < j.
    PairCollision(std::size_t i, std::size_t j, ScatteringAngle sigma);

    std::size_t i;
    std::size_t j;
    ScatteringAngle sigma;
};

//! In-place reflection map on two d-blocks; the hot-path kernel.
inline void reflect(std::span<double> v, std::span<double> w, std::span<double const> sigma)
{
    double proj = 0.0;
    for (std::size_t k = 0; k < sigma.size(); ++k)
        proj += sigma[k] * (v[k] - w[k]);
    for (std::size_t k = 0; k < sigma.size(); ++k)
    {
        double const step = proj * sigma[k];
        v[k] -= step;
        w[k] += step;
    }
}

//! v* = v - (sigma.(v-w)) sigma, w* = w + (sigma.(v-w)) sigma.
std::pair<std::vector<double>, std::vector<double>>
apply_reflection(std::span<double const> v, std::span<double const> w, ScatteringAngle const& sigma);

//! Reflection on blocks (i, j) of the state; other blocks untouched.
MasterState apply_pair_collision(MasterState state, PairCollision const& c);
void collide_in_place(MasterState& state, std::size_t i, std::size_t j, std::span<double const> sigma);

inline constexpr std::size_t kDefaultDenseCap = 64;

/*!
 * Dense (d n) x (d n) collision matrix: identity except the (i,i), (i,j),
 * (j,i), (j,j) blocks, which hold 1 - s(x)s, s(x)s, s(x)s, 1 - s(x)s.
 * Throws std::length_error if d n exceeds `max_size`.
 */
Eigen::MatrixXd collision_matrix_dense(PairCollision const& c, std::size_t n_particles, std::size_t d,
                                       std::size_t max_size = kDefaultDenseCap);

} // namespace kac
