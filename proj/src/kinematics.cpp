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

#include "kac/kinematics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace kac {

ScatteringAngle::ScatteringAngle(std::vector<double> sigma) : sigma_(std::move(sigma))
{
    if (sigma_.empty())
        throw std::invalid_argument("ScatteringAngle: dimension must be positive");
    double norm2 = 0.0;
    for (double s : sigma_)
    {
        if (!std::isfinite(s))
            throw std::invalid_argument("ScatteringAngle: non-finite component");
        norm2 += s * s;
    }
    if (std::abs(std::sqrt(norm2) - 1.0) > 1e-12)
        throw std::invalid_argument("ScatteringAngle: not a unit vector");
}

void uniform_sphere(Rng& rng, std::span<double> out)
{
    if (out.size() == 1)
    {
        out[0] = (rng.bits() & 1u) ? 1.0 : -1.0;
        return;
    }
    double norm2 = 0.0;
    do
    {
        norm2 = 0.0;
        for (double& x : out)
        {
            x = rng.normal();
            norm2 += x * x;
        }
    } while (norm2 < 1e-300);
    double const inv = 1.0 / std::sqrt(norm2);
    for (double& x : out)
        x *= inv;
}

void coordinate_axis(Rng& rng, std::span<double> out)
{
    for (double& x : out)
        x = 0.0;
    out[rng.index(out.size())] = (rng.bits() & 1u) ? 1.0 : -1.0;
}

ScatteringAngle sample_scattering_angle(std::size_t d, Rng& rng)
{
    return sample_scattering_angle(d, rng, uniform_sphere);
}

ScatteringAngle sample_scattering_angle(std::size_t d, Rng& rng, AngleSampler const& sampler)
{
    if (d == 0)
        throw std::invalid_argument("sample_scattering_angle: d must be >= 1");
    std::vector<double> sigma(d);
    sampler(rng, sigma);
    return ScatteringAngle(std::move(sigma));
}

MasterState::MasterState(std::size_t dim, std::size_t n_particles)
    : MasterState(dim, n_particles, std::vector<double>(dim * n_particles, 0.0))
{
}

MasterState::MasterState(std::size_t dim, std::size_t n_particles, std::vector<double> velocities)
    : dim_(dim), n_(n_particles), v_(std::move(velocities))
{
    if (dim_ == 0 || n_ == 0)
        throw std::invalid_argument("MasterState: dimension and particle count must be positive");
    if (v_.size() != dim_ * n_)
        throw std::invalid_argument("MasterState: expected " + std::to_string(dim_ * n_) +
                                    " velocity components, got " + std::to_string(v_.size()));
    for (double x : v_)
        if (!std::isfinite(x))
            throw std::invalid_argument("MasterState: non-finite velocity component");
}

PairCollision::PairCollision(std::size_t i_, std::size_t j_, ScatteringAngle sigma_)
    : i(i_), j(j_), sigma(std::move(sigma_))
{
    if (i >= j)
        throw std::invalid_argument("PairCollision: requires i < j");
}

std::pair<std::vector<double>, std::vector<double>>
apply_reflection(std::span<double const> v, std::span<double const> w, ScatteringAngle const& sigma)
{
    if (v.size() != sigma.dim() || w.size() != sigma.dim())
        throw std::invalid_argument("apply_reflection: dimension mismatch");
    std::vector<double> vs(v.begin(), v.end());
    std::vector<double> ws(w.begin(), w.end());
    reflect(vs, ws, sigma.components());
    return {std::move(vs), std::move(ws)};
}

void collide_in_place(MasterState& state, std::size_t i, std::size_t j, std::span<double const> sigma)
{
    if (i >= state.n_particles() || j >= state.n_particles())
        throw std::out_of_range("collision index out of range");
    if (i == j)
        throw std::invalid_argument("collision requires distinct particles");
    if (sigma.size() != state.dim())
        throw std::invalid_argument("collision: angle dimension mismatch");
    reflect(state.particle(i), state.particle(j), sigma);
}

MasterState apply_pair_collision(MasterState state, PairCollision const& c)
{
    collide_in_place(state, c.i, c.j, c.sigma.components());
    return state;
}

Eigen::MatrixXd collision_matrix_dense(PairCollision const& c, std::size_t n_particles, std::size_t d,
                                       std::size_t max_size)
{
    std::size_t const n = n_particles * d;
    if (n > max_size)
        throw std::length_error("collision_matrix_dense: size " + std::to_string(n) + " exceeds cap " +
                                std::to_string(max_size));
    if (c.j >= n_particles)
        throw std::out_of_range("collision_matrix_dense: index out of range");
    if (c.sigma.dim() != d)
        throw std::invalid_argument("collision_matrix_dense: angle dimension mismatch");

    Eigen::Map<Eigen::VectorXd const> s(c.sigma.components().data(), static_cast<Eigen::Index>(d));
    Eigen::MatrixXd const ss = s * s.transpose();
    auto const dd = static_cast<Eigen::Index>(d);
    auto const bi = static_cast<Eigen::Index>(c.i * d);
    auto const bj = static_cast<Eigen::Index>(c.j * d);

    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    m.block(bi, bi, dd, dd) -= ss;
    m.block(bj, bj, dd, dd) -= ss;
    m.block(bi, bj, dd, dd) = ss;
    m.block(bj, bi, dd, dd) = ss;
    return m;
}

} // namespace kac
