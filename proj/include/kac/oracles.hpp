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
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kac/kinematics.hpp"
#include "kac/simulators.hpp"

namespace kac {

enum class CollisionKind
{
    thermostat,  //!< partner ~ Maxwellian(beta), discarded
    cross,       //!< system particle against a reservoir particle
    internal,    //!< two particles of the same system
};

/*!
 * sigma- and partner-averaged moments of the outgoing velocity v*:
 *   E|v*|^2 = energy_self |v|^2 + energy_partner |w|^2 + energy_const
 *   E v*    = momentum_self v + momentum_partner w
 * For the thermostat the partner is integrated out, so the partner terms
 * are zero and the Maxwellian contributes energy_const.
 */
struct MomentCoefficients
{
    double energy_self = 0.0;
    double energy_partner = 0.0;
    double energy_const = 0.0;
    double momentum_self = 0.0;
    double momentum_partner = 0.0;
};

//! Closed form by expanding the reflection map with E[(s.a)(s.b)] = a.b / d.
MomentCoefficients one_collision_moment(std::size_t d, double beta, CollisionKind which);

struct MomentCrossCheck
{
    MomentCoefficients symbolic;
    double max_z = 0.0;  //!< largest |MC - symbolic| / stderr over all probes
    std::size_t n_samples = 0;
};

class OracleMismatchError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/*!
 * Monte Carlo average of |v*|^2 and v* over sigma (and the partner) at a
 * few random probe velocities, compared with one_collision_moment. Throws
 * OracleMismatchError when any probe disagrees by more than `fail_z`
 * standard errors.
 */
MomentCrossCheck one_collision_moment_mc(std::size_t d, double beta, CollisionKind which, std::size_t n_samples,
                                         std::uint64_t seed, AngleSampler const& sampler = uniform_sphere,
                                         double fail_z = 4.0);

/*!
 * Linear moment equations dx/dt = -rate x + source with closed-form
 * solution (dimension 1 or 2, real spectrum).
 */
struct MomentODE
{
    Eigen::MatrixXd rate;
    Eigen::VectorXd source;
    std::vector<std::string> names;

    std::size_t size() const { return static_cast<std::size_t>(source.size()); }
    Eigen::VectorXd solve(Eigen::VectorXd const& x0, double t) const;
    //! t -> infinity limit from x0; throws if a zero mode is driven by the source.
    Eigen::VectorXd stationary(Eigen::VectorXd const& x0) const;
    //! Solution of rate x = source; throws if rate is singular.
    Eigen::VectorXd equilibrium() const;
    //! Eigenvalues of `rate`, ascending.
    std::vector<double> decay_rates() const;
};

enum class MomentKind
{
    energy,
    momentum,  //!< one Cartesian component
};

//! Thermostat: [E] or [p_k]; internal collisions drop out.
MomentODE moment_ode(ThermostatParams const& p, MomentKind kind);
//! Reservoir: [E_S, E_R] or [p_S,k, p_R,k].
MomentODE moment_ode(ReservoirParams const& p, MomentKind kind);

// Energy curves with rate mu/(2d) and a doubled equilibrium. Emitted next to
// the moment-ODE solution for comparison; never used as an oracle.
double thermostat_energy_as_printed(ThermostatParams const& p, double e0, double t);
double reservoir_energy_as_printed(ReservoirParams const& p, double es0, double e_total, double t);

struct EnvelopeParams
{
    std::size_t d = 1;
    std::size_t N = 1;
    std::size_t M = 2;
    double mu = 1.0;
};

//! c(t) = floor + (1 - floor) exp(-rate t).
struct DecayEnvelope
{
    std::string id;
    std::string provenance;
    double rate = 0.0;
    double floor = 0.0;

    double operator()(double t) const;
};

/*!
 * Known ids: thermostat-information, thermostat-entropy,
 * reservoir-information, reservoir-entropy, classic-kac,
 * classic-kac-as-printed. Throws std::invalid_argument otherwise.
 * classic-kac uses mu = 2M / (N+M-1) in the reservoir envelope; the
 * as-printed variant uses the exponent 2 (N+M) / (N+M-1) with no d.
 */
DecayEnvelope envelope(std::string const& id, EnvelopeParams const& p);
std::vector<std::string> envelope_ids();

//! Rates lambda_S, lambda_R, mu that turn the reservoir model into the
//! classic Kac model on N + M particles.
ReservoirParams classic_kac_params(std::size_t d, std::size_t N, std::size_t M, double beta = 1.0);

struct Rational
{
    long long num;
    long long den;
    bool operator==(Rational const& o) const { return num * o.den == o.num * den; }
};

//! mu (N+M) / (d M) with mu = 2M / (N+M-1), as an exact fraction.
Rational classic_kac_exponent(std::size_t d, std::size_t N, std::size_t M);
//! 2 (N+M) / (N+M-1).
Rational classic_kac_exponent_as_printed(std::size_t N, std::size_t M);

} // namespace kac
