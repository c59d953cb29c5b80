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
#include <functional>
#include <optional>
#include <vector>

#include "kac/kinematics.hpp"
#include "kac/random.hpp"

namespace kac {

//! Kac system of N particles coupled to a thermostat at inverse temperature beta.
struct ThermostatParams
{
    std::size_t d = 3;
    std::size_t N = 1;
    double lambda = 0.0;  //!< internal collision rate per particle
    double mu = 1.0;      //!< thermostat collision rate per particle
    double beta = 1.0;

    void validate() const;
    //! lambda when N > 1, zero otherwise (Q is the identity for N = 1).
    double internal_rate() const { return N > 1 ? lambda : 0.0; }
    double total_rate() const { return (internal_rate() + mu) * static_cast<double>(N); }
};

//! Kac system of N particles coupled to a finite reservoir of M particles.
struct ReservoirParams
{
    std::size_t d = 3;
    std::size_t N = 1;
    std::size_t M = 2;
    double lambda_S = 0.0;
    double lambda_R = 0.0;
    double mu = 1.0;
    double beta = 1.0;  //!< initial reservoir inverse temperature

    void validate() const;
    std::size_t total_particles() const { return N + M; }
    //! Class rates lambda_S N/2, lambda_R M/2, mu N (system class empty for N = 1).
    std::array<double, 3> class_rates() const;
    //! Lambda = lambda_S N/2 + lambda_R M/2 + mu N.
    double total_rate() const;
};

enum class EventKind : std::uint8_t
{
    none,        //!< zero total rate; dt is +inf
    internal,    //!< pair inside the Kac system (thermostat model)
    thermostat,  //!< Kac particle against a fresh Maxwellian partner
    system_pair,
    reservoir_pair,
    cross,
};

struct Step
{
    double dt;
    EventKind kind;
};

struct StepResult
{
    MasterState state;
    double dt;
    EventKind kind;
};

// In-place stepping used by the ensemble driver. A zero total rate leaves
// the state untouched and returns dt = +inf.
Step step_thermostat_in_place(MasterState& state, ThermostatParams const& p, Rng& rng,
                              AngleSampler const& sampler = uniform_sphere);
Step step_reservoir_in_place(MasterState& state, ReservoirParams const& p, Rng& rng,
                             AngleSampler const& sampler = uniform_sphere);

StepResult step_thermostat(MasterState state, ThermostatParams const& p, Rng& rng);
StepResult step_reservoir(MasterState state, ReservoirParams const& p, Rng& rng);

struct Observables
{
    double energy = 0.0;
    std::vector<double> momentum;
};

struct SplitObservables
{
    Observables system;
    Observables reservoir;
};

//! E = |v|^2 / 2 over all particles, momentum = sum of velocities.
Observables observables(MasterState const& state);
//! Same, split into particles [0, n_system) and the rest.
SplitObservables observables(MasterState const& state, std::size_t n_system);

using InitialSampler = std::function<MasterState(Rng&)>;

InitialSampler point_mass(MasterState state);
//! Independent N(drift, I / beta0) velocities for every particle.
InitialSampler isotropic_gaussian(std::size_t d, std::size_t n, double beta0, std::vector<double> drift = {});
//! Uniform on the sphere |v|^2 = 2 energy in R^{d n}.
InitialSampler energy_sphere(std::size_t d, std::size_t n, double energy);

struct TrajectoryRecord
{
    std::vector<double> times;
    std::vector<double> energy_system;
    std::vector<double> energy_reservoir;  //!< empty for the thermostat model
    std::vector<std::vector<double>> momentum;
    std::vector<MasterState> snapshots;  //!< filled only on request
    std::uint64_t n_events = 0;
    double max_total_energy_drift = 0.0;  //!< relative, reservoir model only
};

struct ObservableSeries
{
    std::vector<double> mean;
    std::vector<double> std_error;
};

struct Ensemble
{
    std::vector<double> times;
    ObservableSeries energy_system;
    ObservableSeries energy_reservoir;  //!< empty for the thermostat model
    std::vector<ObservableSeries> momentum;  //!< one series per component
    std::size_t n_trajectories = 0;
    std::uint64_t n_events = 0;
    double max_total_energy_drift = 0.0;
    std::vector<TrajectoryRecord> records;  //!< filled only on request
};

struct SimulateOptions
{
    std::size_t workers = 1;
    std::size_t block_size = 64;
    bool keep_records = false;
    bool keep_snapshots = false;
    AngleSampler sampler = uniform_sphere;
};

/*!
 * Run n_trajectories independent trajectories on [0, t_end] and average
 * the observables on `record_times`.
 *
 * Trajectory k draws from the Philox stream (seed, substream(k)); the
 * recorded value at a grid time is the state after every event at or
 * before it. Throws std::invalid_argument on an unsorted grid, grid points
 * outside [0, t_end], or negative t_end.
 */
Ensemble simulate(ThermostatParams const& p, InitialSampler const& initial, double t_end,
                  std::vector<double> const& record_times, std::size_t n_trajectories, std::uint64_t seed,
                  SimulateOptions const& options = {});

//! Reservoir model: `initial` samples the N system particles, the M
//! reservoir particles are drawn from Maxwellian(beta).
Ensemble simulate(ReservoirParams const& p, InitialSampler const& initial, double t_end,
                  std::vector<double> const& record_times, std::size_t n_trajectories, std::uint64_t seed,
                  SimulateOptions const& options = {});

std::vector<double> uniform_grid(double t_end, std::size_t n_intervals);

} // namespace kac
