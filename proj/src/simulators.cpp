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

#include "kac/simulators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "kac/parallel.hpp"
#include "kac/stats.hpp"

namespace kac {
namespace {

constexpr std::uint64_t kTrajectoryTag = 0x7472616a6563ull;

struct Scratch
{
    explicit Scratch(std::size_t d) : sigma(d), partner(d) {}
    std::vector<double> sigma;
    std::vector<double> partner;
};

std::pair<std::size_t, std::size_t> distinct_pair(Rng& rng, std::size_t offset, std::size_t n)
{
    auto i = static_cast<std::size_t>(rng.index(n));
    auto j = static_cast<std::size_t>(rng.index(n - 1));
    if (j >= i)
        ++j;
    if (i > j)
        std::swap(i, j);
    return {offset + i, offset + j};
}

EventKind thermostat_event(MasterState& state, ThermostatParams const& p, Rng& rng, AngleSampler const& sampler,
                           Scratch& s)
{
    double const lam = p.internal_rate();
    if (rng.uniform() * (lam + p.mu) < lam)
    {
        auto const [i, j] = distinct_pair(rng, 0, p.N);
        sampler(rng, s.sigma);
        reflect(state.particle(i), state.particle(j), s.sigma);
        return EventKind::internal;
    }
    auto const j = static_cast<std::size_t>(rng.index(p.N));
    double const scale = 1.0 / std::sqrt(p.beta);
    for (double& w : s.partner)
        w = scale * rng.normal();
    sampler(rng, s.sigma);
    // The partner leaves with the thermostat; only the Kac particle is kept.
    reflect(state.particle(j), s.partner, s.sigma);
    return EventKind::thermostat;
}

EventKind reservoir_event(MasterState& state, ReservoirParams const& p, Rng& rng, AngleSampler const& sampler,
                          Scratch& s)
{
    auto const rates = p.class_rates();
    double const u = rng.uniform() * (rates[0] + rates[1] + rates[2]);

    std::size_t i = 0;
    std::size_t j = 0;
    EventKind kind;
    if (u < rates[0])
    {
        std::tie(i, j) = distinct_pair(rng, 0, p.N);
        kind = EventKind::system_pair;
    }
    else if (u < rates[0] + rates[1])
    {
        std::tie(i, j) = distinct_pair(rng, p.N, p.M);
        kind = EventKind::reservoir_pair;
    }
    else
    {
        i = static_cast<std::size_t>(rng.index(p.N));
        j = p.N + static_cast<std::size_t>(rng.index(p.M));
        kind = EventKind::cross;
    }
    sampler(rng, s.sigma);
    reflect(state.particle(i), state.particle(j), s.sigma);
    return kind;
}

// Waiting time first, then the event: the order of draws is part of the
// reproducibility contract.
template <class Params, class EventFn>
Step step_with(MasterState& state, Params const& p, Rng& rng, AngleSampler const& sampler, Scratch& s,
               EventFn event)
{
    double const rate = p.total_rate();
    if (!(rate > 0.0))
        return {std::numeric_limits<double>::infinity(), EventKind::none};
    double const dt = rng.exponential(rate);
    return {dt, event(state, p, rng, sampler, s)};
}

void check_rate(double value, char const* name)
{
    if (!(value >= 0.0) || !std::isfinite(value))
        throw std::invalid_argument(std::string(name) + " must be a finite non-negative rate");
}

void validate_grid(double t_end, std::vector<double> const& grid)
{
    if (!(t_end >= 0.0) || !std::isfinite(t_end))
        throw std::invalid_argument("simulate: t_end must be finite and non-negative");
    for (std::size_t k = 0; k < grid.size(); ++k)
    {
        if (!(grid[k] >= 0.0) || grid[k] > t_end)
            throw std::invalid_argument("simulate: record time outside [0, t_end]");
        if (k > 0 && !(grid[k] > grid[k - 1]))
            throw std::invalid_argument("simulate: record times must be strictly increasing");
    }
}

double total_energy(MasterState const& state)
{
    double e = 0.0;
    for (double x : state.velocities())
        e += x * x;
    return 0.5 * e;
}

// Per-block accumulators, one RunningStats per (observable, grid point).
struct BlockStats
{
    BlockStats(std::size_t n_times, std::size_t d, bool reservoir)
        : energy_system(n_times), energy_reservoir(reservoir ? n_times : 0), momentum(d, std::vector<RunningStats>(n_times))
    {
    }
    std::vector<RunningStats> energy_system;
    std::vector<RunningStats> energy_reservoir;
    std::vector<std::vector<RunningStats>> momentum;
    std::uint64_t n_events = 0;
    double max_drift = 0.0;

    void merge(BlockStats const& o)
    {
        for (std::size_t k = 0; k < energy_system.size(); ++k)
            energy_system[k].merge(o.energy_system[k]);
        for (std::size_t k = 0; k < energy_reservoir.size(); ++k)
            energy_reservoir[k].merge(o.energy_reservoir[k]);
        for (std::size_t c = 0; c < momentum.size(); ++c)
            for (std::size_t k = 0; k < momentum[c].size(); ++k)
                momentum[c][k].merge(o.momentum[c][k]);
        n_events += o.n_events;
        max_drift = std::max(max_drift, o.max_drift);
    }

    void push(TrajectoryRecord const& r)
    {
        for (std::size_t k = 0; k < r.times.size(); ++k)
        {
            energy_system[k].push(r.energy_system[k]);
            if (!energy_reservoir.empty())
                energy_reservoir[k].push(r.energy_reservoir[k]);
            for (std::size_t c = 0; c < momentum.size(); ++c)
                momentum[c][k].push(r.momentum[k][c]);
        }
        n_events += r.n_events;
        max_drift = std::max(max_drift, r.max_total_energy_drift);
    }
};

ObservableSeries to_series(std::vector<RunningStats> const& stats)
{
    ObservableSeries s;
    for (auto const& x : stats)
    {
        s.mean.push_back(x.mean());
        s.std_error.push_back(x.stderr_of_mean());
    }
    return s;
}

/*
 * Shared driver. `step` advances the state in place and returns the event;
 * `n_system` is the number of particles counted as the Kac system.
 */
template <class WaitFn, class EventFn>
TrajectoryRecord run_trajectory(MasterState state, std::size_t n_system, bool reservoir, double t_end,
                                std::vector<double> const& grid, bool keep_snapshots, double total_rate,
                                WaitFn&& draw_wait, EventFn&& apply_event)
{
    TrajectoryRecord rec;
    rec.times = grid;
    double const e0 = total_energy(state);

    auto record = [&] {
        auto const obs = observables(state, n_system);
        rec.energy_system.push_back(obs.system.energy);
        if (reservoir)
        {
            rec.energy_reservoir.push_back(obs.reservoir.energy);
            if (e0 > 0.0)
                rec.max_total_energy_drift =
                    std::max(rec.max_total_energy_drift, std::abs(total_energy(state) - e0) / e0);
        }
        rec.momentum.push_back(obs.system.momentum);
        if (keep_snapshots)
            rec.snapshots.push_back(state);
    };

    double t = 0.0;
    std::size_t next = 0;
    double const rate = total_rate;
    while (next < grid.size() && rate > 0.0)
    {
        double const t_event = t + draw_wait(rate);
        while (next < grid.size() && grid[next] < t_event)
        {
            record();
            ++next;
        }
        if (next == grid.size() || t_event > t_end)
            break;
        apply_event(state);
        ++rec.n_events;
        t = t_event;
    }
    while (next < grid.size())
    {
        record();
        ++next;
    }
    return rec;
}

template <class Params, class Kernel>
Ensemble run_ensemble(Params const& p, std::size_t n_total, std::size_t n_system, bool reservoir,
                      std::function<MasterState(Rng&)> const& make_initial, double t_end,
                      std::vector<double> const& grid, std::size_t n_trajectories, std::uint64_t seed,
                      SimulateOptions const& opt, Kernel kernel)
{
    validate_grid(t_end, grid);
    std::size_t const block = std::max<std::size_t>(opt.block_size, 1);
    std::size_t const n_blocks = block_count(n_trajectories, block);
    std::vector<BlockStats> partial(n_blocks, BlockStats(grid.size(), p.d, reservoir));
    std::vector<TrajectoryRecord> records(opt.keep_records ? n_trajectories : 0);

    parallel_blocks(n_trajectories, block, opt.workers, [&](std::size_t b, std::size_t begin, std::size_t end) {
        Scratch scratch(p.d);
        for (std::size_t k = begin; k < end; ++k)
        {
            Rng rng(seed, substream(kTrajectoryTag, k));
            MasterState state = make_initial(rng);
            if (state.dim() != p.d || state.n_particles() != n_total)
                throw std::invalid_argument("simulate: initial sampler produced a state of the wrong shape");
            auto rec = run_trajectory(
                std::move(state), n_system, reservoir, t_end, grid, opt.keep_snapshots, p.total_rate(),
                [&](double rate) { return rng.exponential(rate); },
                [&](MasterState& s) { return kernel(s, p, rng, opt.sampler, scratch); });
            partial[b].push(rec);
            if (opt.keep_records)
                records[k] = std::move(rec);
        }
    });

    BlockStats total(grid.size(), p.d, reservoir);
    for (auto const& b : partial)
        total.merge(b);

    Ensemble e;
    e.times = grid;
    e.energy_system = to_series(total.energy_system);
    if (reservoir)
        e.energy_reservoir = to_series(total.energy_reservoir);
    for (auto const& m : total.momentum)
        e.momentum.push_back(to_series(m));
    e.n_trajectories = n_trajectories;
    e.n_events = total.n_events;
    e.max_total_energy_drift = total.max_drift;
    e.records = std::move(records);
    return e;
}

} // namespace

void ThermostatParams::validate() const
{
    if (d == 0)
        throw std::invalid_argument("d must be >= 1");
    if (N == 0)
        throw std::invalid_argument("N must be >= 1");
    check_rate(lambda, "lambda");
    check_rate(mu, "mu");
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw std::invalid_argument("beta must be positive");
}

void ReservoirParams::validate() const
{
    if (d == 0)
        throw std::invalid_argument("d must be >= 1");
    if (N == 0)
        throw std::invalid_argument("N must be >= 1");
    if (M < 2)
        throw std::invalid_argument("M must be >= 2");
    check_rate(lambda_S, "lambda_S");
    check_rate(lambda_R, "lambda_R");
    check_rate(mu, "mu");
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw std::invalid_argument("beta must be positive");
}

std::array<double, 3> ReservoirParams::class_rates() const
{
    double const system = N > 1 ? lambda_S * static_cast<double>(N) / 2.0 : 0.0;
    return {system, lambda_R * static_cast<double>(M) / 2.0, mu * static_cast<double>(N)};
}

double ReservoirParams::total_rate() const
{
    auto const r = class_rates();
    return r[0] + r[1] + r[2];
}

Step step_thermostat_in_place(MasterState& state, ThermostatParams const& p, Rng& rng, AngleSampler const& sampler)
{
    p.validate();
    if (state.dim() != p.d || state.n_particles() != p.N)
        throw std::invalid_argument("step_thermostat: state does not match parameters");
    Scratch s(p.d);
    return step_with(state, p, rng, sampler, s, thermostat_event);
}

Step step_reservoir_in_place(MasterState& state, ReservoirParams const& p, Rng& rng, AngleSampler const& sampler)
{
    p.validate();
    if (state.dim() != p.d || state.n_particles() != p.N + p.M)
        throw std::invalid_argument("step_reservoir: state must hold N + M particles");
    Scratch s(p.d);
    return step_with(state, p, rng, sampler, s, reservoir_event);
}

StepResult step_thermostat(MasterState state, ThermostatParams const& p, Rng& rng)
{
    auto const ev = step_thermostat_in_place(state, p, rng);
    return {std::move(state), ev.dt, ev.kind};
}

StepResult step_reservoir(MasterState state, ReservoirParams const& p, Rng& rng)
{
    auto const ev = step_reservoir_in_place(state, p, rng);
    return {std::move(state), ev.dt, ev.kind};
}

Observables observables(MasterState const& state)
{
    return observables(state, state.n_particles()).system;
}

SplitObservables observables(MasterState const& state, std::size_t n_system)
{
    if (n_system > state.n_particles())
        throw std::out_of_range("observables: system block larger than state");
    std::size_t const d = state.dim();
    SplitObservables out;
    out.system.momentum.assign(d, 0.0);
    out.reservoir.momentum.assign(d, 0.0);
    for (std::size_t i = 0; i < state.n_particles(); ++i)
    {
        Observables& o = i < n_system ? out.system : out.reservoir;
        auto const v = state.particle(i);
        for (std::size_t k = 0; k < d; ++k)
        {
            o.energy += 0.5 * v[k] * v[k];
            o.momentum[k] += v[k];
        }
    }
    return out;
}

InitialSampler point_mass(MasterState state)
{
    return [state = std::move(state)](Rng&) { return state; };
}

InitialSampler isotropic_gaussian(std::size_t d, std::size_t n, double beta0, std::vector<double> drift)
{
    if (!(beta0 > 0.0))
        throw std::invalid_argument("isotropic_gaussian: beta0 must be positive");
    if (drift.empty())
        drift.assign(d, 0.0);
    if (drift.size() != d)
        throw std::invalid_argument("isotropic_gaussian: drift must have d components");
    return [d, n, beta0, drift = std::move(drift)](Rng& rng) {
        std::vector<double> v(d * n);
        double const scale = 1.0 / std::sqrt(beta0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < d; ++k)
                v[i * d + k] = drift[k] + scale * rng.normal();
        return MasterState(d, n, std::move(v));
    };
}

InitialSampler energy_sphere(std::size_t d, std::size_t n, double energy)
{
    if (!(energy >= 0.0))
        throw std::invalid_argument("energy_sphere: energy must be non-negative");
    return [d, n, energy](Rng& rng) {
        std::vector<double> v(d * n);
        uniform_sphere(rng, v);
        double const radius = std::sqrt(2.0 * energy);
        for (double& x : v)
            x *= radius;
        return MasterState(d, n, std::move(v));
    };
}

Ensemble simulate(ThermostatParams const& p, InitialSampler const& initial, double t_end,
                  std::vector<double> const& record_times, std::size_t n_trajectories, std::uint64_t seed,
                  SimulateOptions const& options)
{
    p.validate();
    return run_ensemble(p, p.N, p.N, false, initial, t_end, record_times, n_trajectories, seed, options,
                        thermostat_event);
}

Ensemble simulate(ReservoirParams const& p, InitialSampler const& initial, double t_end,
                  std::vector<double> const& record_times, std::size_t n_trajectories, std::uint64_t seed,
                  SimulateOptions const& options)
{
    p.validate();
    auto reservoir_bath = isotropic_gaussian(p.d, p.M, p.beta);
    auto full_initial = [&](Rng& rng) {
        MasterState system = initial(rng);
        if (system.dim() != p.d || system.n_particles() != p.N)
            throw std::invalid_argument("simulate: initial sampler must produce the N system particles");
        MasterState bath = reservoir_bath(rng);
        std::vector<double> v(system.velocities().begin(), system.velocities().end());
        v.insert(v.end(), bath.velocities().begin(), bath.velocities().end());
        return MasterState(p.d, p.N + p.M, std::move(v));
    };
    return run_ensemble(p, p.N + p.M, p.N, true, full_initial, t_end, record_times, n_trajectories, seed,
                        options, reservoir_event);
}

std::vector<double> uniform_grid(double t_end, std::size_t n_intervals)
{
    if (n_intervals == 0)
        throw std::invalid_argument("uniform_grid: need at least one interval");
    std::vector<double> g(n_intervals + 1);
    for (std::size_t k = 0; k <= n_intervals; ++k)
        g[k] = t_end * static_cast<double>(k) / static_cast<double>(n_intervals);
    return g;
}

} // namespace kac
