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

#include "kac/gaussian_states.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>

#include "kac/parallel.hpp"
#include "kac/stats.hpp"

namespace kac {
namespace {

constexpr std::uint64_t kMixtureSampleTag = 0x6d69787475726573ull;
constexpr std::uint64_t kThermostatHistoryTag = 0x74686572686973ull;
constexpr std::uint64_t kReservoirHistoryTag = 0x726573686973ull;
constexpr std::size_t kSampleBlock = 512;
constexpr std::size_t kHistoryBlock = 64;

// x_i, x_j -> reflection, applied to every column of `m`.
void reflect_columns(Eigen::MatrixXd& m, std::size_t i, std::size_t j, std::span<double const> sigma)
{
    std::size_t const d = sigma.size();
    for (Eigen::Index c = 0; c < m.cols(); ++c)
    {
        double* col = m.col(c).data();
        reflect({col + i * d, d}, {col + j * d, d}, sigma);
    }
}

// x_j -> (1 - s s^T) x_j on every column.
void project_columns(Eigen::MatrixXd& m, std::size_t j, std::span<double const> sigma)
{
    std::size_t const d = sigma.size();
    for (Eigen::Index c = 0; c < m.cols(); ++c)
    {
        double* x = m.col(c).data() + j * d;
        double dot = 0.0;
        for (std::size_t k = 0; k < d; ++k)
            dot += sigma[k] * x[k];
        for (std::size_t k = 0; k < d; ++k)
            x[k] -= dot * sigma[k];
    }
}

void symmetrize(Eigen::MatrixXd& m)
{
    m = 0.5 * (m + m.transpose()).eval();
}

void check_block(GaussianComponent const& g, std::size_t d, std::size_t block, char const* who)
{
    if (d == 0 || g.dim() % d != 0)
        throw std::invalid_argument(std::string(who) + ": component dimension is not a multiple of d");
    if (block >= g.dim() / d)
        throw std::out_of_range(std::string(who) + ": particle index out of range");
}

void in_place_internal(GaussianComponent& g, std::size_t i, std::size_t j, std::span<double const> sigma)
{
    std::size_t const d = sigma.size();
    reflect({g.mean.data() + i * d, d}, {g.mean.data() + j * d, d}, sigma);
    reflect_columns(g.covariance, i, j, sigma);
    g.covariance.transposeInPlace();
    reflect_columns(g.covariance, i, j, sigma);
    symmetrize(g.covariance);
}

void in_place_thermostat(GaussianComponent& g, std::size_t j, std::span<double const> sigma, double beta)
{
    std::size_t const d = sigma.size();
    double* m = g.mean.data() + j * d;
    double dot = 0.0;
    for (std::size_t k = 0; k < d; ++k)
        dot += sigma[k] * m[k];
    for (std::size_t k = 0; k < d; ++k)
        m[k] -= dot * sigma[k];
    project_columns(g.covariance, j, sigma);
    g.covariance.transposeInPlace();
    project_columns(g.covariance, j, sigma);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b)
            g.covariance(static_cast<Eigen::Index>(j * d + a), static_cast<Eigen::Index>(j * d + b)) +=
                sigma[a] * sigma[b] / beta;
    symmetrize(g.covariance);
}

struct Prepared
{
    double weight;
    Eigen::VectorXd mean;
    Eigen::MatrixXd chol;       // lower factor of the covariance
    Eigen::MatrixXd precision;
    double log_norm;            // -(1/2) ln det(2 pi cov)
};

struct PreparedMixture
{
    std::vector<Prepared> parts;
    std::vector<double> cumulative;
    std::size_t rejected = 0;
    std::size_t dim = 0;
    double beta = 1.0;
};

PreparedMixture prepare(GaussianMixtureState const& state, double condition_floor)
{
    state.validate();
    PreparedMixture out;
    out.dim = state.dim();
    out.beta = state.beta_ref;
    double total = 0.0;
    auto const n = static_cast<double>(out.dim);
    for (std::size_t k = 0; k < state.components.size(); ++k)
    {
        if (state.weights[k] == 0.0)
            continue;
        auto const& c = state.components[k];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c.covariance, Eigen::EigenvaluesOnly);
        double const lo = eig.eigenvalues().minCoeff();
        double const hi = eig.eigenvalues().maxCoeff();
        if (!(lo > 0.0) || hi / lo > condition_floor)
        {
            ++out.rejected;
            continue;
        }
        Eigen::LLT<Eigen::MatrixXd> llt(c.covariance);
        Prepared p;
        p.weight = state.weights[k];
        p.mean = c.mean;
        p.chol = llt.matrixL();
        p.precision = llt.solve(Eigen::MatrixXd::Identity(c.covariance.rows(), c.covariance.cols()));
        double log_det = 0.0;
        for (Eigen::Index r = 0; r < p.chol.rows(); ++r)
            log_det += 2.0 * std::log(p.chol(r, r));
        p.log_norm = -0.5 * (n * std::log(2.0 * std::numbers::pi) + log_det);
        total += p.weight;
        out.parts.push_back(std::move(p));
    }
    if (out.parts.empty())
        throw std::invalid_argument("mixture: every component was rejected by the conditioning floor");
    double acc = 0.0;
    for (auto& p : out.parts)
    {
        p.weight /= total;
        acc += p.weight;
        out.cumulative.push_back(acc);
    }
    out.cumulative.back() = 1.0;
    return out;
}

struct PointEval
{
    double log_f;
    Eigen::VectorXd score;  // grad ln f
};

PointEval evaluate(PreparedMixture const& mix, Eigen::VectorXd const& v, bool with_score)
{
    std::size_t const K = mix.parts.size();
    std::vector<double> logs(K);
    std::vector<Eigen::VectorXd> grads(with_score ? K : 0);
    for (std::size_t k = 0; k < K; ++k)
    {
        auto const& p = mix.parts[k];
        Eigen::VectorXd const delta = v - p.mean;
        Eigen::VectorXd u = p.precision * delta;
        logs[k] = std::log(p.weight) + p.log_norm - 0.5 * delta.dot(u);
        if (with_score)
            grads[k] = -u;
    }
    double const top = *std::max_element(logs.begin(), logs.end());
    double sum = 0.0;
    for (double l : logs)
        sum += std::exp(l - top);
    PointEval out{top + std::log(sum), {}};
    if (with_score)
    {
        out.score = Eigen::VectorXd::Zero(v.size());
        for (std::size_t k = 0; k < K; ++k)
            out.score += std::exp(logs[k] - out.log_f) * grads[k];
    }
    return out;
}

double log_gamma(Eigen::VectorXd const& v, double beta)
{
    auto const n = static_cast<double>(v.size());
    return 0.5 * n * std::log(beta / (2.0 * std::numbers::pi)) - 0.5 * beta * v.squaredNorm();
}

struct PairStats
{
    RunningStats entropy;
    RunningStats information;
};

MixtureFunctionals run_functionals(GaussianMixtureState const& state, std::size_t n_samples, std::uint64_t seed,
                                   MixtureOptions const& opt, bool want_entropy, bool want_info)
{
    if (n_samples < 2)
        throw std::invalid_argument("mixture functionals: need at least two samples");
    PreparedMixture const mix = prepare(state, opt.condition_floor);
    std::size_t const n_blocks = block_count(n_samples, kSampleBlock);
    std::vector<PairStats> partial(n_blocks);

    parallel_blocks(n_samples, kSampleBlock, opt.workers, [&](std::size_t b, std::size_t begin, std::size_t end) {
        Rng rng(seed, substream(kMixtureSampleTag, b));
        Eigen::VectorXd z(static_cast<Eigen::Index>(mix.dim));
        for (std::size_t s = begin; s < end; ++s)
        {
            double const u = rng.uniform();
            auto const it = std::lower_bound(mix.cumulative.begin(), mix.cumulative.end(), u);
            auto const& part = mix.parts[static_cast<std::size_t>(it - mix.cumulative.begin())];
            for (Eigen::Index r = 0; r < z.size(); ++r)
                z(r) = rng.normal();
            Eigen::VectorXd const v = part.mean + part.chol * z;
            PointEval const e = evaluate(mix, v, want_info);
            if (want_entropy)
                partial[b].entropy.push(e.log_f - log_gamma(v, mix.beta));
            if (want_info)
                partial[b].information.push((e.score + mix.beta * v).squaredNorm());
        }
    });

    PairStats total;
    for (auto const& p : partial)
    {
        total.entropy.merge(p.entropy);
        total.information.merge(p.information);
    }
    MixtureFunctionals out;
    out.entropy = {total.entropy.mean(), total.entropy.stderr_of_mean(), n_samples, mix.rejected};
    out.information = {total.information.mean(), total.information.stderr_of_mean(), n_samples, mix.rejected};
    return out;
}

ScatteringAngle draw_angle(Rng& rng, std::vector<double>& buf)
{
    uniform_sphere(rng, buf);
    return ScatteringAngle(buf);
}

std::pair<std::size_t, std::size_t> ordered_pair(Rng& rng, std::size_t offset, std::size_t n)
{
    auto i = static_cast<std::size_t>(rng.index(n));
    auto j = static_cast<std::size_t>(rng.index(n - 1));
    if (j >= i)
        ++j;
    if (i > j)
        std::swap(i, j);
    return {offset + i, offset + j};
}

template <class Fn>
GaussianMixtureState build_mixture(std::size_t n_histories, std::size_t workers, double beta_ref, Fn&& one_history)
{
    if (n_histories == 0)
        throw std::invalid_argument("mixture: need at least one history");
    GaussianMixtureState out;
    out.beta_ref = beta_ref;
    out.components.resize(n_histories);
    out.weights.assign(n_histories, 1.0 / static_cast<double>(n_histories));
    parallel_blocks(n_histories, kHistoryBlock, workers, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t h = begin; h < end; ++h)
            out.components[h] = one_history(h);
    });
    return out;
}

void check_time(double t)
{
    if (!(t >= 0.0) || !std::isfinite(t))
        throw std::invalid_argument("mixture: t must be finite and non-negative");
}

} // namespace

void GaussianComponent::validate() const
{
    auto const n = mean.size();
    if (n == 0)
        throw std::invalid_argument("GaussianComponent: empty mean");
    if (covariance.rows() != n || covariance.cols() != n)
        throw std::invalid_argument("GaussianComponent: covariance shape does not match mean");
    if (!mean.allFinite() || !covariance.allFinite())
        throw std::invalid_argument("GaussianComponent: non-finite entries");
    double const scale = std::max(covariance.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("GaussianComponent: covariance is not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(covariance);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("GaussianComponent: covariance is not positive definite");
}

GaussianComponent GaussianComponent::isotropic(std::size_t n, double variance)
{
    return isotropic(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)), variance);
}

GaussianComponent GaussianComponent::isotropic(Eigen::VectorXd mean, double variance)
{
    if (!(variance > 0.0))
        throw std::invalid_argument("GaussianComponent: variance must be positive");
    auto const n = mean.size();
    return {std::move(mean), variance * Eigen::MatrixXd::Identity(n, n)};
}

void GaussianMixtureState::validate() const
{
    if (components.empty() || weights.size() != components.size())
        throw std::invalid_argument("GaussianMixtureState: weights and components must be non-empty and aligned");
    if (!(beta_ref > 0.0))
        throw std::invalid_argument("GaussianMixtureState: beta_ref must be positive");
    double total = 0.0;
    for (double w : weights)
    {
        if (!(w >= 0.0))
            throw std::invalid_argument("GaussianMixtureState: negative weight");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("GaussianMixtureState: weights must sum to one");
    for (auto const& c : components)
    {
        if (c.dim() != components.front().dim())
            throw std::invalid_argument("GaussianMixtureState: components differ in dimension");
        c.validate();
    }
}

GaussianComponent propagate_component_internal(GaussianComponent g, PairCollision const& c)
{
    std::size_t const d = c.sigma.dim();
    check_block(g, d, c.j, "propagate_component_internal");
    in_place_internal(g, c.i, c.j, c.sigma.components());
    return g;
}

GaussianComponent propagate_component_thermostat(GaussianComponent g, std::size_t j, ScatteringAngle const& sigma,
                                                 double beta)
{
    if (!(beta > 0.0))
        throw std::invalid_argument("propagate_component_thermostat: beta must be positive");
    check_block(g, sigma.dim(), j, "propagate_component_thermostat");
    in_place_thermostat(g, j, sigma.components(), beta);
    return g;
}

double entropy_gaussian_isotropic(double a, double beta, std::size_t n)
{
    if (!(a > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("entropy_gaussian_isotropic: a and beta must be positive");
    double const x = beta * a;
    return 0.5 * static_cast<double>(n) * (x - 1.0 - std::log(x));
}

double fisher_info_gaussian_isotropic(double a, double beta, std::size_t n)
{
    if (!(a > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("fisher_info_gaussian_isotropic: a and beta must be positive");
    double const r = 1.0 / a - beta;
    return static_cast<double>(n) * a * r * r;
}

double entropy_gaussian(GaussianComponent const& g, double beta)
{
    g.validate();
    Eigen::LLT<Eigen::MatrixXd> llt(g.covariance);
    double log_det = 0.0;
    for (Eigen::Index r = 0; r < g.covariance.rows(); ++r)
        log_det += 2.0 * std::log(llt.matrixLLT()(r, r));
    auto const n = static_cast<double>(g.dim());
    return 0.5 * (beta * (g.covariance.trace() + g.mean.squaredNorm()) - n - n * std::log(beta) - log_det);
}

double fisher_info_plain_gaussian(GaussianComponent const& g)
{
    g.validate();
    Eigen::LLT<Eigen::MatrixXd> llt(g.covariance);
    return llt.solve(Eigen::MatrixXd::Identity(g.covariance.rows(), g.covariance.cols())).trace();
}

double kinetic_energy(GaussianComponent const& g)
{
    return 0.5 * (g.covariance.trace() + g.mean.squaredNorm());
}

double fisher_info_gaussian(GaussianComponent const& g, double beta)
{
    auto const n = static_cast<double>(g.dim());
    return fisher_info_plain_gaussian(g) - 2.0 * n * beta + 2.0 * beta * beta * kinetic_energy(g);
}

double info_transform_relation(double info_f, double energy, std::size_t n_dims, double beta)
{
    return info_f + 2.0 * beta * beta * (energy - static_cast<double>(n_dims) / beta);
}

FunctionalEstimate entropy_mixture_mc(GaussianMixtureState const& state, std::size_t n_samples, std::uint64_t seed,
                                      MixtureOptions const& options)
{
    return run_functionals(state, n_samples, seed, options, true, false).entropy;
}

FunctionalEstimate fisher_info_mixture_mc(GaussianMixtureState const& state, std::size_t n_samples,
                                          std::uint64_t seed, MixtureOptions const& options)
{
    return run_functionals(state, n_samples, seed, options, false, true).information;
}

MixtureFunctionals mixture_functionals_mc(GaussianMixtureState const& state, std::size_t n_samples,
                                          std::uint64_t seed, MixtureOptions const& options)
{
    return run_functionals(state, n_samples, seed, options, true, true);
}

double mixture_log_density(GaussianMixtureState const& state, Eigen::VectorXd const& v)
{
    PreparedMixture const mix = prepare(state, std::numeric_limits<double>::infinity());
    if (static_cast<std::size_t>(v.size()) != mix.dim)
        throw std::invalid_argument("mixture_log_density: dimension mismatch");
    return evaluate(mix, v, false).log_f;
}

GaussianMixtureState thermostat_mixture(GaussianComponent const& initial, ThermostatParams const& p, double t,
                                        std::size_t n_histories, std::uint64_t seed, std::size_t workers)
{
    p.validate();
    check_time(t);
    initial.validate();
    if (initial.dim() != p.d * p.N)
        throw std::invalid_argument("thermostat_mixture: initial component must have dimension d N");
    double const rate = p.total_rate();
    double const lam = p.internal_rate();
    return build_mixture(n_histories, workers, p.beta, [&](std::size_t h) {
        Rng rng(seed, substream(kThermostatHistoryTag, h));
        std::vector<double> buf(p.d);
        GaussianComponent g = initial;
        if (!(rate > 0.0))
            return g;
        for (double clock = rng.exponential(rate); clock <= t; clock += rng.exponential(rate))
        {
            if (rng.uniform() * (lam + p.mu) < lam)
            {
                auto const [i, j] = ordered_pair(rng, 0, p.N);
                in_place_internal(g, i, j, draw_angle(rng, buf).components());
            }
            else
            {
                auto const j = static_cast<std::size_t>(rng.index(p.N));
                in_place_thermostat(g, j, draw_angle(rng, buf).components(), p.beta);
            }
        }
        return g;
    });
}

GaussianMixtureState reservoir_mixture(GaussianComponent const& initial, ReservoirParams const& p, double t,
                                       std::size_t n_histories, std::uint64_t seed, std::size_t workers)
{
    p.validate();
    check_time(t);
    initial.validate();
    auto const ns = static_cast<Eigen::Index>(p.d * p.N);
    auto const nt = static_cast<Eigen::Index>(p.d * (p.N + p.M));
    if (static_cast<Eigen::Index>(initial.dim()) != ns)
        throw std::invalid_argument("reservoir_mixture: initial component must have dimension d N");

    GaussianComponent full;
    full.mean = Eigen::VectorXd::Zero(nt);
    full.mean.head(ns) = initial.mean;
    full.covariance = Eigen::MatrixXd::Identity(nt, nt) / p.beta;
    full.covariance.topLeftCorner(ns, ns) = initial.covariance;

    auto const rates = p.class_rates();
    double const rate = p.total_rate();
    return build_mixture(n_histories, workers, p.beta, [&](std::size_t h) {
        Rng rng(seed, substream(kReservoirHistoryTag, h));
        std::vector<double> buf(p.d);
        GaussianComponent g = full;
        for (double clock = rng.exponential(rate); clock <= t; clock += rng.exponential(rate))
        {
            double const u = rng.uniform() * rate;
            std::size_t i = 0;
            std::size_t j = 0;
            if (u < rates[0])
                std::tie(i, j) = ordered_pair(rng, 0, p.N);
            else if (u < rates[0] + rates[1])
                std::tie(i, j) = ordered_pair(rng, p.N, p.M);
            else
            {
                i = static_cast<std::size_t>(rng.index(p.N));
                j = p.N + static_cast<std::size_t>(rng.index(p.M));
            }
            in_place_internal(g, i, j, draw_angle(rng, buf).components());
        }
        GaussianComponent marginal;
        marginal.mean = g.mean.head(ns);
        marginal.covariance = g.covariance.topLeftCorner(ns, ns);
        return marginal;
    });
}

} // namespace kac
