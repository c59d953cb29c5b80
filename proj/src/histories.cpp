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

#include "kac/histories.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "kac/parallel.hpp"
#include "kac/stats.hpp"

namespace kac {
namespace {

constexpr std::uint64_t kHistoryTag = 0x686973746f7279ull;

ParticlePair draw_pair(PairClass cls, ReservoirParams const& p, Rng& rng)
{
    auto distinct = [&](std::size_t offset, std::size_t n) {
        auto i = static_cast<std::size_t>(rng.index(n));
        auto j = static_cast<std::size_t>(rng.index(n - 1));
        if (j >= i)
            ++j;
        return ParticlePair{offset + std::min(i, j), offset + std::max(i, j)};
    };
    switch (cls)
    {
    case PairClass::system:
        return distinct(0, p.N);
    case PairClass::reservoir:
        return distinct(p.N, p.M);
    case PairClass::cross:
        break;
    }
    auto const i = static_cast<std::size_t>(rng.index(p.N));
    return {i, p.N + static_cast<std::size_t>(rng.index(p.M))};
}

PairClass draw_class(std::array<double, 3> const& prob, Rng& rng)
{
    double const u = rng.uniform();
    if (u < prob[0])
        return PairClass::system;
    if (u < prob[0] + prob[1])
        return PairClass::reservoir;
    return PairClass::cross;
}

// log P(K = k) for K ~ Poisson(mean)
double log_poisson(double mean, std::size_t k)
{
    if (mean == 0.0)
        return k == 0 ? 0.0 : -INFINITY;
    auto const kk = static_cast<double>(k);
    return -mean + kk * std::log(mean) - std::lgamma(kk + 1.0);
}

} // namespace

PairClass classify(ParticlePair pair, ReservoirParams const& p)
{
    if (pair.i >= pair.j || pair.j >= p.N + p.M)
        throw std::invalid_argument("invalid collision pair (" + std::to_string(pair.i) + ", " +
                                    std::to_string(pair.j) + ")");
    if (pair.j < p.N)
        return PairClass::system;
    if (pair.i >= p.N)
        return PairClass::reservoir;
    return PairClass::cross;
}

double lambda_alpha(ParticlePair pair, ReservoirParams const& p)
{
    p.validate();
    double const big_lambda = p.total_rate();
    if (!(big_lambda > 0.0))
        throw std::invalid_argument("lambda_alpha: total rate is zero");
    auto const n = static_cast<double>(p.N);
    auto const m = static_cast<double>(p.M);
    switch (classify(pair, p))
    {
    case PairClass::system:
        return p.lambda_S / (big_lambda * (n - 1.0));
    case PairClass::reservoir:
        return p.lambda_R / (big_lambda * (m - 1.0));
    case PairClass::cross:
        break;
    }
    return p.mu / (big_lambda * m);
}

std::array<double, 3> class_probabilities(ReservoirParams const& p)
{
    auto const r = p.class_rates();
    double const total = r[0] + r[1] + r[2];
    if (!(total > 0.0))
        throw std::invalid_argument("class_probabilities: total rate is zero");
    return {r[0] / total, r[1] / total, r[2] / total};
}

HistoryTerm sample_history(std::size_t k, ReservoirParams const& p, Rng& rng, AngleSampler const& sampler)
{
    p.validate();
    HistoryTerm h;
    if (k == 0)
        return h;
    auto const prob = class_probabilities(p);
    h.alphas.reserve(k);
    h.sigmas.reserve(k);
    std::vector<double> sigma(p.d);
    for (std::size_t n = 0; n < k; ++n)
    {
        h.alphas.push_back(draw_pair(draw_class(prob, rng), p, rng));
        sampler(rng, sigma);
        h.sigmas.emplace_back(sigma);
    }
    return h;
}

Eigen::MatrixXd block_A(HistoryTerm const& h, ReservoirParams const& p, std::size_t max_size)
{
    std::size_t const d = p.d;
    std::size_t const full = d * (p.N + p.M);
    if (full > max_size)
        throw std::length_error("block_A: d (N+M) = " + std::to_string(full) + " exceeds cap " +
                                std::to_string(max_size));
    if (h.alphas.size() != h.sigmas.size())
        throw std::invalid_argument("block_A: history pairs and angles differ in length");

    auto const rows = static_cast<Eigen::Index>(full);
    auto const cols = static_cast<Eigen::Index>(d * p.N);
    // Column c holds M_k ... M_1 e_c; only its first dN rows are kept.
    Eigen::MatrixXd x = Eigen::MatrixXd::Identity(rows, cols);
    for (std::size_t step = 0; step < h.length(); ++step)
    {
        auto const [i, j] = h.alphas[step];
        classify(h.alphas[step], p);
        auto const s = h.sigmas[step].components();
        if (s.size() != d)
            throw std::invalid_argument("block_A: angle dimension mismatch");
        for (Eigen::Index c = 0; c < cols; ++c)
        {
            double* col = x.col(c).data();
            reflect({col + i * d, d}, {col + j * d, d}, s);
        }
    }
    return x.topRows(cols);
}

KCoefficient k_coefficient_analytic(double t, ReservoirParams const& p)
{
    if (!(t >= 0.0))
        throw std::invalid_argument("k_coefficient_analytic: t must be non-negative");
    auto const n = static_cast<double>(p.N);
    auto const m = static_cast<double>(p.M);
    auto const d = static_cast<double>(p.d);
    return {n / (n + m) + m / (n + m) * std::exp(-p.mu * (n + m) * t / (d * m))};
}

double poisson_tail(double mean, std::size_t k_max)
{
    if (!(mean >= 0.0))
        throw std::invalid_argument("poisson_tail: mean must be non-negative");
    if (mean == 0.0)
        return 0.0;
    // Sum the upper tail directly; terms past the mode decay geometrically.
    double tail = 0.0;
    for (std::size_t k = k_max + 1;; ++k)
    {
        double const term = std::exp(log_poisson(mean, k));
        tail += term;
        if (static_cast<double>(k) > mean && term < 1e-18 * std::max(tail, 1e-300))
            break;
        if (term == 0.0 && static_cast<double>(k) > mean)
            break;
    }
    return std::min(tail, 1.0);
}

std::size_t poisson_truncation(double mean, double tail_tol)
{
    std::size_t k = static_cast<std::size_t>(mean);
    // Start at the mean and walk outward; the tail is monotone in k.
    while (k > 0 && poisson_tail(mean, k - 1) < tail_tol)
        --k;
    while (poisson_tail(mean, k) >= tail_tol)
        ++k;
    return k;
}

KEstimate k_coefficient_mc(double t, ReservoirParams const& p, std::size_t n_samples, std::size_t k_max,
                           std::uint64_t seed, std::size_t workers)
{
    p.validate();
    if (!(t >= 0.0))
        throw std::invalid_argument("k_coefficient_mc: t must be non-negative");
    if (n_samples < 2)
        throw std::invalid_argument("k_coefficient_mc: need at least two samples");
    double const mean = p.total_rate() * t;
    double const tail = poisson_tail(mean, k_max);
    if (!(tail < 1e-6))
        throw std::invalid_argument("k_coefficient_mc: Poisson tail beyond k_max is " + std::to_string(tail) +
                                    ", must be below 1e-6");

    std::vector<double> cdf(k_max + 1);
    double acc = 0.0;
    for (std::size_t k = 0; k <= k_max; ++k)
    {
        acc += std::exp(log_poisson(mean, k));
        cdf[k] = acc;
    }
    for (double& c : cdf)
        c /= acc;

    auto const dn = static_cast<Eigen::Index>(p.d * p.N);
    struct Partial
    {
        RunningStats trace;
        std::vector<RunningStats> entries;
    };
    std::size_t const block = 256;
    std::vector<Partial> partial(block_count(n_samples, block));
    for (auto& pt : partial)
        pt.entries.resize(static_cast<std::size_t>(dn * dn));

    parallel_blocks(n_samples, block, workers, [&](std::size_t b, std::size_t begin, std::size_t end) {
        Partial& out = partial[b];
        for (std::size_t s = begin; s < end; ++s)
        {
            Rng rng(seed, substream(kHistoryTag, s));
            double const u = rng.uniform();
            auto const k = static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
            auto const h = sample_history(std::min(k, k_max), p, rng);
            Eigen::MatrixXd const a = block_A(h, p);
            Eigen::MatrixXd const ata = a.transpose() * a;
            out.trace.push(ata.trace() / static_cast<double>(dn));
            for (Eigen::Index r = 0; r < dn; ++r)
                for (Eigen::Index c = 0; c < dn; ++c)
                    out.entries[static_cast<std::size_t>(r * dn + c)].push(ata(r, c));
        }
    });

    Partial total;
    total.entries.resize(static_cast<std::size_t>(dn * dn));
    for (auto const& pt : partial)
    {
        total.trace.merge(pt.trace);
        for (std::size_t e = 0; e < total.entries.size(); ++e)
            total.entries[e].merge(pt.entries[e]);
    }

    KEstimate est;
    est.t = t;
    est.c_mc = total.trace.mean();
    est.std_error = total.trace.stderr_of_mean();
    est.k_max = k_max;
    est.n_samples = n_samples;
    est.mean_matrix.resize(dn, dn);
    double off2 = 0.0;
    double var2 = 0.0;
    for (Eigen::Index r = 0; r < dn; ++r)
        for (Eigen::Index c = 0; c < dn; ++c)
        {
            auto const& st = total.entries[static_cast<std::size_t>(r * dn + c)];
            est.mean_matrix(r, c) = st.mean();
            if (r == c)
                continue;
            double const se = st.stderr_of_mean();
            off2 += st.mean() * st.mean();
            var2 += se * se;
            if (se > 0.0)
                est.isotropy_max_z = std::max(est.isotropy_max_z, std::abs(st.mean()) / se);
        }
    est.isotropy_residual = std::sqrt(off2);
    est.isotropy_stderr = std::sqrt(var2);
    return est;
}

PMatrix PMatrix::from(ReservoirParams const& p)
{
    p.validate();
    auto const n = static_cast<double>(p.N);
    auto const m = static_cast<double>(p.M);
    auto const d = static_cast<double>(p.d);
    double const big_lambda = p.total_rate();
    if (!(big_lambda > 0.0))
        throw std::invalid_argument("PMatrix: total rate is zero");
    double const f = p.mu / (d * big_lambda * m);
    PMatrix out;
    out.matrix << 1.0 - f * m, f * m, f * n, 1.0 - f * n;
    out.eigenvalues_ = {1.0, 1.0 - p.mu * (n + m) / (d * big_lambda * m)};
    out.weight_system_ = n / (n + m);
    return out;
}

double PMatrix::first_component_power(std::size_t k) const
{
    return weight_system_ + std::pow(eigenvalues_[1], static_cast<double>(k)) * (1.0 - weight_system_);
}

std::pair<double, double> single_step_update(double m1, double m2, PairClass cls, ReservoirParams const& p)
{
    if (cls != PairClass::cross)
        return {m1, m2};
    auto const d = static_cast<double>(p.d);
    return {m1 - (m1 - m2) / d, m2 - (m2 - m1) / d};
}

std::pair<double, double> aggregate_step(double m1, double m2, ReservoirParams const& p)
{
    p.validate();
    std::size_t const n_total = p.N + p.M;
    // Representative blocks: particle 0 (system) and particle N (reservoir).
    auto coefficient_at = [&](std::size_t q, ParticlePair pair, PairClass cls) {
        double const own = q < p.N ? m1 : m2;
        if (q != pair.i && q != pair.j)
            return own;
        auto const [a, b] = single_step_update(m1, m2, cls, p);
        if (cls != PairClass::cross)
            return own;
        return q < p.N ? a : b;
    };
    double sys = 0.0;
    double res = 0.0;
    for (std::size_t i = 0; i < n_total; ++i)
        for (std::size_t j = i + 1; j < n_total; ++j)
        {
            ParticlePair const pair{i, j};
            PairClass const cls = classify(pair, p);
            double const w = lambda_alpha(pair, p);
            sys += w * coefficient_at(0, pair, cls);
            res += w * coefficient_at(p.N, pair, cls);
        }
    return {sys, res};
}

} // namespace kac
