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

#include "kac/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kac/random.hpp"
#include "kac/stats.hpp"

namespace kac {
namespace {

constexpr std::uint64_t kMomentProbeTag = 0x6d6f6d656e74ull;
constexpr std::size_t kProbes = 3;

// a v + b w, and the sigma-average of (s.L1)(s.L2) as coefficients of
// |v|^2, v.w, |w|^2.
struct Linear
{
    double a;
    double b;
};

struct Quadratic
{
    double vv = 0.0;
    double vw = 0.0;
    double ww = 0.0;

    Quadratic& add(Quadratic const& o, double scale)
    {
        vv += scale * o.vv;
        vw += scale * o.vw;
        ww += scale * o.ww;
        return *this;
    }
};

Quadratic sigma_average(Linear l1, Linear l2, double d)
{
    return {l1.a * l2.a / d, (l1.a * l2.b + l1.b * l2.a) / d, l1.b * l2.b / d};
}

template <class F, class FPrime>
Eigen::MatrixXd matrix_function(Eigen::MatrixXd const& A, F f, FPrime fprime)
{
    if (A.rows() == 1)
        return Eigen::MatrixXd::Constant(1, 1, f(A(0, 0)));
    if (A.rows() != 2)
        throw std::invalid_argument("MomentODE: closed form available for dimension 1 or 2 only");
    double const half_trace = 0.5 * A.trace();
    double const disc = half_trace * half_trace - A.determinant();
    double const scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if (disc < -1e-14 * scale * scale)
        throw std::invalid_argument("MomentODE: complex spectrum");
    double const root = std::sqrt(std::max(disc, 0.0));
    double const l1 = half_trace + root;
    double const l2 = half_trace - root;
    Eigen::MatrixXd const I = Eigen::MatrixXd::Identity(2, 2);
    if (l1 - l2 > 1e-10 * scale)
    {
        double const f1 = f(l1);
        double const f2 = f(l2);
        return (l1 * f2 - l2 * f1) / (l1 - l2) * I + (f1 - f2) / (l1 - l2) * A;
    }
    double const l = half_trace;
    return (f(l) - l * fprime(l)) * I + fprime(l) * A;
}

double z_score(RunningStats const& s, double expected, double scale)
{
    double const diff = std::abs(s.mean() - expected);
    double const se = s.stderr_of_mean();
    if (se > 1e-14 * scale)
        return diff / se;
    return diff <= 1e-12 * scale ? 0.0 : std::numeric_limits<double>::infinity();
}

Rational reduced(long long num, long long den)
{
    long long const g = std::gcd(num, den);
    return {num / g, den / g};
}

} // namespace

MomentCoefficients one_collision_moment(std::size_t d, double beta, CollisionKind which)
{
    if (d == 0)
        throw std::invalid_argument("one_collision_moment: d must be >= 1");
    if (!(beta > 0.0))
        throw std::invalid_argument("one_collision_moment: beta must be positive");
    auto const dd = static_cast<double>(d);
    Linear const v{1.0, 0.0};
    Linear const rel{1.0, -1.0};

    // |v*|^2 = |v|^2 - 2 (s.v)(s.(v-w)) + (s.(v-w))^2
    Quadratic energy;
    energy.vv = 1.0;
    energy.add(sigma_average(v, rel, dd), -2.0).add(sigma_average(rel, rel, dd), 1.0);
    // v* = v - s s^T (v - w)
    double const mom_self = 1.0 - rel.a / dd;
    double const mom_partner = -rel.b / dd;

    MomentCoefficients out;
    out.energy_self = energy.vv;
    out.momentum_self = mom_self;
    if (which == CollisionKind::thermostat)
    {
        // E|w|^2 = d / beta, E w = 0 under Maxwellian(beta).
        out.energy_const = energy.ww * dd / beta;
    }
    else
    {
        out.energy_partner = energy.ww;
        out.momentum_partner = mom_partner;
    }
    // The v.w coefficient vanishes; it would otherwise break the affine form.
    if (std::abs(energy.vw) > 1e-15)
        throw OracleMismatchError("one_collision_moment: cross term did not cancel");
    return out;
}

MomentCrossCheck one_collision_moment_mc(std::size_t d, double beta, CollisionKind which, std::size_t n_samples,
                                         std::uint64_t seed, AngleSampler const& sampler, double fail_z)
{
    if (n_samples < 2)
        throw std::invalid_argument("one_collision_moment_mc: need at least two samples");
    MomentCrossCheck out;
    out.symbolic = one_collision_moment(d, beta, which);
    out.n_samples = n_samples;
    auto const& c = out.symbolic;
    double const partner_scale = 1.0 / std::sqrt(beta);

    for (std::size_t probe = 0; probe < kProbes; ++probe)
    {
        Rng rng(seed, substream(kMomentProbeTag, probe));
        std::vector<double> v(d);
        std::vector<double> w(d, 0.0);
        for (double& x : v)
            x = 1.5 * rng.normal();
        if (which != CollisionKind::thermostat)
            for (double& x : w)
                x = 1.5 * rng.normal();
        double v2 = 0.0;
        double w2 = 0.0;
        for (std::size_t k = 0; k < d; ++k)
        {
            v2 += v[k] * v[k];
            w2 += w[k] * w[k];
        }
        double const scale = 1.0 + v2 + w2 + static_cast<double>(d) / beta;

        RunningStats energy;
        std::vector<RunningStats> momentum(d);
        std::vector<double> sigma(d);
        std::vector<double> a(d);
        std::vector<double> b(d);
        for (std::size_t s = 0; s < n_samples; ++s)
        {
            a = v;
            if (which == CollisionKind::thermostat)
                for (double& x : b)
                    x = partner_scale * rng.normal();
            else
                b = w;
            sampler(rng, sigma);
            reflect(a, b, sigma);
            double e = 0.0;
            for (std::size_t k = 0; k < d; ++k)
            {
                e += a[k] * a[k];
                momentum[k].push(a[k]);
            }
            energy.push(e);
        }
        double const expected_energy = c.energy_self * v2 + c.energy_partner * w2 + c.energy_const;
        out.max_z = std::max(out.max_z, z_score(energy, expected_energy, scale));
        for (std::size_t k = 0; k < d; ++k)
        {
            double const expected = c.momentum_self * v[k] + c.momentum_partner * w[k];
            out.max_z = std::max(out.max_z, z_score(momentum[k], expected, scale));
        }
    }
    if (!(out.max_z <= fail_z))
        throw OracleMismatchError("one_collision_moment: Monte Carlo and closed form disagree (z = " +
                                  std::to_string(out.max_z) + ")");
    return out;
}

Eigen::VectorXd MomentODE::solve(Eigen::VectorXd const& x0, double t) const
{
    if (x0.size() != source.size())
        throw std::invalid_argument("MomentODE: initial value has the wrong size");
    if (!(t >= 0.0))
        throw std::invalid_argument("MomentODE: t must be non-negative");
    Eigen::MatrixXd const A = -rate;
    auto expo = [t](double l) { return std::exp(l * t); };
    auto expo_prime = [t](double l) { return t * std::exp(l * t); };
    // int_0^t exp(l tau) dtau and its l-derivative.
    auto integral = [t](double l) {
        double const x = l * t;
        return std::abs(x) < 1e-12 ? t : std::expm1(x) / l;
    };
    auto integral_prime = [t](double l) {
        double const x = l * t;
        if (std::abs(x) < 1e-6)
            return t * t * (0.5 + x / 3.0);
        return (x * std::exp(x) - std::expm1(x)) / (l * l);
    };
    return matrix_function(A, expo, expo_prime) * x0 + matrix_function(A, integral, integral_prime) * source;
}

Eigen::VectorXd MomentODE::stationary(Eigen::VectorXd const& x0) const
{
    if (x0.size() != source.size())
        throw std::invalid_argument("MomentODE: initial value has the wrong size");
    Eigen::FullPivLU<Eigen::MatrixXd> lu(rate);
    if (lu.isInvertible())
        return equilibrium();
    if (source.cwiseAbs().maxCoeff() > 0.0)
        throw std::invalid_argument("MomentODE: source drives a conserved mode; no stationary state");
    double const scale = std::max(1.0, rate.cwiseAbs().maxCoeff());
    for (double r : decay_rates())
        if (r < -1e-12 * scale)
            throw std::invalid_argument("MomentODE: growing mode; no stationary state");
    Eigen::MatrixXd const A = -rate;
    auto limit = [scale](double l) { return std::abs(l) <= 1e-12 * scale ? 1.0 : 0.0; };
    auto limit_prime = [](double) -> double {
        throw std::invalid_argument("MomentODE: defective zero mode; no stationary state");
    };
    return matrix_function(A, limit, limit_prime) * x0;
}

Eigen::VectorXd MomentODE::equilibrium() const
{
    Eigen::FullPivLU<Eigen::MatrixXd> lu(rate);
    if (!lu.isInvertible())
        throw std::invalid_argument("MomentODE: rate matrix is singular; use stationary(x0)");
    return lu.solve(source);
}

std::vector<double> MomentODE::decay_rates() const
{
    Eigen::EigenSolver<Eigen::MatrixXd> es(rate, false);
    std::vector<double> out;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
        out.push_back(es.eigenvalues()(k).real());
    std::sort(out.begin(), out.end());
    return out;
}

MomentODE moment_ode(ThermostatParams const& p, MomentKind kind)
{
    p.validate();
    auto const c = one_collision_moment(p.d, p.beta, CollisionKind::thermostat);
    auto const N = static_cast<double>(p.N);
    MomentODE ode;
    ode.rate.resize(1, 1);
    ode.source.resize(1);
    // Each particle meets the thermostat at rate mu.
    if (kind == MomentKind::energy)
    {
        ode.rate(0, 0) = p.mu * (1.0 - c.energy_self);
        ode.source(0) = p.mu * N * 0.5 * c.energy_const;
        ode.names = {"E"};
    }
    else
    {
        ode.rate(0, 0) = p.mu * (1.0 - c.momentum_self);
        ode.source(0) = 0.0;
        ode.names = {"p"};
    }
    return ode;
}

MomentODE moment_ode(ReservoirParams const& p, MomentKind kind)
{
    p.validate();
    auto const c = one_collision_moment(p.d, p.beta, CollisionKind::cross);
    auto const N = static_cast<double>(p.N);
    auto const M = static_cast<double>(p.M);
    // Cross collisions: total rate mu N, uniform over the N M pairs. A system
    // particle is hit at rate mu, a reservoir particle at rate mu N / M.
    double const self = kind == MomentKind::energy ? 1.0 - c.energy_self : 1.0 - c.momentum_self;
    double const partner = kind == MomentKind::energy ? c.energy_partner : c.momentum_partner;
    MomentODE ode;
    ode.rate.resize(2, 2);
    ode.rate << p.mu * self, -p.mu * partner * N / M,
                -p.mu * partner, p.mu * self * N / M;
    ode.source = Eigen::VectorXd::Zero(2);
    ode.names = kind == MomentKind::energy ? std::vector<std::string>{"E_S", "E_R"}
                                           : std::vector<std::string>{"p_S", "p_R"};
    return ode;
}

double thermostat_energy_as_printed(ThermostatParams const& p, double e0, double t)
{
    double const eq = static_cast<double>(p.d * p.N) / p.beta;
    return (e0 - eq) * std::exp(-p.mu * t / (2.0 * static_cast<double>(p.d))) + eq;
}

double reservoir_energy_as_printed(ReservoirParams const& p, double es0, double e_total, double t)
{
    auto const N = static_cast<double>(p.N);
    auto const M = static_cast<double>(p.M);
    double const eq = N / (N + M) * e_total;
    return (es0 - eq) * std::exp(-p.mu * (N + M) * t / (2.0 * static_cast<double>(p.d) * M)) + eq;
}

double DecayEnvelope::operator()(double t) const
{
    return floor + (1.0 - floor) * std::exp(-rate * t);
}

std::vector<std::string> envelope_ids()
{
    return {"thermostat-information", "thermostat-entropy", "reservoir-information",
            "reservoir-entropy",      "classic-kac",        "classic-kac-as-printed"};
}

DecayEnvelope envelope(std::string const& id, EnvelopeParams const& p)
{
    if (p.d == 0 || p.N == 0)
        throw std::invalid_argument("envelope: d and N must be >= 1");
    auto const d = static_cast<double>(p.d);
    auto const N = static_cast<double>(p.N);
    auto const M = static_cast<double>(p.M);
    DecayEnvelope e;
    e.id = id;
    if (id == "thermostat-information" || id == "thermostat-entropy")
    {
        e.rate = p.mu / d;
        e.floor = 0.0;
        e.provenance = id.substr(11) + " bound, thermostat: exp(-mu*t/d)";
        return e;
    }
    if (p.M < 2)
        throw std::invalid_argument("envelope: reservoir envelopes need M >= 2");
    e.floor = N / (N + M);
    if (id == "reservoir-information" || id == "reservoir-entropy")
    {
        e.rate = p.mu * (N + M) / (d * M);
        e.provenance = id.substr(10) + " bound, reservoir: N/(N+M) + M/(N+M)*exp(-mu*(N+M)*t/(d*M))";
        return e;
    }
    if (id == "classic-kac")
    {
        e.rate = 2.0 * (N + M) / (d * (N + M - 1.0));
        e.provenance = "classic Kac via mu=2M/(N+M-1): N/(N+M) + M/(N+M)*exp(-2(N+M)*t/(d*(N+M-1)))";
        return e;
    }
    if (id == "classic-kac-as-printed")
    {
        e.rate = 2.0 * (N + M) / (N + M - 1.0);
        e.provenance = "classic Kac as printed: N/(N+M) + M/(N+M)*exp(-2(N+M)*t/(N+M-1))";
        return e;
    }
    throw std::invalid_argument("envelope: unknown id '" + id + "'");
}

ReservoirParams classic_kac_params(std::size_t d, std::size_t N, std::size_t M, double beta)
{
    ReservoirParams p;
    p.d = d;
    p.N = N;
    p.M = M;
    double const denom = static_cast<double>(N + M) - 1.0;
    p.lambda_S = 2.0 * (static_cast<double>(N) - 1.0) / denom;
    p.lambda_R = 2.0 * (static_cast<double>(M) - 1.0) / denom;
    p.mu = 2.0 * static_cast<double>(M) / denom;
    p.beta = beta;
    p.validate();
    return p;
}

Rational classic_kac_exponent(std::size_t d, std::size_t N, std::size_t M)
{
    // mu (N+M) / (d M) with mu = 2M / (N+M-1)
    auto const n = static_cast<long long>(N);
    auto const m = static_cast<long long>(M);
    return reduced(2 * m * (n + m), (n + m - 1) * static_cast<long long>(d) * m);
}

Rational classic_kac_exponent_as_printed(std::size_t N, std::size_t M)
{
    auto const n = static_cast<long long>(N);
    auto const m = static_cast<long long>(M);
    return reduced(2 * (n + m), n + m - 1);
}

} // namespace kac
