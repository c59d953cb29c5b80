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

// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "kac/gaussian_states.hpp"
#include "kac/histories.hpp"
#include "kac/kinematics.hpp"
#include "kac/oracles.hpp"
#include "kac/ou_semigroup.hpp"
#include "kac/simulators.hpp"

using namespace kac;

namespace {

struct Outcome
{
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, std::string const& what)
    {
        if (!ok)
        {
            pass = false;
            detail << " [" << what << "]";
        }
    }
};

// Least-squares slope of -ln(y) against t.
double fitted_rate(std::vector<double> const& t, std::vector<double> const& y)
{
    double st = 0, sy = 0, stt = 0, sty = 0;
    auto const n = static_cast<double>(t.size());
    for (std::size_t k = 0; k < t.size(); ++k)
    {
        double const ly = std::log(y[k]);
        st += t[k];
        sy += ly;
        stt += t[k] * t[k];
        sty += t[k] * ly;
    }
    return -(n * sty - st * sy) / (n * stt - st * st);
}

Outcome conservation()
{
    Outcome o;
    double worst_e = 0.0, worst_p = 0.0;
    std::size_t const per_dim = 333'334;
    for (std::size_t d = 1; d <= 3; ++d)
    {
        Rng rng(2026, d);
        std::size_t const n = 8;
        MasterState s = isotropic_gaussian(d, n, 1.0)(rng);
        std::vector<double> sigma(d);
        for (std::size_t k = 0; k < per_dim; ++k)
        {
            std::size_t i = rng.index(n), j = rng.index(n - 1);
            if (j >= i)
                ++j;
            if (i > j)
                std::swap(i, j);
            uniform_sphere(rng, sigma);
            auto const v = s.particle(i), w = s.particle(j);
            double e0 = 0.0, e1 = 0.0, scale = 0.0;
            std::vector<double> p0(d);
            for (std::size_t a = 0; a < d; ++a)
            {
                e0 += v[a] * v[a] + w[a] * w[a];
                p0[a] = v[a] + w[a];
            }
            collide_in_place(s, i, j, sigma);
            double dp = 0.0;
            for (std::size_t a = 0; a < d; ++a)
            {
                e1 += v[a] * v[a] + w[a] * w[a];
                dp = std::max(dp, std::abs(v[a] + w[a] - p0[a]));
            }
            scale = std::sqrt(e0);
            worst_e = std::max(worst_e, std::abs(e1 - e0) / e0);
            worst_p = std::max(worst_p, dp / scale);
        }
    }
    o.detail << "collisions=" << 3 * per_dim << " max_rel_energy=" << worst_e << " max_rel_momentum=" << worst_p;
    o.require(worst_e <= 1e-12, "energy drift");
    o.require(worst_p <= 1e-12, "momentum drift");
    return o;
}

Outcome symmetry()
{
    Outcome o;
    std::size_t const n = 1'000'000;
    double const bound = 4.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t d : {2, 3})
    {
        Rng rng(7, d);
        std::vector<double> s(d), m(d * d, 0.0);
        for (std::size_t k = 0; k < n; ++k)
        {
            uniform_sphere(rng, s);
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = 0; b < d; ++b)
                    m[a * d + b] += s[a] * s[b];
        }
        double dev = 0.0;
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b)
                dev = std::max(dev, std::abs(m[a * d + b] / n - (a == b ? 1.0 / d : 0.0)));
        o.detail << " d=" << d << " dev=" << dev;
        o.require(dev <= bound, "d=" + std::to_string(d));
    }
    o.detail << " bound=" << bound;
    return o;
}

Outcome moment_odes()
{
    Outcome o;
    std::size_t const d = 3, N = 50, n_traj = 20000;
    double const beta0 = 0.5;
    std::vector<double> const drift{1.0, 0.5, 0.0};
    auto const grid = uniform_grid(5.0, 10);
    auto const init = isotropic_gaussian(d, N, beta0, drift);
    double const e0 = static_cast<double>(N) * (0.5 * d / beta0 + 0.5 * (1.0 + 0.25));

    std::vector<double> energy_rates;
    for (double lambda : {0.0, 1.0, 10.0})
    {
        ThermostatParams const p{d, N, lambda, 1.0, 1.0};
        auto const ens = simulate(p, init, 5.0, grid, n_traj, 100 + static_cast<std::uint64_t>(lambda));
        auto const e_ode = moment_ode(p, MomentKind::energy);
        auto const p_ode = moment_ode(p, MomentKind::momentum);
        double const e_inf = e_ode.equilibrium()(0);
        double max_z = 0.0;
        std::vector<double> gap;
        for (std::size_t k = 0; k < grid.size(); ++k)
        {
            double const expect = e_ode.solve(Eigen::VectorXd::Constant(1, e0), grid[k])(0);
            if (k > 0)
                max_z = std::max(max_z, std::abs(ens.energy_system.mean[k] - expect) / ens.energy_system.std_error[k]);
            gap.push_back(ens.energy_system.mean[k] - e_inf);
            for (std::size_t a = 0; a < d; ++a)
            {
                double const pe = p_ode.solve(Eigen::VectorXd::Constant(1, N * drift[a]), grid[k])(0);
                if (k > 0)
                    max_z = std::max(max_z, std::abs(ens.momentum[a].mean[k] - pe) / ens.momentum[a].std_error[k]);
            }
        }
        energy_rates.push_back(fitted_rate(grid, gap));
        double const p_rate = fitted_rate(grid, ens.momentum[0].mean);
        o.detail << " lambda=" << lambda << ":max_z=" << max_z << ",E_rate=" << energy_rates.back()
                 << ",p_rate=" << p_rate;
        o.require(max_z <= 3.0, "thermostat lambda=" + std::to_string(lambda) + " outside 3 stderr");
        o.require(std::abs(p_rate / (1.0 / d) - 1.0) <= 0.05, "momentum rate");
    }
    auto const [lo, hi] = std::minmax_element(energy_rates.begin(), energy_rates.end());
    o.require(*hi / *lo - 1.0 <= 0.05, "energy rate depends on lambda");

    ReservoirParams const r{3, 4, 16, 1.0, 1.0, 1.0, 1.0};
    auto const ens = simulate(r, isotropic_gaussian(3, 4, beta0), 5.0, grid, n_traj, 200);
    auto const ode = moment_ode(r, MomentKind::energy);
    Eigen::Vector2d x0(4 * 1.5 / beta0, 16 * 1.5);
    double max_z = 0.0;
    for (std::size_t k = 1; k < grid.size(); ++k)
    {
        double const expect = ode.solve(x0, grid[k])(0);
        max_z = std::max(max_z, std::abs(ens.energy_system.mean[k] - expect) / ens.energy_system.std_error[k]);
    }
    o.detail << " reservoir:max_z=" << max_z << ",drift=" << ens.max_total_energy_drift;
    o.require(ens.max_total_energy_drift <= 1e-10, "reservoir energy not conserved");
    o.require(max_z <= 3.0, "reservoir E_S outside 3 stderr");
    return o;
}

Outcome k_matrix()
{
    Outcome o;
    ReservoirParams const p{2, 2, 3, 1.0, 1.0, 1.0, 1.0};
    for (double t : {0.25, 0.5, 1.0, 2.0})
    {
        std::size_t const k_max = poisson_truncation(p.total_rate() * t, 1e-6);
        auto const est = k_coefficient_mc(t, p, 100000, k_max, 4040);
        double const z = std::abs(est.c_mc - k_coefficient_analytic(t, p).value) / est.std_error;
        double const iso = est.isotropy_residual / est.isotropy_stderr;
        o.detail << " t=" << t << ":z=" << z << ",iso=" << iso;
        o.require(z <= 3.0, "c_mc at t=" + std::to_string(t));
        o.require(iso < 3.0, "isotropy at t=" + std::to_string(t));
    }
    auto const P = PMatrix::from(p);
    Eigen::EigenSolver<Eigen::Matrix2d> es(P.matrix, false);
    std::vector<double> numeric{es.eigenvalues()(0).real(), es.eigenvalues()(1).real()};
    auto analytic = P.eigenvalues_analytic();
    std::sort(numeric.begin(), numeric.end());
    std::sort(analytic.begin(), analytic.end());
    double const err = std::max(std::abs(numeric[0] - analytic[0]), std::abs(numeric[1] - analytic[1]));
    o.detail << " eig_err=" << err;
    o.require(err <= 1e-12, "P-matrix eigenvalues");
    return o;
}

Outcome ou_commutation()
{
    Outcome o;
    double const beta = 1.0;
    GaussianComponent f;
    f.mean = Eigen::Vector2d(0.4, -0.3);
    f.covariance = Eigen::Matrix2d{{0.8, 0.2}, {0.2, 1.3}};
    auto const h = gaussian_ratio_field(f, beta);
    QuadratureSpec q;
    q.beta = beta;
    struct Named
    {
        char const* name;
        CollisionOpKind kind;
    };
    for (auto const& [name, kind] : {Named{"q_average", CollisionOpKind::q_average},
                                     Named{"thermostat", CollisionOpKind::thermostat},
                                     Named{"reservoir_pair", CollisionOpKind::reservoir_pair},
                                     Named{"marginal", CollisionOpKind::marginal}})
    {
        CollisionOp op;
        op.kind = kind;
        for (double s : {0.1, 0.5})
        {
            auto const res = commutation_refinement(h, s, op, q, {10, 20, 40});
            o.detail << " " << name << "@" << s << "=" << res.back();
            o.require(res.back() < 1e-6, std::string(name) + " residual");
            o.require(nonincreasing_with_floor(res), std::string(name) + " refinement");
        }
    }
    return o;
}

Outcome entropy_identity()
{
    Outcome o;
    double const beta = 1.0;
    for (double factor : {0.5, 2.0, 5.0})
    {
        double const a = factor / beta;
        auto const h = gaussian_ratio_field(GaussianComponent::isotropic(1, a), beta);
        QuadratureSpec q;
        q.beta = beta;
        q.order = 100;
        auto const r = entropy_from_information(information_curve(h, q), beta);
        double const exact = entropy_gaussian_isotropic(a, beta, 1);
        double const rel = std::abs(r.entropy - exact) / exact;
        o.detail << " a=" << factor << "/beta:rel=" << rel << ",tail=" << r.tail;
        o.require(rel <= 1e-4, "a=" + std::to_string(a));
    }
    return o;
}

Outcome thermostat_information()
{
    Outcome o;
    ThermostatParams const p{2, 3, 1.0, 1.0, 1.0};
    double const beta0 = 2.0 * p.beta;
    auto const init = GaussianComponent::isotropic(6, 1.0 / beta0);
    double const i0 = fisher_info_gaussian(init, p.beta);
    for (double t : {0.0, 0.5, 1.0, 2.0})
    {
        auto const mix = thermostat_mixture(init, p, t, 2000, 700);
        auto const est = fisher_info_mixture_mc(mix, 20000, 701);
        double const bound = std::exp(-p.mu * t / p.d) * i0;
        o.detail << " t=" << t << ":I=" << est.value << "+-" << est.std_error << ",bound=" << bound;
        o.require(est.value <= bound + 3.0 * est.std_error, "t=" + std::to_string(t));
    }
    return o;
}

Outcome reservoir_decay()
{
    Outcome o;
    ReservoirParams const p{2, 2, 6, 1.0, 1.0, 1.0, 1.0};
    double const beta0 = 2.0 * p.beta;
    auto const init = GaussianComponent::isotropic(4, 1.0 / beta0);
    double const h0 = entropy_gaussian(init, p.beta), i0 = fisher_info_gaussian(init, p.beta);
    auto const env = envelope("reservoir-entropy", EnvelopeParams{p.d, p.N, p.M, p.mu});
    for (double t : {0.5, 1.0, 2.0})
    {
        auto const mix = reservoir_mixture(init, p, t, 2000, 800);
        auto const f = mixture_functionals_mc(mix, 20000, 801);
        double const c = env(t);
        o.detail << " t=" << t << ":H=" << f.entropy.value << "/" << c * h0 << ",I=" << f.information.value << "/"
                 << c * i0;
        o.require(f.entropy.value <= c * h0 + 3.0 * f.entropy.std_error, "entropy t=" + std::to_string(t));
        o.require(f.information.value <= c * i0 + 3.0 * f.information.std_error,
                  "information t=" + std::to_string(t));
    }
    auto const th = envelope("thermostat-information", EnvelopeParams{p.d, p.N, 2, p.mu});
    auto const big = envelope("reservoir-information", EnvelopeParams{p.d, p.N, 10000, p.mu});
    double gap = 0.0;
    for (int k = 0; k <= 200; ++k)
        gap = std::max(gap, std::abs(big(0.05 * k) - th(0.05 * k)));
    o.detail << " M=1e4_gap=" << gap;
    o.require(gap <= 1e-3, "large reservoir");
    return o;
}

Outcome classic_kac()
{
    Outcome o;
    std::size_t checked = 0;
    for (std::size_t N = 1; N <= 12; ++N)
        for (std::size_t M = 2; M <= 12; ++M)
        {
            // At d = 1 the substituted reservoir rate mu (N+M)/(d M) must equal 2(N+M)/(N+M-1).
            auto const sub = classic_kac_exponent(1, N, M);
            auto const target = classic_kac_exponent_as_printed(N, M);
            auto const p = classic_kac_params(1, N, M);
            auto const L = static_cast<long long>(N + M - 1);
            bool const mu_exact = std::abs(p.mu * static_cast<double>(L) - 2.0 * static_cast<double>(M)) == 0.0;
            o.require(sub == target && mu_exact, "N=" + std::to_string(N) + " M=" + std::to_string(M));
            ++checked;
        }
    o.detail << "pairs=" << checked << " exponent 2(N+M)/(N+M-1) at d=1; d>1 carries an extra 1/d";
    return o;
}

Outcome functional_oracles()
{
    Outcome o;
    double worst = 0.0;
    for (double beta : {1.0, 2.0})
        for (double factor : {0.5, 2.0, 5.0})
        {
            double const a = factor / beta;
            auto gauss = [a](double x) { return std::exp(-x * x / (2 * a)) / std::sqrt(2 * std::numbers::pi * a); };
            for (std::size_t n : {1, 2})
            {
                // Dense tensor trapezoid on [-L, L]^n.
                double const L = 14.0 * std::sqrt(std::max(a, 1.0 / beta));
                int const m = n == 1 ? 20000 : 1600;
                double const hstep = 2 * L / m;
                double H = 0.0, I = 0.0;
                for (int i = 0; i <= m; ++i)
                    for (int j = 0; j <= (n == 2 ? m : 0); ++j)
                    {
                        double const x = -L + i * hstep, y = n == 2 ? -L + j * hstep : 0.0;
                        double const wi = (i == 0 || i == m) ? 0.5 : 1.0;
                        double const wj = n == 1 ? 1.0 : ((j == 0 || j == m) ? 0.5 : 1.0);
                        double const f = gauss(x) * (n == 2 ? gauss(y) : 1.0);
                        if (f == 0.0)
                            continue;
                        double const r2 = x * x + y * y;
                        double const log_ratio = -r2 / (2 * a) - 0.5 * n * std::log(2 * std::numbers::pi * a) +
                                                 beta * r2 / 2 + 0.5 * n * std::log(2 * std::numbers::pi / beta);
                        double const score2 = r2 * (beta - 1 / a) * (beta - 1 / a);
                        double const w = wi * wj * std::pow(hstep, static_cast<double>(n));
                        H += w * f * log_ratio;
                        I += w * f * score2;
                    }
                double const eh = entropy_gaussian_isotropic(a, beta, n);
                double const ei = fisher_info_gaussian_isotropic(a, beta, n);
                worst = std::max({worst, std::abs(H - eh) / std::max(1.0, eh), std::abs(I - ei) / std::max(1.0, ei)});
            }
        }
    o.detail << "quadrature_err=" << worst;
    o.require(worst <= 1e-8, "quadrature");

    GaussianComponent c;
    c.mean = Eigen::Vector3d(0.5, -0.2, 0.1);
    c.covariance = Eigen::Matrix3d{{1.2, 0.3, 0.0}, {0.3, 0.8, 0.1}, {0.0, 0.1, 0.6}};
    GaussianMixtureState const s{{0.5, 0.5}, {c, c}, 1.5};
    double const eh = entropy_gaussian(c, 1.5), ei = fisher_info_gaussian(c, 1.5);
    for (std::uint64_t seed : {11, 12, 13})
    {
        auto const f = mixture_functionals_mc(s, 100000, seed);
        double const zh = std::abs(f.entropy.value - eh) / f.entropy.std_error;
        double const zi = std::abs(f.information.value - ei) / f.information.std_error;
        o.detail << " seed" << seed << ":zH=" << zh << ",zI=" << zi;
        o.require(zh <= 3.0 && zi <= 3.0, "mixture seed " + std::to_string(seed));
    }
    return o;
}

} // namespace

int main()
{
    struct Criterion
    {
        int id;
        char const* name;
        std::function<Outcome()> run;
    };
    std::vector<Criterion> const criteria{
        {1, "conservation", conservation},
        {2, "symmetry-condition", symmetry},
        {3, "moment-odes", moment_odes},
        {4, "k-matrix", k_matrix},
        {5, "ou-commutation", ou_commutation},
        {6, "entropy-information-identity", entropy_identity},
        {7, "thermostat-information-decay", thermostat_information},
        {8, "reservoir-decay", reservoir_decay},
        {9, "classic-kac-exponent", classic_kac},
        {10, "functional-oracles", functional_oracles},
    };
    bool all = true;
    for (auto const& c : criteria)
    {
        auto const start = std::chrono::steady_clock::now();
        Outcome o;
        try
        {
            o = c.run();
        }
        catch (std::exception const& e)
        {
            o.pass = false;
            o.detail << " exception: " << e.what();
        }
        double const secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        all = all && o.pass;
        std::printf("%s %d %s (%.1fs) %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.str().c_str());
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
