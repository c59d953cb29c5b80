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

#include "kac/cli/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "kac/gaussian_states.hpp"
#include "kac/histories.hpp"
#include "kac/kinematics.hpp"
#include "kac/oracles.hpp"
#include "kac/ou_semigroup.hpp"
#include "kac/random.hpp"
#include "kac/simulators.hpp"

namespace kac::cli {
namespace {

using Kernel = std::function<void(std::span<double>, std::span<double>, std::span<double const>)>;

// Mutation used by the fault-injection hook: the reflection with its sign flipped.
void reflect_wrong_sign(std::span<double> v, std::span<double> w, std::span<double const> sigma)
{
    double proj = 0.0;
    for (std::size_t k = 0; k < sigma.size(); ++k)
        proj += sigma[k] * (v[k] - w[k]);
    for (std::size_t k = 0; k < sigma.size(); ++k)
    {
        v[k] += proj * sigma[k];
        w[k] -= proj * sigma[k];
    }
}

constexpr double kInf = std::numeric_limits<double>::infinity();

class Battery
{
  public:
    Battery(ExperimentConfig const& c) : config_(c) {}

    void deterministic(std::string name, std::string provenance, double default_tol, std::function<double()> fn)
    {
        run(std::move(name), std::move(provenance), false, default_tol, [&] { return std::pair{fn(), 0.0}; });
    }

    //! fn returns (value, noise) with value in the same units as the tolerance.
    void statistical(std::string name, std::string provenance, double default_tol,
                     std::function<std::pair<double, double>()> fn)
    {
        run(std::move(name), std::move(provenance), true, default_tol, fn);
    }

    VerifyReport take() { return std::move(report_); }

  private:
    template <class Fn>
    void run(std::string name, std::string provenance, bool statistical, double default_tol, Fn&& fn)
    {
        CheckResult r;
        r.name = std::move(name);
        r.provenance = std::move(provenance);
        r.statistical = statistical;
        r.tolerance = default_tol;
        auto const& overrides = config_.verify.tolerances;
        if (overrides.contains(r.name))
            r.tolerance = overrides[r.name].template get<double>();
        try
        {
            auto const [value, noise] = fn();
            r.value = value;
            r.noise = noise;
            r.status = classify_check(statistical, value, r.tolerance, noise);
        }
        catch (std::exception const& e)
        {
            r.value = kInf;
            r.status = CheckStatus::fail;
            r.detail = e.what();
        }
        report_.checks.push_back(std::move(r));
    }

    ExperimentConfig const& config_;
    VerifyReport report_;
};

double conservation_drift(Kernel const& kernel, std::uint64_t seed)
{
    double worst = 0.0;
    for (std::size_t d = 1; d <= 3; ++d)
    {
        Rng rng(seed, d);
        std::vector<double> v(d), w(d), sigma(d);
        for (int n = 0; n < 100000; ++n)
        {
            double e0 = 0.0;
            std::vector<double> p0(d);
            for (std::size_t k = 0; k < d; ++k)
            {
                v[k] = 2.0 * rng.normal();
                w[k] = 2.0 * rng.normal();
                e0 += v[k] * v[k] + w[k] * w[k];
                p0[k] = v[k] + w[k];
            }
            uniform_sphere(rng, sigma);
            kernel(v, w, sigma);
            double e1 = 0.0;
            double dp = 0.0;
            for (std::size_t k = 0; k < d; ++k)
            {
                e1 += v[k] * v[k] + w[k] * w[k];
                dp = std::max(dp, std::abs(v[k] + w[k] - p0[k]));
            }
            worst = std::max({worst, std::abs(e1 - e0) / e0, dp / std::sqrt(e0)});
        }
    }
    return worst;
}

double involution_error(Kernel const& kernel, std::uint64_t seed)
{
    double worst = 0.0;
    for (std::size_t d = 1; d <= 3; ++d)
    {
        Rng rng(seed, 10 + d);
        std::vector<double> v(d), w(d), sigma(d);
        for (int n = 0; n < 10000; ++n)
        {
            for (std::size_t k = 0; k < d; ++k)
            {
                v[k] = rng.normal();
                w[k] = rng.normal();
            }
            auto const v0 = v;
            auto const w0 = w;
            uniform_sphere(rng, sigma);
            kernel(v, w, sigma);
            kernel(v, w, sigma);
            for (std::size_t k = 0; k < d; ++k)
                worst = std::max({worst, std::abs(v[k] - v0[k]), std::abs(w[k] - w0[k])});
        }
    }
    return worst;
}

std::pair<double, double> symmetry_z(std::uint64_t seed)
{
    constexpr std::size_t n = 200000;
    double worst = 0.0;
    for (std::size_t d = 2; d <= 3; ++d)
    {
        Rng rng(seed, 20 + d);
        std::vector<double> sigma(d);
        Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        for (std::size_t s = 0; s < n; ++s)
        {
            uniform_sphere(rng, sigma);
            Eigen::Map<Eigen::VectorXd> x(sigma.data(), static_cast<Eigen::Index>(d));
            sum += x * x.transpose();
        }
        Eigen::MatrixXd dev = sum / static_cast<double>(n);
        dev.diagonal().array() -= 1.0 / static_cast<double>(d);
        worst = std::max(worst, dev.cwiseAbs().maxCoeff() * std::sqrt(static_cast<double>(n)));
    }
    // In units of 1/sqrt(n); an entry's standard error is below one such unit.
    return {worst, 1.0};
}

double max_z(std::vector<double> const& mean, std::vector<double> const& se, std::vector<double> const& oracle)
{
    double z = 0.0;
    for (std::size_t k = 0; k < mean.size(); ++k)
    {
        double const diff = std::abs(mean[k] - oracle[k]);
        if (se[k] > 0.0)
            z = std::max(z, diff / se[k]);
        else if (diff > 1e-12 * std::max(1.0, std::abs(oracle[k])))
            z = kInf;
    }
    return z;
}

double trapezoid_functional(double a, double beta, bool information)
{
    double const L = 20.0 * std::sqrt(std::max(a, 1.0 / beta));
    std::size_t const n = 8001;
    double const h = 2.0 * L / static_cast<double>(n - 1);
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k)
    {
        double const v = -L + h * static_cast<double>(k);
        double const log_f = -0.5 * std::log(2.0 * std::numbers::pi * a) - v * v / (2.0 * a);
        double const log_g = 0.5 * std::log(beta / (2.0 * std::numbers::pi)) - beta * v * v / 2.0;
        double const f = std::exp(log_f);
        double const score = -v / a + beta * v;
        double const integrand = information ? f * score * score : f * (log_f - log_g);
        total += (k == 0 || k + 1 == n ? 0.5 : 1.0) * integrand;
    }
    return total * h;
}

} // namespace

std::string to_string(CheckStatus s)
{
    switch (s)
    {
    case CheckStatus::pass:
        return "pass";
    case CheckStatus::fail:
        return "fail";
    case CheckStatus::inconclusive:
        return "inconclusive";
    }
    return "?";
}

CheckStatus classify_check(bool statistical, double value, double tolerance, double noise)
{
    if (value <= tolerance)
        return CheckStatus::pass;
    if (statistical && std::isfinite(value) && tolerance < 3.0 * noise)
        return CheckStatus::inconclusive;
    return CheckStatus::fail;
}

bool VerifyReport::passed() const
{
    return std::none_of(checks.begin(), checks.end(), [](auto const& c) { return c.status == CheckStatus::fail; });
}

Json VerifyReport::to_json() const
{
    Json summary;
    for (auto s : {CheckStatus::pass, CheckStatus::fail, CheckStatus::inconclusive})
        summary[to_string(s)] =
            std::count_if(checks.begin(), checks.end(), [s](auto const& c) { return c.status == s; });
    Json list = Json::array();
    for (auto const& c : checks)
    {
        Json j;
        j["name"] = c.name;
        j["status"] = to_string(c.status);
        j["kind"] = c.statistical ? "statistical" : "deterministic";
        j["value"] = std::isfinite(c.value) ? Json(c.value) : Json("inf");
        j["tolerance"] = c.tolerance;
        j["noise"] = c.noise;
        j["provenance"] = c.provenance;
        if (!c.detail.empty())
            j["detail"] = c.detail;
        list.push_back(j);
    }
    Json out;
    out["passed"] = passed();
    out["summary"] = summary;
    out["checks"] = list;
    return out;
}

std::vector<std::string> verify_check_names()
{
    return {"conservation",
            "reflection-involution",
            "collision-matrix-orthogonal",
            "symmetry-condition",
            "one-collision-moments",
            "energy-ode-thermostat",
            "energy-ode-reservoir",
            "reservoir-energy-conservation",
            "k-matrix-sum-rule",
            "k-matrix-isotropy",
            "p-matrix-eigenvalues",
            "ou-semigroup",
            "ou-self-adjoint",
            "ou-commutation",
            "entropy-information-identity",
            "gaussian-functionals-quadrature",
            "info-transform-relation",
            "mixture-mc-closed-form",
            "thermostat-information-decay",
            "classic-kac-exponent",
            "envelope-limits",
            "envelope-large-reservoir"};
}

VerifyReport run_verify(ExperimentConfig const& config)
{
    Battery b(config);
    std::uint64_t const seed = config.seed;
    std::size_t const workers = config.workers;
    Kernel const kernel = config.verify.inject_fault ? Kernel(reflect_wrong_sign) : Kernel(reflect);

    b.deterministic("conservation", "reflection map conserves kinetic energy and momentum", 1e-12,
                    [&] { return conservation_drift(kernel, seed); });
    b.deterministic("reflection-involution", "reflection map is an involution", 1e-12,
                    [&] { return involution_error(kernel, seed); });
    b.deterministic("collision-matrix-orthogonal", "collision matrix is orthogonal and symmetric", 1e-12, [&] {
        Rng rng(seed, 30);
        double worst = 0.0;
        for (std::size_t d = 1; d <= 3; ++d)
        {
            PairCollision const c(0, 2, sample_scattering_angle(d, rng));
            Eigen::MatrixXd const M = collision_matrix_dense(c, 3, d);
            auto const n = M.rows();
            worst = std::max({worst, (M * M.transpose() - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(),
                              (M - M.transpose()).cwiseAbs().maxCoeff(), std::abs(std::abs(M.determinant()) - 1.0)});
        }
        return worst;
    });
    b.statistical("symmetry-condition", "uniform scattering measure satisfies E[sigma sigma^T] = I/d", 4.0,
                  [&] { return symmetry_z(seed); });
    b.statistical("one-collision-moments", "sigma-averaged collision moments, closed form vs Monte Carlo", 4.0, [&] {
        double z = 0.0;
        std::uint64_t k = 0;
        for (std::size_t d = 1; d <= 3; ++d)
            for (double beta : {0.5, 1.0, 2.0})
                for (auto kind : {CollisionKind::thermostat, CollisionKind::cross})
                    z = std::max(z, one_collision_moment_mc(d, beta, kind, 20000, substream(seed, k++), uniform_sphere,
                                                            kInf)
                                        .max_z);
        return std::pair{z, 1.0};
    });
    b.statistical("energy-ode-thermostat", "thermostat DSMC energy and momentum vs generator-derived moment ODE", 4.0,
                  [&] {
                      ThermostatParams p{3, 10, 1.0, 1.0, 1.0};
                      std::vector<double> const drift{1.0, 0.5, 0.0};
                      auto const grid = uniform_grid(2.0, 4);
                      SimulateOptions opt;
                      opt.workers = workers;
                      auto const e = simulate(p, isotropic_gaussian(3, 10, 0.5, drift), 2.0, grid, 4000, seed, opt);
                      auto const ode_e = moment_ode(p, MomentKind::energy);
                      auto const ode_p = moment_ode(p, MomentKind::momentum);
                      double const e0 = 10.0 * (1.5 / 0.5 + 0.5 * 1.25);
                      std::vector<double> oracle;
                      for (double t : grid)
                          oracle.push_back(ode_e.solve(Eigen::VectorXd::Constant(1, e0), t)(0));
                      double z = max_z(e.energy_system.mean, e.energy_system.std_error, oracle);
                      for (std::size_t c = 0; c < 3; ++c)
                      {
                          oracle.clear();
                          for (double t : grid)
                              oracle.push_back(ode_p.solve(Eigen::VectorXd::Constant(1, 10.0 * drift[c]), t)(0));
                          z = std::max(z, max_z(e.momentum[c].mean, e.momentum[c].std_error, oracle));
                      }
                      return std::pair{z, 1.0};
                  });
    double reservoir_drift = kInf;
    b.statistical("energy-ode-reservoir", "reservoir DSMC system energy vs generator-derived moment ODE", 4.0, [&] {
        ReservoirParams p{3, 4, 16, 1.0, 1.0, 1.0, 1.0};
        auto const grid = uniform_grid(2.0, 4);
        SimulateOptions opt;
        opt.workers = workers;
        auto const e = simulate(p, isotropic_gaussian(3, 4, 0.5), 2.0, grid, 2000, seed + 1, opt);
        reservoir_drift = e.max_total_energy_drift;
        auto const ode = moment_ode(p, MomentKind::energy);
        Eigen::Vector2d const x0(4.0 * 1.5 / 0.5, 16.0 * 1.5);
        std::vector<double> oracle;
        for (double t : grid)
            oracle.push_back(ode.solve(x0, t)(0));
        return std::pair{max_z(e.energy_system.mean, e.energy_system.std_error, oracle), 1.0};
    });
    b.deterministic("reservoir-energy-conservation", "reservoir model conserves E_S + E_R along trajectories", 1e-10,
                    [&] { return reservoir_drift; });

    ReservoirParams const kp{2, 2, 3, 1.0, 1.0, 1.0, 1.0};
    std::vector<KEstimate> kest;
    b.statistical("k-matrix-sum-rule", "history average of A^T A equals c(t) I", 3.0, [&] {
        double z = 0.0;
        std::uint64_t k = 0;
        for (double t : {0.5, 1.0})
        {
            auto const est = k_coefficient_mc(t, kp, 20000, poisson_truncation(kp.total_rate() * t),
                                              substream(seed, 100 + k++), workers);
            z = std::max(z, std::abs(est.c_mc - k_coefficient_analytic(t, kp).value) / est.std_error);
            kest.push_back(est);
        }
        return std::pair{z, 1.0};
    });
    b.statistical("k-matrix-isotropy", "off-diagonal part of the averaged A^T A vanishes", 3.0, [&] {
        double z = 0.0;
        for (auto const& est : kest)
            z = std::max(z, est.isotropy_residual / est.isotropy_stderr);
        if (kest.empty())
            throw std::runtime_error("sum-rule estimates unavailable");
        return std::pair{z, 1.0};
    });
    b.deterministic("p-matrix-eigenvalues", "P-matrix spectrum {1, 1 - mu(N+M)/(d Lambda M)}", 1e-12, [&] {
        auto const P = PMatrix::from(kp);
        Eigen::EigenSolver<Eigen::Matrix2d> es(P.matrix, false);
        std::vector<double> num{es.eigenvalues()(0).real(), es.eigenvalues()(1).real()};
        auto const an = P.eigenvalues_analytic();
        std::vector<double> ref(an.begin(), an.end());
        std::sort(num.begin(), num.end());
        std::sort(ref.begin(), ref.end());
        return std::max(std::abs(num[0] - ref[0]), std::abs(num[1] - ref[1]));
    });

    QuadratureSpec q;
    q.beta = config.beta;
    q.workers = workers;
    auto const h1 = gaussian_ratio_field(GaussianComponent::isotropic(Eigen::VectorXd::Constant(1, 0.2), 0.7 / q.beta),
                                         q.beta);
    b.deterministic("ou-semigroup", "P_s P_t = P_{s+t}", 1e-6, [&] { return check_semigroup(h1, 0.3, 0.3, q); });
    b.deterministic("ou-self-adjoint", "P_s is self-adjoint in L2(gamma)", 1e-8, [&] {
        ScalarField F{1, [](std::span<double const> v) { return 1.0 + v[0] + v[0] * v[0]; }, {}, {}};
        ScalarField G{1, [](std::span<double const> v) { return v[0] * v[0] * v[0] - v[0]; }, {}, {}};
        return check_self_adjoint(F, G, 0.4, q);
    });
    b.deterministic("ou-commutation", "OU semigroup commutes with thermostat collisions and marginals", 1e-6, [&] {
        GaussianComponent f;
        f.mean = Eigen::Vector2d(0.3, -0.2);
        f.covariance.resize(2, 2);
        f.covariance << 0.8, 0.2, 0.2, 0.7;
        f.covariance /= q.beta;
        auto const h2 = gaussian_ratio_field(f, q.beta);
        double worst = 0.0;
        for (auto kind : {CollisionOpKind::thermostat, CollisionOpKind::marginal})
        {
            CollisionOp op;
            op.kind = kind;
            op.j = 1;
            auto const res = commutation_refinement(h2, 0.5, op, q, {20, 40});
            if (!nonincreasing_with_floor(res))
                return kInf;
            worst = std::max(worst, res.back());
        }
        return worst;
    });
    b.deterministic("entropy-information-identity", "Ent = (1/beta) int_0^inf I(P_s h) ds", 1e-4, [&] {
        double const a = 2.0 / q.beta;
        QuadratureSpec qe = q;
        qe.order = 100;
        auto const h = gaussian_ratio_field(GaussianComponent::isotropic(1, a), q.beta);
        auto const r = entropy_from_information(information_curve(h, qe), q.beta);
        double const exact = entropy_gaussian_isotropic(a, q.beta, 1);
        return (std::abs(r.entropy - exact) + r.tail / q.beta) / exact;
    });
    b.deterministic("gaussian-functionals-quadrature", "closed-form Gaussian entropy and information vs quadrature",
                    1e-8, [&] {
                        double worst = 0.0;
                        for (double factor : {0.5, 2.0, 5.0})
                        {
                            double const a = factor / config.beta;
                            worst = std::max(
                                {worst,
                                 std::abs(entropy_gaussian_isotropic(a, config.beta, 1) -
                                          trapezoid_functional(a, config.beta, false)),
                                 std::abs(fisher_info_gaussian_isotropic(a, config.beta, 1) -
                                          trapezoid_functional(a, config.beta, true))});
                        }
                        return worst;
                    });
    b.deterministic("info-transform-relation", "I_gamma(h) = I(f) + 2 beta^2 (E - dN/beta) on Gaussians", 1e-10, [&] {
        Rng rng(seed, 40);
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial)
        {
            Eigen::MatrixXd B(4, 4);
            for (Eigen::Index k = 0; k < B.size(); ++k)
                B.data()[k] = rng.normal();
            GaussianComponent g;
            g.covariance = B * B.transpose() + 0.5 * Eigen::MatrixXd::Identity(4, 4);
            g.mean = Eigen::VectorXd(4);
            for (Eigen::Index k = 0; k < 4; ++k)
                g.mean(k) = rng.normal();
            double const beta = 0.5 + 1.5 * rng.uniform();
            double const lhs = fisher_info_gaussian(g, beta);
            double const rhs = info_transform_relation(fisher_info_plain_gaussian(g), kinetic_energy(g), 4, beta);
            worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
        }
        return worst;
    });
    b.statistical("mixture-mc-closed-form", "mixture Monte Carlo functionals vs Gaussian closed forms", 3.0, [&] {
        double z = 0.0;
        double const a = 2.0 / config.beta;
        GaussianMixtureState s{{1.0}, {GaussianComponent::isotropic(2, a)}, config.beta};
        MixtureOptions mo;
        mo.workers = workers;
        for (std::uint64_t k = 0; k < 3; ++k)
        {
            auto const f = mixture_functionals_mc(s, 20000, substream(seed, 200 + k), mo);
            z = std::max({z, std::abs(f.entropy.value - entropy_gaussian_isotropic(a, config.beta, 2)) / f.entropy.std_error,
                          std::abs(f.information.value - fisher_info_gaussian_isotropic(a, config.beta, 2)) /
                              f.information.std_error});
        }
        return std::pair{z, 1.0};
    });
    b.statistical("thermostat-information-decay", "thermostat information below exp(-mu t/d) I(h_0)", 3.0, [&] {
        ThermostatParams p{2, 2, 1.0, 1.0, 1.0};
        auto const g0 = GaussianComponent::isotropic(4, 0.5);
        double const i0 = fisher_info_gaussian(g0, 1.0);
        auto const env = envelope("thermostat-information", {2, 2, 2, 1.0});
        MixtureOptions mo;
        mo.workers = workers;
        double z = -kInf;
        std::uint64_t k = 0;
        for (double t : {0.5, 1.0})
        {
            auto const mix = thermostat_mixture(g0, p, t, 400, substream(seed, 300 + k), workers);
            auto const est = fisher_info_mixture_mc(mix, 4000, substream(seed, 400 + k), mo);
            z = std::max(z, (est.value - env(t) * i0) / est.std_error);
            ++k;
        }
        return std::pair{z, 1.0};
    });
    b.deterministic("classic-kac-exponent", "classic Kac substitution gives exponent 2(N+M)/(N+M-1) at d = 1", 0.0,
                    [&] {
                        double bad = 0.0;
                        for (std::size_t N = 1; N <= 6; ++N)
                            for (std::size_t M = 2; M <= 8; ++M)
                            {
                                if (!(classic_kac_exponent(1, N, M) == classic_kac_exponent_as_printed(N, M)))
                                    bad += 1.0;
                                auto const p = classic_kac_params(1, N, M);
                                double const per_pair = 2.0 / (static_cast<double>(N + M) - 1.0);
                                double const cross = p.mu / static_cast<double>(M);
                                double const res = p.lambda_R / (static_cast<double>(M) - 1.0);
                                if (std::abs(cross - per_pair) > 1e-15 || std::abs(res - per_pair) > 1e-15)
                                    bad += 1.0;
                                if (N > 1 &&
                                    std::abs(p.lambda_S / (static_cast<double>(N) - 1.0) - per_pair) > 1e-15)
                                    bad += 1.0;
                            }
                        return bad;
                    });
    b.deterministic("envelope-limits", "envelopes start at 1 and tend to N/(N+M) or 0", 1e-12, [&] {
        EnvelopeParams const ep{2, 2, 6, 1.0};
        double worst = 0.0;
        for (auto const& id : envelope_ids())
        {
            auto const e = envelope(id, ep);
            worst = std::max({worst, std::abs(e(0.0) - 1.0), std::abs(e(1e6) - e.floor)});
        }
        return worst;
    });
    b.deterministic("envelope-large-reservoir", "reservoir envelope at M = 1e4 approaches the thermostat envelope",
                    1e-3, [&] {
                        auto const res = envelope("reservoir-information", {2, 2, 10000, 1.0});
                        auto const th = envelope("thermostat-information", {2, 2, 2, 1.0});
                        double worst = 0.0;
                        for (int k = 0; k <= 100; ++k)
                        {
                            double const t = 0.1 * k;
                            worst = std::max(worst, std::abs(res(t) - th(t)));
                        }
                        return worst;
                    });
    return b.take();
}

} // namespace kac::cli
