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

#include "kac/cli/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <sstream>

#include "kac/histories.hpp"
#include "kac/oracles.hpp"
#include "kac/ou_semigroup.hpp"

namespace kac::cli {
namespace {

constexpr std::uint64_t kHistorySeedTag = 0x68697374ull;
constexpr std::uint64_t kSampleSeedTag = 0x73616d70ull;

std::string csv_field(std::string const& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char ch : s)
    {
        if (ch == '"')
            out += '"';
        out += ch;
    }
    return out + "\"";
}

bool is_reservoir(ExperimentConfig const& c)
{
    return c.model != Model::thermostat;
}

std::string thermostat_energy_provenance()
{
    return "E_oracle: generator-derived rate mu/d, equilibrium dN/(2*beta); "
           "E_paper_printed: rate mu/(2d), equilibrium dN/beta";
}

std::string reservoir_energy_provenance()
{
    return "E_oracle: generator-derived rate mu*(N+M)/(d*M), limit N/(N+M)*E; "
           "E_paper_printed: rate mu*(N+M)/(2*d*M)";
}

Ensemble run_dsmc(ExperimentConfig const& c)
{
    SimulateOptions opt;
    opt.workers = c.workers;
    double const t_end = c.times.back();
    if (is_reservoir(c))
        return simulate(c.reservoir_params(), initial_sampler(c), t_end, c.times, c.trajectories, c.seed, opt);
    return simulate(c.thermostat_params(), initial_sampler(c), t_end, c.times, c.trajectories, c.seed, opt);
}

std::string envelope_id(Model m, bool information)
{
    switch (m)
    {
    case Model::thermostat:
        return information ? "thermostat-information" : "thermostat-entropy";
    case Model::reservoir:
        return information ? "reservoir-information" : "reservoir-entropy";
    case Model::classic_kac:
        return "classic-kac";
    }
    return {};
}

CsvTable functional_decay(ExperimentConfig const& c, bool information)
{
    GaussianComponent const g0 = initial_component(c);
    double const value0 = information ? fisher_info_gaussian(g0, c.beta) : entropy_gaussian(g0, c.beta);
    ReservoirParams const rp = c.reservoir_params();
    EnvelopeParams ep{c.d, c.N, c.M, is_reservoir(c) ? rp.mu : c.mu};
    DecayEnvelope const env = envelope(envelope_id(c.model, information), ep);

    CsvTable t;
    std::string const sym = information ? "I" : "H";
    t.columns = {"t", sym + "_mc", sym + "_stderr", sym + "0", "envelope", "bound", "rejected", "provenance"};
    MixtureOptions mo;
    mo.workers = c.workers;
    for (std::size_t k = 0; k < c.times.size(); ++k)
    {
        double const time = c.times[k];
        std::uint64_t const history_seed = substream(c.seed ^ kHistorySeedTag, k);
        std::uint64_t const sample_seed = substream(c.seed ^ kSampleSeedTag, k);
        GaussianMixtureState const mix =
            is_reservoir(c) ? reservoir_mixture(g0, rp, time, c.histories, history_seed, c.workers)
                            : thermostat_mixture(g0, c.thermostat_params(), time, c.histories, history_seed, c.workers);
        auto const f = mixture_functionals_mc(mix, c.mc_samples, sample_seed, mo);
        auto const& est = information ? f.information : f.entropy;
        double const e = env(time);
        t.rows.push_back({format_number(time), format_number(est.value), format_number(est.std_error),
                          format_number(value0), format_number(e), format_number(e * value0),
                          std::to_string(est.rejected), env.provenance});
    }
    return t;
}

} // namespace

std::string format_number(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string utc_timestamp()
{
    std::time_t const now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string render_csv(std::string const& command, Json const& config, CsvTable const& table,
                       std::string const& timestamp)
{
    std::ostringstream out;
    out << "# kacsim " << command << '\n';
    out << "# generated " << timestamp << '\n';
    out << "# config " << config.dump() << '\n';
    for (std::size_t k = 0; k < table.columns.size(); ++k)
        out << (k ? "," : "") << csv_field(table.columns[k]);
    out << '\n';
    for (auto const& row : table.rows)
    {
        for (std::size_t k = 0; k < row.size(); ++k)
            out << (k ? "," : "") << csv_field(row[k]);
        out << '\n';
    }
    return out.str();
}

std::string render_json(std::string const& command, Json const& config, Json const& result,
                        std::string const& timestamp)
{
    Json j;
    j["command"] = command;
    j["generated"] = timestamp;
    j["config"] = config;
    j["result"] = result;
    return j.dump(2) + "\n";
}

InitialSampler initial_sampler(ExperimentConfig const& c)
{
    if (c.initial.kind == "energy-sphere")
        return energy_sphere(c.d, c.N, c.initial.energy);
    return isotropic_gaussian(c.d, c.N, c.initial.beta0, c.drift());
}

double initial_energy(ExperimentConfig const& c)
{
    if (c.initial.kind == "energy-sphere")
        return c.initial.energy;
    double u2 = 0.0;
    for (double u : c.drift())
        u2 += u * u;
    return static_cast<double>(c.N) * (0.5 * static_cast<double>(c.d) / c.initial.beta0 + 0.5 * u2);
}

GaussianComponent initial_component(ExperimentConfig const& c)
{
    if (c.initial.kind != "gaussian")
        throw ConfigError("initial.kind", "functional decay needs gaussian initial data");
    auto const n = static_cast<Eigen::Index>(c.d * c.N);
    auto const drift = c.drift();
    Eigen::VectorXd mean(n);
    for (Eigen::Index k = 0; k < n; ++k)
        mean(k) = drift[static_cast<std::size_t>(k) % c.d];
    return GaussianComponent::isotropic(std::move(mean), 1.0 / c.initial.beta0);
}

CsvTable energy_decay(ExperimentConfig const& c)
{
    Ensemble const e = run_dsmc(c);
    double const e0 = initial_energy(c);
    CsvTable t;
    if (!is_reservoir(c))
    {
        auto const p = c.thermostat_params();
        MomentODE const ode = moment_ode(p, MomentKind::energy);
        t.columns = {"t", "E_mean", "E_stderr", "E_oracle", "E_paper_printed", "provenance"};
        for (std::size_t k = 0; k < e.times.size(); ++k)
        {
            double const time = e.times[k];
            t.rows.push_back({format_number(time), format_number(e.energy_system.mean[k]),
                              format_number(e.energy_system.std_error[k]),
                              format_number(ode.solve(Eigen::VectorXd::Constant(1, e0), time)(0)),
                              format_number(thermostat_energy_as_printed(p, e0, time)), thermostat_energy_provenance()});
        }
        return t;
    }
    auto const p = c.reservoir_params();
    MomentODE const ode = moment_ode(p, MomentKind::energy);
    double const er0 = 0.5 * static_cast<double>(p.d * p.M) / p.beta;
    Eigen::Vector2d const x0(e0, er0);
    t.columns = {"t", "E_mean", "E_stderr", "E_oracle", "E_paper_printed", "E_R_mean", "E_R_stderr", "E_R_oracle",
                 "provenance"};
    for (std::size_t k = 0; k < e.times.size(); ++k)
    {
        double const time = e.times[k];
        Eigen::VectorXd const x = ode.solve(x0, time);
        t.rows.push_back({format_number(time), format_number(e.energy_system.mean[k]),
                          format_number(e.energy_system.std_error[k]), format_number(x(0)),
                          format_number(reservoir_energy_as_printed(p, e0, e0 + er0, time)),
                          format_number(e.energy_reservoir.mean[k]), format_number(e.energy_reservoir.std_error[k]),
                          format_number(x(1)), reservoir_energy_provenance()});
    }
    return t;
}

CsvTable momentum_decay(ExperimentConfig const& c)
{
    Ensemble const e = run_dsmc(c);
    std::vector<double> p0 = c.initial.kind == "gaussian" ? c.drift() : std::vector<double>(c.d, 0.0);
    for (double& x : p0)
        x *= static_cast<double>(c.N);

    CsvTable t;
    t.columns = {"t", "component", "p_mean", "p_stderr", "p_oracle", "p_paper_printed", "provenance"};
    MomentODE const ode = is_reservoir(c) ? moment_ode(c.reservoir_params(), MomentKind::momentum)
                                          : moment_ode(c.thermostat_params(), MomentKind::momentum);
    std::string const provenance = is_reservoir(c)
                                       ? "p_oracle: generator-derived rate mu*(N+M)/(d*M); no printed curve"
                                       : "p_oracle: generator-derived rate mu/d; p_paper_printed: rate mu/d";
    for (std::size_t k = 0; k < e.times.size(); ++k)
    {
        double const time = e.times[k];
        for (std::size_t comp = 0; comp < c.d; ++comp)
        {
            Eigen::VectorXd x0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ode.size()));
            x0(0) = p0[comp];
            double const oracle = ode.solve(x0, time)(0);
            std::string printed;
            if (!is_reservoir(c))
                printed = format_number(std::exp(-c.mu * time / static_cast<double>(c.d)) * p0[comp]);
            t.rows.push_back({format_number(time), std::to_string(comp), format_number(e.momentum[comp].mean[k]),
                              format_number(e.momentum[comp].std_error[k]), format_number(oracle), printed,
                              provenance});
        }
    }
    return t;
}

Json k_matrix(ExperimentConfig const& c)
{
    if (!is_reservoir(c))
        throw ConfigError("model", "k-matrix needs the reservoir or classic-kac model");
    ReservoirParams const p = c.reservoir_params();
    PMatrix const P = PMatrix::from(p);
    Eigen::EigenSolver<Eigen::Matrix2d> es(P.matrix, false);
    std::vector<double> numeric{es.eigenvalues()(0).real(), es.eigenvalues()(1).real()};
    std::sort(numeric.begin(), numeric.end());
    auto analytic = P.eigenvalues_analytic();
    std::vector<double> analytic_sorted(analytic.begin(), analytic.end());
    std::sort(analytic_sorted.begin(), analytic_sorted.end());

    Json rows = Json::array();
    for (std::size_t k = 0; k < c.times.size(); ++k)
    {
        double const time = c.times[k];
        std::size_t const k_max = poisson_truncation(p.total_rate() * time);
        KEstimate const est = k_coefficient_mc(time, p, c.histories, k_max, substream(c.seed, k), c.workers);
        Json r;
        r["t"] = time;
        r["c_analytic"] = k_coefficient_analytic(time, p).value;
        r["c_mc"] = est.c_mc;
        r["stderr"] = est.std_error;
        r["isotropy_residual"] = est.isotropy_residual;
        r["isotropy_stderr"] = est.isotropy_stderr;
        r["isotropy_max_z"] = est.isotropy_max_z;
        r["k_max"] = est.k_max;
        r["poisson_tail"] = poisson_tail(p.total_rate() * time, k_max);
        r["n_histories"] = est.n_samples;
        rows.push_back(r);
    }
    Json out;
    out["provenance"] = "c(t) = N/(N+M) + M/(N+M)*exp(-mu*(N+M)*t/(d*M))";
    out["p_matrix_eigenvalues"] = {{"analytic", analytic_sorted}, {"numeric", numeric}};
    out["results"] = rows;
    return out;
}

Json ou_check(ExperimentConfig const& c)
{
    double const beta = c.beta;
    double const scale = 1.0 / std::sqrt(beta);
    QuadratureSpec q;
    q.beta = beta;
    q.order = c.ou.reference_order;
    q.workers = c.workers;

    GaussianComponent f2;
    f2.mean = Eigen::Vector2d(0.3 * scale, -0.2 * scale);
    f2.covariance.resize(2, 2);
    f2.covariance << 0.8, 0.2, 0.2, 0.7;
    f2.covariance /= beta;
    ScalarField const h2 = gaussian_ratio_field(f2, beta);
    ScalarField const h1 = gaussian_ratio_field(GaussianComponent::isotropic(Eigen::VectorXd::Constant(1, 0.2 * scale),
                                                                              0.7 / beta),
                                                beta);

    Json out;
    out["beta"] = beta;
    out["reference_order"] = q.order;
    out["semigroup_residual"] = check_semigroup(h1, 0.3, 0.3, q);

    ScalarField F{1, [](std::span<double const> v) { return 1.0 + v[0] + v[0] * v[0]; }, {}, {}};
    ScalarField G{1, [](std::span<double const> v) { return v[0] * v[0] * v[0] - v[0]; }, {}, {}};
    out["self_adjoint_residual"] = check_self_adjoint(F, G, 0.4, q);
    out["gamma_invariance_residual"] = check_gamma_invariance(h1, 0.4, q);

    struct Case
    {
        char const* name;
        CollisionOp op;
    };
    std::vector<Case> cases;
    {
        CollisionOp op;
        op.kind = CollisionOpKind::q_average;
        cases.push_back({"Q-average d=1 N=2", op});
        op.kind = CollisionOpKind::thermostat;
        op.j = 1;
        cases.push_back({"T_j thermostat d=1 N=2 j=1", op});
        op.kind = CollisionOpKind::reservoir_pair;
        op.i = 0;
        op.j = 1;
        cases.push_back({"R_ij reservoir d=1 N=M=1", op});
        op.kind = CollisionOpKind::marginal;
        op.n_system = 1;
        cases.push_back({"marginal interchange d=1 N=M=1", op});
    }
    Json comm = Json::array();
    for (auto const& cs : cases)
        for (double s : c.ou.s_values)
        {
            double const ref = check_commutation(h2, s, cs.op, q);
            auto const refinement = commutation_refinement(h2, s, cs.op, q, c.ou.orders);
            bool const monotone = nonincreasing_with_floor(refinement);
            Json r;
            r["operator"] = cs.name;
            r["s"] = s;
            r["residual"] = ref;
            r["orders"] = c.ou.orders;
            r["refinement"] = refinement;
            r["nonincreasing"] = monotone;
            r["pass"] = ref < 1e-6 && monotone;
            comm.push_back(r);
        }
    out["commutation"] = comm;

    Json ent = Json::array();
    QuadratureSpec qe = q;
    qe.order = c.ou.entropy_order;
    for (double factor : c.ou.a_factors)
    {
        double const a = factor / beta;
        auto const h = gaussian_ratio_field(GaussianComponent::isotropic(1, a), beta);
        auto const r = entropy_from_information(information_curve(h, qe), beta);
        double const exact = entropy_gaussian_isotropic(a, beta, 1);
        double const rel = std::abs(r.entropy - exact) / exact;
        Json row;
        row["a"] = a;
        row["entropy_from_information"] = r.entropy;
        row["entropy_closed_form"] = exact;
        row["tail"] = r.tail / beta;
        row["relative_error"] = rel;
        row["pass"] = rel + r.tail / beta / exact <= 1e-4;
        ent.push_back(row);
    }
    out["entropy_identity"] = ent;
    return out;
}

CsvTable info_decay(ExperimentConfig const& c)
{
    return functional_decay(c, true);
}

CsvTable entropy_decay(ExperimentConfig const& c)
{
    return functional_decay(c, false);
}

} // namespace kac::cli
