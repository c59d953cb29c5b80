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

#include "kac/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace kac::cli {
namespace {

std::string join(std::string const& prefix, std::string const& key)
{
    return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown(Json const& obj, std::string const& prefix, std::set<std::string> const& allowed)
{
    if (!obj.is_object())
        throw ConfigError(prefix.empty() ? "<root>" : prefix, "expected an object");
    for (auto const& [key, _] : obj.items())
        if (!allowed.count(key))
            throw ConfigError(join(prefix, key), "unknown key");
}

double read_number(Json const& v, std::string const& field)
{
    if (!v.is_number())
        throw ConfigError(field, "expected a number");
    double const x = v.get<double>();
    if (!std::isfinite(x))
        throw ConfigError(field, "must be finite");
    return x;
}

double read_rate(Json const& v, std::string const& field)
{
    double const x = read_number(v, field);
    if (x < 0.0)
        throw ConfigError(field, "must be non-negative");
    return x;
}

double read_positive(Json const& v, std::string const& field)
{
    double const x = read_number(v, field);
    if (!(x > 0.0))
        throw ConfigError(field, "must be positive");
    return x;
}

std::uint64_t read_unsigned(Json const& v, std::string const& field, std::uint64_t min_value = 0)
{
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        throw ConfigError(field, "expected a non-negative integer");
    auto const x = v.get<std::uint64_t>();
    if (x < min_value)
        throw ConfigError(field, "must be >= " + std::to_string(min_value));
    return x;
}

std::vector<double> read_numbers(Json const& v, std::string const& field)
{
    if (!v.is_array())
        throw ConfigError(field, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k)
        out.push_back(read_number(v[k], field + "[" + std::to_string(k) + "]"));
    return out;
}

std::string read_string(Json const& v, std::string const& field)
{
    if (!v.is_string())
        throw ConfigError(field, "expected a string");
    return v.get<std::string>();
}

Model parse_model(std::string const& s)
{
    if (s == "thermostat")
        return Model::thermostat;
    if (s == "reservoir")
        return Model::reservoir;
    if (s == "classic-kac")
        return Model::classic_kac;
    throw ConfigError("model", "expected thermostat, reservoir or classic-kac");
}

void check_times(std::vector<double> const& t, std::string const& field)
{
    if (t.empty())
        throw ConfigError(field, "need at least one time");
    for (std::size_t k = 0; k < t.size(); ++k)
    {
        if (t[k] < 0.0)
            throw ConfigError(field, "times must be non-negative");
        if (k > 0 && !(t[k] > t[k - 1]))
            throw ConfigError(field, "times must be strictly increasing");
    }
}

} // namespace

std::string to_string(Model m)
{
    switch (m)
    {
    case Model::thermostat:
        return "thermostat";
    case Model::reservoir:
        return "reservoir";
    case Model::classic_kac:
        return "classic-kac";
    }
    return "?";
}

ThermostatParams ExperimentConfig::thermostat_params() const
{
    ThermostatParams p;
    p.d = d;
    p.N = N;
    p.lambda = lambda;
    p.mu = mu;
    p.beta = beta;
    return p;
}

ReservoirParams ExperimentConfig::reservoir_params() const
{
    ReservoirParams p;
    p.d = d;
    p.N = N;
    p.M = M;
    p.beta = beta;
    if (model == Model::classic_kac)
    {
        double const denom = static_cast<double>(N + M) - 1.0;
        p.lambda_S = 2.0 * (static_cast<double>(N) - 1.0) / denom;
        p.lambda_R = 2.0 * (static_cast<double>(M) - 1.0) / denom;
        p.mu = 2.0 * static_cast<double>(M) / denom;
    }
    else
    {
        p.lambda_S = lambda_S;
        p.lambda_R = lambda_R;
        p.mu = mu;
    }
    return p;
}

std::vector<double> ExperimentConfig::drift() const
{
    return initial.drift.empty() ? std::vector<double>(d, 0.0) : initial.drift;
}

ExperimentConfig parse_config(Json const& j)
{
    reject_unknown(j, "", {"model", "params", "initial", "time", "samples", "seed", "workers", "output", "ou", "verify"});
    ExperimentConfig c;
    if (j.contains("model"))
        c.model = parse_model(read_string(j["model"], "model"));

    if (j.contains("params"))
    {
        auto const& p = j["params"];
        reject_unknown(p, "params", {"d", "N", "M", "lambda", "lambda_S", "lambda_R", "mu", "beta"});
        if (p.contains("d"))
            c.d = read_unsigned(p["d"], "params.d", 1);
        if (p.contains("N"))
            c.N = read_unsigned(p["N"], "params.N", 1);
        if (p.contains("M"))
            c.M = read_unsigned(p["M"], "params.M", 2);
        if (p.contains("lambda"))
            c.lambda = read_rate(p["lambda"], "params.lambda");
        if (p.contains("lambda_S"))
            c.lambda_S = read_rate(p["lambda_S"], "params.lambda_S");
        if (p.contains("lambda_R"))
            c.lambda_R = read_rate(p["lambda_R"], "params.lambda_R");
        if (p.contains("mu"))
            c.mu = read_rate(p["mu"], "params.mu");
        if (p.contains("beta"))
            c.beta = read_positive(p["beta"], "params.beta");
        if (c.model == Model::classic_kac)
            for (char const* key : {"lambda", "lambda_S", "lambda_R", "mu"})
                if (p.contains(key))
                    throw ConfigError(std::string("params.") + key, "rates are fixed by the classic-kac model");
    }

    if (j.contains("initial"))
    {
        auto const& in = j["initial"];
        reject_unknown(in, "initial", {"kind", "beta0", "drift", "energy"});
        if (in.contains("kind"))
        {
            c.initial.kind = read_string(in["kind"], "initial.kind");
            if (c.initial.kind != "gaussian" && c.initial.kind != "energy-sphere")
                throw ConfigError("initial.kind", "expected gaussian or energy-sphere");
        }
        if (in.contains("beta0"))
            c.initial.beta0 = read_positive(in["beta0"], "initial.beta0");
        if (in.contains("drift"))
            c.initial.drift = read_numbers(in["drift"], "initial.drift");
        if (in.contains("energy"))
        {
            c.initial.energy = read_number(in["energy"], "initial.energy");
            if (c.initial.energy < 0.0)
                throw ConfigError("initial.energy", "must be non-negative");
        }
    }
    if (!c.initial.drift.empty() && c.initial.drift.size() != c.d)
        throw ConfigError("initial.drift", "must have d = " + std::to_string(c.d) + " entries");

    if (j.contains("time"))
    {
        auto const& t = j["time"];
        reject_unknown(t, "time", {"t_end", "intervals", "points"});
        if (t.contains("points"))
        {
            if (t.contains("t_end") || t.contains("intervals"))
                throw ConfigError("time.points", "give either points or t_end/intervals");
            c.times = read_numbers(t["points"], "time.points");
            check_times(c.times, "time.points");
        }
        else
        {
            double const t_end = t.contains("t_end") ? read_number(t["t_end"], "time.t_end") : 5.0;
            if (t_end < 0.0)
                throw ConfigError("time.t_end", "must be non-negative");
            auto const intervals = t.contains("intervals") ? read_unsigned(t["intervals"], "time.intervals", 1) : 10;
            c.times = uniform_grid(t_end, intervals);
        }
    }
    if (c.times.empty())
        c.times = uniform_grid(5.0, 10);

    if (j.contains("samples"))
    {
        auto const& s = j["samples"];
        reject_unknown(s, "samples", {"trajectories", "histories", "mc_samples"});
        if (s.contains("trajectories"))
            c.trajectories = read_unsigned(s["trajectories"], "samples.trajectories", 2);
        if (s.contains("histories"))
            c.histories = read_unsigned(s["histories"], "samples.histories", 1);
        if (s.contains("mc_samples"))
            c.mc_samples = read_unsigned(s["mc_samples"], "samples.mc_samples", 2);
    }
    if (j.contains("seed"))
        c.seed = read_unsigned(j["seed"], "seed");
    if (j.contains("workers"))
        c.workers = read_unsigned(j["workers"], "workers", 1);
    if (j.contains("output"))
        c.output = read_string(j["output"], "output");

    if (j.contains("ou"))
    {
        auto const& o = j["ou"];
        reject_unknown(o, "ou", {"s", "orders", "reference_order", "a_factors", "entropy_order"});
        if (o.contains("s"))
        {
            c.ou.s_values = read_numbers(o["s"], "ou.s");
            for (double s : c.ou.s_values)
                if (s < 0.0)
                    throw ConfigError("ou.s", "must be non-negative");
        }
        if (o.contains("orders"))
        {
            if (!o["orders"].is_array() || o["orders"].empty())
                throw ConfigError("ou.orders", "expected a non-empty array of integers");
            c.ou.orders.clear();
            for (std::size_t k = 0; k < o["orders"].size(); ++k)
                c.ou.orders.push_back(read_unsigned(o["orders"][k], "ou.orders[" + std::to_string(k) + "]", 1));
        }
        if (o.contains("reference_order"))
            c.ou.reference_order = read_unsigned(o["reference_order"], "ou.reference_order", 1);
        if (o.contains("a_factors"))
        {
            c.ou.a_factors = read_numbers(o["a_factors"], "ou.a_factors");
            for (double a : c.ou.a_factors)
                if (!(a > 0.0))
                    throw ConfigError("ou.a_factors", "must be positive");
        }
        if (o.contains("entropy_order"))
            c.ou.entropy_order = read_unsigned(o["entropy_order"], "ou.entropy_order", 2);
    }

    if (j.contains("verify"))
    {
        auto const& v = j["verify"];
        reject_unknown(v, "verify", {"inject_fault", "tolerances"});
        if (v.contains("inject_fault"))
        {
            auto f = read_string(v["inject_fault"], "verify.inject_fault");
            if (f != "reflection-sign")
                throw ConfigError("verify.inject_fault", "only reflection-sign is supported");
            c.verify.inject_fault = std::move(f);
        }
        if (v.contains("tolerances"))
        {
            auto const& t = v["tolerances"];
            if (!t.is_object())
                throw ConfigError("verify.tolerances", "expected an object");
            for (auto const& [key, value] : t.items())
                read_positive(value, "verify.tolerances." + key);
            c.verify.tolerances = t;
        }
    }
    return c;
}

Json load_json(std::string const& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("--config", "cannot open " + path);
    Json j;
    try
    {
        j = Json::parse(in);
    }
    catch (nlohmann::json::parse_error const& e)
    {
        throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
    }
    return j;
}

ExperimentConfig load_config(std::string const& path)
{
    return parse_config(load_json(path));
}

Json to_json(ExperimentConfig const& c)
{
    Json j;
    j["model"] = to_string(c.model);
    Json p;
    p["d"] = c.d;
    p["N"] = c.N;
    if (c.model != Model::thermostat)
        p["M"] = c.M;
    if (c.model == Model::thermostat)
        p["lambda"] = c.lambda;
    if (c.model == Model::reservoir)
    {
        p["lambda_S"] = c.lambda_S;
        p["lambda_R"] = c.lambda_R;
    }
    if (c.model != Model::classic_kac)
        p["mu"] = c.mu;
    p["beta"] = c.beta;
    j["params"] = p;
    Json in;
    in["kind"] = c.initial.kind;
    if (c.initial.kind == "gaussian")
    {
        in["beta0"] = c.initial.beta0;
        in["drift"] = c.drift();
    }
    else
        in["energy"] = c.initial.energy;
    j["initial"] = in;
    j["time"] = {{"points", c.times}};
    j["samples"] = {{"trajectories", c.trajectories}, {"histories", c.histories}, {"mc_samples", c.mc_samples}};
    j["seed"] = c.seed;
    j["ou"] = {{"s", c.ou.s_values},
               {"orders", c.ou.orders},
               {"reference_order", c.ou.reference_order},
               {"a_factors", c.ou.a_factors},
               {"entropy_order", c.ou.entropy_order}};
    Json v;
    if (c.verify.inject_fault)
        v["inject_fault"] = *c.verify.inject_fault;
    v["tolerances"] = c.verify.tolerances;
    j["verify"] = v;
    return j;
}

} // namespace kac::cli
