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

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "kac/cli/config.hpp"
#include "kac/cli/experiments.hpp"
#include "kac/cli/verify.hpp"

namespace {

using namespace kac::cli;

struct Flags
{
    std::string config;
    std::string model;
    std::uint64_t seed = 0;
    std::size_t workers = 0;
    std::string out;
};

void error_record(std::string const& kind, std::string const& field, std::string const& message)
{
    Json err;
    err["error"]["kind"] = kind;
    if (!field.empty())
        err["error"]["field"] = field;
    err["error"]["message"] = message;
    std::cerr << err.dump() << '\n';
}

void emit(std::string const& text, std::string const& path)
{
    if (path.empty())
    {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("--out", "cannot write " + path);
    out << text;
}

int run(std::string const& command, CLI::App const& sub, Flags const& f)
{
    Json raw = f.config.empty() ? Json::object() : load_json(f.config);
    if (sub.count("--model"))
        raw["model"] = f.model;
    ExperimentConfig c = parse_config(raw);
    if (sub.count("--seed"))
        c.seed = f.seed;
    if (sub.count("--workers"))
    {
        if (f.workers < 1)
            throw ConfigError("--workers", "must be >= 1");
        c.workers = f.workers;
    }
    std::string const out_path = sub.count("--out") ? f.out : c.output;
    Json const echo = to_json(c);
    std::string const stamp = utc_timestamp();

    if (command == "energy-decay")
        emit(render_csv(command, echo, energy_decay(c), stamp), out_path);
    else if (command == "momentum-decay")
        emit(render_csv(command, echo, momentum_decay(c), stamp), out_path);
    else if (command == "info-decay")
        emit(render_csv(command, echo, info_decay(c), stamp), out_path);
    else if (command == "entropy-decay")
        emit(render_csv(command, echo, entropy_decay(c), stamp), out_path);
    else if (command == "k-matrix")
        emit(render_json(command, echo, k_matrix(c), stamp), out_path);
    else if (command == "ou-check")
        emit(render_json(command, echo, ou_check(c), stamp), out_path);
    else if (command == "verify")
    {
        VerifyReport const report = run_verify(c);
        emit(render_json(command, echo, report.to_json(), stamp), out_path);
        return report.passed() ? 0 : 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Kac master equation simulator and verifier"};
    app.require_subcommand(1);
    Flags flags;
    std::map<std::string, std::string> const commands{
        {"energy-decay", "DSMC kinetic energy vs moment ODE (CSV)"},
        {"momentum-decay", "DSMC momentum vs moment ODE (CSV)"},
        {"k-matrix", "K-matrix sum rule and P-matrix spectrum (JSON)"},
        {"ou-check", "Ornstein-Uhlenbeck semigroup checks (JSON)"},
        {"info-decay", "Gaussian-mixture information vs decay envelope (CSV)"},
        {"entropy-decay", "Gaussian-mixture entropy vs decay envelope (CSV)"},
        {"verify", "invariant battery with pass/fail report (JSON)"},
    };
    for (auto const& [name, help] : commands)
    {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", flags.config, "JSON configuration file");
        sub->add_option("--model", flags.model, "thermostat | reservoir | classic-kac");
        sub->add_option("--seed", flags.seed, "master seed (u64)");
        sub->add_option("--workers", flags.workers, "worker threads; never changes results");
        sub->add_option("--out", flags.out, "output path (default: standard output)");
    }

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::CallForHelp const& e)
    {
        return app.exit(e);
    }
    catch (CLI::ParseError const& e)
    {
        error_record("usage", "", e.what());
        return 2;
    }

    CLI::App const* sub = app.get_subcommands().front();
    try
    {
        return run(sub->get_name(), *sub, flags);
    }
    catch (ConfigError const& e)
    {
        error_record("config", e.field(), e.what());
        return 2;
    }
    catch (std::exception const& e)
    {
        error_record("runtime", "", e.what());
        return 1;
    }
}
