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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "kac/simulators.hpp"

namespace kac::cli {

using Json = nlohmann::ordered_json;

//! Rejected configuration; `field` is the dotted path of the offending key.
class ConfigError : public std::runtime_error
{
  public:
    ConfigError(std::string field, std::string const& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field))
    {
    }
    std::string const& field() const { return field_; }

  private:
    std::string field_;
};

enum class Model
{
    thermostat,
    reservoir,
    classic_kac,
};

std::string to_string(Model m);

struct InitialSpec
{
    std::string kind = "gaussian";  //!< gaussian | energy-sphere
    double beta0 = 0.5;
    std::vector<double> drift;      //!< per-particle mean velocity, length d
    double energy = 1.0;            //!< energy-sphere only
};

struct OuSettings
{
    std::vector<double> s_values{0.1, 0.5};
    std::vector<std::size_t> orders{10, 20, 40};
    std::size_t reference_order = 40;
    std::vector<double> a_factors{0.5, 2.0, 5.0};
    std::size_t entropy_order = 100;
};

struct VerifySettings
{
    std::optional<std::string> inject_fault;  //!< "reflection-sign"
    Json tolerances = Json::object();         //!< overrides by check name
};

struct ExperimentConfig
{
    Model model = Model::thermostat;
    std::size_t d = 3;
    std::size_t N = 10;
    std::size_t M = 16;
    double lambda = 1.0;
    double lambda_S = 1.0;
    double lambda_R = 1.0;
    double mu = 1.0;
    double beta = 1.0;

    InitialSpec initial;
    std::vector<double> times;  //!< record times, strictly increasing from >= 0

    std::size_t trajectories = 2000;
    std::size_t histories = 2000;
    std::size_t mc_samples = 20000;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
    std::string output;  //!< empty: standard output

    OuSettings ou;
    VerifySettings verify;

    ThermostatParams thermostat_params() const;
    //! Reservoir parameters; for classic-kac the rates are substituted.
    ReservoirParams reservoir_params() const;
    //! Per-particle initial drift with d entries (zeros if unset).
    std::vector<double> drift() const;
};

//! Strict parse: unknown keys and ill-typed values throw ConfigError.
ExperimentConfig parse_config(Json const& j);
//! Reads a JSON file; unreadable or malformed files throw ConfigError.
Json load_json(std::string const& path);
ExperimentConfig load_config(std::string const& path);
//! Effective configuration after defaults and overrides, for echoing.
Json to_json(ExperimentConfig const& c);

} // namespace kac::cli
