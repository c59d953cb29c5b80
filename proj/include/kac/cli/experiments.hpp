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

#include <string>
#include <vector>

#include "kac/cli/config.hpp"
#include "kac/gaussian_states.hpp"
#include "kac/simulators.hpp"

namespace kac::cli {

struct CsvTable
{
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

//! Shortest round-trip decimal form ("%.17g"), locale independent.
std::string format_number(double x);

/*!
 * `# ` comment lines (command, timestamp, one-line config echo), then the
 * header row and data rows; comma separated, LF line endings.
 */
std::string render_csv(std::string const& command, Json const& config, CsvTable const& table,
                       std::string const& timestamp);
//! {"command", "generated", "config", "result"} with stable key order.
std::string render_json(std::string const& command, Json const& config, Json const& result,
                        std::string const& timestamp);
//! UTC, ISO 8601.
std::string utc_timestamp();

InitialSampler initial_sampler(ExperimentConfig const& c);
//! Expected kinetic energy of the N initial Kac particles.
double initial_energy(ExperimentConfig const& c);
//! Gaussian initial datum on R^{dN}; throws ConfigError for other kinds.
GaussianComponent initial_component(ExperimentConfig const& c);

CsvTable energy_decay(ExperimentConfig const& c);
CsvTable momentum_decay(ExperimentConfig const& c);
Json k_matrix(ExperimentConfig const& c);
Json ou_check(ExperimentConfig const& c);
CsvTable info_decay(ExperimentConfig const& c);
CsvTable entropy_decay(ExperimentConfig const& c);

} // namespace kac::cli
