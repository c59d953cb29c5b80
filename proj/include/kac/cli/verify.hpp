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

namespace kac::cli {

enum class CheckStatus
{
    pass,
    fail,
    inconclusive,  //!< statistical check whose tolerance is below its noise floor
};

std::string to_string(CheckStatus s);

struct CheckResult
{
    std::string name;
    std::string provenance;
    bool statistical = false;
    double value = 0.0;      //!< deviation; z-score units for statistical checks
    double tolerance = 0.0;  //!< pass iff value <= tolerance
    double noise = 0.0;      //!< one standard error in the units of value
    CheckStatus status = CheckStatus::pass;
    std::string detail;
};

/*!
 * Status rule: value <= tolerance passes. A failing statistical check whose
 * tolerance is below three noise units cannot separate a defect from
 * sampling noise and is reported inconclusive.
 */
CheckStatus classify_check(bool statistical, double value, double tolerance, double noise);

struct VerifyReport
{
    std::vector<CheckResult> checks;
    bool passed() const;
    Json to_json() const;
};

//! Names of the checks in battery order.
std::vector<std::string> verify_check_names();

/*!
 * Run the invariant battery. Tolerances default to the values in the
 * check list and can be overridden per name through
 * config.verify.tolerances; config.verify.inject_fault swaps in a broken
 * collision kernel for mutation testing.
 */
VerifyReport run_verify(ExperimentConfig const& config);

} // namespace kac::cli
