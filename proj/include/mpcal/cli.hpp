// SPDX-License-Identifier: Apache-2.0
//
// mpcal - in-situ multiport VNA calibration for microwave imaging systems
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// mpcal command-line front end. JSON reports go to `out`, human-readable text to `err`.
//
// Exit codes: 0 ok, 1 verify failed, 2 config/usage, 3 calibration stage, 4 apply, 5 verify input.

#pragma once

#include "mpcal/net.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace mpcal::cli
{

enum ExitCode : int
{
    kOk = 0,
    kVerifyFailed = 1,
    kConfigError = 2,
    kCalibrationError = 3,
    kApplyError = 4,
    kVerifyInputError = 5,
};

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);
int run(int argc, char **argv);

/// Elementwise comparison of corrected vs truth. Throws GridMismatch on incompatible inputs.
nlohmann::json verify_report(const NPortNetwork &corrected, const NPortNetwork &truth, double tolerance);

} // namespace mpcal::cli
