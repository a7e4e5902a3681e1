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

// Small file helpers shared by the calibration-set and dataset writers.

#pragma once

#include "mpcal/net.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mpcal::io
{

/// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

std::string read_text(const std::filesystem::path &path);

/// Writes data and returns its SHA-256.
std::string write_text(const std::filesystem::path &path, std::string_view data);

/// CSV with a header row and one row per frequency: freq_hz, then re/im of each series.
std::string series_csv(const FrequencyGrid &grid, const std::vector<std::string> &names,
                       const std::vector<const ComplexSeries *> &columns);

struct SeriesTable
{
    FrequencyGrid grid;
    std::vector<ComplexSeries> columns;
};

/// Parses series_csv output; expects exactly the given header.
SeriesTable parse_series_csv(std::string_view text, const std::vector<std::string> &names,
                             const std::string &context);

} // namespace mpcal::io
