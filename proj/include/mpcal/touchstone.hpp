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

// Touchstone version 1 (.sNp) reader and writer.
//
// Two-port data rows are ordered S11 S21 S12 S22 (the v1 convention). Networks with three or
// more ports are written row-major, one matrix row per line group with at most four value
// pairs per line; the frequency appears only on the first line of each block.

#pragma once

#include "mpcal/net.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace mpcal::touchstone
{

enum class FreqUnit
{
    Hz,
    KHz,
    MHz,
    GHz,
};

enum class Format
{
    RI,
    MA,
    DB,
};

struct Options
{
    FreqUnit freq_unit = FreqUnit::GHz;
    Format format = Format::MA;
    double reference_impedance = kDefaultReferenceImpedance;
};

double unit_scale(FreqUnit unit) noexcept;
std::string_view unit_name(FreqUnit unit) noexcept;
std::string_view format_name(Format format) noexcept;

/// Parse a Touchstone v1 document. Without expected_ports the port count is inferred from the
/// block layout. Throws SyntaxError (with line number), NonMonotonicFrequency, CountMismatch,
/// UnsupportedParameter.
NPortNetwork parse(std::string_view text, std::optional<std::size_t> expected_ports = std::nullopt);

/// Deterministic Touchstone text for net. Values use shortest round-trip formatting.
std::string write(const NPortNetwork &net, const Options &options = {});

/// Port count from a ".sNp" extension, if the path has one.
std::optional<std::size_t> ports_from_extension(const std::filesystem::path &path);

/// Canonical extension for an n-port file, e.g. ".s4p".
std::string extension_for(std::size_t n_ports);

NPortNetwork read_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, const NPortNetwork &net, const Options &options = {});

} // namespace mpcal::touchstone
