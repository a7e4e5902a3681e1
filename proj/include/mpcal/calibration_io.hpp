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

// On-disk calibration set:
//
//   manifest.json      format, version, n_ports, reference_port, grid hash, thresholds,
//                      metadata and the SHA-256 of every payload file
//   box_<port>.csv     freq_hz, e00_re, e00_im, e11_re, e11_im, p_re, p_im
//   k_<i>_<j>.csv      freq_hz, k_re, k_im        (i < j)

#pragma once

#include "mpcal/calibration.hpp"

#include <filesystem>

namespace mpcal
{

inline constexpr int kCalibrationFormatVersion = 1;

/// SHA-256 of the grid's newline-separated shortest round-trip text.
std::string grid_hash(const FrequencyGrid &grid);

void save_calibration(const CalibrationSet &cal, const std::filesystem::path &dir);

/// Throws FormatVersionMismatch, ChecksumMismatch, IoError, SyntaxError.
CalibrationSet load_calibration(const std::filesystem::path &dir);

} // namespace mpcal
