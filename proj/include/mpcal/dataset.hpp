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

// Dataset directory layout written by the simulator and read by the calibration front end:
//
//   manifest.json                       config echo, seed, file list with SHA-256
//   tau_est.json                        nominal per-pair path delays from the geometry
//   ecal/state_<name>.s1p               ECal reflect-state characterization
//   ecal/thru.s2p                       ECal thru-state characterization
//   ecal/measured_state_<name>.s1p      raw reference-port readings of each state
//   refl/port<i>_<phantom>.s1p          raw one-port reflections
//   thru/pair<i>_<j>_<phantom>.s2p      raw pairwise two-ports (port 1 = i)
//   truth/true_<phantom>.s<N>p          antenna-plane ground truth
//   truth/box_<i>.csv, truth/k_<i>_<j>.csv

#pragma once

#include "mpcal/simulator.hpp"

#include <filesystem>

namespace mpcal::sim
{

inline constexpr int kDatasetFormatVersion = 1;

void write_dataset(const Simulation &sim, const SystemConfig &cfg, const std::filesystem::path &dir);

/// Loads every file that is present; absent measurements are simply missing from the maps so
/// that the consumer reports them (IncompleteDataset / MissingPair). Files that are present
/// must match their manifest checksum.
Dataset load_dataset(const std::filesystem::path &dir);

std::string pair_file_name(const PortPair &pair, const std::string &phantom);

} // namespace mpcal::sim
