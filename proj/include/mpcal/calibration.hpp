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

// The in-situ multiport calibration procedure:
//
//   1. calibrate_reference_port: one-port calibration of the reference antenna port with the
//      ECal reflect states, then de-embedding of the ECal thru state so the reference plane sits
//      at the antenna connector.
//   2. transfer_calibration: three phantoms measured on the calibrated reference port become
//      the standards that calibrate every other port (all antennas see the same reflection).
//   3. solve_unknown_thru: antenna-to-antenna coupling through a reciprocal phantom acts as an
//      unknown thru and fixes the transmission tracking of every port pair.
//
// apply_calibration corrects a full set of pairwise two-port measurements into an N-port.

#pragma once

#include "mpcal/error_model.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mpcal
{

/// Unordered port pair in canonical order (first < second).
struct PortPair
{
    std::size_t first = 0;
    std::size_t second = 1;

    PortPair() = default;
    /// Throws InvalidArgument for i == j.
    PortPair(std::size_t i, std::size_t j);

    friend auto operator<=>(const PortPair &, const PortPair &) = default;
};

std::vector<PortPair> all_pairs(std::size_t n_ports);

struct ECalCharacterization
{
    /// Known reflection coefficient of each reflect state, keyed by state name.
    std::map<std::string, ComplexSeries> states;
    /// Known two-port of the thru state; port 1 faces the instrument.
    NPortNetwork thru;

    const FrequencyGrid &grid() const noexcept { return thru.grid(); }

    /// Checks state count, grids, thru transmission and state separation. Returns warnings.
    std::vector<std::string> validate(const StandardThresholds &thresholds = {}) const;
};

struct PhantomMeasurementSet
{
    std::vector<std::string> phantom_names{"air", "phantom1", "phantom2"};
    /// Phantom whose pairwise measurements serve as the unknown thru.
    std::string thru_phantom = "air";
    /// raw_reflection[port][phantom]; the reference port is measured with the ECal in thru.
    std::map<std::size_t, std::map<std::string, ComplexSeries>> raw_reflection;
    /// Pairwise two-port measurements with the thru phantom, port 1 = pair.first.
    std::map<PortPair, NPortNetwork> raw_thru;

    /// Throws IncompleteDataset naming the first missing port/phantom or pair.
    void check_complete(std::size_t n_ports, const FrequencyGrid &grid) const;
};

/// Approximate one-way group delay of each antenna-pair path, used to pick the
/// unknown-thru square-root branch.
struct ThruPhaseEstimate
{
    double tau_s = 0.0;
    std::map<PortPair, double> per_pair;

    double for_pair(const PortPair &pair) const;
};

struct CalibrationOptions
{
    StandardThresholds thresholds;
    /// Minimum corrected path level in dB; weaker paths raise InsufficientSignal.
    double signal_floor_db = -50.0;
    /// Adjacent-point phase steps within this many degrees of 90 raise PhaseTrackingAmbiguous.
    double phase_ambiguity_margin_deg = 10.0;
    /// Worker threads for per-port / per-pair stages (0 = MPCAL_THREADS / hardware).
    std::size_t threads = 0;
};

struct CalibrationSet
{
    FrequencyGrid grid;
    std::size_t n_ports = 0;
    std::size_t reference_port = 0;
    std::vector<ErrorBox3> boxes;
    std::map<PortPair, PairTracking> tracking;
    nlohmann::json metadata = nlohmann::json::object();

    const PairTracking &k(std::size_t i, std::size_t j) const;

    /// Throws InvalidArgument unless every port has a box and every pair a tracking term.
    void validate() const;

    /// Calibration that leaves raw data unchanged.
    static CalibrationSet identity(const FrequencyGrid &grid, std::size_t n_ports, std::size_t reference_port = 0);
};

struct ReferencePortResult
{
    /// Error box at the ECal connector (before de-embedding the thru).
    ErrorBox3 instrument_box;
    /// Error box at the antenna connector.
    ErrorBox3 box;
    std::vector<std::string> states_used;
    double min_separation = 0.0;
    std::vector<std::string> warnings;
};

/// Solve the reference port from the ECal reflect states and shift the plane through the thru.
/// With more than three states, the triple with the largest minimum separation is used.
ReferencePortResult calibrate_reference_port(const ECalCharacterization &ecal,
                                             const std::map<std::string, ComplexSeries> &measured_states,
                                             const StandardThresholds &thresholds = {});

struct TransferResult
{
    /// One box per port, the reference box included at its index.
    std::vector<ErrorBox3> boxes;
    /// Corrected phantom reflections at the antenna plane, one per phantom.
    std::vector<ComplexSeries> standards;
    /// Per-frequency minimum pairwise separation of the standards.
    std::vector<double> separation;
    double min_separation = 0.0;
    std::vector<std::string> warnings;
};

/// ref_raw and other_raw[port] hold one raw series per phantom, in the same phantom order.
TransferResult transfer_calibration(std::size_t reference_port, const ErrorBox3 &ref_box,
                                    const std::vector<ComplexSeries> &ref_raw,
                                    const std::map<std::size_t, std::vector<ComplexSeries>> &other_raw,
                                    const StandardThresholds &thresholds = {}, std::size_t threads = 0);

struct UnknownThruResult
{
    PairTracking k;
    double min_level_db = 0.0;
    double min_level_hz = 0.0;
    /// Largest adjacent-point phase step of the corrected transmission, degrees.
    double max_phase_step_deg = 0.0;
};

/// Transmission tracking from a reciprocal unknown thru: k^2 = p_i p_j S21m / S12m. The branch
/// is chosen at the first point from tau_est and then by phase continuity of the corrected S21.
/// Throws InsufficientSignal, PhaseTrackingAmbiguous, ZeroTransmission.
UnknownThruResult solve_unknown_thru(const ErrorBox3 &box_i, const ErrorBox3 &box_j, const NPortNetwork &measured,
                                     double tau_est_s, const CalibrationOptions &options = {});

/// Runs all three stages. Errors keep their code; the message names the failing stage.
CalibrationSet build_calibration(const ECalCharacterization &ecal,
                                 const std::map<std::string, ComplexSeries> &ecal_measurements,
                                 std::size_t reference_port, std::size_t n_ports,
                                 const PhantomMeasurementSet &phantoms, const ThruPhaseEstimate &estimate,
                                 const CalibrationOptions &options = {});

struct AppliedNetwork
{
    NPortNetwork network;
    double reciprocity_deviation = 0.0;
};

/// Corrects every pair (port 1 = pair.first) and assembles an N-port. Off-diagonal entries come
/// from the pair's 8-term correction; each S_ii is the mean corrected reflection over all pairs
/// containing port i. Throws MissingPair.
AppliedNetwork apply_calibration(const CalibrationSet &cal, const std::map<PortPair, NPortNetwork> &raw_pairwise,
                                 std::size_t threads = 0);

} // namespace mpcal
