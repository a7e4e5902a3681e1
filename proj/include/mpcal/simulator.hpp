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

// Synthetic measurement campaign for a multiport imaging system. Everything here is a stand-in
// for a real instrument: the antenna-plane network, per-port error adapters, a synthetic ECal,
// inactive-port terminations and additive noise, plus the ground truth they imply.
//
// Phantom model: a half-space of relative permittivity eps_r in front of a common antenna
// two-port A = [[a11, a12], [a21, a22]] (port 1 = connector, port 2 = aperture):
//     Gamma_mat = (1 - sqrt(eps_r)) / (1 + sqrt(eps_r))
//     S_ii      = a11 + a12 a21 Gamma_mat / (1 - a22 Gamma_mat)
//     S_ij      = a12 a21 c_ij / (1 - a22 Gamma_mat)^2,  c_ij = A_ij exp(-(alpha + j beta) d_ij)
// and beta = 2 pi f sqrt(Re eps_r) / c0. The coupling is a synthetic attenuated delay line.

#pragma once

#include "mpcal/calibration.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace mpcal::sim
{

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kVacuumPermittivity = 8.8541878128e-12;

/// eps(f) = eps_inf + (eps_s - eps_inf) / (1 + j 2 pi f tau) - j sigma / (2 pi f eps0).
/// Losses give a negative imaginary part.
struct PermittivityModel
{
    enum class Kind
    {
        Constant,
        Debye,
    };

    Kind kind = Kind::Constant;
    Complex eps_r{1.0, 0.0};
    double eps_inf = 1.0;
    double eps_s = 1.0;
    double tau_s = 0.0;
    double sigma = 0.0;

    static PermittivityModel constant(Complex eps);
    static PermittivityModel debye(double eps_inf, double eps_s, double tau_s, double sigma = 0.0);

    Complex evaluate(double f_hz) const;
};

/// Half-space reflection (1 - sqrt(eps)) / (1 + sqrt(eps)), principal root.
Complex phantom_gamma(const PermittivityModel &model, double f_hz);

struct Phantom
{
    std::string name;
    PermittivityModel model;
};

struct AntennaConfig
{
    double insertion_loss_db = 0.5;
    double delay_s = 50e-12;
    double mismatch = 0.1;
    /// Added to a11 of individual ports to break the identical-antenna assumption.
    std::map<std::size_t, Complex> perturbation;
};

struct AdapterConfig
{
    double max_e00 = 0.3;
    double max_e11 = 0.3;
    double p_min = 0.5;
    double p_max = 2.0;
    /// Bound on the |S21| / |S12| imbalance of each adapter, dB.
    double max_split_db = 3.0;
    double max_delay_s = 2e-9;
    double max_phase_rad = 3.141592653589793;
    /// Frequency-flat adapters that replace the random ones on the listed ports.
    std::map<std::size_t, Eigen::Matrix2cd> explicit_adapters;
};

struct PairCoupling
{
    std::optional<double> level_db;
    std::optional<double> distance_m;
};

struct CouplingConfig
{
    /// |A_ij| in dB before antenna embedding.
    double level_db = -40.0;
    double attenuation_db_per_m = 0.0;
    /// Antennas sit on a ring of this radius; d_ij is the chord length.
    double ring_radius_m = 0.1;
    std::map<PortPair, PairCoupling> pairs;
};

struct ECalConfig
{
    double open_delay_s = 10e-12;
    double short_delay_s = 5e-12;
    double reflect_magnitude = 0.98;
    double load_magnitude = 0.02;
    double thru_loss_db = 0.2;
    double thru_delay_s = 50e-12;
};

struct SystemConfig
{
    std::size_t n_ports = 8;
    std::size_t reference_port = 0;
    double f_start_hz = 1e9;
    double f_stop_hz = 9e9;
    std::size_t points = 201;
    AntennaConfig antenna;
    AdapterConfig adapters;
    CouplingConfig coupling;
    ECalConfig ecal;
    std::vector<Phantom> phantoms;
    std::string thru_phantom = "air";
    Complex termination_gamma{0.0, 0.0};
    double noise_sigma = 0.0;
    std::uint64_t seed = 1;

    /// 8 ports, 1-9 GHz / 201 points, air + water-like + ethanol-like phantoms.
    static SystemConfig defaults();

    FrequencyGrid grid() const;
    double distance(const PortPair &pair) const;
    double coupling_level_db(const PortPair &pair) const;
    /// Nominal connector-to-connector delay of a pair in air: d/c0 plus both antennas.
    double nominal_path_delay(const PortPair &pair) const;
    ThruPhaseEstimate nominal_delay_estimate() const;
    const Phantom &phantom(const std::string &name) const;

    /// Throws ConfigInvalid naming the offending field.
    void validate() const;
};

SystemConfig config_from_json(const nlohmann::json &j);
nlohmann::json config_to_json(const SystemConfig &cfg);

struct GroundTruth
{
    /// Antenna-connector network per phantom name.
    std::map<std::string, NPortNetwork> true_network;
    std::vector<ErrorBox3> true_box;
    std::map<PortPair, PairTracking> true_k;
    /// Per-port two-port between instrument and antenna connector (reference port includes the ECal thru).
    std::vector<NPortNetwork> adapters;
    /// Reference-port adapter without the ECal.
    NPortNetwork reference_cable;
};

struct ErrorAdapters
{
    std::vector<NPortNetwork> adapters;
    NPortNetwork reference_cable;
    std::vector<ErrorBox3> boxes;
    std::map<PortPair, PairTracking> k;
};

/// Antenna two-port of one port (perturbation included).
NPortNetwork antenna_two_port(const SystemConfig &cfg, std::size_t port);

NPortNetwork synth_true_network(const SystemConfig &cfg, const PermittivityModel &phantom);

/// Consumes the PRNG stream in port order; the same engine state yields identical adapters.
ErrorAdapters synth_error_adapters(const SystemConfig &cfg, std::mt19937_64 &rng);
ErrorAdapters synth_error_adapters(const SystemConfig &cfg);

ECalCharacterization synth_ecal(const SystemConfig &cfg);

/// Error box e00 = S11, e11 = S22, p = S12 S21 of an adapter two-port.
ErrorBox3 box_from_adapter(const NPortNetwork &adapter);

/// Complete in-memory measurement campaign.
struct Dataset
{
    std::size_t n_ports = 0;
    std::size_t reference_port = 0;
    FrequencyGrid grid;
    std::vector<std::string> phantom_names;
    std::string thru_phantom;
    ECalCharacterization ecal;
    std::map<std::string, ComplexSeries> ecal_measured;
    std::map<std::size_t, std::map<std::string, ComplexSeries>> raw_reflection;
    std::map<std::string, std::map<PortPair, NPortNetwork>> raw_pairwise;
    ThruPhaseEstimate tau_estimate;

    PhantomMeasurementSet phantom_set() const;
};

struct Simulation
{
    Dataset dataset;
    GroundTruth truth;
};

/// Throws ConfigInvalid.
Simulation simulate_measurements(const SystemConfig &cfg);

} // namespace mpcal::sim
