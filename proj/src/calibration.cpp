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

#include "mpcal/calibration.hpp"
#include "mpcal/numfmt.hpp"
#include "mpcal/parallel.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>
#include <numbers>

namespace mpcal
{

namespace
{

constexpr double kPi = std::numbers::pi;

double wrap_phase(double x)
{
    x = std::remainder(x, 2.0 * kPi);
    return x;
}

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string pair_key(const PortPair &p)
{
    return std::to_string(p.first) + "_" + std::to_string(p.second);
}

template <typename Fn>
auto run_stage(const char *stage, Fn &&fn)
{
    try
    {
        return fn();
    }
    catch (const Error &e)
    {
        throw Error(e.code(), std::string(stage) + ": " + e.message());
    }
}

} // namespace

PortPair::PortPair(std::size_t i, std::size_t j) : first(std::min(i, j)), second(std::max(i, j))
{
    if (i == j)
        throw Error(Errc::InvalidArgument, "a port pair needs two distinct ports");
}

std::vector<PortPair> all_pairs(std::size_t n_ports)
{
    std::vector<PortPair> out;
    for (std::size_t i = 0; i < n_ports; ++i)
        for (std::size_t j = i + 1; j < n_ports; ++j)
            out.emplace_back(i, j);
    return out;
}

// ---------------------------------------------------------------------------------------------

std::vector<std::string> ECalCharacterization::validate(const StandardThresholds &thresholds) const
{
    if (states.size() < 3)
        throw Error(Errc::InvalidArgument, "ECal characterization needs at least three reflect states");
    if (thru.n_ports() != 2)
        throw Error(Errc::InvalidArgument, "ECal thru must be a two-port");
    std::vector<ComplexSeries> values;
    for (const auto &[name, gamma] : states)
    {
        if (gamma.size() != grid().size())
            throw Error(Errc::GridMismatch, "ECal state '" + name + "' does not match the thru grid");
        values.push_back(gamma);
    }
    for (std::size_t k = 0; k < thru.size(); ++k)
        if (std::abs(thru.at(k)(1, 0)) <= 1e-6)
            throw Error(Errc::ZeroTransmission, "ECal thru S21 vanishes at " + format_double(grid()[k]) + " Hz");

    std::vector<std::string> warnings;
    const auto [sep, at] = min_pairwise_separation(values);
    if (sep < thresholds.separation_error)
        throw Error(Errc::DegenerateStandards, "ECal states separated by only " + format_double(sep) + " at " +
                                                   format_double(grid()[at]) + " Hz");
    if (sep < thresholds.separation_warning)
        warnings.push_back("ECal states separated by only " + format_double(sep) + " at " +
                           format_double(grid()[at]) + " Hz");
    return warnings;
}

void PhantomMeasurementSet::check_complete(std::size_t n_ports, const FrequencyGrid &grid) const
{
    if (phantom_names.size() != 3)
        throw Error(Errc::IncompleteDataset, "exactly three phantoms are required, got " +
                                                 std::to_string(phantom_names.size()));
    for (std::size_t port = 0; port < n_ports; ++port)
    {
        const auto it = raw_reflection.find(port);
        for (const auto &name : phantom_names)
        {
            if (it == raw_reflection.end() || !it->second.contains(name))
                throw Error(Errc::IncompleteDataset,
                            "missing reflection measurement for port " + std::to_string(port) + ", phantom '" +
                                name + "'");
            if (it->second.at(name).size() != grid.size())
                throw Error(Errc::GridMismatch, "reflection measurement for port " + std::to_string(port) +
                                                    ", phantom '" + name + "' has the wrong length");
        }
    }
    for (const auto &pair : all_pairs(n_ports))
    {
        const auto it = raw_thru.find(pair);
        if (it == raw_thru.end())
            throw Error(Errc::IncompleteDataset, "missing thru measurement for pair " + pair_key(pair) +
                                                     ", phantom '" + thru_phantom + "'");
        require_compatible(it->second.grid(), grid, "thru measurement " + pair_key(pair));
    }
}

double ThruPhaseEstimate::for_pair(const PortPair &pair) const
{
    const auto it = per_pair.find(pair);
    return it == per_pair.end() ? tau_s : it->second;
}

const PairTracking &CalibrationSet::k(std::size_t i, std::size_t j) const
{
    const auto it = tracking.find(PortPair(i, j));
    if (it == tracking.end())
        throw Error(Errc::MissingPair, "no transmission tracking for pair " + pair_key(PortPair(i, j)));
    return it->second;
}

void CalibrationSet::validate() const
{
    if (n_ports < 2)
        throw Error(Errc::InvalidArgument, "calibration set needs at least two ports");
    if (reference_port >= n_ports)
        throw Error(Errc::InvalidArgument, "reference port out of range");
    if (boxes.size() != n_ports)
        throw Error(Errc::InvalidArgument, "calibration set needs one error box per port");
    for (const auto &b : boxes)
        require_compatible(b.grid(), grid, "calibration box");
    for (const auto &pair : all_pairs(n_ports))
    {
        const auto it = tracking.find(pair);
        if (it == tracking.end())
            throw Error(Errc::InvalidArgument, "calibration set lacks tracking for pair " + pair_key(pair));
        require_compatible(it->second.grid(), grid, "calibration tracking");
    }
    if (tracking.size() != n_ports * (n_ports - 1) / 2)
        throw Error(Errc::InvalidArgument, "calibration set has tracking for unknown pairs");
}

CalibrationSet CalibrationSet::identity(const FrequencyGrid &grid, std::size_t n_ports, std::size_t reference_port)
{
    CalibrationSet cal;
    cal.grid = grid;
    cal.n_ports = n_ports;
    cal.reference_port = reference_port;
    cal.boxes.assign(n_ports, ErrorBox3::identity(grid));
    for (const auto &pair : all_pairs(n_ports))
        cal.tracking.emplace(pair, PairTracking::unity(grid));
    cal.validate();
    return cal;
}

// ---------------------------------------------------------------------------------------------
// Stage 1

ReferencePortResult calibrate_reference_port(const ECalCharacterization &ecal,
                                             const std::map<std::string, ComplexSeries> &measured_states,
                                             const StandardThresholds &thresholds)
{
    ReferencePortResult result;
    result.warnings = ecal.validate(thresholds);

    std::vector<std::string> names;
    for (const auto &[name, gamma] : ecal.states)
    {
        const auto it = measured_states.find(name);
        if (it == measured_states.end())
            continue;
        if (it->second.size() != ecal.grid().size())
            throw Error(Errc::GridMismatch, "measured ECal state '" + name + "' has the wrong length");
        names.push_back(name);
    }
    if (names.size() < 3)
        throw Error(Errc::IncompleteDataset, "need measurements of at least three characterized ECal states, got " +
                                                 std::to_string(names.size()));

    // Best-conditioned triple; ties keep the lexicographically first.
    std::array<std::size_t, 3> best{0, 1, 2};
    double best_sep = -1.0;
    for (std::size_t a = 0; a < names.size(); ++a)
        for (std::size_t b = a + 1; b < names.size(); ++b)
            for (std::size_t c = b + 1; c < names.size(); ++c)
            {
                const ComplexSeries vals[3] = {ecal.states.at(names[a]), ecal.states.at(names[b]),
                                               ecal.states.at(names[c])};
                const double sep = min_pairwise_separation(vals).first;
                if (sep > best_sep)
                {
                    best_sep = sep;
                    best = {a, b, c};
                }
            }

    std::vector<Standard> standards;
    for (std::size_t idx : best)
    {
        standards.push_back({ecal.states.at(names[idx]), measured_states.at(names[idx])});
        result.states_used.push_back(names[idx]);
    }
    auto sol = solve_three_standards(ecal.grid(), standards, thresholds);
    result.instrument_box = sol.box;
    result.min_separation = sol.min_separation;
    for (auto &w : sol.warnings)
        result.warnings.push_back(std::move(w));
    result.box = shift_reference_plane(sol.box, ecal.thru);
    return result;
}

// ---------------------------------------------------------------------------------------------
// Stage 2

TransferResult transfer_calibration(std::size_t reference_port, const ErrorBox3 &ref_box,
                                    const std::vector<ComplexSeries> &ref_raw,
                                    const std::map<std::size_t, std::vector<ComplexSeries>> &other_raw,
                                    const StandardThresholds &thresholds, std::size_t threads)
{
    if (ref_raw.size() != 3)
        throw Error(Errc::InvalidArgument, "transfer needs exactly three phantom measurements on the reference port");
    const FrequencyGrid &grid = ref_box.grid();

    TransferResult result;
    for (const auto &raw : ref_raw)
        result.standards.push_back(correct_reflection(ref_box, raw));

    result.separation.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
    {
        const ComplexSeries point[3] = {{result.standards[0][k]}, {result.standards[1][k]}, {result.standards[2][k]}};
        result.separation[k] = min_pairwise_separation(point).first;
    }

    std::size_t n_ports = reference_port + 1;
    for (const auto &[port, raw] : other_raw)
    {
        if (port == reference_port)
            throw Error(Errc::InvalidArgument, "reference port appears among the ports to transfer to");
        if (raw.size() != 3)
            throw Error(Errc::InvalidArgument, "port " + std::to_string(port) + " needs exactly three phantom measurements");
        n_ports = std::max(n_ports, port + 1);
    }
    if (other_raw.size() + 1 != n_ports)
        throw Error(Errc::IncompleteDataset, "transfer needs measurements on every port");

    std::vector<std::size_t> ports;
    for (const auto &[port, raw] : other_raw)
        ports.push_back(port);

    result.boxes.assign(n_ports, ref_box);
    std::vector<ThreeStandardSolution> solutions(ports.size());
    parallel_for(
        ports.size(),
        [&](std::size_t idx) {
            const auto &raw = other_raw.at(ports[idx]);
            const Standard standards[3] = {{result.standards[0], raw[0]},
                                           {result.standards[1], raw[1]},
                                           {result.standards[2], raw[2]}};
            try
            {
                solutions[idx] = solve_three_standards(grid, standards, thresholds);
            }
            catch (const Error &e)
            {
                throw Error(e.code(), "port " + std::to_string(ports[idx]) + ": " + e.message());
            }
        },
        threads);

    result.min_separation = solutions.empty() ? 0.0 : solutions.front().min_separation;
    for (std::size_t idx = 0; idx < ports.size(); ++idx)
    {
        result.boxes[ports[idx]] = solutions[idx].box;
        result.min_separation = std::min(result.min_separation, solutions[idx].min_separation);
    }
    // The standards are shared by every port, so their warnings are too.
    if (!solutions.empty())
        result.warnings = solutions.front().warnings;
    return result;
}

// ---------------------------------------------------------------------------------------------
// Stage 3

UnknownThruResult solve_unknown_thru(const ErrorBox3 &box_i, const ErrorBox3 &box_j, const NPortNetwork &measured,
                                     double tau_est_s, const CalibrationOptions &options)
{
    if (measured.n_ports() != 2)
        throw Error(Errc::InvalidArgument, "unknown thru needs a two-port measurement");
    const FrequencyGrid &grid = measured.grid();
    require_compatible(box_i.grid(), grid, "solve_unknown_thru");
    require_compatible(box_j.grid(), grid, "solve_unknown_thru");

    const double step_rad = 2.0 * kPi * grid.max_step() * tau_est_s;
    if (std::abs(step_rad) >= kPi / 2.0)
        throw Error(Errc::PhaseTrackingAmbiguous,
                    "grid too coarse for the delay estimate: 2*pi*df*tau = " + format_double(step_rad) + " rad");

    const double limit_rad = (90.0 - options.phase_ambiguity_margin_deg) * kPi / 180.0;
    const std::size_t n = grid.size();
    ComplexSeries k(n);
    UnknownThruResult result;
    result.min_level_db = std::numeric_limits<double>::infinity();

    double prev_phase = 0.0;
    for (std::size_t f = 0; f < n; ++f)
    {
        const Eigen::Matrix2cd s = measured.at(f);
        const Complex s21 = s(1, 0), s12 = s(0, 1);
        if (s21 == Complex(0.0) || s12 == Complex(0.0))
            throw Error(Errc::ZeroTransmission, "measured transmission is zero at " + format_double(grid[f]) + " Hz");

        const Eigen::Matrix2cd g =
            box_i.forward_matrix(f).inverse() * s_to_t(s) * box_j.reverse_matrix(f).inverse();
        const Complex root = std::sqrt(box_i.p()[f] * box_j.p()[f] * s21 / s12);
        // Corrected S21 for branch +root; the other branch is its negative.
        const Complex t21 = 1.0 / (root * g(1, 1));

        const double level_db = 20.0 * std::log10(std::abs(t21));
        if (level_db < result.min_level_db)
        {
            result.min_level_db = level_db;
            result.min_level_hz = grid[f];
        }
        if (level_db < options.signal_floor_db)
            throw Error(Errc::InsufficientSignal, "path level " + format_double(level_db) + " dB at " +
                                                      format_double(grid[f]) + " Hz is below the floor of " +
                                                      format_double(options.signal_floor_db) + " dB");

        const double ref_phase = f == 0 ? -2.0 * kPi * grid[f] * tau_est_s : prev_phase;
        double step = wrap_phase(std::arg(t21) - ref_phase);
        bool flip = false;
        if (std::abs(step) > kPi / 2.0)
        {
            flip = true;
            step = wrap_phase(step + kPi);
        }
        if (std::abs(step) > limit_rad)
            throw Error(Errc::PhaseTrackingAmbiguous,
                        std::string(f == 0 ? "initial phase deviates " : "phase step of ") +
                            format_double(std::abs(step) * 180.0 / kPi) + " deg at " + format_double(grid[f]) +
                            " Hz leaves the square-root branch ambiguous");
        if (f > 0)
            result.max_phase_step_deg = std::max(result.max_phase_step_deg, std::abs(step) * 180.0 / kPi);

        k[f] = flip ? -root : root;
        prev_phase = std::arg(flip ? -t21 : t21);
    }
    result.k = PairTracking(grid, std::move(k));
    return result;
}

// ---------------------------------------------------------------------------------------------

CalibrationSet build_calibration(const ECalCharacterization &ecal,
                                 const std::map<std::string, ComplexSeries> &ecal_measurements,
                                 std::size_t reference_port, std::size_t n_ports,
                                 const PhantomMeasurementSet &phantoms, const ThruPhaseEstimate &estimate,
                                 const CalibrationOptions &options)
{
    if (n_ports < 2)
        throw Error(Errc::InvalidArgument, "calibration needs at least two ports");
    if (reference_port >= n_ports)
        throw Error(Errc::InvalidArgument, "reference port out of range");

    run_stage("input check", [&] {
        phantoms.check_complete(n_ports, ecal.grid());
        return 0;
    });

    const auto ref = run_stage("stage 1 (reference port)", [&] {
        return calibrate_reference_port(ecal, ecal_measurements, options.thresholds);
    });

    const auto transfer = run_stage("stage 2 (calibration transfer)", [&] {
        std::vector<ComplexSeries> ref_raw;
        std::map<std::size_t, std::vector<ComplexSeries>> other_raw;
        for (std::size_t port = 0; port < n_ports; ++port)
        {
            std::vector<ComplexSeries> raw;
            for (const auto &name : phantoms.phantom_names)
                raw.push_back(phantoms.raw_reflection.at(port).at(name));
            if (port == reference_port)
                ref_raw = std::move(raw);
            else
                other_raw.emplace(port, std::move(raw));
        }
        return transfer_calibration(reference_port, ref.box, ref_raw, other_raw, options.thresholds, options.threads);
    });

    const auto pairs = all_pairs(n_ports);
    std::vector<UnknownThruResult> thru(pairs.size());
    run_stage("stage 3 (unknown thru)", [&] {
        parallel_for(
            pairs.size(),
            [&](std::size_t idx) {
                const auto &pair = pairs[idx];
                try
                {
                    thru[idx] = solve_unknown_thru(transfer.boxes[pair.first], transfer.boxes[pair.second],
                                                   phantoms.raw_thru.at(pair), estimate.for_pair(pair), options);
                }
                catch (const Error &e)
                {
                    throw Error(e.code(), "pair " + pair_key(pair) + ": " + e.message());
                }
            },
            options.threads);
        return 0;
    });

    CalibrationSet cal;
    cal.grid = ecal.grid();
    cal.n_ports = n_ports;
    cal.reference_port = reference_port;
    cal.boxes = transfer.boxes;

    nlohmann::json levels = nlohmann::json::object();
    nlohmann::json taus = nlohmann::json::object();
    double min_level = std::numeric_limits<double>::infinity();
    double max_step = 0.0;
    for (std::size_t idx = 0; idx < pairs.size(); ++idx)
    {
        cal.tracking.emplace(pairs[idx], thru[idx].k);
        levels[pair_key(pairs[idx])] = thru[idx].min_level_db;
        taus[pair_key(pairs[idx])] = estimate.for_pair(pairs[idx]);
        min_level = std::min(min_level, thru[idx].min_level_db);
        max_step = std::max(max_step, thru[idx].max_phase_step_deg);
    }

    std::vector<std::string> warnings = ref.warnings;
    warnings.insert(warnings.end(), transfer.warnings.begin(), transfer.warnings.end());

    cal.metadata = {
        {"created_utc", utc_timestamp()},
        {"phantom_labels", phantoms.phantom_names},
        {"thru_phantom", phantoms.thru_phantom},
        {"ecal_states_used", ref.states_used},
        {"thresholds",
         {{"relative_determinant", options.thresholds.relative_determinant},
          {"separation_error", options.thresholds.separation_error},
          {"separation_warning", options.thresholds.separation_warning},
          {"signal_floor_db", options.signal_floor_db},
          {"phase_ambiguity_margin_deg", options.phase_ambiguity_margin_deg}}},
        {"tau_estimates_s", taus},
        {"diagnostics",
         {{"ecal_min_separation", ref.min_separation},
          {"phantom_min_separation", transfer.min_separation},
          {"phantom_separation", transfer.separation},
          {"min_path_level_db", min_level},
          {"path_level_db", levels},
          {"max_phase_step_deg", max_step},
          {"warnings", warnings}}},
    };
    cal.validate();
    return cal;
}

// ---------------------------------------------------------------------------------------------

AppliedNetwork apply_calibration(const CalibrationSet &cal, const std::map<PortPair, NPortNetwork> &raw_pairwise,
                                 std::size_t threads)
{
    cal.validate();
    const auto pairs = all_pairs(cal.n_ports);
    for (const auto &pair : pairs)
    {
        const auto it = raw_pairwise.find(pair);
        if (it == raw_pairwise.end())
            throw Error(Errc::MissingPair, "no measurement for pair (" + std::to_string(pair.first) + ", " +
                                               std::to_string(pair.second) + ")");
        require_compatible(it->second.grid(), cal.grid, "apply_calibration pair " + pair_key(pair));
    }

    std::vector<NPortNetwork> corrected(pairs.size());
    parallel_for(
        pairs.size(),
        [&](std::size_t idx) {
            const auto &pair = pairs[idx];
            corrected[idx] = correct_two_port(cal.boxes[pair.first], cal.boxes[pair.second], cal.k(pair.first, pair.second),
                                              raw_pairwise.at(pair));
        },
        threads);

    const auto n = static_cast<Eigen::Index>(cal.n_ports);
    std::vector<Eigen::MatrixXcd> s(cal.grid.size(), Eigen::MatrixXcd::Zero(n, n));
    const double share = 1.0 / static_cast<double>(cal.n_ports - 1);
    for (std::size_t idx = 0; idx < pairs.size(); ++idx)
    {
        const auto i = static_cast<Eigen::Index>(pairs[idx].first);
        const auto j = static_cast<Eigen::Index>(pairs[idx].second);
        for (std::size_t f = 0; f < s.size(); ++f)
        {
            const auto &d = corrected[idx].at(f);
            s[f](i, i) += d(0, 0) * share;
            s[f](j, j) += d(1, 1) * share;
            s[f](i, j) = d(0, 1);
            s[f](j, i) = d(1, 0);
        }
    }
    AppliedNetwork out{NPortNetwork(cal.grid, std::move(s), raw_pairwise.begin()->second.reference_impedance()), 0.0};
    out.reciprocity_deviation = reciprocity_deviation(out.network);
    return out;
}

} // namespace mpcal
