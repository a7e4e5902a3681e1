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

// VNA error-model mathematics: the 3-term one-port model, solving it from three standards,
// moving its reference plane through a known two-port, and 8-term two-port correction.
//
// Only the tracking products are ever stored. For a port's error box
//     S_box = [[e00, e01], [e10, e11]]    (port 1 = instrument, port 2 = device)
// the reflection tracking is p = e10 * e01, and for a port pair (i, j) the transmission tracking
// is k = e10(i) * e32(j). The normalized cascade matrices are
//     N_fwd = [[-D, e00], [-e11, 1]]   with T_box = N_fwd / e10, D = e00*e11 - p,
//     N_rev = [[-D, e11], [-e00, 1]]   for the same box reversed (device side first).

#pragma once

#include "mpcal/net.hpp"

#include <span>
#include <string>
#include <vector>

namespace mpcal
{

inline constexpr double kModelPoleThreshold = 1e-12;

class ErrorBox3
{
  public:
    ErrorBox3() = default;

    /// Throws InvalidArgument on length mismatch and ZeroTracking where p == 0.
    ErrorBox3(FrequencyGrid grid, ComplexSeries e00, ComplexSeries e11, ComplexSeries p);

    static ErrorBox3 identity(const FrequencyGrid &grid);

    const FrequencyGrid &grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return grid_.size(); }
    const ComplexSeries &e00() const noexcept { return e00_; }
    const ComplexSeries &e11() const noexcept { return e11_; }
    const ComplexSeries &p() const noexcept { return p_; }

    Complex delta(std::size_t k) const { return e00_[k] * e11_[k] - p_[k]; }

    /// Normalized cascade matrix with the box on port 1 of a measurement.
    Eigen::Matrix2cd forward_matrix(std::size_t k) const;

    /// Normalized cascade matrix with the box reversed, on port 2 of a measurement.
    Eigen::Matrix2cd reverse_matrix(std::size_t k) const;

  private:
    FrequencyGrid grid_;
    ComplexSeries e00_;
    ComplexSeries e11_;
    ComplexSeries p_;
};

class PairTracking
{
  public:
    PairTracking() = default;
    PairTracking(FrequencyGrid grid, ComplexSeries k);

    static PairTracking unity(const FrequencyGrid &grid);

    const FrequencyGrid &grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return grid_.size(); }
    const ComplexSeries &k() const noexcept { return k_; }

  private:
    FrequencyGrid grid_;
    ComplexSeries k_;
};

// Single-point 3-term model.
Complex embed_reflection(Complex e00, Complex e11, Complex p, Complex gamma);
Complex correct_reflection(Complex e00, Complex e11, Complex p, Complex gamma_measured);

/// Gamma_m = e00 + p*Gamma / (1 - e11*Gamma). Throws ModelPole.
ComplexSeries embed_reflection(const ErrorBox3 &box, const ComplexSeries &gamma);

/// Gamma = (Gamma_m - e00) / (e11*(Gamma_m - e00) + p). Throws ModelPole.
ComplexSeries correct_reflection(const ErrorBox3 &box, const ComplexSeries &gamma_measured);

struct Standard
{
    ComplexSeries actual;
    ComplexSeries measured;
};

struct StandardThresholds
{
    /// |det| of the 3x3 system divided by the product of its row norms.
    double relative_determinant = 1e-8;
    /// Minimum pairwise |Gamma_a - Gamma_b|, hard error below.
    double separation_error = 1e-3;
    /// Minimum pairwise |Gamma_a - Gamma_b|, warning below.
    double separation_warning = 0.05;
};

struct ThreeStandardSolution
{
    ErrorBox3 box;
    /// Smallest pairwise separation of the actual standards over the grid.
    double min_separation = 0.0;
    /// Frequency at which min_separation occurs.
    double min_separation_hz = 0.0;
    std::vector<std::string> warnings;
};

/// Smallest pairwise |a - b| across the series, and the grid index where it occurs.
std::pair<double, std::size_t> min_pairwise_separation(std::span<const ComplexSeries> values);

/// Solve e00, e11, p from exactly three standards with a pivoted 3x3 solve per frequency.
/// Throws DegenerateStandards (separation or determinant below threshold) and ZeroTracking.
ThreeStandardSolution solve_three_standards(const FrequencyGrid &grid, std::span<const Standard> standards,
                                            const StandardThresholds &thresholds = {});

/// Append a known two-port (port 1 facing the box) to the device side of the box.
/// Throws ZeroTransmission and GridMismatch.
ErrorBox3 shift_reference_plane(const ErrorBox3 &box, const NPortNetwork &adapter);

/// 8-term correction of a measurement taken with box_i on port 1 and box_j on port 2:
/// T_dut = k * N_fwd(i)^-1 * T_meas * N_rev(j)^-1.
NPortNetwork correct_two_port(const ErrorBox3 &box_i, const ErrorBox3 &box_j, const PairTracking &k,
                              const NPortNetwork &measured);

/// Forward model matching correct_two_port: what the instrument reads for dut.
NPortNetwork embed_two_port(const ErrorBox3 &box_i, const ErrorBox3 &box_j, const PairTracking &k,
                            const NPortNetwork &dut);

} // namespace mpcal
