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

// Frequency-gridded S-parameter containers and two-port / N-port network algebra.
//
// T-matrix convention used throughout the library (port 1 waves expressed through port 2 waves):
//
//     [b1]       [a2]               1   [ S12*S21 - S11*S22   S11 ]
//     [a1] = T * [b2],      T  =  ----- [                         ]
//                                  S21  [       -S22           1  ]
//
// With this convention cascading A then B (A port 2 into B port 1) is the product T_A * T_B,
// and det(T) = S12 / S21.

#pragma once

#include "mpcal/errors.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace mpcal
{

using Complex = std::complex<double>;
using ComplexSeries = std::vector<Complex>;

inline constexpr double kDefaultReferenceImpedance = 50.0;

class FrequencyGrid
{
  public:
    FrequencyGrid() = default;

    /// Throws InvalidArgument unless points is non-empty, positive and strictly increasing.
    explicit FrequencyGrid(std::vector<double> points);

    /// count points evenly spaced from start to stop inclusive.
    static FrequencyGrid linear(double start_hz, double stop_hz, std::size_t count);

    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }
    double operator[](std::size_t k) const { return points_[k]; }
    std::span<const double> points() const noexcept { return points_; }

    /// Largest spacing between adjacent points (0 for a single-point grid).
    double max_step() const noexcept;

    friend bool operator==(const FrequencyGrid &, const FrequencyGrid &) = default;

  private:
    std::vector<double> points_;
};

/// Throws GridMismatch if the grids are not element-wise identical.
void require_compatible(const FrequencyGrid &a, const FrequencyGrid &b, std::string_view context);

class NPortNetwork
{
  public:
    NPortNetwork() = default;
    NPortNetwork(FrequencyGrid grid, std::vector<Eigen::MatrixXcd> s,
                 double reference_impedance = kDefaultReferenceImpedance);

    const FrequencyGrid &grid() const noexcept { return grid_; }
    std::size_t n_ports() const noexcept { return n_ports_; }
    std::size_t size() const noexcept { return s_.size(); }
    double reference_impedance() const noexcept { return z0_; }

    const Eigen::MatrixXcd &at(std::size_t k) const { return s_[k]; }
    const std::vector<Eigen::MatrixXcd> &matrices() const noexcept { return s_; }

    /// s[i][j] over the whole grid (0-based port indices).
    ComplexSeries entry(std::size_t i, std::size_t j) const;

  private:
    FrequencyGrid grid_;
    std::size_t n_ports_ = 0;
    std::vector<Eigen::MatrixXcd> s_;
    double z0_ = kDefaultReferenceImpedance;
};

NPortNetwork make_one_port(const FrequencyGrid &grid, const ComplexSeries &s11,
                           double reference_impedance = kDefaultReferenceImpedance);
NPortNetwork make_two_port(const FrequencyGrid &grid, const ComplexSeries &s11, const ComplexSeries &s21,
                           const ComplexSeries &s12, const ComplexSeries &s22,
                           double reference_impedance = kDefaultReferenceImpedance);

/// Two-port with the same S-matrix at every grid point.
NPortNetwork make_constant_two_port(const FrequencyGrid &grid, const Eigen::Matrix2cd &s,
                                    double reference_impedance = kDefaultReferenceImpedance);

/// Port 1 and port 2 swapped.
NPortNetwork flip_two_port(const NPortNetwork &net);

class TwoPortT
{
  public:
    TwoPortT() = default;
    TwoPortT(FrequencyGrid grid, std::vector<Eigen::Matrix2cd> t,
             double reference_impedance = kDefaultReferenceImpedance);

    static TwoPortT identity(const FrequencyGrid &grid, double reference_impedance = kDefaultReferenceImpedance);

    const FrequencyGrid &grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return t_.size(); }
    double reference_impedance() const noexcept { return z0_; }
    const Eigen::Matrix2cd &at(std::size_t k) const { return t_[k]; }

  private:
    FrequencyGrid grid_;
    std::vector<Eigen::Matrix2cd> t_;
    double z0_ = kDefaultReferenceImpedance;
};

// Single-point conversions, used by the per-frequency loops in the calibration code.
Eigen::Matrix2cd s_to_t(const Eigen::Matrix2cd &s);
Eigen::Matrix2cd t_to_s(const Eigen::Matrix2cd &t);

/// Throws ZeroTransmission where S21 == 0.
TwoPortT s_to_t(const NPortNetwork &net);

/// Throws SingularT where T22 == 0.
NPortNetwork t_to_s(const TwoPortT &t);

/// Per-frequency product a * b. Throws GridMismatch / ImpedanceMismatch.
TwoPortT cascade(const TwoPortT &a, const TwoPortT &b);

/// Reduce to the kept ports with every other port terminated in terminations[port].
/// terminations has one entry per port of net; entries for kept ports are ignored.
/// Throws SingularReduction where (I - Gamma * S_tt) is not invertible.
NPortNetwork reduce_ports(const NPortNetwork &net, std::span<const std::size_t> kept,
                          std::span<const Complex> terminations);

/// Same termination on every inactive port.
NPortNetwork reduce_ports(const NPortNetwork &net, std::span<const std::size_t> kept, Complex termination);

/// max |s[i][j] - s[j][i]| over all frequencies and port pairs.
double reciprocity_deviation(const NPortNetwork &net);

} // namespace mpcal
