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

// Test-only reference computations, kept independent of the library code paths they check.

#pragma once

#include "mpcal/net.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <complex>
#include <random>
#include <vector>

namespace mpcal::test
{

using Complex = std::complex<double>;

/// Full scattering solve of an n-port with terminations: with incident a = a_ext + D b and
/// b = S a, the response is b = (I - S D)^-1 S a_ext. The kept-port block of that operator is
/// the reduced S-matrix.
inline Eigen::MatrixXcd brute_force_reduce(const Eigen::MatrixXcd &s, const std::vector<std::size_t> &kept,
                                           const std::vector<Complex> &terminations)
{
    const Eigen::Index n = s.rows();
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(n, n);
    std::vector<bool> is_kept(static_cast<std::size_t>(n), false);
    for (auto p : kept)
        is_kept[p] = true;
    for (Eigen::Index p = 0; p < n; ++p)
        if (!is_kept[static_cast<std::size_t>(p)])
            d(p, p) = terminations[static_cast<std::size_t>(p)];
    const Eigen::MatrixXcd response = (Eigen::MatrixXcd::Identity(n, n) - s * d).fullPivLu().solve(s);
    Eigen::MatrixXcd out(kept.size(), kept.size());
    for (std::size_t a = 0; a < kept.size(); ++a)
        for (std::size_t b = 0; b < kept.size(); ++b)
            out(a, b) = response(kept[a], kept[b]);
    return out;
}

/// Input reflection of a two-port terminated in gamma at port 2.
inline Complex terminated_input(const Eigen::Matrix2cd &a, Complex gamma)
{
    return a(0, 0) + a(0, 1) * a(1, 0) * gamma / (1.0 - a(1, 1) * gamma);
}

/// Signal-flow forward model of a two-port DUT between two explicit error adapters (each with
/// port 1 at the instrument). Solved as a 6-port wave system rather than through T-matrices.
inline Eigen::Matrix2cd flow_graph_measurement(const Eigen::Matrix2cd &adapter_i, const Eigen::Matrix2cd &dut,
                                               const Eigen::Matrix2cd &adapter_j)
{
    // Ports: 0 = instrument i, 1 = adapter i device side, 2 = dut port 1, 3 = dut port 2,
    // 4 = adapter j device side, 5 = instrument j. Internal connections 1<->2 and 3<->4.
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(6, 6);
    s(0, 0) = adapter_i(0, 0);
    s(0, 1) = adapter_i(0, 1);
    s(1, 0) = adapter_i(1, 0);
    s(1, 1) = adapter_i(1, 1);
    s(2, 2) = dut(0, 0);
    s(2, 3) = dut(0, 1);
    s(3, 2) = dut(1, 0);
    s(3, 3) = dut(1, 1);
    s(5, 5) = adapter_j(0, 0);
    s(5, 4) = adapter_j(0, 1);
    s(4, 5) = adapter_j(1, 0);
    s(4, 4) = adapter_j(1, 1);
    // a = P b + a_ext, P routes outgoing waves into the connected port.
    Eigen::MatrixXcd conn = Eigen::MatrixXcd::Zero(6, 6);
    conn(1, 2) = conn(2, 1) = conn(3, 4) = conn(4, 3) = 1.0;
    const Eigen::MatrixXcd response = (Eigen::MatrixXcd::Identity(6, 6) - s * conn).fullPivLu().solve(s);
    Eigen::Matrix2cd out;
    out << response(0, 0), response(0, 5), response(5, 0), response(5, 5);
    return out;
}

class Random
{
  public:
    explicit Random(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

    Complex complex_in_disk(double radius)
    {
        return std::polar(radius * std::sqrt(uniform(0.0, 1.0)), uniform(-std::numbers::pi, std::numbers::pi));
    }

    Complex complex_annulus(double rmin, double rmax) { return std::polar(uniform(rmin, rmax), uniform(-std::numbers::pi, std::numbers::pi)); }

    Eigen::MatrixXcd matrix(Eigen::Index n, double radius)
    {
        Eigen::MatrixXcd m(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                m(i, j) = complex_in_disk(radius);
        return m;
    }

    /// Two-port with |S21| >= min_transmission.
    Eigen::Matrix2cd two_port(double min_transmission = 1e-3)
    {
        Eigen::Matrix2cd s;
        s << complex_in_disk(0.9), complex_annulus(min_transmission, 1.0), complex_annulus(min_transmission, 1.0),
            complex_in_disk(0.9);
        return s;
    }

    std::mt19937_64 &engine() { return rng_; }

  private:
    std::mt19937_64 rng_;
};

inline double max_abs_diff(const Eigen::MatrixXcd &a, const Eigen::MatrixXcd &b)
{
    return (a - b).cwiseAbs().maxCoeff();
}

} // namespace mpcal::test
