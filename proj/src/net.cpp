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

#include "mpcal/net.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mpcal
{

FrequencyGrid::FrequencyGrid(std::vector<double> points) : points_(std::move(points))
{
    if (points_.empty())
        throw Error(Errc::InvalidArgument, "frequency grid needs at least one point");
    for (std::size_t k = 0; k < points_.size(); ++k)
    {
        if (!std::isfinite(points_[k]) || points_[k] <= 0.0)
            throw Error(Errc::InvalidArgument, "frequency point " + std::to_string(k) + " is not positive");
        if (k > 0 && !(points_[k] > points_[k - 1]))
            throw Error(Errc::NonMonotonicFrequency,
                        "frequency point " + std::to_string(k) + " does not increase");
    }
}

FrequencyGrid FrequencyGrid::linear(double start_hz, double stop_hz, std::size_t count)
{
    if (count == 0)
        throw Error(Errc::InvalidArgument, "frequency grid needs at least one point");
    std::vector<double> pts(count);
    if (count == 1)
    {
        pts[0] = start_hz;
        return FrequencyGrid(std::move(pts));
    }
    const double step = (stop_hz - start_hz) / static_cast<double>(count - 1);
    for (std::size_t k = 0; k < count; ++k)
        pts[k] = start_hz + step * static_cast<double>(k);
    pts.back() = stop_hz;
    return FrequencyGrid(std::move(pts));
}

double FrequencyGrid::max_step() const noexcept
{
    double step = 0.0;
    for (std::size_t k = 1; k < points_.size(); ++k)
        step = std::max(step, points_[k] - points_[k - 1]);
    return step;
}

void require_compatible(const FrequencyGrid &a, const FrequencyGrid &b, std::string_view context)
{
    if (!(a == b))
        throw Error(Errc::GridMismatch, std::string(context) + ": frequency grids differ");
}

static void require_same_impedance(double a, double b, std::string_view context)
{
    if (a != b)
        throw Error(Errc::ImpedanceMismatch, std::string(context) + ": reference impedances differ");
}

// ---------------------------------------------------------------------------------------------
// NPortNetwork

NPortNetwork::NPortNetwork(FrequencyGrid grid, std::vector<Eigen::MatrixXcd> s, double reference_impedance)
    : grid_(std::move(grid)), s_(std::move(s)), z0_(reference_impedance)
{
    if (grid_.empty())
        throw Error(Errc::InvalidArgument, "network needs a non-empty grid");
    if (s_.size() != grid_.size())
        throw Error(Errc::InvalidArgument, "one S-matrix per frequency point is required");
    if (!(reference_impedance > 0.0))
        throw Error(Errc::InvalidArgument, "reference impedance must be positive");
    n_ports_ = static_cast<std::size_t>(s_.front().rows());
    if (n_ports_ == 0)
        throw Error(Errc::InvalidArgument, "network needs at least one port");
    for (std::size_t k = 0; k < s_.size(); ++k)
    {
        const auto &m = s_[k];
        if (static_cast<std::size_t>(m.rows()) != n_ports_ || static_cast<std::size_t>(m.cols()) != n_ports_)
            throw Error(Errc::InvalidArgument, "S-matrix at point " + std::to_string(k) + " has the wrong shape");
        if (!m.allFinite())
            throw Error(Errc::InvalidArgument, "S-matrix at point " + std::to_string(k) + " has non-finite entries");
    }
}

ComplexSeries NPortNetwork::entry(std::size_t i, std::size_t j) const
{
    if (i >= n_ports_ || j >= n_ports_)
        throw Error(Errc::InvalidArgument, "port index out of range");
    ComplexSeries out(s_.size());
    for (std::size_t k = 0; k < s_.size(); ++k)
        out[k] = s_[k](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return out;
}

NPortNetwork make_one_port(const FrequencyGrid &grid, const ComplexSeries &s11, double reference_impedance)
{
    if (s11.size() != grid.size())
        throw Error(Errc::InvalidArgument, "series length does not match grid");
    std::vector<Eigen::MatrixXcd> s(grid.size(), Eigen::MatrixXcd(1, 1));
    for (std::size_t k = 0; k < grid.size(); ++k)
        s[k](0, 0) = s11[k];
    return NPortNetwork(grid, std::move(s), reference_impedance);
}

NPortNetwork make_two_port(const FrequencyGrid &grid, const ComplexSeries &s11, const ComplexSeries &s21,
                           const ComplexSeries &s12, const ComplexSeries &s22, double reference_impedance)
{
    const std::size_t n = grid.size();
    if (s11.size() != n || s21.size() != n || s12.size() != n || s22.size() != n)
        throw Error(Errc::InvalidArgument, "series length does not match grid");
    std::vector<Eigen::MatrixXcd> s(n, Eigen::MatrixXcd(2, 2));
    for (std::size_t k = 0; k < n; ++k)
        s[k] << s11[k], s12[k], s21[k], s22[k];
    return NPortNetwork(grid, std::move(s), reference_impedance);
}

NPortNetwork make_constant_two_port(const FrequencyGrid &grid, const Eigen::Matrix2cd &s, double reference_impedance)
{
    return NPortNetwork(grid, std::vector<Eigen::MatrixXcd>(grid.size(), Eigen::MatrixXcd(s)), reference_impedance);
}

NPortNetwork flip_two_port(const NPortNetwork &net)
{
    if (net.n_ports() != 2)
        throw Error(Errc::InvalidArgument, "flip_two_port needs a two-port");
    std::vector<Eigen::MatrixXcd> s(net.size(), Eigen::MatrixXcd(2, 2));
    for (std::size_t k = 0; k < net.size(); ++k)
    {
        const auto &m = net.at(k);
        s[k] << m(1, 1), m(1, 0), m(0, 1), m(0, 0);
    }
    return NPortNetwork(net.grid(), std::move(s), net.reference_impedance());
}

// ---------------------------------------------------------------------------------------------
// T-parameters

TwoPortT::TwoPortT(FrequencyGrid grid, std::vector<Eigen::Matrix2cd> t, double reference_impedance)
    : grid_(std::move(grid)), t_(std::move(t)), z0_(reference_impedance)
{
    if (t_.size() != grid_.size())
        throw Error(Errc::InvalidArgument, "one T-matrix per frequency point is required");
}

TwoPortT TwoPortT::identity(const FrequencyGrid &grid, double reference_impedance)
{
    return TwoPortT(grid, std::vector<Eigen::Matrix2cd>(grid.size(), Eigen::Matrix2cd::Identity()),
                    reference_impedance);
}

Eigen::Matrix2cd s_to_t(const Eigen::Matrix2cd &s)
{
    const Complex s11 = s(0, 0), s12 = s(0, 1), s21 = s(1, 0), s22 = s(1, 1);
    if (s21 == Complex(0.0))
        throw Error(Errc::ZeroTransmission, "S21 is zero");
    Eigen::Matrix2cd t;
    t << (s12 * s21 - s11 * s22) / s21, s11 / s21, -s22 / s21, 1.0 / s21;
    return t;
}

Eigen::Matrix2cd t_to_s(const Eigen::Matrix2cd &t)
{
    const Complex t22 = t(1, 1);
    if (t22 == Complex(0.0))
        throw Error(Errc::SingularT, "T22 is zero");
    const Complex det = t(0, 0) * t(1, 1) - t(0, 1) * t(1, 0);
    Eigen::Matrix2cd s;
    s << t(0, 1) / t22, det / t22, 1.0 / t22, -t(1, 0) / t22;
    return s;
}

TwoPortT s_to_t(const NPortNetwork &net)
{
    if (net.n_ports() != 2)
        throw Error(Errc::InvalidArgument, "s_to_t needs a two-port");
    std::vector<Eigen::Matrix2cd> t(net.size());
    for (std::size_t k = 0; k < net.size(); ++k)
    {
        if (net.at(k)(1, 0) == Complex(0.0))
            throw Error(Errc::ZeroTransmission, "S21 is zero at " + std::to_string(net.grid()[k]) + " Hz");
        t[k] = s_to_t(Eigen::Matrix2cd(net.at(k)));
    }
    return TwoPortT(net.grid(), std::move(t), net.reference_impedance());
}

NPortNetwork t_to_s(const TwoPortT &t)
{
    std::vector<Eigen::MatrixXcd> s(t.size());
    for (std::size_t k = 0; k < t.size(); ++k)
    {
        if (t.at(k)(1, 1) == Complex(0.0))
            throw Error(Errc::SingularT, "T22 is zero at " + std::to_string(t.grid()[k]) + " Hz");
        s[k] = t_to_s(t.at(k));
    }
    return NPortNetwork(t.grid(), std::move(s), t.reference_impedance());
}

TwoPortT cascade(const TwoPortT &a, const TwoPortT &b)
{
    require_compatible(a.grid(), b.grid(), "cascade");
    require_same_impedance(a.reference_impedance(), b.reference_impedance(), "cascade");
    std::vector<Eigen::Matrix2cd> t(a.size());
    for (std::size_t k = 0; k < a.size(); ++k)
        t[k] = a.at(k) * b.at(k);
    return TwoPortT(a.grid(), std::move(t), a.reference_impedance());
}

// ---------------------------------------------------------------------------------------------
// Port reduction

NPortNetwork reduce_ports(const NPortNetwork &net, std::span<const std::size_t> kept,
                          std::span<const Complex> terminations)
{
    const std::size_t n = net.n_ports();
    if (kept.empty())
        throw Error(Errc::InvalidArgument, "reduce_ports: no kept ports");
    if (terminations.size() != n)
        throw Error(Errc::InvalidArgument, "reduce_ports: need one termination entry per port");

    std::vector<bool> is_kept(n, false);
    for (std::size_t p : kept)
    {
        if (p >= n || is_kept[p])
            throw Error(Errc::InvalidArgument, "reduce_ports: kept ports must be distinct and in range");
        is_kept[p] = true;
    }
    std::vector<std::size_t> term;
    for (std::size_t p = 0; p < n; ++p)
        if (!is_kept[p])
            term.push_back(p);

    const auto np = static_cast<Eigen::Index>(kept.size());
    const auto nt = static_cast<Eigen::Index>(term.size());

    Eigen::MatrixXcd gamma = Eigen::MatrixXcd::Zero(nt, nt);
    bool all_matched = true;
    for (Eigen::Index a = 0; a < nt; ++a)
    {
        gamma(a, a) = terminations[term[a]];
        all_matched = all_matched && gamma(a, a) == Complex(0.0);
    }

    std::vector<Eigen::MatrixXcd> out(net.size());
    for (std::size_t k = 0; k < net.size(); ++k)
    {
        const auto &s = net.at(k);
        Eigen::MatrixXcd spp(np, np), spt(np, nt), stp(nt, np), stt(nt, nt);
        for (Eigen::Index a = 0; a < np; ++a)
        {
            for (Eigen::Index b = 0; b < np; ++b)
                spp(a, b) = s(kept[a], kept[b]);
            for (Eigen::Index b = 0; b < nt; ++b)
            {
                spt(a, b) = s(kept[a], term[b]);
                stp(b, a) = s(term[b], kept[a]);
            }
        }
        if (all_matched || nt == 0)
        {
            out[k] = spp;
            continue;
        }
        for (Eigen::Index a = 0; a < nt; ++a)
            for (Eigen::Index b = 0; b < nt; ++b)
                stt(a, b) = s(term[a], term[b]);

        const Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(nt, nt) - gamma * stt;
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(m);
        lu.setThreshold(1e-13);
        if (!lu.isInvertible())
            throw Error(Errc::SingularReduction,
                        "(I - Gamma*S_tt) is singular at " + std::to_string(net.grid()[k]) + " Hz");
        out[k] = spp + spt * lu.solve(gamma * stp);
    }
    return NPortNetwork(net.grid(), std::move(out), net.reference_impedance());
}

NPortNetwork reduce_ports(const NPortNetwork &net, std::span<const std::size_t> kept, Complex termination)
{
    const std::vector<Complex> terms(net.n_ports(), termination);
    return reduce_ports(net, kept, terms);
}

double reciprocity_deviation(const NPortNetwork &net)
{
    double worst = 0.0;
    for (const auto &m : net.matrices())
        worst = std::max(worst, (m - m.transpose()).cwiseAbs().maxCoeff());
    return worst;
}

} // namespace mpcal
