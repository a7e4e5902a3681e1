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

#include "mpcal/error_model.hpp"
#include "mpcal/numfmt.hpp"

#include <cmath>
#include <limits>

namespace mpcal
{

namespace
{

std::string at_hz(const FrequencyGrid &grid, std::size_t k)
{
    return " at " + format_double(grid[k]) + " Hz";
}

void require_length(const ComplexSeries &s, const FrequencyGrid &grid, const char *what)
{
    if (s.size() != grid.size())
        throw Error(Errc::InvalidArgument, std::string(what) + ": series length does not match grid");
}

} // namespace

// ---------------------------------------------------------------------------------------------

ErrorBox3::ErrorBox3(FrequencyGrid grid, ComplexSeries e00, ComplexSeries e11, ComplexSeries p)
    : grid_(std::move(grid)), e00_(std::move(e00)), e11_(std::move(e11)), p_(std::move(p))
{
    require_length(e00_, grid_, "ErrorBox3 e00");
    require_length(e11_, grid_, "ErrorBox3 e11");
    require_length(p_, grid_, "ErrorBox3 p");
    for (std::size_t k = 0; k < p_.size(); ++k)
        if (p_[k] == Complex(0.0))
            throw Error(Errc::ZeroTracking, "reflection tracking is zero" + at_hz(grid_, k));
}

ErrorBox3 ErrorBox3::identity(const FrequencyGrid &grid)
{
    return ErrorBox3(grid, ComplexSeries(grid.size(), 0.0), ComplexSeries(grid.size(), 0.0),
                     ComplexSeries(grid.size(), 1.0));
}

Eigen::Matrix2cd ErrorBox3::forward_matrix(std::size_t k) const
{
    Eigen::Matrix2cd n;
    n << -delta(k), e00_[k], -e11_[k], 1.0;
    return n;
}

Eigen::Matrix2cd ErrorBox3::reverse_matrix(std::size_t k) const
{
    Eigen::Matrix2cd n;
    n << -delta(k), e11_[k], -e00_[k], 1.0;
    return n;
}

PairTracking::PairTracking(FrequencyGrid grid, ComplexSeries k) : grid_(std::move(grid)), k_(std::move(k))
{
    require_length(k_, grid_, "PairTracking k");
    for (std::size_t i = 0; i < k_.size(); ++i)
        if (k_[i] == Complex(0.0))
            throw Error(Errc::ZeroTracking, "transmission tracking is zero" + at_hz(grid_, i));
}

PairTracking PairTracking::unity(const FrequencyGrid &grid)
{
    return PairTracking(grid, ComplexSeries(grid.size(), 1.0));
}

// ---------------------------------------------------------------------------------------------
// 3-term model

Complex embed_reflection(Complex e00, Complex e11, Complex p, Complex gamma)
{
    const Complex den = 1.0 - e11 * gamma;
    if (std::abs(den) <= kModelPoleThreshold)
        throw Error(Errc::ModelPole, "1 - e11*Gamma vanishes");
    return e00 + p * gamma / den;
}

Complex correct_reflection(Complex e00, Complex e11, Complex p, Complex gamma_measured)
{
    const Complex num = gamma_measured - e00;
    const Complex den = e11 * num + p;
    if (std::abs(den) <= kModelPoleThreshold)
        throw Error(Errc::ModelPole, "e11*(Gamma_m - e00) + p vanishes");
    return num / den;
}

ComplexSeries embed_reflection(const ErrorBox3 &box, const ComplexSeries &gamma)
{
    require_length(gamma, box.grid(), "embed_reflection");
    ComplexSeries out(gamma.size());
    for (std::size_t k = 0; k < gamma.size(); ++k)
    {
        try
        {
            out[k] = embed_reflection(box.e00()[k], box.e11()[k], box.p()[k], gamma[k]);
        }
        catch (const Error &e)
        {
            throw Error(e.code(), e.message() + at_hz(box.grid(), k));
        }
    }
    return out;
}

ComplexSeries correct_reflection(const ErrorBox3 &box, const ComplexSeries &gamma_measured)
{
    require_length(gamma_measured, box.grid(), "correct_reflection");
    ComplexSeries out(gamma_measured.size());
    for (std::size_t k = 0; k < gamma_measured.size(); ++k)
    {
        try
        {
            out[k] = correct_reflection(box.e00()[k], box.e11()[k], box.p()[k], gamma_measured[k]);
        }
        catch (const Error &e)
        {
            throw Error(e.code(), e.message() + at_hz(box.grid(), k));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Three-standard solve

std::pair<double, std::size_t> min_pairwise_separation(std::span<const ComplexSeries> values)
{
    double best = std::numeric_limits<double>::infinity();
    std::size_t where = 0;
    if (values.empty())
        return {best, where};
    for (std::size_t k = 0; k < values.front().size(); ++k)
        for (std::size_t a = 0; a < values.size(); ++a)
            for (std::size_t b = a + 1; b < values.size(); ++b)
            {
                const double d = std::abs(values[a][k] - values[b][k]);
                if (d < best)
                {
                    best = d;
                    where = k;
                }
            }
    return {best, where};
}

ThreeStandardSolution solve_three_standards(const FrequencyGrid &grid, std::span<const Standard> standards,
                                            const StandardThresholds &thresholds)
{
    if (standards.size() != 3)
        throw Error(Errc::InvalidArgument, "exactly three standards are required, got " +
                                               std::to_string(standards.size()));
    for (const auto &s : standards)
    {
        require_length(s.actual, grid, "solve_three_standards actual");
        require_length(s.measured, grid, "solve_three_standards measured");
    }

    ThreeStandardSolution sol;
    const ComplexSeries actuals[3] = {standards[0].actual, standards[1].actual, standards[2].actual};
    const auto [sep, sep_at] = min_pairwise_separation(actuals);
    sol.min_separation = sep;
    sol.min_separation_hz = grid[sep_at];
    if (sep < thresholds.separation_error)
        throw Error(Errc::DegenerateStandards, "standards separated by only " + format_double(sep) +
                                                   at_hz(grid, sep_at) + " (limit " +
                                                   format_double(thresholds.separation_error) + ")");
    if (sep < thresholds.separation_warning)
        sol.warnings.push_back("standards separated by only " + format_double(sep) + at_hz(grid, sep_at) +
                               " (warning below " + format_double(thresholds.separation_warning) + ")");

    const std::size_t n = grid.size();
    ComplexSeries e00(n), e11(n), p(n);
    for (std::size_t k = 0; k < n; ++k)
    {
        Eigen::Matrix3cd a;
        Eigen::Vector3cd rhs;
        for (Eigen::Index r = 0; r < 3; ++r)
        {
            const Complex ga = standards[r].actual[k];
            const Complex gm = standards[r].measured[k];
            a(r, 0) = 1.0;
            a(r, 1) = ga * gm;
            a(r, 2) = -ga;
            rhs(r) = gm;
        }
        const double scale = a.row(0).norm() * a.row(1).norm() * a.row(2).norm();
        const double rel_det = std::abs(a.determinant()) / scale;
        if (!(rel_det >= thresholds.relative_determinant))
            throw Error(Errc::DegenerateStandards,
                        "relative determinant " + format_double(rel_det) + at_hz(grid, k));

        const Eigen::Vector3cd x = a.partialPivLu().solve(rhs);
        e00[k] = x(0);
        e11[k] = x(1);
        p[k] = x(0) * x(1) - x(2);
        if (std::abs(p[k]) < 1e-12)
            throw Error(Errc::ZeroTracking, "recovered reflection tracking vanishes" + at_hz(grid, k));
    }
    sol.box = ErrorBox3(grid, std::move(e00), std::move(e11), std::move(p));
    return sol;
}

// ---------------------------------------------------------------------------------------------

ErrorBox3 shift_reference_plane(const ErrorBox3 &box, const NPortNetwork &adapter)
{
    if (adapter.n_ports() != 2)
        throw Error(Errc::InvalidArgument, "reference-plane adapter must be a two-port");
    require_compatible(box.grid(), adapter.grid(), "shift_reference_plane");

    const std::size_t n = box.size();
    ComplexSeries e00(n), e11(n), p(n);
    for (std::size_t k = 0; k < n; ++k)
    {
        if (adapter.at(k)(1, 0) == Complex(0.0))
            throw Error(Errc::ZeroTransmission, "adapter S21 is zero" + at_hz(box.grid(), k));
        // Box realised with e10 = 1, e01 = p; its T-matrix is then N_fwd.
        const Eigen::Matrix2cd s = t_to_s(Eigen::Matrix2cd(box.forward_matrix(k) * s_to_t(Eigen::Matrix2cd(adapter.at(k)))));
        e00[k] = s(0, 0);
        e11[k] = s(1, 1);
        p[k] = s(0, 1) * s(1, 0);
    }
    return ErrorBox3(box.grid(), std::move(e00), std::move(e11), std::move(p));
}

NPortNetwork correct_two_port(const ErrorBox3 &box_i, const ErrorBox3 &box_j, const PairTracking &k,
                              const NPortNetwork &measured)
{
    if (measured.n_ports() != 2)
        throw Error(Errc::InvalidArgument, "correct_two_port needs a two-port measurement");
    require_compatible(box_i.grid(), measured.grid(), "correct_two_port");
    require_compatible(box_j.grid(), measured.grid(), "correct_two_port");
    require_compatible(k.grid(), measured.grid(), "correct_two_port");

    std::vector<Eigen::MatrixXcd> out(measured.size());
    for (std::size_t f = 0; f < measured.size(); ++f)
    {
        if (measured.at(f)(1, 0) == Complex(0.0))
            throw Error(Errc::ZeroTransmission, "measured S21 is zero" + at_hz(measured.grid(), f));
        const Eigen::Matrix2cd t_meas = s_to_t(Eigen::Matrix2cd(measured.at(f)));
        const Eigen::Matrix2cd t_dut =
            k.k()[f] * box_i.forward_matrix(f).inverse() * t_meas * box_j.reverse_matrix(f).inverse();
        if (t_dut(1, 1) == Complex(0.0))
            throw Error(Errc::SingularT, "corrected T22 is zero" + at_hz(measured.grid(), f));
        out[f] = t_to_s(t_dut);
    }
    return NPortNetwork(measured.grid(), std::move(out), measured.reference_impedance());
}

NPortNetwork embed_two_port(const ErrorBox3 &box_i, const ErrorBox3 &box_j, const PairTracking &k,
                            const NPortNetwork &dut)
{
    if (dut.n_ports() != 2)
        throw Error(Errc::InvalidArgument, "embed_two_port needs a two-port");
    require_compatible(box_i.grid(), dut.grid(), "embed_two_port");
    require_compatible(box_j.grid(), dut.grid(), "embed_two_port");
    require_compatible(k.grid(), dut.grid(), "embed_two_port");

    std::vector<Eigen::MatrixXcd> out(dut.size());
    for (std::size_t f = 0; f < dut.size(); ++f)
    {
        if (dut.at(f)(1, 0) == Complex(0.0))
            throw Error(Errc::ZeroTransmission, "device S21 is zero" + at_hz(dut.grid(), f));
        const Eigen::Matrix2cd t =
            box_i.forward_matrix(f) * s_to_t(Eigen::Matrix2cd(dut.at(f))) * box_j.reverse_matrix(f) / k.k()[f];
        out[f] = t_to_s(t);
    }
    return NPortNetwork(dut.grid(), std::move(out), dut.reference_impedance());
}

} // namespace mpcal
