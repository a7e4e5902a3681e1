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

#include <catch_amalgamated.hpp>

#include "mpcal/net.hpp"
#include "oracles.hpp"

using namespace mpcal;
using Catch::Matchers::WithinAbs;

namespace
{

FrequencyGrid one_point()
{
    return FrequencyGrid({1e9});
}

Eigen::Matrix2cd m2(Complex a, Complex b, Complex c, Complex d)
{
    Eigen::Matrix2cd m;
    m << a, b, c, d;
    return m;
}

TwoPortT one_point_t(const Eigen::Matrix2cd &t)
{
    return TwoPortT(one_point(), {t});
}

template <typename Fn>
Errc error_code(Fn &&fn)
{
    try
    {
        fn();
    }
    catch (const Error &e)
    {
        return e.code();
    }
    FAIL("expected an mpcal::Error");
    return Errc::InvalidArgument;
}

} // namespace

TEST_CASE("FrequencyGrid invariants")
{
    CHECK_NOTHROW(FrequencyGrid({1.0, 2.0, 3.0}));
    CHECK(error_code([] { FrequencyGrid(std::vector<double>{}); }) == Errc::InvalidArgument);
    CHECK(error_code([] { FrequencyGrid({0.0, 1.0}); }) == Errc::InvalidArgument);
    CHECK(error_code([] { FrequencyGrid({2.0, 1.0}); }) == Errc::NonMonotonicFrequency);
    CHECK(error_code([] { FrequencyGrid({1.0, 1.0}); }) == Errc::NonMonotonicFrequency);

    const auto g = FrequencyGrid::linear(1e9, 9e9, 201);
    CHECK(g.size() == 201);
    CHECK(g[0] == 1e9);
    CHECK(g[200] == 9e9);
    CHECK_THAT(g.max_step(), WithinAbs(4e7, 1e-3));
    CHECK(g == FrequencyGrid::linear(1e9, 9e9, 201));
    CHECK_FALSE(g == FrequencyGrid::linear(1e9, 9e9, 200));
}

TEST_CASE("s_to_t examples")
{
    const Eigen::Matrix2cd thru = m2(0.0, 1.0, 1.0, 0.0);
    CHECK(test::max_abs_diff(s_to_t(thru), Eigen::Matrix2cd::Identity()) == 0.0);

    // Matched 6 dB pad.
    const Eigen::Matrix2cd pad = m2(0.0, 0.5, 0.5, 0.0);
    CHECK(test::max_abs_diff(s_to_t(pad), m2(0.5, 0.0, 0.0, 2.0)) < 1e-15);

    const auto net = make_constant_two_port(one_point(), m2(0.1, 0.5, 0.0, 0.2));
    CHECK(error_code([&] { s_to_t(net); }) == Errc::ZeroTransmission);
}

TEST_CASE("t_to_s examples")
{
    CHECK(test::max_abs_diff(t_to_s(Eigen::Matrix2cd::Identity()), m2(0.0, 1.0, 1.0, 0.0)) == 0.0);
    CHECK(test::max_abs_diff(t_to_s(m2(0.5, 0.0, 0.0, 2.0)), m2(0.0, 0.5, 0.5, 0.0)) < 1e-15);
    CHECK(error_code([] { t_to_s(one_point_t(m2(1.0, 0.0, 0.0, 0.0))); }) == Errc::SingularT);
}

TEST_CASE("cascade examples")
{
    const auto pad = s_to_t(make_constant_two_port(one_point(), m2(0.0, 0.5, 0.5, 0.0)));
    const auto x = s_to_t(make_constant_two_port(one_point(), m2(0.1, 0.3, 0.4, -0.2)));
    CHECK(test::max_abs_diff(cascade(x, TwoPortT::identity(one_point())).at(0), x.at(0)) == 0.0);

    const auto s12db = t_to_s(cascade(pad, pad));
    CHECK_THAT(std::abs(s12db.at(0)(1, 0) - 0.25), WithinAbs(0.0, 1e-15));
    CHECK_THAT(std::abs(s12db.at(0)(0, 1) - 0.25), WithinAbs(0.0, 1e-15));
    CHECK_THAT(std::abs(s12db.at(0)(0, 0)), WithinAbs(0.0, 1e-15));

    const auto other = TwoPortT::identity(FrequencyGrid({2e9}));
    CHECK(error_code([&] { cascade(pad, other); }) == Errc::GridMismatch);
    const auto z75 = TwoPortT::identity(one_point(), 75.0);
    CHECK(error_code([&] { cascade(pad, z75); }) == Errc::ImpedanceMismatch);
}

TEST_CASE("reduce_ports examples")
{
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(3, 3);
    s(0, 2) = s(2, 0) = 0.1;
    const NPortNetwork net(one_point(), {s});
    const std::size_t kept[] = {0, 1};

    const auto plain = reduce_ports(net, kept, Complex(0.0));
    CHECK(plain.n_ports() == 2);
    CHECK(plain.at(0) == s.topLeftCorner(2, 2));

    const auto red = reduce_ports(net, kept, Complex(0.2));
    CHECK_THAT(std::abs(red.at(0)(0, 0) - 0.002), WithinAbs(0.0, 1e-17));
    CHECK(std::abs(red.at(0)(0, 1)) == 0.0);
    CHECK(std::abs(red.at(0)(1, 1)) == 0.0);

    Eigen::MatrixXcd open = Eigen::MatrixXcd::Zero(3, 3);
    open(2, 2) = 1.0;
    const NPortNetwork bad(one_point(), {open});
    CHECK(error_code([&] { reduce_ports(bad, kept, Complex(1.0)); }) == Errc::SingularReduction);

    const std::size_t dup[] = {0, 0};
    CHECK(error_code([&] { reduce_ports(net, dup, Complex(0.0)); }) == Errc::InvalidArgument);
}

TEST_CASE("reciprocity_deviation examples")
{
    CHECK(reciprocity_deviation(make_constant_two_port(one_point(), m2(0.1, 0.3, 0.3, 0.2))) == 0.0);
    CHECK_THAT(reciprocity_deviation(make_constant_two_port(one_point(), m2(0.0, 0.5, 0.4, 0.0))),
               WithinAbs(0.1, 1e-15));
}

TEST_CASE("Property: s/t round trip and det(T) = S12/S21")
{
    test::Random rnd(11);
    for (int trial = 0; trial < 500; ++trial)
    {
        const Eigen::Matrix2cd s = rnd.two_port(1e-3);
        const Eigen::Matrix2cd t = s_to_t(s);
        CHECK(test::max_abs_diff(t_to_s(t), s) < 1e-12);
        CHECK(std::abs(t.determinant() - s(0, 1) / s(1, 0)) < 1e-12 * std::max(1.0, std::abs(s(0, 1) / s(1, 0))));
    }
}

TEST_CASE("Property: cascade is associative")
{
    test::Random rnd(12);
    const FrequencyGrid g({1e9, 2e9});
    for (int trial = 0; trial < 200; ++trial)
    {
        auto make = [&] {
            return s_to_t(NPortNetwork(g, {Eigen::MatrixXcd(rnd.two_port(0.3)), Eigen::MatrixXcd(rnd.two_port(0.3))}));
        };
        const auto a = make(), b = make(), c = make();
        const auto left = cascade(cascade(a, b), c);
        const auto right = cascade(a, cascade(b, c));
        for (std::size_t k = 0; k < g.size(); ++k)
        {
            const double scale = std::max(1.0, left.at(k).cwiseAbs().maxCoeff());
            CHECK(test::max_abs_diff(left.at(k), right.at(k)) < 1e-12 * scale);
        }
    }
}

TEST_CASE("Property: reduce_ports matches the brute-force wave solve")
{
    test::Random rnd(13);
    for (int trial = 0; trial < 400; ++trial)
    {
        const Eigen::Index n = trial % 2 == 0 ? 3 : 4;
        const Eigen::MatrixXcd s = rnd.matrix(n, 0.5);
        std::vector<std::size_t> kept{0};
        if (trial % 3 != 0)
            kept.push_back(static_cast<std::size_t>(n - 1));
        std::vector<Complex> terms(static_cast<std::size_t>(n));
        for (auto &t : terms)
            t = rnd.complex_in_disk(1.0);

        const NPortNetwork net(one_point(), {s});
        const auto red = reduce_ports(net, kept, terms);
        CHECK(test::max_abs_diff(red.at(0), test::brute_force_reduce(s, kept, terms)) < 1e-10);

        const auto zero = reduce_ports(net, kept, Complex(0.0));
        for (std::size_t a = 0; a < kept.size(); ++a)
            for (std::size_t b = 0; b < kept.size(); ++b)
                CHECK(zero.at(0)(a, b) == s(kept[a], kept[b]));
    }
}
