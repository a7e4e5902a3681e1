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

#include "mpcal/touchstone.hpp"
#include "oracles.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mpcal;
namespace ts = mpcal::touchstone;

namespace
{

std::string slurp(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path golden(const char *name)
{
    return std::filesystem::path(MPCAL_GOLDEN_DIR) / name;
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

NPortNetwork diagonal(std::size_t n, Complex v, const FrequencyGrid &grid)
{
    std::vector<Eigen::MatrixXcd> m(grid.size(), Eigen::MatrixXcd::Identity(n, n) * v);
    return NPortNetwork(grid, m);
}

} // namespace

TEST_CASE("MA one-port example")
{
    const auto net = ts::parse("# GHz S MA R 50\n1.0 0.5 90\n");
    REQUIRE(net.n_ports() == 1);
    CHECK(net.grid()[0] == 1e9);
    CHECK(std::abs(net.at(0)(0, 0) - Complex(0.0, 0.5)) < 1e-15);
    CHECK(net.reference_impedance() == 50.0);
}

TEST_CASE("DB one-port example")
{
    const auto net = ts::parse("# MHz S DB R 50\n100 -20 0\n");
    CHECK(net.grid()[0] == 1e8);
    CHECK(std::abs(net.at(0)(0, 0) - 0.1) < 1e-15);
}

TEST_CASE("Two-port column order is S11 S21 S12 S22")
{
    const auto net = ts::parse("# Hz S RI R 50\n1 1 0 2 0 3 0 4 0\n");
    REQUIRE(net.n_ports() == 2);
    CHECK(net.at(0)(0, 0) == Complex(1.0));
    CHECK(net.at(0)(1, 0) == Complex(2.0));
    CHECK(net.at(0)(0, 1) == Complex(3.0));
    CHECK(net.at(0)(1, 1) == Complex(4.0));
}

TEST_CASE("Defaults, comments, blank lines and whitespace")
{
    const std::string text = "! header comment\n"
                             "!\n"
                             "\n"
                             "   #   mhz    s   ri   r   75   ! trailing\n"
                             "\t1\t0.1 \t -0.2   ! first point\n"
                             "\n"
                             "2   0.3   0.4\n"
                             "# GHz S MA R 50\n";
    const auto net = ts::parse(text);
    CHECK(net.size() == 2);
    CHECK(net.reference_impedance() == 75.0);
    CHECK(net.grid()[1] == 2e6);
    CHECK(net.at(0)(0, 0) == Complex(0.1, -0.2));

    // No option line: GHz, MA, 50 ohm.
    const auto d = ts::parse("1 0.5 0\n");
    CHECK(d.grid()[0] == 1e9);
    CHECK(d.at(0)(0, 0) == Complex(0.5));
    CHECK(d.reference_impedance() == 50.0);
}

TEST_CASE("Parse errors")
{
    CHECK(error_code([] { ts::parse("# GHz Y MA R 50\n1 0.5 0\n"); }) == Errc::UnsupportedParameter);
    CHECK(error_code([] { ts::parse("# GHz Z RI R 50\n1 0.5 0\n"); }) == Errc::UnsupportedParameter);
    CHECK(error_code([] { ts::parse("# GHz S RI R 50\n2 0.5 0\n1 0.5 0\n"); }) == Errc::NonMonotonicFrequency);
    CHECK(error_code([] { ts::parse("# GHz S RI R 50\n1 0.5 0\n1 0.5 0\n"); }) == Errc::NonMonotonicFrequency);
    CHECK(error_code([] { ts::parse("# GHz S RI R 50\n1 0.5 x\n"); }) == Errc::SyntaxError);
    CHECK(error_code([] { ts::parse("# GHz S RI R 50\n"); }) == Errc::SyntaxError);
    CHECK(error_code([] { ts::parse("# GHz S RI R 50\n1 0.5 0 0.1\n"); }) == Errc::CountMismatch);
    CHECK(error_code([] { ts::parse("# GHz S RI R 50\n1 0.5 0\n", 2); }) == Errc::CountMismatch);

    try
    {
        ts::parse("# GHz S RI R 50\n1 0.5 0\n2 0.5 bad\n");
        FAIL("no throw");
    }
    catch (const Error &e)
    {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("Extension helpers")
{
    CHECK(ts::ports_from_extension("a/b/file.s8p") == 8u);
    CHECK(ts::ports_from_extension("FILE.S2P") == 2u);
    CHECK(ts::ports_from_extension("x.s12p") == 12u);
    CHECK_FALSE(ts::ports_from_extension("x.txt").has_value());
    CHECK_FALSE(ts::ports_from_extension("x.s0p").has_value());
    CHECK(ts::extension_for(4) == ".s4p");
}

TEST_CASE("Golden writer output")
{
    const NPortNetwork two(FrequencyGrid({1e9, 2.5e9}),
                           std::vector<Eigen::MatrixXcd>(2, [] {
                               Eigen::MatrixXcd m(2, 2);
                               m << 0.1, Complex(0.0, 0.5), Complex(0.0, 0.5), -0.25;
                               return m;
                           }()));
    CHECK(ts::write(two, {ts::FreqUnit::GHz, ts::Format::RI, 50.0}) == slurp(golden("twoport_ri.s2p")));

    Eigen::MatrixXcd s3 = Eigen::MatrixXcd::Zero(3, 3);
    s3(0, 0) = 0.1;
    s3(0, 1) = s3(1, 0) = Complex(0.0, 0.5);
    s3(1, 1) = -0.25;
    s3(2, 2) = 0.1;
    const NPortNetwork three(FrequencyGrid({1e9}), {s3});
    CHECK(ts::write(three, {ts::FreqUnit::MHz, ts::Format::MA, 50.0}) == slurp(golden("threeport_ma.s3p")));

    const auto five = diagonal(5, 0.1, FrequencyGrid({1e9}));
    CHECK(ts::write(five, {ts::FreqUnit::GHz, ts::Format::DB, 50.0}) == slurp(golden("fiveport_db.s5p")));
}

TEST_CASE("Golden files parse back")
{
    const auto two = ts::read_file(golden("twoport_ri.s2p"));
    CHECK(two.n_ports() == 2);
    CHECK(two.grid()[1] == 2.5e9);
    CHECK(two.at(1)(1, 0) == Complex(0.0, 0.5));

    const auto three = ts::read_file(golden("threeport_ma.s3p"));
    CHECK(three.n_ports() == 3);
    CHECK(std::abs(three.at(0)(1, 1) + 0.25) < 1e-16);

    const auto five = ts::read_file(golden("fiveport_db.s5p"));
    CHECK(five.n_ports() == 5);
    CHECK(std::abs(five.at(0)(4, 4) - 0.1) < 1e-16);
    CHECK(std::abs(five.at(0)(0, 4)) < 1e-19);
}

TEST_CASE("Round trip over formats, units and port counts")
{
    test::Random rnd(21);
    const ts::Format formats[] = {ts::Format::RI, ts::Format::MA, ts::Format::DB};
    const ts::FreqUnit units[] = {ts::FreqUnit::Hz, ts::FreqUnit::KHz, ts::FreqUnit::MHz, ts::FreqUnit::GHz};
    for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 8u})
    {
        std::vector<double> f;
        for (int k = 0; k < 7; ++k)
            f.push_back(1e9 + 1.234567e7 * k);
        const FrequencyGrid grid(f);
        std::vector<Eigen::MatrixXcd> m;
        for (std::size_t k = 0; k < grid.size(); ++k)
        {
            Eigen::MatrixXcd s(n, n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    s(i, j) = rnd.complex_annulus(1e-4, 1.0);
            m.push_back(s);
        }
        const NPortNetwork net(grid, m);
        for (auto fmt : formats)
            for (auto unit : units)
            {
                const std::string text = ts::write(net, {unit, fmt, 50.0});
                const auto back = ts::parse(text);
                REQUIRE(back.n_ports() == n);
                REQUIRE(back.size() == grid.size());
                for (std::size_t k = 0; k < grid.size(); ++k)
                {
                    CHECK(std::abs(back.grid()[k] - grid[k]) <= 1e-15 * grid[k]);
                    CHECK(test::max_abs_diff(back.at(k), net.at(k)) < 1e-12);
                }
            }
        // RI round trip is exact.
        const auto exact = ts::parse(ts::write(net, {ts::FreqUnit::Hz, ts::Format::RI, 50.0}));
        for (std::size_t k = 0; k < grid.size(); ++k)
        {
            CHECK(exact.grid()[k] == grid[k]);
            CHECK(exact.at(k) == net.at(k));
        }
    }
}

TEST_CASE("Writer is deterministic")
{
    test::Random rnd(22);
    const FrequencyGrid grid({1e9, 2e9, 3e9});
    std::vector<Eigen::MatrixXcd> m;
    for (int k = 0; k < 3; ++k)
        m.push_back(rnd.matrix(4, 0.9));
    const NPortNetwork net(grid, m);
    CHECK(ts::write(net) == ts::write(net));
}

TEST_CASE("File helpers")
{
    const auto dir = std::filesystem::temp_directory_path() / "mpcal_ts_test";
    std::filesystem::create_directories(dir);
    const auto net = diagonal(3, Complex(0.2, -0.1), FrequencyGrid({1e9, 2e9}));
    ts::write_file(dir / "x.s3p", net, {ts::FreqUnit::Hz, ts::Format::RI, 50.0});
    const auto back = ts::read_file(dir / "x.s3p");
    CHECK(back.at(1) == net.at(1));
    CHECK(error_code([&] { ts::read_file(dir / "missing.s3p"); }) == Errc::IoError);
    std::filesystem::remove_all(dir);
}
