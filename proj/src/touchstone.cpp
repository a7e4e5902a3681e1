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

#include "mpcal/touchstone.hpp"
#include "mpcal/numfmt.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace mpcal::touchstone
{

namespace
{

struct Token
{
    double value;
    std::size_t line;
    bool line_start;
};

std::string upper(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

std::vector<std::string_view> split_ws(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size())
    {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
            ++i;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])))
            ++i;
        if (i > start)
            out.push_back(line.substr(start, i - start));
    }
    return out;
}

[[noreturn]] void syntax_error(std::size_t line, const std::string &what)
{
    throw Error(Errc::SyntaxError, "line " + std::to_string(line) + ": " + what);
}

Options parse_option_line(std::string_view body, std::size_t line_no)
{
    Options opt;
    const auto words = split_ws(body);
    for (std::size_t w = 0; w < words.size(); ++w)
    {
        const std::string word = upper(words[w]);
        if (word == "HZ")
            opt.freq_unit = FreqUnit::Hz;
        else if (word == "KHZ")
            opt.freq_unit = FreqUnit::KHz;
        else if (word == "MHZ")
            opt.freq_unit = FreqUnit::MHz;
        else if (word == "GHZ")
            opt.freq_unit = FreqUnit::GHz;
        else if (word == "RI")
            opt.format = Format::RI;
        else if (word == "MA")
            opt.format = Format::MA;
        else if (word == "DB")
            opt.format = Format::DB;
        else if (word == "S")
            continue;
        else if (word == "Y" || word == "Z" || word == "G" || word == "H")
            throw Error(Errc::UnsupportedParameter,
                        "line " + std::to_string(line_no) + ": only S-parameter files are supported, got " + word);
        else if (word == "R")
        {
            if (w + 1 >= words.size())
                syntax_error(line_no, "option R needs a value");
            const auto z0 = parse_double(words[++w]);
            if (!z0 || !(*z0 > 0.0))
                syntax_error(line_no, "bad reference impedance '" + std::string(words[w]) + "'");
            opt.reference_impedance = *z0;
        }
        else
            syntax_error(line_no, "unknown option '" + std::string(words[w]) + "'");
    }
    return opt;
}

// A layout is valid for n ports if every block of 1 + 2n^2 values starts a line.
bool layout_fits(const std::vector<Token> &tokens, std::size_t n)
{
    const std::size_t block = 1 + 2 * n * n;
    if (tokens.empty() || tokens.size() % block != 0)
        return false;
    for (std::size_t b = 0; b < tokens.size(); b += block)
    {
        if (!tokens[b].line_start)
            return false;
        for (std::size_t i = b + 1; i < b + block; ++i)
            if (tokens[i].line_start && n <= 2)
                return false;
    }
    return true;
}

Complex to_complex(double a, double b, Format format)
{
    constexpr double deg = std::numbers::pi / 180.0;
    switch (format)
    {
    case Format::RI: return {a, b};
    case Format::MA: return std::polar(a, b * deg);
    case Format::DB: return std::polar(std::pow(10.0, a / 20.0), b * deg);
    }
    return {};
}

// Flattened pair index -> (row, col) in the S-matrix.
std::pair<Eigen::Index, Eigen::Index> pair_position(std::size_t pair, std::size_t n)
{
    if (n == 2)
    {
        static constexpr Eigen::Index rows[] = {0, 1, 0, 1};
        static constexpr Eigen::Index cols[] = {0, 0, 1, 1};
        return {rows[pair], cols[pair]};
    }
    return {static_cast<Eigen::Index>(pair / n), static_cast<Eigen::Index>(pair % n)};
}

} // namespace

double unit_scale(FreqUnit unit) noexcept
{
    switch (unit)
    {
    case FreqUnit::Hz: return 1.0;
    case FreqUnit::KHz: return 1e3;
    case FreqUnit::MHz: return 1e6;
    case FreqUnit::GHz: return 1e9;
    }
    return 1.0;
}

std::string_view unit_name(FreqUnit unit) noexcept
{
    switch (unit)
    {
    case FreqUnit::Hz: return "HZ";
    case FreqUnit::KHz: return "KHZ";
    case FreqUnit::MHz: return "MHZ";
    case FreqUnit::GHz: return "GHZ";
    }
    return "HZ";
}

std::string_view format_name(Format format) noexcept
{
    switch (format)
    {
    case Format::RI: return "RI";
    case Format::MA: return "MA";
    case Format::DB: return "DB";
    }
    return "RI";
}

NPortNetwork parse(std::string_view text, std::optional<std::size_t> expected_ports)
{
    Options opt;
    bool have_options = false;
    std::vector<Token> tokens;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size())
    {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;

        if (const auto bang = line.find('!'); bang != std::string_view::npos)
            line = line.substr(0, bang);
        const auto words = split_ws(line);
        if (words.empty())
            continue;

        if (words.front().front() == '#')
        {
            // Only the first option line is honoured.
            if (!have_options)
            {
                const auto hash = line.find('#');
                opt = parse_option_line(line.substr(hash + 1), line_no);
                have_options = true;
            }
            continue;
        }

        for (std::size_t w = 0; w < words.size(); ++w)
        {
            const auto v = parse_double(words[w]);
            if (!v || !std::isfinite(*v))
                syntax_error(line_no, "bad number '" + std::string(words[w]) + "'");
            tokens.push_back({*v, line_no, w == 0});
        }
    }

    if (tokens.empty())
        throw Error(Errc::SyntaxError, "no network data found");

    std::size_t n = 0;
    if (expected_ports)
    {
        n = *expected_ports;
        if (n == 0)
            throw Error(Errc::InvalidArgument, "expected_ports must be positive");
        if (!layout_fits(tokens, n))
            throw Error(Errc::CountMismatch, "value count does not match a " + std::to_string(n) + "-port layout");
    }
    else
    {
        for (std::size_t cand = 1; cand * cand * 2 + 1 <= tokens.size(); ++cand)
        {
            if (layout_fits(tokens, cand))
            {
                n = cand;
                break;
            }
        }
        if (n == 0)
            throw Error(Errc::CountMismatch, "cannot infer the port count from the data layout");
    }

    const std::size_t block = 1 + 2 * n * n;
    const double scale = unit_scale(opt.freq_unit);
    std::vector<double> freqs;
    std::vector<Eigen::MatrixXcd> mats;
    freqs.reserve(tokens.size() / block);
    mats.reserve(tokens.size() / block);
    for (std::size_t b = 0; b < tokens.size(); b += block)
    {
        const double f = tokens[b].value * scale;
        if (!freqs.empty() && !(f > freqs.back()))
            throw Error(Errc::NonMonotonicFrequency,
                        "line " + std::to_string(tokens[b].line) + ": frequency does not increase");
        freqs.push_back(f);
        Eigen::MatrixXcd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t p = 0; p < n * n; ++p)
        {
            const auto [r, c] = pair_position(p, n);
            m(r, c) = to_complex(tokens[b + 1 + 2 * p].value, tokens[b + 2 + 2 * p].value, opt.format);
        }
        mats.push_back(std::move(m));
    }
    return NPortNetwork(FrequencyGrid(std::move(freqs)), std::move(mats), opt.reference_impedance);
}

std::string write(const NPortNetwork &net, const Options &options)
{
    constexpr double rad = 180.0 / std::numbers::pi;
    const std::size_t n = net.n_ports();
    const double scale = unit_scale(options.freq_unit);

    std::string out;
    out += "! ";
    out += std::to_string(n);
    out += "-port S-parameters\n# ";
    out += unit_name(options.freq_unit);
    out += " S ";
    out += format_name(options.format);
    out += " R ";
    append_double(out, options.reference_impedance);
    out += '\n';

    auto put_pair = [&](Complex v) {
        double a = 0.0, b = 0.0;
        switch (options.format)
        {
        case Format::RI:
            a = v.real();
            b = v.imag();
            break;
        case Format::MA:
            a = std::abs(v);
            b = std::arg(v) * rad;
            break;
        case Format::DB:
            // Exact zeros are written as -400 dB so the file stays finite.
            a = std::abs(v) > 0.0 ? 20.0 * std::log10(std::abs(v)) : -400.0;
            b = std::arg(v) * rad;
            break;
        }
        out += ' ';
        append_double(out, a);
        out += ' ';
        append_double(out, b);
    };

    for (std::size_t k = 0; k < net.size(); ++k)
    {
        const auto &m = net.at(k);
        append_double(out, net.grid()[k] / scale);
        if (n <= 2)
        {
            for (std::size_t p = 0; p < n * n; ++p)
            {
                const auto [r, c] = pair_position(p, n);
                put_pair(m(r, c));
            }
            out += '\n';
            continue;
        }
        for (std::size_t r = 0; r < n; ++r)
        {
            for (std::size_t c = 0; c < n; ++c)
            {
                if (c > 0 && c % 4 == 0)
                    out += '\n';
                put_pair(m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
            }
            out += '\n';
        }
    }
    return out;
}

std::optional<std::size_t> ports_from_extension(const std::filesystem::path &path)
{
    std::string ext = upper(path.extension().string());
    if (ext.size() < 4 || ext[1] != 'S' || ext.back() != 'P')
        return std::nullopt;
    const std::string digits = ext.substr(2, ext.size() - 3);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c); }))
        return std::nullopt;
    const auto n = static_cast<std::size_t>(std::stoul(digits));
    return n > 0 ? std::optional<std::size_t>(n) : std::nullopt;
}

std::string extension_for(std::size_t n_ports)
{
    return ".s" + std::to_string(n_ports) + "p";
}

NPortNetwork read_file(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try
    {
        return parse(ss.str(), ports_from_extension(path));
    }
    catch (const Error &e)
    {
        throw Error(e.code(), path.string() + ": " + e.message());
    }
}

void write_file(const std::filesystem::path &path, const NPortNetwork &net, const Options &options)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(Errc::IoError, "cannot write " + path.string());
    out << write(net, options);
    if (!out)
        throw Error(Errc::IoError, "write failed for " + path.string());
}

} // namespace mpcal::touchstone
