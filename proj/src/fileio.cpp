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

#include "mpcal/fileio.hpp"
#include "mpcal/numfmt.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <memory>
#include <sstream>

namespace mpcal::io
{

std::string sha256_hex(std::string_view data)
{
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
        throw Error(Errc::IoError, "SHA-256 computation failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i)
    {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

std::string read_text(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string write_text(const std::filesystem::path &path, std::string_view data)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(Errc::IoError, "cannot write " + path.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out)
        throw Error(Errc::IoError, "write failed for " + path.string());
    return sha256_hex(data);
}

std::string series_csv(const FrequencyGrid &grid, const std::vector<std::string> &names,
                       const std::vector<const ComplexSeries *> &columns)
{
    std::string out = "freq_hz";
    for (const auto &name : names)
        out += "," + name + "_re," + name + "_im";
    out += '\n';
    for (std::size_t k = 0; k < grid.size(); ++k)
    {
        append_double(out, grid[k]);
        for (const auto *col : columns)
        {
            out += ',';
            append_double(out, (*col)[k].real());
            out += ',';
            append_double(out, (*col)[k].imag());
        }
        out += '\n';
    }
    return out;
}

SeriesTable parse_series_csv(std::string_view text, const std::vector<std::string> &names, const std::string &context)
{
    std::string header = "freq_hz";
    for (const auto &name : names)
        header += "," + name + "_re," + name + "_im";

    std::vector<double> freqs;
    std::vector<ComplexSeries> cols(names.size());
    std::size_t pos = 0, line_no = 0;
    while (pos < text.size())
    {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (line.empty())
            continue;
        if (line_no == 1)
        {
            if (line != header)
                throw Error(Errc::SyntaxError, context + ": unexpected CSV header");
            continue;
        }
        std::vector<double> vals;
        std::size_t start = 0;
        while (start <= line.size())
        {
            std::size_t comma = line.find(',', start);
            if (comma == std::string_view::npos)
                comma = line.size();
            const auto v = parse_double(line.substr(start, comma - start));
            if (!v)
                throw Error(Errc::SyntaxError, context + ": bad number on line " + std::to_string(line_no));
            vals.push_back(*v);
            start = comma + 1;
        }
        if (vals.size() != 1 + 2 * names.size())
            throw Error(Errc::CountMismatch, context + ": wrong column count on line " + std::to_string(line_no));
        freqs.push_back(vals[0]);
        for (std::size_t c = 0; c < names.size(); ++c)
            cols[c].emplace_back(vals[1 + 2 * c], vals[2 + 2 * c]);
    }
    if (line_no == 0)
        throw Error(Errc::SyntaxError, context + ": empty CSV");
    return SeriesTable{FrequencyGrid(std::move(freqs)), std::move(cols)};
}

} // namespace mpcal::io
