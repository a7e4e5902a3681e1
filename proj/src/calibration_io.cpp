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

#include "mpcal/calibration_io.hpp"
#include "mpcal/fileio.hpp"
#include "mpcal/numfmt.hpp"

namespace mpcal
{

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

const std::vector<std::string> kBoxColumns{"e00", "e11", "p"};
const std::vector<std::string> kTrackingColumns{"k"};

std::string box_file(std::size_t port)
{
    return "box_" + std::to_string(port) + ".csv";
}

std::string tracking_file(const PortPair &pair)
{
    return "k_" + std::to_string(pair.first) + "_" + std::to_string(pair.second) + ".csv";
}

} // namespace

std::string grid_hash(const FrequencyGrid &grid)
{
    std::string text;
    for (double f : grid.points())
    {
        append_double(text, f);
        text += '\n';
    }
    return io::sha256_hex(text);
}

void save_calibration(const CalibrationSet &cal, const fs::path &dir)
{
    cal.validate();
    fs::create_directories(dir);

    json files = json::object();
    for (std::size_t port = 0; port < cal.n_ports; ++port)
    {
        const auto &b = cal.boxes[port];
        const std::string name = box_file(port);
        files[name] = io::write_text(dir / name, io::series_csv(cal.grid, kBoxColumns, {&b.e00(), &b.e11(), &b.p()}));
    }
    for (const auto &[pair, k] : cal.tracking)
    {
        const std::string name = tracking_file(pair);
        files[name] = io::write_text(dir / name, io::series_csv(cal.grid, kTrackingColumns, {&k.k()}));
    }

    json manifest = {
        {"format", "mpcal-calibration"},
        {"version", kCalibrationFormatVersion},
        {"n_ports", cal.n_ports},
        {"reference_port", cal.reference_port},
        {"grid_points", cal.grid.size()},
        {"grid_sha256", grid_hash(cal.grid)},
        {"thresholds", cal.metadata.contains("thresholds") ? cal.metadata["thresholds"] : json::object()},
        {"metadata", cal.metadata},
        {"files", files},
    };
    io::write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

CalibrationSet load_calibration(const fs::path &dir)
{
    json manifest;
    try
    {
        manifest = json::parse(io::read_text(dir / "manifest.json"));
    }
    catch (const json::exception &e)
    {
        throw Error(Errc::SyntaxError, (dir / "manifest.json").string() + ": " + e.what());
    }

    try
    {
        if (manifest.value("format", std::string()) != "mpcal-calibration")
            throw Error(Errc::FormatVersionMismatch, "not an mpcal calibration set");
        if (!manifest.contains("version") || !manifest["version"].is_number_integer() ||
            manifest["version"].get<int>() != kCalibrationFormatVersion)
            throw Error(Errc::FormatVersionMismatch, "unsupported calibration format version " +
                                                         (manifest.contains("version") ? manifest["version"].dump()
                                                                                       : std::string("(none)")));

        CalibrationSet cal;
        cal.n_ports = manifest.at("n_ports").get<std::size_t>();
        cal.reference_port = manifest.at("reference_port").get<std::size_t>();
        cal.metadata = manifest.value("metadata", json::object());
        const json &files = manifest.at("files");

        auto load_checked = [&](const std::string &name) {
            if (!files.contains(name))
                throw Error(Errc::IoError, "manifest does not list " + name);
            const std::string text = io::read_text(dir / name);
            if (io::sha256_hex(text) != files.at(name).get<std::string>())
                throw Error(Errc::ChecksumMismatch, name + " does not match its manifest checksum");
            return text;
        };

        for (std::size_t port = 0; port < cal.n_ports; ++port)
        {
            const std::string name = box_file(port);
            auto table = io::parse_series_csv(load_checked(name), kBoxColumns, name);
            if (port == 0)
                cal.grid = table.grid;
            require_compatible(table.grid, cal.grid, name);
            cal.boxes.emplace_back(table.grid, std::move(table.columns[0]), std::move(table.columns[1]),
                                   std::move(table.columns[2]));
        }
        if (grid_hash(cal.grid) != manifest.at("grid_sha256").get<std::string>())
            throw Error(Errc::ChecksumMismatch, "frequency grid does not match the manifest grid hash");
        for (const auto &pair : all_pairs(cal.n_ports))
        {
            const std::string name = tracking_file(pair);
            auto table = io::parse_series_csv(load_checked(name), kTrackingColumns, name);
            require_compatible(table.grid, cal.grid, name);
            cal.tracking.emplace(pair, PairTracking(table.grid, std::move(table.columns[0])));
        }
        cal.validate();
        return cal;
    }
    catch (const json::exception &e)
    {
        throw Error(Errc::SyntaxError, (dir / "manifest.json").string() + ": " + e.what());
    }
}

} // namespace mpcal
