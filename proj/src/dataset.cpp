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

#include "mpcal/dataset.hpp"
#include "mpcal/fileio.hpp"
#include "mpcal/touchstone.hpp"

namespace mpcal::sim
{

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

const touchstone::Options kFileOptions{touchstone::FreqUnit::Hz, touchstone::Format::RI, kDefaultReferenceImpedance};

std::string pair_tag(const PortPair &pair)
{
    return std::to_string(pair.first) + "_" + std::to_string(pair.second);
}

class Writer
{
  public:
    explicit Writer(fs::path root) : root_(std::move(root)) {}

    void text(const std::string &rel, const std::string &data)
    {
        const fs::path path = root_ / rel;
        fs::create_directories(path.parent_path());
        files_[rel] = io::write_text(path, data);
    }

    void network(const std::string &rel, const NPortNetwork &net)
    {
        text(rel, touchstone::write(net, kFileOptions));
    }

    const json &files() const { return files_; }

  private:
    fs::path root_;
    json files_ = json::object();
};

} // namespace

std::string pair_file_name(const PortPair &pair, const std::string &phantom)
{
    return "thru/pair" + std::to_string(pair.first) + "_" + std::to_string(pair.second) + "_" + phantom + ".s2p";
}

void write_dataset(const Simulation &sim, const SystemConfig &cfg, const fs::path &dir)
{
    const Dataset &ds = sim.dataset;
    const GroundTruth &truth = sim.truth;
    fs::create_directories(dir);
    Writer w(dir);

    json ecal_states = json::array();
    for (const auto &[name, gamma] : ds.ecal.states)
    {
        ecal_states.push_back(name);
        w.network("ecal/state_" + name + ".s1p", make_one_port(ds.grid, gamma));
    }
    w.network("ecal/thru.s2p", ds.ecal.thru);
    for (const auto &[name, gamma] : ds.ecal_measured)
        w.network("ecal/measured_state_" + name + ".s1p", make_one_port(ds.grid, gamma));

    for (const auto &[port, by_phantom] : ds.raw_reflection)
        for (const auto &[phantom, gamma] : by_phantom)
            w.network("refl/port" + std::to_string(port) + "_" + phantom + ".s1p", make_one_port(ds.grid, gamma));

    for (const auto &[phantom, by_pair] : ds.raw_pairwise)
        for (const auto &[pair, net] : by_pair)
            w.network(pair_file_name(pair, phantom), net);

    for (const auto &[phantom, net] : truth.true_network)
        w.network("truth/true_" + phantom + touchstone::extension_for(net.n_ports()), net);
    for (std::size_t port = 0; port < truth.true_box.size(); ++port)
    {
        const auto &b = truth.true_box[port];
        w.text("truth/box_" + std::to_string(port) + ".csv",
               io::series_csv(ds.grid, {"e00", "e11", "p"}, {&b.e00(), &b.e11(), &b.p()}));
    }
    for (const auto &[pair, k] : truth.true_k)
        w.text("truth/k_" + pair_tag(pair) + ".csv", io::series_csv(ds.grid, {"k"}, {&k.k()}));

    json taus = {{"default_s", ds.tau_estimate.tau_s}, {"pairs", json::object()}};
    for (const auto &[pair, tau] : ds.tau_estimate.per_pair)
        taus["pairs"][pair_tag(pair)] = tau;
    w.text("tau_est.json", taus.dump(2) + "\n");

    const json manifest = {
        {"format", "mpcal-dataset"},
        {"version", kDatasetFormatVersion},
        {"seed", cfg.seed},
        {"n_ports", ds.n_ports},
        {"reference_port", ds.reference_port},
        {"grid_points", ds.grid.size()},
        {"phantoms", ds.phantom_names},
        {"thru_phantom", ds.thru_phantom},
        {"ecal_states", ecal_states},
        {"config", config_to_json(cfg)},
        {"files", w.files()},
    };
    io::write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

Dataset load_dataset(const fs::path &dir)
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
        if (manifest.value("format", std::string()) != "mpcal-dataset")
            throw Error(Errc::FormatVersionMismatch, "not an mpcal dataset");
        if (manifest.value("version", -1) != kDatasetFormatVersion)
            throw Error(Errc::FormatVersionMismatch, "unsupported dataset format version");

        const json &files = manifest.at("files");
        auto present = [&](const std::string &rel) { return fs::exists(dir / rel); };
        auto read_checked = [&](const std::string &rel) {
            const std::string text = io::read_text(dir / rel);
            if (!files.contains(rel))
                throw Error(Errc::IoError, rel + " is not listed in the dataset manifest");
            if (io::sha256_hex(text) != files.at(rel).get<std::string>())
                throw Error(Errc::ChecksumMismatch, rel + " does not match its manifest checksum");
            return text;
        };
        auto network = [&](const std::string &rel) {
            try
            {
                return touchstone::parse(read_checked(rel), touchstone::ports_from_extension(rel));
            }
            catch (const Error &e)
            {
                throw Error(e.code(), rel + ": " + e.message());
            }
        };

        Dataset ds;
        ds.n_ports = manifest.at("n_ports").get<std::size_t>();
        ds.reference_port = manifest.at("reference_port").get<std::size_t>();
        ds.phantom_names = manifest.at("phantoms").get<std::vector<std::string>>();
        ds.thru_phantom = manifest.at("thru_phantom").get<std::string>();

        ds.ecal.thru = network("ecal/thru.s2p");
        ds.grid = ds.ecal.thru.grid();
        for (const auto &name : manifest.at("ecal_states").get<std::vector<std::string>>())
        {
            const std::string state = "ecal/state_" + name + ".s1p";
            if (present(state))
                ds.ecal.states.emplace(name, network(state).entry(0, 0));
            const std::string measured = "ecal/measured_state_" + name + ".s1p";
            if (present(measured))
                ds.ecal_measured.emplace(name, network(measured).entry(0, 0));
        }

        auto on_grid = [&](const NPortNetwork &net, const std::string &rel) {
            require_compatible(net.grid(), ds.grid, rel);
            return net;
        };
        for (std::size_t port = 0; port < ds.n_ports; ++port)
            for (const auto &phantom : ds.phantom_names)
            {
                const std::string rel = "refl/port" + std::to_string(port) + "_" + phantom + ".s1p";
                if (present(rel))
                    ds.raw_reflection[port].emplace(phantom, on_grid(network(rel), rel).entry(0, 0));
            }
        for (const auto &phantom : ds.phantom_names)
        {
            auto &by_pair = ds.raw_pairwise[phantom];
            for (const auto &pair : all_pairs(ds.n_ports))
            {
                const std::string rel = pair_file_name(pair, phantom);
                if (present(rel))
                    by_pair.emplace(pair, on_grid(network(rel), rel));
            }
        }

        if (present("tau_est.json"))
        {
            const json taus = json::parse(read_checked("tau_est.json"));
            ds.tau_estimate.tau_s = taus.value("default_s", 0.0);
            for (const auto &pair : all_pairs(ds.n_ports))
                if (taus.contains("pairs") && taus["pairs"].contains(pair_tag(pair)))
                    ds.tau_estimate.per_pair[pair] = taus["pairs"][pair_tag(pair)].get<double>();
        }
        return ds;
    }
    catch (const json::exception &e)
    {
        throw Error(Errc::SyntaxError, (dir / "manifest.json").string() + ": " + e.what());
    }
}

} // namespace mpcal::sim
