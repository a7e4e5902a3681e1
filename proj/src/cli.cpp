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

#include "mpcal/cli.hpp"
#include "mpcal/calibration_io.hpp"
#include "mpcal/dataset.hpp"
#include "mpcal/fileio.hpp"
#include "mpcal/touchstone.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <optional>

namespace mpcal::cli
{

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

json error_json(const Error &e)
{
    return {{"ok", false}, {"error", std::string(errc_name(e.code()))}, {"message", e.message()}};
}

int fail(std::ostream &out, std::ostream &err, const Error &e, int code)
{
    err << "error: " << e.what() << "\n";
    out << error_json(e).dump(2) << "\n";
    return code;
}

int cmd_simulate(const std::string &config_path, const std::string &out_dir, std::optional<std::uint64_t> seed,
                 std::ostream &out, std::ostream &err)
{
    sim::SystemConfig cfg;
    try
    {
        cfg = sim::SystemConfig::defaults();
        if (!config_path.empty())
        {
            json j;
            try
            {
                j = json::parse(io::read_text(config_path));
            }
            catch (const json::exception &e)
            {
                throw Error(Errc::ConfigInvalid, config_path + ": " + e.what());
            }
            cfg = sim::config_from_json(j);
        }
        if (seed)
            cfg.seed = *seed;
        cfg.validate();
    }
    catch (const Error &e)
    {
        return fail(out, err, e, kConfigError);
    }

    try
    {
        const auto simulation = sim::simulate_measurements(cfg);
        sim::write_dataset(simulation, cfg, out_dir);
        const std::string manifest_sha = io::sha256_hex(io::read_text(fs::path(out_dir) / "manifest.json"));
        err << "wrote dataset with " << cfg.n_ports << " ports, " << cfg.points << " points to " << out_dir << "\n";
        out << json{{"ok", true},
                    {"dataset", out_dir},
                    {"n_ports", cfg.n_ports},
                    {"points", cfg.points},
                    {"seed", cfg.seed},
                    {"manifest_sha256", manifest_sha}}
                   .dump(2)
            << "\n";
        return kOk;
    }
    catch (const Error &e)
    {
        return fail(out, err, e, e.code() == Errc::ConfigInvalid ? kConfigError : kCalibrationError);
    }
}

int cmd_calibrate(const std::string &dataset_dir, const std::string &out_dir, std::optional<double> tau_est,
                  const std::string &tau_file, double floor_db, std::ostream &out, std::ostream &err)
{
    try
    {
        const sim::Dataset ds = sim::load_dataset(dataset_dir);
        ThruPhaseEstimate estimate = ds.tau_estimate;
        if (!tau_file.empty())
        {
            const json taus = json::parse(io::read_text(tau_file));
            estimate = {};
            estimate.tau_s = taus.value("default_s", 0.0);
            if (taus.contains("pairs"))
                for (const auto &[key, value] : taus["pairs"].items())
                {
                    const auto sep = key.find('_');
                    if (sep == std::string::npos)
                        throw Error(Errc::SyntaxError, tau_file + ": bad pair key '" + key + "'");
                    estimate.per_pair[PortPair(std::stoul(key.substr(0, sep)), std::stoul(key.substr(sep + 1)))] =
                        value.get<double>();
                }
        }
        if (tau_est)
        {
            estimate = {};
            estimate.tau_s = *tau_est;
        }

        CalibrationOptions options;
        options.signal_floor_db = floor_db;
        const CalibrationSet cal = build_calibration(ds.ecal, ds.ecal_measured, ds.reference_port, ds.n_ports,
                                                     ds.phantom_set(), estimate, options);
        save_calibration(cal, out_dir);

        const auto &diag = cal.metadata["diagnostics"];
        err << "reference port " << cal.reference_port << ", ECal states used:";
        for (const auto &s : cal.metadata["ecal_states_used"])
            err << " " << s.get<std::string>();
        err << "\nmin phantom separation " << diag["phantom_min_separation"].get<double>() << "\n";
        err << "min path level " << diag["min_path_level_db"].get<double>() << " dB (floor " << floor_db << " dB)\n";
        for (const auto &w : diag["warnings"])
            err << "warning: " << w.get<std::string>() << "\n";
        out << json{{"ok", true},
                    {"calibration", out_dir},
                    {"n_ports", cal.n_ports},
                    {"reference_port", cal.reference_port},
                    {"signal_floor_db", floor_db},
                    {"min_path_level_db", diag["min_path_level_db"]},
                    {"phantom_min_separation", diag["phantom_min_separation"]},
                    {"ecal_min_separation", diag["ecal_min_separation"]},
                    {"max_phase_step_deg", diag["max_phase_step_deg"]},
                    {"warnings", diag["warnings"]}}
                   .dump(2)
            << "\n";
        return kOk;
    }
    catch (const Error &e)
    {
        return fail(out, err, e, kCalibrationError);
    }
    catch (const std::exception &e)
    {
        return fail(out, err, Error(Errc::InvalidArgument, e.what()), kCalibrationError);
    }
}

int cmd_apply(const std::string &calset_dir, const std::string &dataset_dir, const std::string &phantom,
              const std::string &out_file, std::ostream &out, std::ostream &err)
{
    try
    {
        const CalibrationSet cal = load_calibration(calset_dir);
        const sim::Dataset ds = sim::load_dataset(dataset_dir);
        const auto it = ds.raw_pairwise.find(phantom);
        if (it == ds.raw_pairwise.end())
            throw Error(Errc::MissingPair, "dataset has no pairwise measurements for phantom '" + phantom + "'");
        if (ds.n_ports != cal.n_ports)
            throw Error(Errc::InvalidArgument, "calibration and dataset port counts differ");
        const AppliedNetwork applied = apply_calibration(cal, it->second);
        touchstone::write_file(out_file, applied.network,
                               {touchstone::FreqUnit::Hz, touchstone::Format::RI, applied.network.reference_impedance()});
        err << "wrote corrected " << cal.n_ports << "-port to " << out_file << "\n";
        out << json{{"ok", true},
                    {"output", out_file},
                    {"phantom", phantom},
                    {"reciprocity_deviation", applied.reciprocity_deviation}}
                   .dump(2)
            << "\n";
        return kOk;
    }
    catch (const Error &e)
    {
        return fail(out, err, e, kApplyError);
    }
}

int cmd_verify(const std::string &corrected_path, const std::string &truth_path, double tol, std::ostream &out,
               std::ostream &err)
{
    json report;
    try
    {
        const NPortNetwork corrected = touchstone::read_file(corrected_path);
        const NPortNetwork truth = touchstone::read_file(truth_path);
        report = verify_report(corrected, truth, tol);
    }
    catch (const Error &e)
    {
        return fail(out, err, e, kVerifyInputError);
    }
    out << report.dump(2) << "\n";
    const bool pass = report["pass"].get<bool>();
    err << (pass ? "PASS" : "FAIL") << ": max error " << report["max_error"].get<double>() << " (tolerance " << tol
        << ")\n";
    return pass ? kOk : kVerifyFailed;
}

} // namespace

json verify_report(const NPortNetwork &corrected, const NPortNetwork &truth, double tolerance)
{
    require_compatible(corrected.grid(), truth.grid(), "verify");
    if (corrected.n_ports() != truth.n_ports())
        throw Error(Errc::GridMismatch, "verify: port counts differ");

    const std::size_t n = truth.n_ports();
    json entries = json::array();
    double max_err = 0.0, sum_sq = 0.0;
    json worst = {{"i", 0}, {"j", 0}, {"freq_hz", truth.grid()[0]}, {"error", 0.0}};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
        {
            double emax = 0.0, esq = 0.0;
            for (std::size_t k = 0; k < truth.size(); ++k)
            {
                const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
                const double e = std::abs(corrected.at(k)(ii, jj) - truth.at(k)(ii, jj));
                esq += e * e;
                if (e > emax)
                    emax = e;
                if (e > max_err)
                {
                    max_err = e;
                    worst = {{"i", i}, {"j", j}, {"freq_hz", truth.grid()[k]}, {"error", e}};
                }
            }
            sum_sq += esq;
            entries.push_back(
                {{"i", i}, {"j", j}, {"max_error", emax}, {"rms_error", std::sqrt(esq / static_cast<double>(truth.size()))}});
        }
    const double count = static_cast<double>(n * n * truth.size());
    return {
        {"max_error", max_err},
        {"rms_error", std::sqrt(sum_sq / count)},
        {"entries", entries},
        {"worst", worst},
        {"reciprocity_deviation", reciprocity_deviation(corrected)},
        {"tolerance", tolerance},
        {"pass", max_err <= tolerance},
    };
}

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    CLI::App app{"mpcal: in-situ multiport VNA calibration for microwave imaging systems", "mpcal"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;
    auto *simulate = app.add_subcommand("simulate", "Synthesize a measurement campaign with ground truth");
    simulate->add_option("--config", config_path, "System configuration JSON (defaults if omitted)");
    simulate->add_option("--out", out_dir, "Dataset output directory")->required();
    simulate->add_option("--seed", seed, "Override the configuration seed");

    std::string dataset_dir, calset_dir;
    std::optional<double> tau_est;
    std::string tau_file;
    double floor_db = -50.0;
    auto *calibrate = app.add_subcommand("calibrate", "Build a calibration set from a dataset");
    calibrate->add_option("dataset", dataset_dir, "Dataset directory")->required();
    calibrate->add_option("out", calset_dir, "Calibration set output directory")->required();
    calibrate->add_option("--tau-est", tau_est, "Path delay estimate in seconds, applied to every pair");
    calibrate->add_option("--tau-est-file", tau_file, "JSON with per-pair delay estimates");
    calibrate->add_option("--signal-floor-db", floor_db, "Minimum path level in dB")->capture_default_str();

    std::string apply_cal, apply_ds, phantom, out_file;
    auto *apply = app.add_subcommand("apply", "Correct a phantom's pairwise measurements");
    apply->add_option("calset", apply_cal, "Calibration set directory")->required();
    apply->add_option("dataset", apply_ds, "Dataset directory")->required();
    apply->add_option("phantom", phantom, "Phantom name")->required();
    apply->add_option("out", out_file, "Corrected Touchstone output")->required();

    std::string corrected_path, truth_path;
    double tol = 1e-9;
    auto *verify = app.add_subcommand("verify", "Compare a corrected network against ground truth");
    verify->add_option("corrected", corrected_path, "Corrected .sNp")->required();
    verify->add_option("truth", truth_path, "Truth .sNp")->required();
    verify->add_option("--tol", tol, "Pass tolerance on max |error|")->capture_default_str();

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try
    {
        app.parse(rev);
    }
    catch (const CLI::Success &)
    {
        out << app.help();
        return kOk;
    }
    catch (const CLI::ParseError &e)
    {
        err << "usage error: " << e.what() << "\n" << app.help();
        return kConfigError;
    }

    if (*simulate)
        return cmd_simulate(config_path, out_dir, seed, out, err);
    if (*calibrate)
        return cmd_calibrate(dataset_dir, calset_dir, tau_est, tau_file, floor_db, out, err);
    if (*apply)
        return cmd_apply(apply_cal, apply_ds, phantom, out_file, out, err);
    return cmd_verify(corrected_path, truth_path, tol, out, err);
}

int run(int argc, char **argv)
{
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i)
        args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

} // namespace mpcal::cli
