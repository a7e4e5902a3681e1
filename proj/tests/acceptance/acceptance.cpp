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

// Acceptance gate: one PASS/FAIL line per criterion.

#include "mpcal/calibration.hpp"
#include "mpcal/simulator.hpp"
#include "mpcal/touchstone.hpp"
#include "oracles.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace mpcal;
namespace ts = mpcal::touchstone;
using nlohmann::json;

namespace
{

constexpr double kPi = std::numbers::pi;

struct Outcome
{
    bool pass = false;
    std::string detail;
};

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

CalibrationSet calibrate(const sim::Dataset &d, const CalibrationOptions &options)
{
    return build_calibration(d.ecal, d.ecal_measured, d.reference_port, d.n_ports, d.phantom_set(), d.tau_estimate,
                             options);
}

CalibrationOptions floor_at(double db)
{
    CalibrationOptions o;
    o.signal_floor_db = db;
    return o;
}

double max_diff(const NPortNetwork &a, const NPortNetwork &b, bool diagonal, bool off_diagonal)
{
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        for (Eigen::Index i = 0; i < a.at(k).rows(); ++i)
            for (Eigen::Index j = 0; j < a.at(k).cols(); ++j)
                if ((i == j && diagonal) || (i != j && off_diagonal))
                    m = std::max(m, std::abs(a.at(k)(i, j) - b.at(k)(i, j)));
    return m;
}

// Criterion 1 -----------------------------------------------------------------------------

Outcome noiseless_recovery()
{
    auto cfg = sim::SystemConfig::defaults();
    cfg.coupling.level_db = -50.0;
    const auto start = std::chrono::steady_clock::now();
    const auto s = sim::simulate_measurements(cfg);
    const auto cal = calibrate(s.dataset, floor_at(-60.0));
    double err = 0.0;
    for (const auto &name : s.dataset.phantom_names)
    {
        const auto applied = apply_calibration(cal, s.dataset.raw_pairwise.at(name));
        err = std::max(err, max_diff(applied.network, s.truth.true_network.at(name), true, true));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {err <= 1e-9 && secs <= 10.0,
            "8 ports x 201 points, max error " + fmt(err) + " (<= 1e-9), " + fmt(secs) + " s (<= 10 s)"};
}

// Criterion 2 -----------------------------------------------------------------------------

Outcome noise_scaling()
{
    const double sigma = 1e-4;
    std::vector<double> refl, trans;
    for (std::uint64_t seed = 1; seed <= 20; ++seed)
    {
        auto cfg = sim::SystemConfig::defaults();
        cfg.coupling.level_db = -50.0;
        cfg.noise_sigma = sigma;
        cfg.seed = seed;
        const auto s = sim::simulate_measurements(cfg);
        const auto cal = calibrate(s.dataset, floor_at(-60.0));
        double r2 = 0.0, t2 = 0.0;
        std::size_t rn = 0, tn = 0;
        for (const auto &name : s.dataset.phantom_names)
        {
            const auto net = apply_calibration(cal, s.dataset.raw_pairwise.at(name)).network;
            const auto &truth = s.truth.true_network.at(name);
            for (std::size_t k = 0; k < net.size(); ++k)
                for (Eigen::Index i = 0; i < net.at(k).rows(); ++i)
                    for (Eigen::Index j = 0; j < net.at(k).cols(); ++j)
                    {
                        const double e = std::norm(net.at(k)(i, j) - truth.at(k)(i, j));
                        (i == j ? r2 : t2) += e;
                        ++(i == j ? rn : tn);
                    }
        }
        refl.push_back(std::sqrt(r2 / static_cast<double>(rn)));
        trans.push_back(std::sqrt(t2 / static_cast<double>(tn)));
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
    };
    const double mr = median(refl) / sigma;
    const double mt = median(trans) / sigma;
    return {mr <= 5.0 && mt <= 20.0, "20 runs, median RMS reflection error " + fmt(mr) + " sigma (<= 5), transmission " +
                                         fmt(mt) + " sigma (<= 20)"};
}

// Criterion 3 -----------------------------------------------------------------------------

sim::SystemConfig sign_config(double phase_per_step_rad)
{
    auto cfg = sim::SystemConfig::defaults();
    cfg.n_ports = 2;
    const double df = (cfg.f_stop_hz - cfg.f_start_hz) / static_cast<double>(cfg.points - 1);
    const double tau = phase_per_step_rad / (2.0 * kPi * df);
    // Path delay = d / c0 + both antennas.
    const double d = (tau - 2.0 * cfg.antenna.delay_s) * sim::kSpeedOfLight;
    cfg.coupling.pairs[PortPair(0, 1)] = sim::PairCoupling{std::nullopt, d};
    return cfg;
}

Outcome sign_selection()
{
    bool ok = true;
    std::string detail;
    for (double x : {0.1, 0.6, 1.2})
    {
        const auto cfg = sign_config(x);
        const auto s = sim::simulate_measurements(cfg);
        std::size_t right = 0, total = 0;
        try
        {
            const auto cal = calibrate(s.dataset, {});
            const auto &k = cal.k(0, 1).k();
            const auto &truth = s.truth.true_k.at(PortPair(0, 1)).k();
            for (std::size_t f = 0; f < k.size(); ++f, ++total)
                right += std::abs(k[f] - truth[f]) < std::abs(k[f] + truth[f]) ? 1 : 0;
        }
        catch (const Error &e)
        {
            detail += " [" + fmt(x) + " rad threw " + std::string(errc_name(e.code())) + "]";
        }
        ok = ok && total > 0 && right == total;
        detail += std::string(detail.empty() ? "" : " ") + fmt(x) + " rad: " + std::to_string(right) + "/" + std::to_string(total) + ";";
    }
    std::size_t raised = 0, tried = 0;
    for (double deg : {80.5, 85.0, 89.0, 90.0, 95.0, 99.5})
    {
        ++tried;
        const auto s = sim::simulate_measurements(sign_config(deg * kPi / 180.0));
        try
        {
            calibrate(s.dataset, {});
        }
        catch (const Error &e)
        {
            if (e.code() == Errc::PhaseTrackingAmbiguous)
                ++raised;
        }
    }
    ok = ok && raised == tried;
    detail += " within 10 deg of pi/2: " + std::to_string(raised) + "/" + std::to_string(tried) +
              " raised PhaseTrackingAmbiguous";
    return {ok, detail};
}

// Criterion 4 -----------------------------------------------------------------------------

// Antenna-plane reflection for a half-space with reflection g, up to the antenna phase. The
// match is real and constant, so separations are frequency independent.
Complex antenna_plane(const sim::AntennaConfig &a, Complex g)
{
    const double t2 = std::pow(10.0, -a.insertion_loss_db / 10.0);
    return a.mismatch + t2 * g / (1.0 - a.mismatch * g);
}

double gamma_for_separation(const sim::AntennaConfig &a, double g1, double sep)
{
    double lo = g1 - 0.5, hi = g1;
    for (int it = 0; it < 200; ++it)
    {
        const double mid = 0.5 * (lo + hi);
        (std::abs(antenna_plane(a, mid) - antenna_plane(a, g1)) > sep ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Outcome degeneracy_detection()
{
    auto base = sim::SystemConfig::defaults();
    base.n_ports = 3;
    base.points = 41;
    const double eps1 = 4.0;
    const double g1 = (1.0 - std::sqrt(eps1)) / (1.0 + std::sqrt(eps1));
    bool ok = true;
    std::size_t errors = 0, warnings = 0, clean = 0;
    for (double sep : {0.2, 0.15, 0.1, 0.07, 0.051, 0.049, 0.03, 0.01, 0.005, 0.0011, 0.0009, 5e-4, 1e-4, 0.0})
    {
        auto cfg = base;
        const double g2 = gamma_for_separation(cfg.antenna, g1, sep);
        const double eps2 = std::pow((1.0 - g2) / (1.0 + g2), 2);
        cfg.phantoms = {{"air", sim::PermittivityModel::constant(1.0)},
                        {"phantom1", sim::PermittivityModel::constant(eps1)},
                        {"phantom2", sim::PermittivityModel::constant(eps2)}};
        const auto s = sim::simulate_measurements(cfg);
        enum { Clean, Warned, Failed } got = Clean;
        try
        {
            const auto cal = calibrate(s.dataset, {});
            got = cal.metadata["diagnostics"]["warnings"].empty() ? Clean : Warned;
        }
        catch (const Error &e)
        {
            got = e.code() == Errc::DegenerateStandards ? Failed : Clean;
            if (e.code() != Errc::DegenerateStandards)
                ok = false;
        }
        const auto want = sep < 1e-3 ? Failed : sep < 0.05 ? Warned : Clean;
        ok = ok && got == want;
        errors += got == Failed;
        warnings += got == Warned;
        clean += got == Clean;
    }
    return {ok, "14 separations from 0.2 to 0: " + std::to_string(clean) + " clean, " + std::to_string(warnings) +
                    " warned, " + std::to_string(errors) + " rejected, all as expected: " + (ok ? "yes" : "no")};
}

// Criterion 5 -----------------------------------------------------------------------------

// First-order change of the pairwise two-ports from terminating inactive ports in gamma,
// computed by brute-force wave solves on the antenna-plane network.
double termination_oracle(const NPortNetwork &truth, Complex gamma)
{
    const std::size_t n = truth.n_ports();
    double m = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k)
        for (const auto &pair : all_pairs(n))
        {
            const std::vector<std::size_t> kept{pair.first, pair.second};
            const auto loaded = test::brute_force_reduce(truth.at(k), kept, std::vector<Complex>(n, gamma));
            const auto matched = test::brute_force_reduce(truth.at(k), kept, std::vector<Complex>(n, 0.0));
            m = std::max(m, std::abs(loaded(0, 1) - matched(0, 1)));
            m = std::max(m, std::abs(loaded(1, 0) - matched(1, 0)));
        }
    return m;
}

double termination_shift(double coupling_db, Complex gamma, double *oracle)
{
    auto cfg = sim::SystemConfig::defaults();
    cfg.coupling.level_db = coupling_db;
    const auto matched = sim::simulate_measurements(cfg);
    *oracle = std::max(*oracle, termination_oracle(matched.truth.true_network.at("phantom1"), gamma));
    cfg.termination_gamma = gamma;
    const auto loaded = sim::simulate_measurements(cfg);
    const auto options = floor_at(-60.0);
    const auto a = apply_calibration(calibrate(matched.dataset, options), matched.dataset.raw_pairwise.at("phantom1"));
    const auto b = apply_calibration(calibrate(loaded.dataset, options), loaded.dataset.raw_pairwise.at("phantom1"));
    return max_diff(a.network, b.network, false, true);
}

Outcome termination_neglect()
{
    double weak = 0.0, strong = std::numeric_limits<double>::infinity();
    double oracle_weak = 0.0, oracle_strong = 0.0;
    for (const Complex g : {Complex(0.1, 0.0), Complex(-0.1, 0.0), Complex(0.0, 0.1), Complex(0.0, -0.1)})
    {
        weak = std::max(weak, termination_shift(-50.0, g, &oracle_weak));
        strong = std::min(strong, termination_shift(-10.0, g, &oracle_strong));
    }
    const bool ok = oracle_weak <= 1e-5 && weak <= 1e-5 && strong > 1e-3;
    return {ok, "|Gamma| = 0.1: -50 dB shift " + fmt(weak) + " (oracle " + fmt(oracle_weak) + ", <= 1e-5), -10 dB shift " +
                    fmt(strong) + " (oracle " + fmt(oracle_strong) + ", > 1e-3)"};
}

// Criterion 6 -----------------------------------------------------------------------------

Outcome antenna_sensitivity()
{
    const std::size_t port = 3;
    json curve = json::array();
    std::vector<double> errors;
    for (double delta : {0.0, 0.01, 0.05})
    {
        auto cfg = sim::SystemConfig::defaults();
        cfg.antenna.perturbation[port] = Complex(delta, 0.0);
        const auto s = sim::simulate_measurements(cfg);
        const auto cal = calibrate(s.dataset, {});
        double err = 0.0;
        for (const auto &name : s.dataset.phantom_names)
        {
            const auto net = apply_calibration(cal, s.dataset.raw_pairwise.at(name)).network;
            err = std::max(err, max_diff(net, s.truth.true_network.at(name), true, false));
        }
        errors.push_back(err);
        curve.push_back({{"delta", delta}, {"max_reflection_error", err}});
    }
    const json report = {{"port", port}, {"curve", curve}};
    const auto path = std::filesystem::path(MPCAL_GOLDEN_DIR) / "antenna_sensitivity.json";
    if (std::getenv("MPCAL_UPDATE_GOLDEN"))
        std::ofstream(path) << report.dump(2) << "\n";

    bool golden_ok = false;
    if (std::ifstream in(path); in)
    {
        const json expect = json::parse(in);
        golden_ok = expect["port"] == report["port"] && expect["curve"].size() == curve.size();
        for (std::size_t i = 0; golden_ok && i < curve.size(); ++i)
        {
            const double a = expect["curve"][i]["max_reflection_error"].get<double>();
            const double b = curve[i]["max_reflection_error"].get<double>();
            // δ = 0 sits at round-off level; the others must reproduce to high precision.
            golden_ok = i == 0 ? b <= 1e-9 : std::abs(a - b) <= 1e-9 * std::abs(a);
        }
    }
    // A shifted set of standards moves the corrected reflection by the same shift.
    const bool tracks = std::abs(errors[1] - 0.01) <= 0.001 && std::abs(errors[2] - 0.05) <= 0.005;
    const bool ok = errors[0] <= 1e-9 && errors[0] < errors[1] && errors[1] < errors[2] && tracks && golden_ok;
    return {ok, "delta 0 / 0.01 / 0.05 on port 3: max reflection error " + fmt(errors[0]) + " / " + fmt(errors[1]) +
                    " / " + fmt(errors[2]) + ", monotonic, golden " + (golden_ok ? "match" : "MISMATCH")};
}

// Criterion 7 -----------------------------------------------------------------------------

std::string slurp(const std::filesystem::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome touchstone_round_trip()
{
    test::Random rnd(77);
    double worst = 0.0;
    std::size_t combos = 0;
    for (std::size_t n : {1u, 2u, 3u, 4u, 8u})
    {
        std::vector<double> f;
        for (int k = 0; k < 11; ++k)
            f.push_back(1e9 + 7.3e8 * k + 0.123);
        const FrequencyGrid grid(f);
        std::vector<Eigen::MatrixXcd> m;
        for (std::size_t k = 0; k < grid.size(); ++k)
        {
            Eigen::MatrixXcd s(n, n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    s(i, j) = rnd.complex_annulus(1e-5, 1.0);
            m.push_back(s);
        }
        const NPortNetwork net(grid, m);
        for (auto fmt_ : {ts::Format::RI, ts::Format::MA, ts::Format::DB})
            for (auto unit : {ts::FreqUnit::Hz, ts::FreqUnit::KHz, ts::FreqUnit::MHz, ts::FreqUnit::GHz})
            {
                const auto back = ts::parse(ts::write(net, {unit, fmt_, 50.0}));
                ++combos;
                if (back.n_ports() != n || back.size() != grid.size())
                {
                    worst = std::numeric_limits<double>::infinity();
                    continue;
                }
                for (std::size_t k = 0; k < grid.size(); ++k)
                {
                    worst = std::max(worst, test::max_abs_diff(back.at(k), net.at(k)));
                    worst = std::max(worst, std::abs(back.grid()[k] - grid[k]) / grid[k]);
                }
            }
    }

    // Golden bytes.
    const auto dir = std::filesystem::path(MPCAL_GOLDEN_DIR);
    Eigen::MatrixXcd s2(2, 2);
    s2 << 0.1, Complex(0.0, 0.5), Complex(0.0, 0.5), -0.25;
    const NPortNetwork two(FrequencyGrid({1e9, 2.5e9}), {s2, s2});
    Eigen::MatrixXcd s3 = Eigen::MatrixXcd::Zero(3, 3);
    s3(0, 0) = 0.1;
    s3(0, 1) = s3(1, 0) = Complex(0.0, 0.5);
    s3(1, 1) = -0.25;
    s3(2, 2) = 0.1;
    const NPortNetwork three(FrequencyGrid({1e9}), {s3});
    const NPortNetwork five(FrequencyGrid({1e9}), {Eigen::MatrixXcd(Eigen::MatrixXcd::Identity(5, 5) * 0.1)});
    const bool golden = ts::write(two, {ts::FreqUnit::GHz, ts::Format::RI, 50.0}) == slurp(dir / "twoport_ri.s2p") &&
                        ts::write(three, {ts::FreqUnit::MHz, ts::Format::MA, 50.0}) == slurp(dir / "threeport_ma.s3p") &&
                        ts::write(five, {ts::FreqUnit::GHz, ts::Format::DB, 50.0}) == slurp(dir / "fiveport_db.s5p");
    return {worst <= 1e-12 && golden, std::to_string(combos) + " format/unit/port combinations, max error " +
                                          fmt(worst) + " (<= 1e-12), golden bytes " + (golden ? "match" : "MISMATCH")};
}

// Criterion 8 -----------------------------------------------------------------------------

Outcome algebraic_identities()
{
    test::Random rnd(88);
    const std::size_t cases = 1000;
    double st = 0.0, det = 0.0, inv = 0.0, red = 0.0;
    for (std::size_t c = 0; c < cases; ++c)
    {
        const Eigen::Matrix2cd s = rnd.two_port(1e-2);
        const Eigen::Matrix2cd t = s_to_t(s);
        st = std::max(st, test::max_abs_diff(t_to_s(t), s));
        det = std::max(det, std::abs(t.determinant() - s(0, 1) / s(1, 0)) / std::max(1.0, std::abs(s(0, 1) / s(1, 0))));

        const Complex e00 = rnd.complex_in_disk(0.3), e11 = rnd.complex_in_disk(0.3), p = rnd.complex_annulus(0.25, 2.0);
        const Complex g = rnd.complex_in_disk(1.0);
        inv = std::max(inv, std::abs(correct_reflection(e00, e11, p, embed_reflection(e00, e11, p, g)) - g));
        // Independent forward model on the other side.
        inv = std::max(inv, std::abs(embed_reflection(e00, e11, p, g) - (e00 + p * g / (1.0 - e11 * g))));

        const Eigen::Index n = c % 2 == 0 ? 3 : 4;
        const Eigen::MatrixXcd sn = rnd.matrix(n, 0.5);
        std::vector<std::size_t> kept{static_cast<std::size_t>(c % static_cast<std::size_t>(n))};
        if (c % 3 != 0)
            kept.push_back((kept[0] + 1) % static_cast<std::size_t>(n));
        std::vector<Complex> terms(static_cast<std::size_t>(n));
        for (auto &x : terms)
            x = rnd.complex_in_disk(1.0);
        const auto reduced = reduce_ports(NPortNetwork(FrequencyGrid({1e9}), {sn}), kept, terms);
        red = std::max(red, test::max_abs_diff(reduced.at(0), test::brute_force_reduce(sn, kept, terms)));
    }
    const double worst = std::max({st, det, inv, red});
    return {worst <= 1e-10, std::to_string(cases) + " cases per identity: s/t " + fmt(st) + ", det " + fmt(det) +
                                ", embed/correct " + fmt(inv) + ", reduce " + fmt(red) + " (<= 1e-10)"};
}

} // namespace

int main()
{
    const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria = {
        {"end-to-end noiseless recovery", noiseless_recovery},
        {"noise scaling", noise_scaling},
        {"unknown-thru sign selection", sign_selection},
        {"degeneracy detection", degeneracy_detection},
        {"termination neglect", termination_neglect},
        {"identical-antenna sensitivity", antenna_sensitivity},
        {"touchstone round trip", touchstone_round_trip},
        {"algebraic identities", algebraic_identities},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i)
    {
        Outcome o;
        try
        {
            o = criteria[i].second();
        }
        catch (const std::exception &e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail
                  << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
