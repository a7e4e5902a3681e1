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

#include "mpcal/simulator.hpp"
#include "mpcal/numfmt.hpp"

#include <cmath>
#include <numbers>
#include <set>

namespace mpcal::sim
{

namespace
{

constexpr double kPi = std::numbers::pi;

[[noreturn]] void invalid(const std::string &field, const std::string &why)
{
    throw Error(Errc::ConfigInvalid, field + ": " + why);
}

Complex cis(double phase)
{
    return std::polar(1.0, phase);
}

Complex complex_noise(std::mt19937_64 &rng, double sigma)
{
    std::normal_distribution<double> n(0.0, sigma / std::numbers::sqrt2);
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

NPortNetwork reversed(const NPortNetwork &net)
{
    return flip_two_port(net);
}

} // namespace

// ---------------------------------------------------------------------------------------------
// Materials

PermittivityModel PermittivityModel::constant(Complex eps)
{
    PermittivityModel m;
    m.kind = Kind::Constant;
    m.eps_r = eps;
    return m;
}

PermittivityModel PermittivityModel::debye(double eps_inf, double eps_s, double tau_s, double sigma)
{
    PermittivityModel m;
    m.kind = Kind::Debye;
    m.eps_inf = eps_inf;
    m.eps_s = eps_s;
    m.tau_s = tau_s;
    m.sigma = sigma;
    return m;
}

Complex PermittivityModel::evaluate(double f_hz) const
{
    if (kind == Kind::Constant)
        return eps_r;
    const double w = 2.0 * kPi * f_hz;
    const Complex j(0.0, 1.0);
    return eps_inf + (eps_s - eps_inf) / (1.0 + j * w * tau_s) - j * sigma / (w * kVacuumPermittivity);
}

Complex phantom_gamma(const PermittivityModel &model, double f_hz)
{
    if (!(f_hz > 0.0))
        throw Error(Errc::InvalidArgument, "phantom_gamma needs a positive frequency");
    const Complex root = std::sqrt(model.evaluate(f_hz));
    return (1.0 - root) / (1.0 + root);
}

// ---------------------------------------------------------------------------------------------
// Configuration

SystemConfig SystemConfig::defaults()
{
    SystemConfig cfg;
    cfg.phantoms = {
        {"air", PermittivityModel::constant(1.0)},
        {"phantom1", PermittivityModel::debye(5.2, 78.4, 8.1e-12)},
        {"phantom2", PermittivityModel::debye(4.2, 24.3, 1.6e-10)},
    };
    return cfg;
}

FrequencyGrid SystemConfig::grid() const
{
    return FrequencyGrid::linear(f_start_hz, f_stop_hz, points);
}

double SystemConfig::distance(const PortPair &pair) const
{
    if (const auto it = coupling.pairs.find(pair); it != coupling.pairs.end() && it->second.distance_m)
        return *it->second.distance_m;
    const double sep = static_cast<double>(pair.second - pair.first);
    return 2.0 * coupling.ring_radius_m * std::sin(kPi * sep / static_cast<double>(n_ports));
}

double SystemConfig::coupling_level_db(const PortPair &pair) const
{
    if (const auto it = coupling.pairs.find(pair); it != coupling.pairs.end() && it->second.level_db)
        return *it->second.level_db;
    return coupling.level_db;
}

double SystemConfig::nominal_path_delay(const PortPair &pair) const
{
    return distance(pair) / kSpeedOfLight + 2.0 * antenna.delay_s;
}

ThruPhaseEstimate SystemConfig::nominal_delay_estimate() const
{
    ThruPhaseEstimate est;
    for (const auto &pair : all_pairs(n_ports))
        est.per_pair[pair] = nominal_path_delay(pair);
    return est;
}

const Phantom &SystemConfig::phantom(const std::string &name) const
{
    for (const auto &p : phantoms)
        if (p.name == name)
            return p;
    throw Error(Errc::ConfigInvalid, "phantoms: no phantom named '" + name + "'");
}

void SystemConfig::validate() const
{
    if (n_ports < 2)
        invalid("n_ports", "at least 2 ports are required, got " + std::to_string(n_ports));
    if (reference_port >= n_ports)
        invalid("reference_port", "must be below n_ports");
    if (points < 1)
        invalid("grid.points", "at least one point is required");
    if (!(f_start_hz > 0.0))
        invalid("grid.start_hz", "must be positive");
    if (points > 1 && !(f_stop_hz > f_start_hz))
        invalid("grid.stop_hz", "must exceed grid.start_hz");

    if (!(antenna.insertion_loss_db >= 0.0))
        invalid("antenna.insertion_loss_db", "must be non-negative");
    if (!(antenna.mismatch >= 0.0 && antenna.mismatch < 1.0))
        invalid("antenna.mismatch", "must lie in [0, 1)");
    if (!(antenna.delay_s >= 0.0))
        invalid("antenna.delay_s", "must be non-negative");
    for (const auto &[port, delta] : antenna.perturbation)
        if (port >= n_ports)
            invalid("antenna.perturbation", "port " + std::to_string(port) + " out of range");

    if (!(adapters.max_e00 >= 0.0 && adapters.max_e00 < 1.0))
        invalid("adapters.max_e00", "must lie in [0, 1)");
    if (!(adapters.max_e11 >= 0.0 && adapters.max_e11 < 1.0))
        invalid("adapters.max_e11", "must lie in [0, 1)");
    if (!(adapters.p_min > 0.0))
        invalid("adapters.p_min", "must be positive");
    if (!(adapters.p_max >= adapters.p_min))
        invalid("adapters.p_max", "must be at least adapters.p_min");
    if (!(adapters.max_split_db >= 0.0))
        invalid("adapters.max_split_db", "must be non-negative");
    if (!(adapters.max_delay_s >= 0.0))
        invalid("adapters.max_delay_s", "must be non-negative");
    if (!(adapters.max_phase_rad >= 0.0))
        invalid("adapters.max_phase_rad", "must be non-negative");
    for (const auto &[port, s] : adapters.explicit_adapters)
    {
        if (port >= n_ports)
            invalid("adapters.explicit", "port " + std::to_string(port) + " out of range");
        if (s(1, 0) == Complex(0.0) || s(0, 1) == Complex(0.0))
            invalid("adapters.explicit", "port " + std::to_string(port) + " needs non-zero transmission");
    }

    if (!(coupling.ring_radius_m > 0.0))
        invalid("coupling.ring_radius_m", "must be positive");
    if (!(coupling.attenuation_db_per_m >= 0.0))
        invalid("coupling.attenuation_db_per_m", "must be non-negative");
    if (!std::isfinite(coupling.level_db))
        invalid("coupling.level_db", "must be finite");
    for (const auto &[pair, pc] : coupling.pairs)
    {
        if (pair.second >= n_ports)
            invalid("coupling.pairs", "pair index out of range");
        if (pc.distance_m && !(*pc.distance_m > 0.0))
            invalid("coupling.pairs.distance_m", "must be positive");
    }

    if (!(ecal.reflect_magnitude > 0.0 && ecal.reflect_magnitude <= 1.0))
        invalid("ecal.reflect_magnitude", "must lie in (0, 1]");
    if (!(ecal.load_magnitude >= 0.0 && ecal.load_magnitude < 1.0))
        invalid("ecal.load_magnitude", "must lie in [0, 1)");
    if (!(ecal.thru_loss_db >= 0.0))
        invalid("ecal.thru_loss_db", "must be non-negative");

    if (phantoms.size() != 3)
        invalid("phantoms", "exactly 3 phantoms are required, got " + std::to_string(phantoms.size()));
    std::set<std::string> names;
    for (const auto &p : phantoms)
    {
        if (p.name.empty() || !names.insert(p.name).second)
            invalid("phantoms", "phantom names must be unique and non-empty");
        if (p.model.kind == PermittivityModel::Kind::Debye && !(p.model.tau_s >= 0.0 && p.model.sigma >= 0.0))
            invalid("phantoms." + p.name, "debye tau_s and sigma must be non-negative");
    }
    if (!names.contains(thru_phantom))
        invalid("thru_phantom", "'" + thru_phantom + "' is not one of the phantoms");
    if (!(std::abs(termination_gamma) <= 1.0))
        invalid("termination_gamma", "magnitude must not exceed 1");
    if (!(noise_sigma >= 0.0))
        invalid("noise_sigma", "must be non-negative");
}

// ---------------------------------------------------------------------------------------------
// Networks

NPortNetwork antenna_two_port(const SystemConfig &cfg, std::size_t port)
{
    const FrequencyGrid grid = cfg.grid();
    const double g = std::pow(10.0, -cfg.antenna.insertion_loss_db / 20.0);
    Complex a11 = cfg.antenna.mismatch;
    if (const auto it = cfg.antenna.perturbation.find(port); it != cfg.antenna.perturbation.end())
        a11 += it->second;
    const Complex a22 = cfg.antenna.mismatch;
    std::vector<Eigen::MatrixXcd> s(grid.size(), Eigen::MatrixXcd(2, 2));
    for (std::size_t k = 0; k < grid.size(); ++k)
    {
        const Complex t = g * cis(-2.0 * kPi * grid[k] * cfg.antenna.delay_s);
        s[k] << a11, t, t, a22;
    }
    return NPortNetwork(grid, std::move(s));
}

NPortNetwork synth_true_network(const SystemConfig &cfg, const PermittivityModel &phantom)
{
    const FrequencyGrid grid = cfg.grid();
    const auto n = static_cast<Eigen::Index>(cfg.n_ports);
    std::vector<NPortNetwork> ant;
    for (std::size_t p = 0; p < cfg.n_ports; ++p)
        ant.push_back(antenna_two_port(cfg, p));
    const auto pairs = all_pairs(cfg.n_ports);

    std::vector<Eigen::MatrixXcd> s(grid.size(), Eigen::MatrixXcd::Zero(n, n));
    for (std::size_t k = 0; k < grid.size(); ++k)
    {
        const double f = grid[k];
        const Complex eps = phantom.evaluate(f);
        const Complex gamma = phantom_gamma(phantom, f);
        const double beta = 2.0 * kPi * f * std::sqrt(std::max(eps.real(), 0.0)) / kSpeedOfLight;
        for (Eigen::Index i = 0; i < n; ++i)
        {
            const auto &a = ant[static_cast<std::size_t>(i)].at(k);
            s[k](i, i) = a(0, 0) + a(0, 1) * a(1, 0) * gamma / (1.0 - a(1, 1) * gamma);
        }
        for (const auto &pair : pairs)
        {
            const double d = cfg.distance(pair);
            const double level_db = cfg.coupling_level_db(pair) - cfg.coupling.attenuation_db_per_m * d;
            const Complex c = std::pow(10.0, level_db / 20.0) * cis(-beta * d);
            const auto &ai = ant[pair.first].at(k);
            const auto &aj = ant[pair.second].at(k);
            const Complex sij = ai(1, 0) * c * aj(0, 1) / ((1.0 - ai(1, 1) * gamma) * (1.0 - aj(1, 1) * gamma));
            const auto i = static_cast<Eigen::Index>(pair.first);
            const auto j = static_cast<Eigen::Index>(pair.second);
            s[k](i, j) = sij;
            s[k](j, i) = sij;
        }
    }
    return NPortNetwork(grid, std::move(s));
}

ErrorBox3 box_from_adapter(const NPortNetwork &adapter)
{
    const std::size_t n = adapter.size();
    ComplexSeries e00(n), e11(n), p(n);
    for (std::size_t k = 0; k < n; ++k)
    {
        const auto &s = adapter.at(k);
        e00[k] = s(0, 0);
        e11[k] = s(1, 1);
        p[k] = s(0, 1) * s(1, 0);
    }
    return ErrorBox3(adapter.grid(), std::move(e00), std::move(e11), std::move(p));
}

ECalCharacterization synth_ecal(const SystemConfig &cfg)
{
    const FrequencyGrid grid = cfg.grid();
    const auto &e = cfg.ecal;
    ECalCharacterization ecal;
    ComplexSeries open(grid.size()), shrt(grid.size()), load(grid.size(), e.load_magnitude);
    std::vector<Eigen::MatrixXcd> thru(grid.size(), Eigen::MatrixXcd(2, 2));
    const double g = std::pow(10.0, -e.thru_loss_db / 20.0);
    for (std::size_t k = 0; k < grid.size(); ++k)
    {
        const double w = 2.0 * kPi * grid[k];
        open[k] = e.reflect_magnitude * cis(-w * e.open_delay_s);
        shrt[k] = -e.reflect_magnitude * cis(-w * e.short_delay_s);
        const Complex t = g * cis(-w * e.thru_delay_s);
        thru[k] << 0.0, t, t, 0.0;
    }
    ecal.states = {{"load", std::move(load)}, {"open", std::move(open)}, {"short", std::move(shrt)}};
    ecal.thru = NPortNetwork(grid, std::move(thru));
    return ecal;
}

ErrorAdapters synth_error_adapters(const SystemConfig &cfg, std::mt19937_64 &rng)
{
    const FrequencyGrid grid = cfg.grid();
    const auto &b = cfg.adapters;
    auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

    ErrorAdapters out;
    for (std::size_t port = 0; port < cfg.n_ports; ++port)
    {
        // Fixed draw order per port; explicit adapters still consume their draws.
        const double r00 = uniform(0.0, b.max_e00);
        const double ph00 = uniform(-b.max_phase_rad, b.max_phase_rad);
        const double tau00 = uniform(0.0, b.max_delay_s);
        const double r11 = uniform(0.0, b.max_e11);
        const double ph11 = uniform(-b.max_phase_rad, b.max_phase_rad);
        const double tau11 = uniform(0.0, b.max_delay_s);
        const double pmag = uniform(b.p_min, b.p_max);
        const double split_db = uniform(-b.max_split_db, b.max_split_db);
        const double ph21 = uniform(-b.max_phase_rad, b.max_phase_rad);
        const double ph12 = uniform(-b.max_phase_rad, b.max_phase_rad);
        const double tau_c = uniform(0.0, b.max_delay_s);

        const double m21 = std::sqrt(pmag) * std::pow(10.0, split_db / 40.0);
        const double m12 = std::sqrt(pmag) * std::pow(10.0, -split_db / 40.0);

        std::vector<Eigen::MatrixXcd> s(grid.size(), Eigen::MatrixXcd(2, 2));
        const auto expl = b.explicit_adapters.find(port);
        for (std::size_t k = 0; k < grid.size(); ++k)
        {
            if (expl != b.explicit_adapters.end())
            {
                s[k] = expl->second;
                continue;
            }
            const double w = 2.0 * kPi * grid[k];
            s[k] << r00 * cis(ph00 - w * tau00), m12 * cis(ph12 - w * tau_c), m21 * cis(ph21 - w * tau_c),
                r11 * cis(ph11 - w * tau11);
        }
        out.adapters.emplace_back(grid, std::move(s));
    }

    const auto ecal = synth_ecal(cfg);
    const std::size_t ref = cfg.reference_port;
    out.reference_cable = out.adapters[ref];
    out.adapters[ref] = t_to_s(cascade(s_to_t(out.reference_cable), s_to_t(ecal.thru)));

    for (const auto &a : out.adapters)
        out.boxes.push_back(box_from_adapter(a));
    for (const auto &pair : all_pairs(cfg.n_ports))
    {
        ComplexSeries k(grid.size());
        for (std::size_t f = 0; f < grid.size(); ++f)
            k[f] = out.adapters[pair.first].at(f)(1, 0) * out.adapters[pair.second].at(f)(0, 1);
        out.k.emplace(pair, PairTracking(grid, std::move(k)));
    }
    return out;
}

ErrorAdapters synth_error_adapters(const SystemConfig &cfg)
{
    std::mt19937_64 rng(cfg.seed);
    return synth_error_adapters(cfg, rng);
}

// ---------------------------------------------------------------------------------------------

PhantomMeasurementSet Dataset::phantom_set() const
{
    PhantomMeasurementSet set;
    set.phantom_names = phantom_names;
    set.thru_phantom = thru_phantom;
    set.raw_reflection = raw_reflection;
    if (const auto it = raw_pairwise.find(thru_phantom); it != raw_pairwise.end())
        set.raw_thru = it->second;
    return set;
}

Simulation simulate_measurements(const SystemConfig &cfg)
{
    cfg.validate();
    const FrequencyGrid grid = cfg.grid();
    std::mt19937_64 rng(cfg.seed);
    const ErrorAdapters adapters = synth_error_adapters(cfg, rng);

    auto noisy = [&](Complex v) { return cfg.noise_sigma > 0.0 ? v + complex_noise(rng, cfg.noise_sigma) : v; };

    Simulation sim;
    auto &ds = sim.dataset;
    auto &truth = sim.truth;
    ds.n_ports = cfg.n_ports;
    ds.reference_port = cfg.reference_port;
    ds.grid = grid;
    ds.thru_phantom = cfg.thru_phantom;
    ds.tau_estimate = cfg.nominal_delay_estimate();
    for (const auto &p : cfg.phantoms)
        ds.phantom_names.push_back(p.name);

    truth.true_box = adapters.boxes;
    truth.true_k = adapters.k;
    truth.adapters = adapters.adapters;
    truth.reference_cable = adapters.reference_cable;
    for (const auto &p : cfg.phantoms)
        truth.true_network.emplace(p.name, synth_true_network(cfg, p.model));

    // ECal reflect states seen through the reference cable alone.
    ds.ecal = synth_ecal(cfg);
    const ErrorBox3 cable_box = box_from_adapter(adapters.reference_cable);
    for (const auto &[name, gamma] : ds.ecal.states)
    {
        ComplexSeries m = embed_reflection(cable_box, gamma);
        for (auto &v : m)
            v = noisy(v);
        ds.ecal_measured.emplace(name, std::move(m));
    }

    // One-port reflections with every other port terminated.
    for (const auto &p : cfg.phantoms)
    {
        const auto &net = truth.true_network.at(p.name);
        for (std::size_t port = 0; port < cfg.n_ports; ++port)
        {
            const std::size_t kept[] = {port};
            const ComplexSeries gamma = reduce_ports(net, kept, cfg.termination_gamma).entry(0, 0);
            ComplexSeries m = embed_reflection(adapters.boxes[port], gamma);
            for (auto &v : m)
                v = noisy(v);
            ds.raw_reflection[port].emplace(p.name, std::move(m));
        }
    }

    // Pairwise two-port measurements, port 1 = lower index.
    for (const auto &p : cfg.phantoms)
    {
        const auto &net = truth.true_network.at(p.name);
        for (const auto &pair : all_pairs(cfg.n_ports))
        {
            const std::size_t kept[] = {pair.first, pair.second};
            const NPortNetwork dut = reduce_ports(net, kept, cfg.termination_gamma);
            const TwoPortT chain = cascade(cascade(s_to_t(adapters.adapters[pair.first]), s_to_t(dut)),
                                           s_to_t(reversed(adapters.adapters[pair.second])));
            const NPortNetwork clean = t_to_s(chain);
            std::vector<Eigen::MatrixXcd> s(grid.size(), Eigen::MatrixXcd(2, 2));
            for (std::size_t k = 0; k < grid.size(); ++k)
            {
                const auto &c = clean.at(k);
                // Touchstone order: S11, S21, S12, S22.
                const Complex s11 = noisy(c(0, 0));
                const Complex s21 = noisy(c(1, 0));
                const Complex s12 = noisy(c(0, 1));
                const Complex s22 = noisy(c(1, 1));
                s[k] << s11, s12, s21, s22;
            }
            ds.raw_pairwise[p.name].emplace(pair, NPortNetwork(grid, std::move(s)));
        }
    }
    return sim;
}

} // namespace mpcal::sim
