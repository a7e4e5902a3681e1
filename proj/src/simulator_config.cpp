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

#include <set>
#include <type_traits>

namespace mpcal::sim
{

using nlohmann::json;

namespace
{

[[noreturn]] void invalid(const std::string &field, const std::string &why)
{
    throw Error(Errc::ConfigInvalid, field + ": " + why);
}

void reject_unknown(const json &obj, const std::string &path, std::initializer_list<const char *> known)
{
    if (!obj.is_object())
        invalid(path.empty() ? "config" : path, "must be a JSON object");
    const std::set<std::string> allowed(known.begin(), known.end());
    for (const auto &[key, value] : obj.items())
        if (!allowed.contains(key))
            invalid(path.empty() ? key : path + "." + key, "unknown field");
}

std::string join(const std::string &path, const char *key)
{
    return path.empty() ? std::string(key) : path + "." + key;
}

template <typename T>
void read(const json &obj, const std::string &path, const char *key, T &out)
{
    if (!obj.contains(key))
        return;
    if constexpr (std::is_unsigned_v<T>)
        if (!obj.at(key).is_number_unsigned())
            invalid(join(path, key), "must be a non-negative integer");
    try
    {
        out = obj.at(key).get<T>();
    }
    catch (const json::exception &)
    {
        invalid(join(path, key), "has the wrong type");
    }
}

Complex read_complex(const json &v, const std::string &field)
{
    if (v.is_number())
        return {v.get<double>(), 0.0};
    if (v.is_object() && v.contains("re") && v.contains("im") && v.size() == 2 && v["re"].is_number() &&
        v["im"].is_number())
        return {v["re"].get<double>(), v["im"].get<double>()};
    invalid(field, "expected a number or {\"re\": x, \"im\": y}");
}

json write_complex(Complex c)
{
    return {{"re", c.real()}, {"im", c.imag()}};
}

PermittivityModel read_model(const json &j, const std::string &path)
{
    reject_unknown(j, path, {"kind", "eps_r", "eps_inf", "eps_s", "tau_s", "sigma"});
    std::string kind = "constant";
    read(j, path, "kind", kind);
    if (kind == "constant")
    {
        if (!j.contains("eps_r"))
            invalid(path + ".eps_r", "required for a constant model");
        return PermittivityModel::constant(read_complex(j["eps_r"], path + ".eps_r"));
    }
    if (kind == "debye")
    {
        PermittivityModel m = PermittivityModel::debye(1.0, 1.0, 0.0, 0.0);
        read(j, path, "eps_inf", m.eps_inf);
        read(j, path, "eps_s", m.eps_s);
        read(j, path, "tau_s", m.tau_s);
        read(j, path, "sigma", m.sigma);
        return m;
    }
    invalid(path + ".kind", "must be 'constant' or 'debye'");
}

json write_model(const PermittivityModel &m)
{
    if (m.kind == PermittivityModel::Kind::Constant)
        return {{"kind", "constant"}, {"eps_r", write_complex(m.eps_r)}};
    return {{"kind", "debye"}, {"eps_inf", m.eps_inf}, {"eps_s", m.eps_s}, {"tau_s", m.tau_s}, {"sigma", m.sigma}};
}

} // namespace

SystemConfig config_from_json(const json &j)
{
    SystemConfig cfg = SystemConfig::defaults();
    reject_unknown(j, "", {"n_ports", "reference_port", "grid", "antenna", "adapters", "coupling", "ecal", "phantoms",
                           "thru_phantom", "termination_gamma", "noise_sigma", "seed"});
    read(j, "", "n_ports", cfg.n_ports);
    read(j, "", "reference_port", cfg.reference_port);

    if (j.contains("grid"))
    {
        const auto &g = j["grid"];
        reject_unknown(g, "grid", {"start_hz", "stop_hz", "points"});
        read(g, "grid", "start_hz", cfg.f_start_hz);
        read(g, "grid", "stop_hz", cfg.f_stop_hz);
        read(g, "grid", "points", cfg.points);
    }
    if (j.contains("antenna"))
    {
        const auto &a = j["antenna"];
        reject_unknown(a, "antenna", {"insertion_loss_db", "delay_s", "mismatch", "perturbation"});
        read(a, "antenna", "insertion_loss_db", cfg.antenna.insertion_loss_db);
        read(a, "antenna", "delay_s", cfg.antenna.delay_s);
        read(a, "antenna", "mismatch", cfg.antenna.mismatch);
        if (a.contains("perturbation"))
        {
            if (!a["perturbation"].is_array())
                invalid("antenna.perturbation", "must be an array");
            for (const auto &e : a["perturbation"])
            {
                reject_unknown(e, "antenna.perturbation", {"port", "delta"});
                std::size_t port = 0;
                read(e, "antenna.perturbation", "port", port);
                if (!e.contains("delta"))
                    invalid("antenna.perturbation.delta", "required");
                cfg.antenna.perturbation[port] = read_complex(e["delta"], "antenna.perturbation.delta");
            }
        }
    }
    if (j.contains("adapters"))
    {
        const auto &a = j["adapters"];
        reject_unknown(a, "adapters", {"max_e00", "max_e11", "p_min", "p_max", "max_split_db", "max_delay_s",
                                       "max_phase_rad", "explicit"});
        read(a, "adapters", "max_e00", cfg.adapters.max_e00);
        read(a, "adapters", "max_e11", cfg.adapters.max_e11);
        read(a, "adapters", "p_min", cfg.adapters.p_min);
        read(a, "adapters", "p_max", cfg.adapters.p_max);
        read(a, "adapters", "max_split_db", cfg.adapters.max_split_db);
        read(a, "adapters", "max_delay_s", cfg.adapters.max_delay_s);
        read(a, "adapters", "max_phase_rad", cfg.adapters.max_phase_rad);
        if (a.contains("explicit"))
        {
            if (!a["explicit"].is_array())
                invalid("adapters.explicit", "must be an array");
            for (const auto &e : a["explicit"])
            {
                reject_unknown(e, "adapters.explicit", {"port", "s11", "s21", "s12", "s22"});
                std::size_t port = 0;
                read(e, "adapters.explicit", "port", port);
                for (const char *key : {"s11", "s21", "s12", "s22"})
                    if (!e.contains(key))
                        invalid(std::string("adapters.explicit.") + key, "required");
                Eigen::Matrix2cd s;
                s << read_complex(e["s11"], "adapters.explicit.s11"), read_complex(e["s12"], "adapters.explicit.s12"),
                    read_complex(e["s21"], "adapters.explicit.s21"), read_complex(e["s22"], "adapters.explicit.s22");
                cfg.adapters.explicit_adapters[port] = s;
            }
        }
    }
    if (j.contains("coupling"))
    {
        const auto &c = j["coupling"];
        reject_unknown(c, "coupling", {"level_db", "attenuation_db_per_m", "ring_radius_m", "pairs"});
        read(c, "coupling", "level_db", cfg.coupling.level_db);
        read(c, "coupling", "attenuation_db_per_m", cfg.coupling.attenuation_db_per_m);
        read(c, "coupling", "ring_radius_m", cfg.coupling.ring_radius_m);
        if (c.contains("pairs"))
        {
            if (!c["pairs"].is_array())
                invalid("coupling.pairs", "must be an array");
            for (const auto &e : c["pairs"])
            {
                reject_unknown(e, "coupling.pairs", {"i", "j", "level_db", "distance_m"});
                std::size_t i = 0, jj = 0;
                read(e, "coupling.pairs", "i", i);
                read(e, "coupling.pairs", "j", jj);
                if (i == jj)
                    invalid("coupling.pairs", "i and j must differ");
                PairCoupling pc;
                if (e.contains("level_db"))
                {
                    double v = 0.0;
                    read(e, "coupling.pairs", "level_db", v);
                    pc.level_db = v;
                }
                if (e.contains("distance_m"))
                {
                    double v = 0.0;
                    read(e, "coupling.pairs", "distance_m", v);
                    pc.distance_m = v;
                }
                cfg.coupling.pairs[PortPair(i, jj)] = pc;
            }
        }
    }
    if (j.contains("ecal"))
    {
        const auto &e = j["ecal"];
        reject_unknown(e, "ecal", {"open_delay_s", "short_delay_s", "reflect_magnitude", "load_magnitude",
                                   "thru_loss_db", "thru_delay_s"});
        read(e, "ecal", "open_delay_s", cfg.ecal.open_delay_s);
        read(e, "ecal", "short_delay_s", cfg.ecal.short_delay_s);
        read(e, "ecal", "reflect_magnitude", cfg.ecal.reflect_magnitude);
        read(e, "ecal", "load_magnitude", cfg.ecal.load_magnitude);
        read(e, "ecal", "thru_loss_db", cfg.ecal.thru_loss_db);
        read(e, "ecal", "thru_delay_s", cfg.ecal.thru_delay_s);
    }
    if (j.contains("phantoms"))
    {
        if (!j["phantoms"].is_array())
            invalid("phantoms", "must be an array");
        cfg.phantoms.clear();
        for (const auto &e : j["phantoms"])
        {
            reject_unknown(e, "phantoms", {"name", "model"});
            Phantom p;
            read(e, "phantoms", "name", p.name);
            if (!e.contains("model"))
                invalid("phantoms.model", "required");
            p.model = read_model(e["model"], "phantoms." + p.name + ".model");
            cfg.phantoms.push_back(std::move(p));
        }
    }
    read(j, "", "thru_phantom", cfg.thru_phantom);
    if (j.contains("termination_gamma"))
        cfg.termination_gamma = read_complex(j["termination_gamma"], "termination_gamma");
    read(j, "", "noise_sigma", cfg.noise_sigma);
    read(j, "", "seed", cfg.seed);

    cfg.validate();
    return cfg;
}

json config_to_json(const SystemConfig &cfg)
{
    json perturb = json::array();
    for (const auto &[port, delta] : cfg.antenna.perturbation)
        perturb.push_back({{"port", port}, {"delta", write_complex(delta)}});
    json expl = json::array();
    for (const auto &[port, s] : cfg.adapters.explicit_adapters)
        expl.push_back({{"port", port},
                        {"s11", write_complex(s(0, 0))},
                        {"s21", write_complex(s(1, 0))},
                        {"s12", write_complex(s(0, 1))},
                        {"s22", write_complex(s(1, 1))}});
    json pairs = json::array();
    for (const auto &[pair, pc] : cfg.coupling.pairs)
    {
        json e = {{"i", pair.first}, {"j", pair.second}};
        if (pc.level_db)
            e["level_db"] = *pc.level_db;
        if (pc.distance_m)
            e["distance_m"] = *pc.distance_m;
        pairs.push_back(std::move(e));
    }
    json phantoms = json::array();
    for (const auto &p : cfg.phantoms)
        phantoms.push_back({{"name", p.name}, {"model", write_model(p.model)}});

    return {
        {"n_ports", cfg.n_ports},
        {"reference_port", cfg.reference_port},
        {"grid", {{"start_hz", cfg.f_start_hz}, {"stop_hz", cfg.f_stop_hz}, {"points", cfg.points}}},
        {"antenna",
         {{"insertion_loss_db", cfg.antenna.insertion_loss_db},
          {"delay_s", cfg.antenna.delay_s},
          {"mismatch", cfg.antenna.mismatch},
          {"perturbation", perturb}}},
        {"adapters",
         {{"max_e00", cfg.adapters.max_e00},
          {"max_e11", cfg.adapters.max_e11},
          {"p_min", cfg.adapters.p_min},
          {"p_max", cfg.adapters.p_max},
          {"max_split_db", cfg.adapters.max_split_db},
          {"max_delay_s", cfg.adapters.max_delay_s},
          {"max_phase_rad", cfg.adapters.max_phase_rad},
          {"explicit", expl}}},
        {"coupling",
         {{"level_db", cfg.coupling.level_db},
          {"attenuation_db_per_m", cfg.coupling.attenuation_db_per_m},
          {"ring_radius_m", cfg.coupling.ring_radius_m},
          {"pairs", pairs}}},
        {"ecal",
         {{"open_delay_s", cfg.ecal.open_delay_s},
          {"short_delay_s", cfg.ecal.short_delay_s},
          {"reflect_magnitude", cfg.ecal.reflect_magnitude},
          {"load_magnitude", cfg.ecal.load_magnitude},
          {"thru_loss_db", cfg.ecal.thru_loss_db},
          {"thru_delay_s", cfg.ecal.thru_delay_s}}},
        {"phantoms", phantoms},
        {"thru_phantom", cfg.thru_phantom},
        {"termination_gamma", write_complex(cfg.termination_gamma)},
        {"noise_sigma", cfg.noise_sigma},
        {"seed", cfg.seed},
    };
}

} // namespace mpcal::sim
