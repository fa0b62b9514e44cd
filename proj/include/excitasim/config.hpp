#pragma once

#include <fstream>
#include <initializer_list>
#include <string>

#include <json.hpp>

#include "excitasim/fuzzy_pi.hpp"
#include "excitasim/simulation.hpp"
#include "excitasim/tuner.hpp"

namespace excitasim {

inline constexpr int kSchemaVersion = 1;

/// The full configuration tree: plant, network, controller, tuner and
/// scenario. Defaults reproduce the study case.
struct RunConfig {
    GeneratorParams generator;
    LineParams line;
    ComplexAdmittance load;
    FuzzyPIConfig controller;
    TunerConfig tuner;
    ScenarioConfig scenario = paper_scenario();

    NetworkAdmittance network() const {
        return admittances_from_line_and_load(line_admittance(line), load);
    }

    void validate() const {
        generator.validate();
        line.validate();
        controller.validate();
        tuner.validate();
        scenario.validate();
    }
};

namespace detail {

using nlohmann::json;

inline void reject_unknown_keys(const json& j, const std::string& section,
                                std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) { ok = true; break; }
        if (!ok) throw ValidationError("unknown key '" + section + key + "'");
    }
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) {
        try {
            out = it->get<T>();
        } catch (const json::exception&) {
            throw ValidationError(std::string("key '") + key + "' has the wrong type");
        }
    }
}

inline void from_json_section(const json& j, GeneratorParams& p) {
    reject_unknown_keys(j, "generator.",
                        {"x_d", "x_q", "x_d_t", "x_q_t", "x_d_st", "x_q_st", "T_d0_t", "T_d0_st",
                         "T_q0_st", "T_ex", "M", "k_d", "r_a", "omega_0", "v_b"});
    read_field(j, "x_d", p.x_d);
    read_field(j, "x_q", p.x_q);
    read_field(j, "x_d_t", p.x_d_t);
    read_field(j, "x_q_t", p.x_q_t);
    read_field(j, "x_d_st", p.x_d_st);
    read_field(j, "x_q_st", p.x_q_st);
    read_field(j, "T_d0_t", p.T_d0_t);
    read_field(j, "T_d0_st", p.T_d0_st);
    read_field(j, "T_q0_st", p.T_q0_st);
    read_field(j, "T_ex", p.T_ex);
    read_field(j, "M", p.M);
    read_field(j, "k_d", p.k_d);
    read_field(j, "r_a", p.r_a);
    read_field(j, "omega_0", p.omega_0);
    read_field(j, "v_b", p.v_b);
}

inline json to_json_section(const GeneratorParams& p) {
    return {{"x_d", p.x_d},       {"x_q", p.x_q},       {"x_d_t", p.x_d_t},
            {"x_q_t", p.x_q_t},   {"x_d_st", p.x_d_st}, {"x_q_st", p.x_q_st},
            {"T_d0_t", p.T_d0_t}, {"T_d0_st", p.T_d0_st}, {"T_q0_st", p.T_q0_st},
            {"T_ex", p.T_ex},     {"M", p.M},           {"k_d", p.k_d},
            {"r_a", p.r_a},       {"omega_0", p.omega_0}, {"v_b", p.v_b}};
}

inline EventKind event_kind_from_string(const std::string& s) {
    if (s == "reference_step") return EventKind::ReferenceStep;
    if (s == "torque_step") return EventKind::TorqueStep;
    if (s == "g1_step") return EventKind::OwnConductanceStep;
    if (s == "b1_step") return EventKind::OwnSusceptanceStep;
    if (s == "g2_step") return EventKind::TransferConductanceStep;
    if (s == "b2_step") return EventKind::TransferSusceptanceStep;
    throw ValidationError("unknown event kind '" + s + "'");
}

inline const char* event_kind_to_string(EventKind k) {
    switch (k) {
        case EventKind::ReferenceStep: return "reference_step";
        case EventKind::TorqueStep: return "torque_step";
        case EventKind::OwnConductanceStep: return "g1_step";
        case EventKind::OwnSusceptanceStep: return "b1_step";
        case EventKind::TransferConductanceStep: return "g2_step";
        case EventKind::TransferSusceptanceStep: return "b2_step";
    }
    return "?";
}

} // namespace detail

/// Applies a parsed JSON document onto the defaults. Unknown keys are
/// rejected; no invariants are checked here (see RunConfig::validate).
inline RunConfig config_from_json(const nlohmann::json& j) {
    using detail::read_field;
    using detail::reject_unknown_keys;

    RunConfig cfg;
    reject_unknown_keys(j, "", {"schema", "generator", "network", "controller", "tuner", "scenario"});
    if (auto it = j.find("schema"); it != j.end() && it->get<int>() != kSchemaVersion)
        throw ValidationError("unsupported schema version");

    if (auto it = j.find("generator"); it != j.end()) detail::from_json_section(*it, cfg.generator);

    if (auto it = j.find("network"); it != j.end()) {
        reject_unknown_keys(*it, "network.", {"line", "load"});
        if (auto ln = it->find("line"); ln != it->end()) {
            reject_unknown_keys(*ln, "network.line.", {"r_e", "x_e"});
            read_field(*ln, "r_e", cfg.line.r_e);
            read_field(*ln, "x_e", cfg.line.x_e);
        }
        if (auto ld = it->find("load"); ld != it->end()) {
            reject_unknown_keys(*ld, "network.load.", {"g", "b"});
            read_field(*ld, "g", cfg.load.g);
            read_field(*ld, "b", cfg.load.b);
        }
    }

    if (auto it = j.find("controller"); it != j.end()) {
        reject_unknown_keys(*it, "controller.",
                            {"k_e", "k_de", "k_u", "u_min", "u_max", "e_peaks", "de_peaks",
                             "singletons", "rules"});
        read_field(*it, "k_e", cfg.controller.k_e);
        read_field(*it, "k_de", cfg.controller.k_de);
        read_field(*it, "k_u", cfg.controller.k_u);
        read_field(*it, "u_min", cfg.controller.u_min);
        read_field(*it, "u_max", cfg.controller.u_max);
        read_field(*it, "e_peaks", cfg.controller.e_partition.peaks);
        read_field(*it, "de_peaks", cfg.controller.de_partition.peaks);
        read_field(*it, "singletons", cfg.controller.base_singletons);
        read_field(*it, "rules", cfg.controller.rules.cell);
    }

    if (auto it = j.find("tuner"); it != j.end()) {
        reject_unknown_keys(*it, "tuner.", {"alpha", "beta", "c1", "c2"});
        read_field(*it, "alpha", cfg.tuner.alpha);
        read_field(*it, "beta", cfg.tuner.beta);
        read_field(*it, "c1", cfg.tuner.c1);
        read_field(*it, "c2", cfg.tuner.c2);
    }

    if (auto it = j.find("scenario"); it != j.end()) {
        reject_unknown_keys(*it, "scenario.",
                            {"duration", "h", "ts", "model", "adaptive", "fixed_c", "target_vt",
                             "target_te", "full_rate_logging", "events"});
        read_field(*it, "duration", cfg.scenario.duration);
        read_field(*it, "h", cfg.scenario.h);
        read_field(*it, "ts", cfg.scenario.ts);
        read_field(*it, "adaptive", cfg.scenario.adaptive);
        read_field(*it, "fixed_c", cfg.scenario.fixed_c);
        read_field(*it, "target_vt", cfg.scenario.target_vt);
        read_field(*it, "target_te", cfg.scenario.target_te);
        read_field(*it, "full_rate_logging", cfg.scenario.full_rate_logging);
        if (auto m = it->find("model"); m != it->end()) {
            const auto s = m->get<std::string>();
            if (s == "full") cfg.scenario.model = ModelKind::Full;
            else if (s == "reduced") cfg.scenario.model = ModelKind::Reduced;
            else throw ValidationError("scenario.model must be 'full' or 'reduced'");
        }
        if (auto ev = it->find("events"); ev != it->end()) {
            cfg.scenario.events.clear();
            for (const auto& e : *ev) {
                reject_unknown_keys(e, "scenario.events[].", {"time", "kind", "magnitude"});
                ScenarioEvent se;
                read_field(e, "time", se.time);
                read_field(e, "magnitude", se.magnitude);
                if (auto k = e.find("kind"); k != e.end())
                    se.kind = detail::event_kind_from_string(k->get<std::string>());
                cfg.scenario.events.push_back(se);
            }
        }
    }
    return cfg;
}

inline nlohmann::json config_to_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["schema"] = kSchemaVersion;
    j["generator"] = detail::to_json_section(cfg.generator);
    j["network"] = {{"line", {{"r_e", cfg.line.r_e}, {"x_e", cfg.line.x_e}}},
                    {"load", {{"g", cfg.load.g}, {"b", cfg.load.b}}}};
    j["controller"] = {{"k_e", cfg.controller.k_e},
                       {"k_de", cfg.controller.k_de},
                       {"k_u", cfg.controller.k_u},
                       {"u_min", cfg.controller.u_min},
                       {"u_max", cfg.controller.u_max},
                       {"e_peaks", cfg.controller.e_partition.peaks},
                       {"de_peaks", cfg.controller.de_partition.peaks},
                       {"singletons", cfg.controller.base_singletons},
                       {"rules", cfg.controller.rules.cell}};
    j["tuner"] = {{"alpha", cfg.tuner.alpha},
                  {"beta", cfg.tuner.beta},
                  {"c1", cfg.tuner.c1},
                  {"c2", cfg.tuner.c2}};
    nlohmann::json events = nlohmann::json::array();
    for (const auto& e : cfg.scenario.events)
        events.push_back({{"time", e.time},
                          {"kind", detail::event_kind_to_string(e.kind)},
                          {"magnitude", e.magnitude}});
    j["scenario"] = {{"duration", cfg.scenario.duration},
                     {"h", cfg.scenario.h},
                     {"ts", cfg.scenario.ts},
                     {"model", cfg.scenario.model == ModelKind::Full ? "full" : "reduced"},
                     {"adaptive", cfg.scenario.adaptive},
                     {"fixed_c", cfg.scenario.fixed_c},
                     {"target_vt", cfg.scenario.target_vt},
                     {"target_te", cfg.scenario.target_te},
                     {"full_rate_logging", cfg.scenario.full_rate_logging},
                     {"events", events}};
    return j;
}

/// Loads and fully validates a JSON config file; omitted sections keep
/// their defaults.
inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError("malformed config '" + path + "': " + ex.what());
    }
    RunConfig cfg = config_from_json(j);
    cfg.validate();
    return cfg;
}

} // namespace excitasim
