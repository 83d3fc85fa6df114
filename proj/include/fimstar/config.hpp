#pragma once

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fimstar/common.hpp"
#include "fimstar/scenario.hpp"

namespace fimstar {

using nlohmann::json;

namespace config_detail {

struct Field {
    std::string section;
    std::string key;
};

inline void set_field(ScenarioConfig& c, const Field& f, const json& v) {
    const std::string path = f.section + "." + f.key;
    try {
        if (f.section == "system") {
            if (f.key == "users_transmission") c.users_t = v.get<int>();
            else if (f.key == "users_reflection") c.users_r = v.get<int>();
            else if (f.key == "subcarriers") c.subcarriers = v.get<int>();
            else if (f.key == "bs_elements_x") c.bs_elements_x = v.get<int>();
            else if (f.key == "bs_elements_z") c.bs_elements_z = v.get<int>();
            else if (f.key == "ris_elements_x") c.ris_elements_x = v.get<int>();
            else if (f.key == "ris_elements_z") c.ris_elements_z = v.get<int>();
            else if (f.key == "u_max") c.u_max = v.get<int>();
            else if (f.key == "p_max_watts") c.p_max_w = v.get<double>();
            else if (f.key == "noise_dbm_per_hz") c.noise_dbm_per_hz = v.get<double>();
            else if (f.key == "bandwidth_hz") c.bandwidth_hz = v.get<double>();
            else if (f.key == "carrier_frequency_hz") c.carrier_frequency_hz = v.get<double>();
            else if (f.key == "element_spacing_m") c.element_spacing_m = v.get<double>();
            else if (f.key == "morph_range_wavelengths") c.morph_range_wavelengths = v.get<double>();
            else if (f.key == "paths") c.paths = v.get<int>();
            else throw std::invalid_argument("unknown key " + path);
        } else if (f.section == "placement") {
            if (f.key == "ris_position_m") c.ris_position_m = v.get<std::array<double, 3>>();
            else if (f.key == "user_disc_center_m") c.user_disc_center_m = v.get<std::array<double, 3>>();
            else if (f.key == "user_disc_radius_m") c.user_disc_radius_m = v.get<double>();
            else if (f.key == "pathloss_ref_db") c.pathloss_ref_db = v.get<double>();
            else if (f.key == "pathloss_exp_direct") c.pathloss_exp_direct = v.get<double>();
            else if (f.key == "pathloss_exp_ris") c.pathloss_exp_ris = v.get<double>();
            else throw std::invalid_argument("unknown key " + path);
        } else if (f.section == "power") {
            if (f.key == "bs_static_dbm") c.bs_static_dbm = v.get<double>();
            else if (f.key == "ris_static_watts") c.ris_static_w = v.get<double>();
            else if (f.key == "ris_per_element_watts") c.ris_per_element_w = v.get<double>();
            else if (f.key == "amp_efficiency") c.amp_efficiency = v.get<double>();
            else throw std::invalid_argument("unknown key " + path);
        } else if (f.section == "reward") {
            if (f.key == "nu") c.reward_nu = v.get<std::array<double, 5>>();
            else throw std::invalid_argument("unknown key " + path);
        } else if (f.section == "agent") {
            if (f.key == "batch_size") c.batch_size = v.get<int>();
            else if (f.key == "discount") c.discount = v.get<double>();
            else if (f.key == "soft_tau") c.soft_tau = v.get<double>();
            else if (f.key == "lr_actor") c.lr_actor = v.get<double>();
            else if (f.key == "lr_critic") c.lr_critic = v.get<double>();
            else if (f.key == "lr_meta") c.lr_meta = v.get<double>();
            else if (f.key == "entropy_weight") c.entropy_weight = v.get<double>();
            else if (f.key == "grad_clip") c.grad_clip = v.get<double>();
            else if (f.key == "replay_capacity") c.replay_capacity = v.get<std::uint64_t>();
            else if (f.key == "actor_hidden") c.actor_hidden = v.get<std::vector<int>>();
            else if (f.key == "critic_hidden") c.critic_hidden = v.get<std::vector<int>>();
            else if (f.key == "meta_hidden") c.meta_hidden = v.get<std::vector<int>>();
            else throw std::invalid_argument("unknown key " + path);
        } else if (f.section == "run") {
            if (f.key == "episodes") c.episodes = v.get<int>();
            else if (f.key == "steps_per_episode") c.steps_per_episode = v.get<int>();
            else if (f.key == "grad_steps") c.grad_steps = v.get<int>();
            else if (f.key == "seeds") c.seeds = v.get<std::vector<std::uint64_t>>();
            else if (f.key == "lr_grid") c.lr_grid = v.get<std::vector<double>>();
            else if (f.key == "user_grid") c.user_grid = v.get<std::vector<int>>();
            else throw std::invalid_argument("unknown key " + path);
        } else {
            throw std::invalid_argument("unknown section " + f.section);
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument("config field " + path + ": " + e.what());
    }
}

}  // namespace config_detail

inline json config_to_json(const ScenarioConfig& c) {
    json j;
    j["system"] = {{"users_transmission", c.users_t},
                   {"users_reflection", c.users_r},
                   {"subcarriers", c.subcarriers},
                   {"bs_elements_x", c.bs_elements_x},
                   {"bs_elements_z", c.bs_elements_z},
                   {"ris_elements_x", c.ris_elements_x},
                   {"ris_elements_z", c.ris_elements_z},
                   {"u_max", c.u_max},
                   {"p_max_watts", c.p_max_w},
                   {"noise_dbm_per_hz", c.noise_dbm_per_hz},
                   {"bandwidth_hz", c.bandwidth_hz},
                   {"carrier_frequency_hz", c.carrier_frequency_hz},
                   {"element_spacing_m", c.element_spacing_m},
                   {"morph_range_wavelengths", c.morph_range_wavelengths},
                   {"paths", c.paths}};
    j["placement"] = {{"ris_position_m", c.ris_position_m},
                      {"user_disc_center_m", c.user_disc_center_m},
                      {"user_disc_radius_m", c.user_disc_radius_m},
                      {"pathloss_ref_db", c.pathloss_ref_db},
                      {"pathloss_exp_direct", c.pathloss_exp_direct},
                      {"pathloss_exp_ris", c.pathloss_exp_ris}};
    j["power"] = {{"bs_static_dbm", c.bs_static_dbm},
                  {"ris_static_watts", c.ris_static_w},
                  {"ris_per_element_watts", c.ris_per_element_w},
                  {"amp_efficiency", c.amp_efficiency}};
    j["reward"] = {{"nu", c.reward_nu}};
    j["agent"] = {{"batch_size", c.batch_size},
                  {"discount", c.discount},
                  {"soft_tau", c.soft_tau},
                  {"lr_actor", c.lr_actor},
                  {"lr_critic", c.lr_critic},
                  {"lr_meta", c.lr_meta},
                  {"entropy_weight", c.entropy_weight},
                  {"grad_clip", c.grad_clip},
                  {"replay_capacity", c.replay_capacity},
                  {"actor_hidden", c.actor_hidden},
                  {"critic_hidden", c.critic_hidden},
                  {"meta_hidden", c.meta_hidden}};
    j["run"] = {{"episodes", c.episodes},
                {"steps_per_episode", c.steps_per_episode},
                {"grad_steps", c.grad_steps},
                {"seeds", c.seeds},
                {"lr_grid", c.lr_grid},
                {"user_grid", c.user_grid}};
    return j;
}

// Unknown sections or keys are rejected; missing keys keep their defaults.
inline ScenarioConfig config_from_json(const json& j) {
    ScenarioConfig c;
    require(j.is_object() || j.is_null(), "config root must be a JSON object");
    static const std::vector<std::string> known_sections{"system", "placement", "power",
                                                         "reward", "agent", "run"};
    if (j.is_object()) {
        for (const auto& [section, body] : j.items()) {
            require(std::find(known_sections.begin(), known_sections.end(), section) !=
                        known_sections.end(),
                    "unknown section " + section);
            require(body.is_object(), "config section " + section + " must be an object");
            for (const auto& [key, value] : body.items())
                config_detail::set_field(c, {section, key}, value);
        }
    }
    return c;
}

inline const std::vector<config_detail::Field>& config_fields() {
    static const std::vector<config_detail::Field> fields{
        {"system", "users_transmission"}, {"system", "users_reflection"},
        {"system", "subcarriers"}, {"system", "bs_elements_x"}, {"system", "bs_elements_z"},
        {"system", "ris_elements_x"}, {"system", "ris_elements_z"}, {"system", "u_max"},
        {"system", "p_max_watts"}, {"system", "noise_dbm_per_hz"}, {"system", "bandwidth_hz"},
        {"system", "carrier_frequency_hz"}, {"system", "element_spacing_m"},
        {"system", "morph_range_wavelengths"}, {"system", "paths"},
        {"placement", "ris_position_m"}, {"placement", "user_disc_center_m"},
        {"placement", "user_disc_radius_m"}, {"placement", "pathloss_ref_db"},
        {"placement", "pathloss_exp_direct"}, {"placement", "pathloss_exp_ris"},
        {"power", "bs_static_dbm"}, {"power", "ris_static_watts"},
        {"power", "ris_per_element_watts"}, {"power", "amp_efficiency"},
        {"reward", "nu"},
        {"agent", "batch_size"}, {"agent", "discount"}, {"agent", "soft_tau"},
        {"agent", "lr_actor"}, {"agent", "lr_critic"}, {"agent", "lr_meta"},
        {"agent", "entropy_weight"}, {"agent", "grad_clip"}, {"agent", "replay_capacity"},
        {"agent", "actor_hidden"}, {"agent", "critic_hidden"}, {"agent", "meta_hidden"},
        {"run", "episodes"}, {"run", "steps_per_episode"}, {"run", "grad_steps"},
        {"run", "seeds"}, {"run", "lr_grid"}, {"run", "user_grid"}};
    return fields;
}

// Environment overrides: FIMSTAR_<SECTION>_<KEY>=<json value>, e.g.
// FIMSTAR_RUN_EPISODES=300 or FIMSTAR_AGENT_LR_ACTOR=0.01.
inline void apply_env_overrides(ScenarioConfig& c, const char* prefix = "FIMSTAR_") {
    for (const config_detail::Field& f : config_fields()) {
        std::string name = std::string(prefix) + f.section + "_" + f.key;
        std::transform(name.begin(), name.end(), name.begin(),
                       [](unsigned char ch) { return std::toupper(ch); });
        const char* raw = std::getenv(name.c_str());
        if (raw == nullptr) continue;
        json value;
        try {
            value = json::parse(raw);
        } catch (const json::exception&) {
            value = std::string(raw);  // bare strings are allowed
        }
        config_detail::set_field(c, f, value);
    }
}

// Empty or whitespace-only files yield the default (full parameter table)
// configuration. Validation failures name the offending field.
inline ScenarioConfig load_config(const std::string& path, bool env_overrides = true) {
    std::ifstream in(path);
    require(in.good(), "cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    json j = json::object();
    const bool blank = std::all_of(text.begin(), text.end(),
                                   [](unsigned char ch) { return std::isspace(ch); });
    if (!blank) {
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            throw std::invalid_argument("config parse error in " + path + ": " + e.what());
        }
    }
    ScenarioConfig c = config_from_json(j);
    if (env_overrides) apply_env_overrides(c);
    c.validate();
    return c;
}

inline void save_config(const std::string& path, const ScenarioConfig& c) {
    std::ofstream out(path);
    require(out.good(), "cannot open config file for writing: " + path);
    out << config_to_json(c).dump(2) << "\n";
}

}  // namespace fimstar
