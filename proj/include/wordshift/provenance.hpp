#pragma once

#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "wordshift/common.hpp"

namespace wordshift {

// Flat resolved configuration of one run; serialized into every output's
// provenance sidecar. Contains no timestamps so reruns are byte-identical.
struct RunConfig {
    std::map<std::string, std::string> values;

    void set(const std::string& key, const std::string& v) { values[key] = v; }
    void set(const std::string& key, uint64_t v) { values[key] = std::to_string(v); }
    void set(const std::string& key, int v) { values[key] = std::to_string(v); }
    void set(const std::string& key, double v) { values[key] = format_double(v); }
    void set(const std::string& key, bool v) { values[key] = v ? "true" : "false"; }
};

inline void write_sidecar(const std::string& artifact_path, const std::string& subcommand,
                          const RunConfig& cfg, const std::vector<std::string>& inputs,
                          const std::vector<std::string>& outputs) {
    nlohmann::ordered_json j;
    j["tool"] = "wordshift";
    j["subcommand"] = subcommand;
    nlohmann::ordered_json jc = nlohmann::ordered_json::object();
    for (const auto& [k, v] : cfg.values) jc[k] = v;
    j["config"] = jc;
    nlohmann::ordered_json ji = nlohmann::ordered_json::array();
    for (const auto& path : inputs) {
        nlohmann::ordered_json e;
        e["path"] = path;
        e["fnv1a64"] = hex64(fnv1a64_file(path));
        ji.push_back(e);
    }
    j["inputs"] = ji;
    j["outputs"] = outputs;

    const std::string path = artifact_path + ".meta.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write sidecar: " + path);
    out << j.dump(2) << '\n';
}

inline nlohmann::json load_sidecar(const std::string& artifact_path) {
    const std::string path = artifact_path + ".meta.json";
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read sidecar: " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

inline RunConfig sidecar_config(const nlohmann::json& sidecar) {
    RunConfig cfg;
    for (const auto& [k, v] : sidecar.at("config").items())
        cfg.values[k] = v.get<std::string>();
    return cfg;
}

}  // namespace wordshift
