#include "ecoroute/manifest.hpp"

#include "ecoroute/csvio.hpp"
#include "ecoroute/rng.hpp"

#include <json.hpp>

namespace ecoroute {

using nlohmann::json;

std::uint64_t hash_file(const std::string& path) {
    return fnv1a64(read_file(path));
}

std::string RunManifest::to_json() const {
    json j;
    j["tool_version"] = tool_version;
    j["scenario_config"] = json::parse(scenario_config_json);
    json files = json::array();
    for (const auto& f : inputs) {
        json jf;
        jf["role"] = f.role;
        jf["path"] = f.path;
        jf["fnv1a64"] = f.fnv1a64;
        files.push_back(jf);
    }
    j["inputs"] = files;
    j["seeds"] = seeds;
    j["out_dir"] = out_dir;
    return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
    json j = json::parse(text);
    RunManifest m;
    m.tool_version = j.at("tool_version").get<std::string>();
    m.scenario_config_json = j.at("scenario_config").dump(2) + "\n";
    for (const auto& jf : j.at("inputs")) {
        InputFile f;
        f.role = jf.at("role").get<std::string>();
        f.path = jf.at("path").get<std::string>();
        f.fnv1a64 = jf.at("fnv1a64").get<std::uint64_t>();
        m.inputs.push_back(f);
    }
    m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    m.out_dir = j.at("out_dir").get<std::string>();
    return m;
}

} // namespace ecoroute
