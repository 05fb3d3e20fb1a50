#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ecoroute {

inline constexpr const char* kToolVersion = "0.1.0";

// Input fingerprints recorded before a run; a completed run directory always
// carries its manifest, making the outputs reproducible from it.
struct RunManifest {
    std::string tool_version = kToolVersion;
    std::string scenario_config_json;
    struct InputFile {
        std::string role; // network, demand, rates, fleet, nodes
        std::string path;
        std::uint64_t fnv1a64 = 0;
    };
    std::vector<InputFile> inputs;
    std::vector<std::uint64_t> seeds;
    std::string out_dir;

    std::string to_json() const;
    static RunManifest from_json(const std::string& text);
};

std::uint64_t hash_file(const std::string& path);

} // namespace ecoroute
