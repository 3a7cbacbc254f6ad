#include "pass/manifest.hpp"

#include <cstdio>
#include <nlohmann/json.hpp>

#include "pass/config.hpp"

namespace pass::manifest {

std::string digest(const std::string& canonical) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string config_digest(const nlohmann::json& config, std::uint64_t seed) {
    return digest(config.dump() + "#" + std::to_string(seed));
}

nlohmann::json run_manifest(const nlohmann::json& config, std::uint64_t seed,
                            const std::vector<std::string>& outputs) {
    return nlohmann::json{
        {"config_digest", config_digest(config, seed)},
        {"master_seed", seed},
        {"version", config::kVersion},
        {"outputs", outputs},
    };
}

}  // namespace pass::manifest
