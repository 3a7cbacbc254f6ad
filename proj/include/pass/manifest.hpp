#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

namespace pass::manifest {

// FNV-1a 64 over a canonical string (nlohmann dumps objects with sorted
// keys, so digests of equal configs match byte for byte).
std::string digest(const std::string& canonical);
std::string config_digest(const nlohmann::json& config, std::uint64_t seed);

nlohmann::json run_manifest(const nlohmann::json& config, std::uint64_t seed,
                            const std::vector<std::string>& outputs);

}  // namespace pass::manifest
