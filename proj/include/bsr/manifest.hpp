#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace bsr {

inline constexpr const char* kToolVersion = "0.1.0";

// Written next to every command's artifacts so a run can be traced back to
// the exact config, seed and tool build that produced it.
struct RunManifest {
    std::string run_id;
    std::string command;
    std::string created_at;   // ISO-8601 UTC
    std::string tool_version = kToolVersion;
    std::string config_hash;  // hash of the config file bytes, empty if no config involved
    std::string model_id;     // empty when the command does not touch a model
    std::uint64_t seed = 0;
    nlohmann::json outputs = nlohmann::json::object();  // artifact name -> path
    nlohmann::json details = nlohmann::json::object();  // command-specific numbers

    nlohmann::json to_json() const {
        nlohmann::json j = {
            {"run_id", run_id},       {"command", command},
            {"created_at", created_at}, {"tool_version", tool_version},
            {"seed", seed},           {"outputs", outputs},
            {"details", details},
        };
        if (!config_hash.empty()) j["config_hash"] = config_hash;
        if (!model_id.empty()) j["model_id"] = model_id;
        return j;
    }
};

// Defined in manifest.cpp: fills run_id/created_at and hashes the config bytes.
RunManifest make_manifest(const std::string& command, std::uint64_t seed,
                          const std::string& config_bytes);
void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace bsr
