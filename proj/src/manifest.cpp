#include "bsr/manifest.hpp"

#include "bsr/util.hpp"

namespace bsr {

RunManifest make_manifest(const std::string& command, std::uint64_t seed,
                          const std::string& config_bytes) {
    RunManifest manifest;
    manifest.command = command;
    manifest.seed = seed;
    manifest.created_at = iso8601_now();
    if (!config_bytes.empty()) manifest.config_hash = hex64(fnv1a64(config_bytes));
    std::uint64_t id = fnv1a64(command);
    id = hash_mix(id, seed);
    id = fnv1a64(manifest.created_at, id);
    if (!manifest.config_hash.empty()) id = fnv1a64(manifest.config_hash, id);
    manifest.run_id = command + "-" + hex64(id).substr(0, 12);
    return manifest;
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
    write_text_file(path, manifest.to_json().dump(2) + "\n");
}

}  // namespace bsr
