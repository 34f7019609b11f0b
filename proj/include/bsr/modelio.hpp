#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "bsr/types.hpp"

namespace bsr {

enum class MockKind { Oracle, ConstantNo, ConstantYes, Biased, Checkpoint };

struct BiasSpec {
    std::vector<std::string> identity_keys;  // identities whose answers may flip
    double flip_probability = 0.0;
    std::uint64_t seed = 0;
};

struct MockSpec {
    MockKind kind = MockKind::Oracle;
    BiasSpec bias;                // Biased only
    double t = 0.0;               // Checkpoint progress in [0,1]
    double identity_noise = 0.0;  // Checkpoint: per-instance flip probability
    std::uint64_t seed = 0;
};

struct EndpointSpec {
    std::string base_url;
    std::string api_key_env;  // name of the env var holding the key
    std::string model_name;
    double timeout_s = 60.0;
    int max_retries = 3;
    int max_parallel = 4;
    int max_tokens = 64;
};

struct ModelSource {
    enum class Variant { RemoteEndpoint, Mock };
    Variant variant = Variant::Mock;
    std::string model_id;
    EndpointSpec endpoint;  // RemoteEndpoint only
    MockSpec mock;          // Mock only
};

struct RawResponse {
    std::string instance_id;
    std::string model_id;
    std::string raw_text;
    double latency_ms = 0.0;
    bool retrieved_from_cache = false;
    bool ok = true;
    std::string error;
};

ModelSource model_source_from_json(const nlohmann::json& j);
ModelSource load_model_source(const std::string& path);

// Checkpoint-family mock: t = 0 is the all-NO extreme, t = 1 the oracle,
// intermediate t answers correctly with probability t (hash-decided per
// law-situation pair, so identities inside a sample move together unless
// identity_noise is set).
MockSpec checkpoint_family(double t, double identity_noise = 0.0, std::uint64_t seed = 0);

// Pure function: the mock's answer for one instance.
std::string mock_answer(const MockSpec& spec, const PromptInstance& instance);

// Append-only JSON-lines response cache keyed by (model_id, rendered prompt).
// Corrupt lines are skipped with a warning on stderr. Thread-safe.
class ResponseCache {
public:
    explicit ResponseCache(std::string path);

    std::optional<std::string> lookup(const std::string& model_id,
                                      const std::string& rendered_text) const;
    void store(const std::string& model_id, const std::string& rendered_text,
               const std::string& raw_text);

    std::size_t size() const;
    static std::string key_of(const std::string& model_id, const std::string& rendered_text);

private:
    std::string path_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, std::string> entries_;
};

struct InferStats {
    std::size_t n_ok = 0;
    std::size_t n_failed = 0;
    std::size_t n_from_cache = 0;
    std::size_t network_calls = 0;
};

// One RawResponse per instance, order-aligned with the input. The cache, when
// provided, is consulted before any model call and extended with fresh
// responses. Failures are recorded on the response, never thrown.
std::vector<RawResponse> infer_batch(const std::vector<PromptInstance>& instances,
                                     const ModelSource& source, ResponseCache* cache,
                                     InferStats* stats = nullptr);

void write_responses_jsonl(const std::string& path, const std::vector<RawResponse>& responses);
std::vector<RawResponse> read_responses_jsonl(const std::string& path);

}  // namespace bsr
