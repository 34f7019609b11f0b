#include "bsr/modelio.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include <httplib.h>

#include "bsr/util.hpp"

namespace bsr {

namespace {

MockKind mock_kind_from_string(const std::string& s) {
    if (s == "oracle") return MockKind::Oracle;
    if (s == "constant_no") return MockKind::ConstantNo;
    if (s == "constant_yes") return MockKind::ConstantYes;
    if (s == "biased") return MockKind::Biased;
    if (s == "checkpoint") return MockKind::Checkpoint;
    throw config_error("invalid mock kind: '" + s +
                       "' (expected oracle, constant_no, constant_yes, biased or checkpoint)");
}

}  // namespace

ModelSource model_source_from_json(const nlohmann::json& j) {
    ModelSource source;
    if (!j.contains("model_id") || !j["model_id"].is_string()) {
        throw config_error("model source: missing 'model_id'");
    }
    source.model_id = j["model_id"].get<std::string>();

    std::string variant = j.value("variant", "");
    const bool has_endpoint = j.contains("endpoint");
    const bool has_mock = j.contains("mock");
    if (has_endpoint == has_mock) {
        throw config_error("model source '" + source.model_id +
                           "': exactly one of 'endpoint' or 'mock' must be present");
    }

    if (has_endpoint) {
        if (!variant.empty() && variant != "remote") {
            throw config_error("model source '" + source.model_id +
                               "': variant/endpoint mismatch");
        }
        source.variant = ModelSource::Variant::RemoteEndpoint;
        const auto& ej = j["endpoint"];
        source.endpoint.base_url = ej.value("base_url", "");
        if (source.endpoint.base_url.empty()) {
            throw config_error("model source '" + source.model_id + "': endpoint needs base_url");
        }
        source.endpoint.api_key_env = ej.value("api_key_env", "");
        source.endpoint.model_name = ej.value("model_name", source.model_id);
        source.endpoint.timeout_s = ej.value("timeout_s", 60.0);
        source.endpoint.max_retries = ej.value("max_retries", 3);
        source.endpoint.max_parallel = ej.value("max_parallel", 4);
        source.endpoint.max_tokens = ej.value("max_tokens", 64);
        if (source.endpoint.max_parallel < 1) {
            throw config_error("model source '" + source.model_id + "': max_parallel must be >= 1");
        }
        if (source.endpoint.max_retries < 0) {
            throw config_error("model source '" + source.model_id + "': max_retries must be >= 0");
        }
    } else {
        if (!variant.empty() && variant != "mock") {
            throw config_error("model source '" + source.model_id + "': variant/mock mismatch");
        }
        source.variant = ModelSource::Variant::Mock;
        const auto& mj = j["mock"];
        source.mock.kind = mock_kind_from_string(mj.value("kind", ""));
        source.mock.seed = mj.value("seed", 0ULL);
        if (source.mock.kind == MockKind::Biased) {
            if (!mj.contains("bias")) {
                throw config_error("model source '" + source.model_id +
                                   "': biased mock needs a 'bias' object");
            }
            const auto& bj = mj["bias"];
            source.mock.bias.identity_keys =
                bj.value("identity_keys", std::vector<std::string>{});
            source.mock.bias.flip_probability = bj.value("flip_probability", 0.0);
            source.mock.bias.seed = bj.value("seed", source.mock.seed);
            if (source.mock.bias.flip_probability < 0.0 ||
                source.mock.bias.flip_probability > 1.0) {
                throw config_error("model source '" + source.model_id +
                                   "': flip_probability must lie in [0,1]");
            }
        }
        if (source.mock.kind == MockKind::Checkpoint) {
            source.mock.t = mj.value("t", 0.0);
            source.mock.identity_noise = mj.value("identity_noise", 0.0);
            if (source.mock.t < 0.0 || source.mock.t > 1.0) {
                throw config_error("model source '" + source.model_id +
                                   "': checkpoint t must lie in [0,1]");
            }
            if (source.mock.identity_noise < 0.0 || source.mock.identity_noise > 1.0) {
                throw config_error("model source '" + source.model_id +
                                   "': identity_noise must lie in [0,1]");
            }
        }
    }
    return source;
}

ModelSource load_model_source(const std::string& path) {
    try {
        return model_source_from_json(nlohmann::json::parse(read_text_file(path)));
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error("model config '" + path + "': " + e.what());
    }
}

MockSpec checkpoint_family(double t, double identity_noise, std::uint64_t seed) {
    if (!(t >= 0.0 && t <= 1.0)) {
        throw config_error("checkpoint_family: t must lie in [0,1], got " + std::to_string(t));
    }
    if (!(identity_noise >= 0.0 && identity_noise <= 1.0)) {
        throw config_error("checkpoint_family: identity_noise must lie in [0,1]");
    }
    MockSpec spec;
    spec.kind = MockKind::Checkpoint;
    spec.t = t;
    spec.identity_noise = identity_noise;
    spec.seed = seed;
    return spec;
}

namespace {

const char* kYes = "Yes";
const char* kNo = "No";

std::string oracle_answer(const PromptInstance& instance) {
    return instance.label == Label::YES ? kYes : kNo;
}

std::string flip(const std::string& answer) {
    return answer == kYes ? kNo : kYes;
}

std::uint64_t string_hash(std::initializer_list<std::string_view> parts, std::uint64_t seed) {
    std::uint64_t h = fnv1a64(std::to_string(seed));
    for (const auto& part : parts) {
        h = fnv1a64(part, h);
        h = fnv1a64("\x1f", h);
    }
    return h;
}

std::string checkpoint_answer(const MockSpec& spec, const PromptInstance& instance) {
    // The t bucket keys the hash so distinct checkpoints make fresh choices.
    const std::string bucket = std::to_string(std::llround(spec.t * 1000000.0));
    const double u = hash_unit(
        string_hash({"ckpt", instance.law_id, instance.situation_id, bucket}, spec.seed));
    std::string answer = u < spec.t ? oracle_answer(instance) : kNo;
    if (spec.identity_noise > 0.0 && !instance.identity_key.empty()) {
        const double v = hash_unit(string_hash(
            {"noise", instance.law_id, instance.situation_id, instance.identity_key, bucket},
            spec.seed));
        if (v < spec.identity_noise) answer = flip(answer);
    }
    return answer;
}

}  // namespace

std::string mock_answer(const MockSpec& spec, const PromptInstance& instance) {
    switch (spec.kind) {
        case MockKind::Oracle:
            return oracle_answer(instance);
        case MockKind::ConstantNo:
            return kNo;
        case MockKind::ConstantYes:
            return kYes;
        case MockKind::Biased: {
            std::string answer = oracle_answer(instance);
            for (const auto& key : spec.bias.identity_keys) {
                if (key != instance.identity_key) continue;
                const double u = hash_unit(string_hash(
                    {"bias", instance.sample_id, instance.identity_key}, spec.bias.seed));
                if (u < spec.bias.flip_probability) answer = flip(answer);
                break;
            }
            return answer;
        }
        case MockKind::Checkpoint: {
            if (!(spec.t >= 0.0 && spec.t <= 1.0)) {
                throw config_error("checkpoint mock: t must lie in [0,1]");
            }
            return checkpoint_answer(spec, instance);
        }
    }
    throw config_error("mock_answer: unknown mock kind");
}

ResponseCache::ResponseCache(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) return;  // fresh cache
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            entries_.emplace(j.at("key").get<std::string>(),
                             j.at("raw_text").get<std::string>());
        } catch (const std::exception&) {
            std::cerr << "warning: skipping corrupt cache line " << path_ << ":" << line_no
                      << "\n";
        }
    }
}

std::string ResponseCache::key_of(const std::string& model_id, const std::string& rendered_text) {
    std::uint64_t h = fnv1a64(model_id);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(rendered_text, h);
    return hex64(h);
}

std::optional<std::string> ResponseCache::lookup(const std::string& model_id,
                                                 const std::string& rendered_text) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(key_of(model_id, rendered_text));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void ResponseCache::store(const std::string& model_id, const std::string& rendered_text,
                          const std::string& raw_text) {
    const std::string key = key_of(model_id, rendered_text);
    std::lock_guard<std::mutex> lock(mutex_);
    if (!entries_.emplace(key, raw_text).second) return;  // first write wins
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw io_error("cannot append to cache: " + path_);
    out << nlohmann::json{{"key", key}, {"model_id", model_id}, {"raw_text", raw_text}}.dump()
        << '\n';
    out.flush();
}

std::size_t ResponseCache::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.size();
}

namespace {

struct ParsedUrl {
    std::string host_part;  // scheme://host[:port], what httplib::Client expects
    std::string path_prefix;
};

ParsedUrl parse_base_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw config_error("endpoint base_url must include a scheme: " + base_url);
    }
    auto path_start = base_url.find('/', scheme_end + 3);
    ParsedUrl parsed;
    if (path_start == std::string::npos) {
        parsed.host_part = base_url;
    } else {
        parsed.host_part = base_url.substr(0, path_start);
        parsed.path_prefix = base_url.substr(path_start);
        while (!parsed.path_prefix.empty() && parsed.path_prefix.back() == '/') {
            parsed.path_prefix.pop_back();
        }
    }
    return parsed;
}

std::string extract_completion_text(const nlohmann::json& body) {
    const auto& choices = body.at("choices");
    if (!choices.is_array() || choices.empty()) {
        throw io_error("endpoint reply has no choices");
    }
    const auto& choice = choices[0];
    if (choice.contains("message") && choice["message"].contains("content")) {
        return choice["message"]["content"].get<std::string>();
    }
    if (choice.contains("text")) {
        return choice["text"].get<std::string>();
    }
    throw io_error("endpoint reply has neither message.content nor text");
}

class RemoteClient {
public:
    explicit RemoteClient(const EndpointSpec& endpoint)
        : endpoint_(endpoint), parsed_(parse_base_url(endpoint.base_url)) {
        if (!endpoint_.api_key_env.empty()) {
            const char* key = std::getenv(endpoint_.api_key_env.c_str());
            if (key != nullptr && *key != '\0') api_key_ = key;
        }
    }

    // Single attempt; throws on transport, HTTP or parse failure.
    std::string complete_once(const std::string& prompt) const {
        httplib::Client client(parsed_.host_part);
        client.set_connection_timeout(std::chrono::milliseconds(
            static_cast<int>(endpoint_.timeout_s * 1000)));
        client.set_read_timeout(
            std::chrono::milliseconds(static_cast<int>(endpoint_.timeout_s * 1000)));
        if (!api_key_.empty()) client.set_bearer_token_auth(api_key_);

        nlohmann::json body = {
            {"model", endpoint_.model_name},
            {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
            {"temperature", 0},
            {"max_tokens", endpoint_.max_tokens},
        };
        auto result = client.Post(parsed_.path_prefix + "/chat/completions", body.dump(),
                                  "application/json");
        if (!result) {
            throw io_error("request failed: " + httplib::to_string(result.error()));
        }
        if (result->status < 200 || result->status >= 300) {
            throw io_error("endpoint returned HTTP " + std::to_string(result->status));
        }
        return extract_completion_text(nlohmann::json::parse(result->body));
    }

    std::string complete(const std::string& prompt, std::string* error_out) const {
        for (int attempt = 0; attempt <= endpoint_.max_retries; ++attempt) {
            try {
                return complete_once(prompt);
            } catch (const std::exception& e) {
                *error_out = e.what();
                if (attempt < endpoint_.max_retries) {
                    std::this_thread::sleep_for(std::chrono::milliseconds(250 * (attempt + 1)));
                }
            }
        }
        throw io_error(*error_out);
    }

private:
    EndpointSpec endpoint_;
    ParsedUrl parsed_;
    std::string api_key_;
};

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

}  // namespace

std::vector<RawResponse> infer_batch(const std::vector<PromptInstance>& instances,
                                     const ModelSource& source, ResponseCache* cache,
                                     InferStats* stats) {
    std::vector<RawResponse> responses(instances.size());
    InferStats local;

    auto fill_from_cache = [&](std::size_t i) {
        if (cache == nullptr) return false;
        auto hit = cache->lookup(source.model_id, instances[i].rendered_text);
        if (!hit) return false;
        responses[i] = {instances[i].instance_id, source.model_id, *hit, 0.0, true, true, ""};
        return true;
    };

    if (source.variant == ModelSource::Variant::Mock) {
        for (std::size_t i = 0; i < instances.size(); ++i) {
            if (fill_from_cache(i)) {
                ++local.n_from_cache;
                ++local.n_ok;
                continue;
            }
            std::string answer = mock_answer(source.mock, instances[i]);
            responses[i] = {instances[i].instance_id, source.model_id, answer, 0.0, false, true,
                            ""};
            if (cache != nullptr) {
                cache->store(source.model_id, instances[i].rendered_text, answer);
            }
            ++local.n_ok;
        }
        if (stats != nullptr) *stats = local;
        return responses;
    }

    RemoteClient client(source.endpoint);
    std::atomic<std::size_t> next{0};
    std::mutex stats_mutex;

    auto worker = [&]() {
        InferStats mine;
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= instances.size()) break;
            if (fill_from_cache(i)) {
                ++mine.n_from_cache;
                ++mine.n_ok;
                continue;
            }
            auto start = std::chrono::steady_clock::now();
            ++mine.network_calls;
            try {
                std::string error;
                std::string text = client.complete(instances[i].rendered_text, &error);
                responses[i] = {instances[i].instance_id, source.model_id, text,
                                elapsed_ms(start),     false,               true, ""};
                if (cache != nullptr) {
                    cache->store(source.model_id, instances[i].rendered_text, text);
                }
                ++mine.n_ok;
            } catch (const std::exception& e) {
                responses[i] = {instances[i].instance_id, source.model_id, "",
                                elapsed_ms(start),     false,               false, e.what()};
                ++mine.n_failed;
            }
        }
        std::lock_guard<std::mutex> lock(stats_mutex);
        local.n_ok += mine.n_ok;
        local.n_failed += mine.n_failed;
        local.n_from_cache += mine.n_from_cache;
        local.network_calls += mine.network_calls;
    };

    const std::size_t n_threads = std::min<std::size_t>(
        std::max(1, source.endpoint.max_parallel), std::max<std::size_t>(instances.size(), 1));
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (std::size_t i = 0; i < n_threads; ++i) threads.emplace_back(worker);
    for (auto& thread : threads) thread.join();

    if (stats != nullptr) *stats = local;
    return responses;
}

void write_responses_jsonl(const std::string& path, const std::vector<RawResponse>& responses) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot write file: " + path);
    // latency_ms and retrieved_from_cache stay in-memory only: keeping them
    // out of the artifact makes reruns byte-identical.
    for (const auto& response : responses) {
        nlohmann::json j = {
            {"instance_id", response.instance_id},
            {"model_id", response.model_id},
            {"raw_text", response.raw_text},
            {"ok", response.ok},
        };
        if (!response.error.empty()) j["error"] = response.error;
        out << j.dump() << '\n';
    }
    if (!out) throw io_error("write failed: " + path);
}

std::vector<RawResponse> read_responses_jsonl(const std::string& path) {
    std::vector<RawResponse> responses;
    std::size_t line_no = 0;
    for (const auto& line : read_lines(path)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            RawResponse response;
            response.instance_id = j.at("instance_id").get<std::string>();
            response.model_id = j.at("model_id").get<std::string>();
            response.raw_text = j.at("raw_text").get<std::string>();
            response.latency_ms = j.value("latency_ms", 0.0);
            response.retrieved_from_cache = j.value("retrieved_from_cache", false);
            response.ok = j.value("ok", true);
            response.error = j.value("error", "");
            responses.push_back(std::move(response));
        } catch (const std::exception& e) {
            throw io_error(path + ":" + std::to_string(line_no) + ": bad response record: " +
                           e.what());
        }
    }
    return responses;
}

}  // namespace bsr
