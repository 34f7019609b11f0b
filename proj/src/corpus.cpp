#include "bsr/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "bsr/util.hpp"

namespace bsr {

namespace {

constexpr const char* kLawSlot = "<LAW>";
constexpr const char* kNameSlot = "<NAME>";
constexpr const char* kIdentitySlot = "<IDENTITY>";
constexpr const char* kSituationSlot = "<SITUATION>";

void substitute_once(std::string& text, const char* slot, const std::string& value) {
    std::size_t pos = text.find(slot);
    if (pos == std::string::npos) {
        throw config_error(std::string("template input_pattern is missing slot ") + slot);
    }
    text.replace(pos, std::strlen(slot), value);
}

// Drops the <IDENTITY> slot together with one adjacent comma on each side,
// then leaves a single space in its place.
std::string remove_identity_slot(std::string pattern) {
    std::size_t pos = pattern.find(kIdentitySlot);
    if (pos == std::string::npos) {
        throw config_error(std::string("template input_pattern is missing slot ") + kIdentitySlot);
    }
    std::size_t begin = pos;
    std::size_t end = pos + std::strlen(kIdentitySlot);
    while (begin > 0 && pattern[begin - 1] == ' ') --begin;
    if (begin > 0 && pattern[begin - 1] == ',') --begin;
    while (end < pattern.size() && pattern[end] == ' ') ++end;
    if (end < pattern.size() && pattern[end] == ',') ++end;
    pattern.replace(begin, end - begin, " ");
    return pattern;
}

// Cleans up artifacts of clause removal: doubled commas and spaces, and
// stray spaces before punctuation. Operates on the pattern, not on slot
// contents, so law and situation texts pass through untouched.
std::string normalize_pattern_spacing(const std::string& pattern) {
    std::string out;
    out.reserve(pattern.size());
    for (char c : pattern) {
        if (c == ' ' && !out.empty() && out.back() == ' ') continue;
        if ((c == ',' || c == '.' || c == ';' || c == '!' || c == '?') && !out.empty() &&
            out.back() == ' ') {
            out.pop_back();
        }
        if (c == ',' && !out.empty() && out.back() == ',') continue;
        out.push_back(c);
    }
    while (!out.empty() && out.front() == ' ') out.erase(out.begin());
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

// Canonical roster order for generation output, independent of config order.
std::vector<const IdentityRoster*> rosters_in_canonical_order(const CorpusConfig& config) {
    std::vector<const IdentityRoster*> ordered;
    ordered.reserve(config.rosters.size());
    for (const auto& roster : config.rosters) ordered.push_back(&roster);
    std::sort(ordered.begin(), ordered.end(), [](const IdentityRoster* a, const IdentityRoster* b) {
        return static_cast<int>(a->identity_type) < static_cast<int>(b->identity_type);
    });
    return ordered;
}

void check_rendered_invariants(const PromptInstance& instance, const LawEntry& law,
                               const Situation& situation) {
    if (count_occurrences(instance.rendered_text, law.body) != 1) {
        throw config_error("instance '" + instance.instance_id +
                           "': law body does not appear exactly once in the rendered prompt");
    }
    if (count_occurrences(instance.rendered_text, situation.text) != 1) {
        throw config_error("instance '" + instance.instance_id +
                           "': situation text does not appear exactly once in the rendered prompt");
    }
}

}  // namespace

std::string render_prompt(const LawEntry& law, const Situation& situation,
                          const Identity* identity, const std::string& name,
                          const PromptTemplate& tmpl) {
    std::string input;
    if (identity != nullptr) {
        input = tmpl.input_pattern;
        substitute_once(input, kIdentitySlot, identity->descriptor);
        substitute_once(input, kNameSlot, name);
    } else {
        input = normalize_pattern_spacing(remove_identity_slot(tmpl.input_pattern));
        substitute_once(input, kNameSlot, "X");
    }
    substitute_once(input, kLawSlot, law.body);
    substitute_once(input, kSituationSlot, situation.text);

    std::string rendered;
    rendered.reserve(tmpl.instruction.size() + input.size() + tmpl.question.size() + 4);
    rendered += tmpl.instruction;
    rendered += "\n\n";
    rendered += input;
    rendered += "\n\n";
    rendered += tmpl.question;
    return rendered;
}

const std::string& pick_name(const Identity& identity, std::uint64_t seed,
                             const std::string& sample_id) {
    std::uint64_t h = fnv1a64(sample_id + "\x1f" + identity.identity_key,
                              fnv1a64(std::to_string(seed)));
    return identity.names[h % identity.names.size()];
}

Label label_of(const LawEntry& law, const Situation& situation) {
    for (const auto& law_id : situation.applicable_laws) {
        if (law_id == law.law_id) return Label::YES;
    }
    return Label::NO;
}

Dataset generate_with_id(const CorpusConfig& config) {
    return generate_with_id(config, config.seed);
}

Dataset generate_with_id(const CorpusConfig& config, std::uint64_t seed) {
    validate_config(config);
    auto rosters = rosters_in_canonical_order(config);

    Dataset dataset;
    std::size_t total_k = 0;
    for (const auto* roster : rosters) total_k += roster->identities.size();
    dataset.instances.reserve(config.laws.size() * config.situations.size() * total_k);
    dataset.samples.reserve(config.laws.size() * config.situations.size() * rosters.size());

    for (const auto& law : config.laws) {
        for (const auto& situation : config.situations) {
            const Label label = label_of(law, situation);
            for (const auto* roster : rosters) {
                const std::string type_name = to_string(roster->identity_type);
                Sample sample;
                sample.sample_id =
                    law.law_id + "." + situation.situation_id + "." + to_lower_ascii(type_name);
                sample.law_id = law.law_id;
                sample.situation_id = situation.situation_id;
                sample.identity_type = type_name;
                sample.instance_ids.reserve(roster->identities.size());

                for (const auto& identity : roster->identities) {
                    PromptInstance instance;
                    instance.instance_id = sample.sample_id + "." + identity.identity_key;
                    instance.sample_id = sample.sample_id;
                    instance.law_id = law.law_id;
                    instance.situation_id = situation.situation_id;
                    instance.identity_type = type_name;
                    instance.identity_key = identity.identity_key;
                    instance.label = label;
                    const std::string& name = pick_name(identity, seed, sample.sample_id);
                    instance.rendered_text =
                        render_prompt(law, situation, &identity, name, config.prompt_template);
                    check_rendered_invariants(instance, law, situation);
                    sample.instance_ids.push_back(instance.instance_id);
                    dataset.instances.push_back(std::move(instance));
                }
                dataset.samples.push_back(std::move(sample));
            }
        }
    }
    return dataset;
}

Dataset generate_without_id(const CorpusConfig& config) {
    validate_config(config);

    Dataset dataset;
    dataset.instances.reserve(config.laws.size() * config.situations.size());
    std::unordered_set<std::string> seen_texts;

    for (const auto& law : config.laws) {
        for (const auto& situation : config.situations) {
            PromptInstance instance;
            instance.instance_id = law.law_id + "." + situation.situation_id + ".noid";
            instance.law_id = law.law_id;
            instance.situation_id = situation.situation_id;
            instance.label = label_of(law, situation);
            instance.rendered_text =
                render_prompt(law, situation, nullptr, "", config.prompt_template);
            check_rendered_invariants(instance, law, situation);
            if (!seen_texts.insert(instance.rendered_text).second) continue;
            dataset.instances.push_back(std::move(instance));
        }
    }
    return dataset;
}

namespace {

std::size_t resolve_train_count(const SplitSpec& spec, std::size_t n) {
    if (spec.train_count) {
        std::size_t train = *spec.train_count;
        if (train > n) {
            throw config_error("split_spec: train_count " + std::to_string(train) +
                               " exceeds dataset size " + std::to_string(n));
        }
        if (spec.validation_count && *spec.validation_count + train != n) {
            throw config_error("split_spec: train_count + validation_count must equal " +
                               std::to_string(n));
        }
        return train;
    }
    double fraction = spec.train_fraction.value_or(0.875);
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw config_error("split_spec: train_fraction must lie in (0,1), got " +
                           std::to_string(fraction));
    }
    return static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(n)));
}

}  // namespace

SplitResult split_dataset(const Dataset& dataset, const SplitSpec& spec, std::uint64_t seed) {
    SplitResult result;
    const std::uint64_t shuffle_seed = hash_mix(seed, fnv1a64("split"));

    if (!dataset.samples.empty()) {
        const std::size_t n = dataset.samples.size();
        const std::size_t n_train = resolve_train_count(spec, n);

        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        stable_shuffle(order, shuffle_seed);

        std::vector<bool> in_train(n, false);
        for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = true;

        std::unordered_map<std::string, bool> sample_in_train;
        sample_in_train.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Sample& sample = dataset.samples[i];
            sample_in_train.emplace(sample.sample_id, in_train[i]);
            (in_train[i] ? result.train : result.validation).samples.push_back(sample);
        }
        for (const auto& instance : dataset.instances) {
            auto it = sample_in_train.find(instance.sample_id);
            if (it == sample_in_train.end()) {
                throw eval_error("instance '" + instance.instance_id +
                                 "' references unknown sample '" + instance.sample_id + "'");
            }
            (it->second ? result.train : result.validation).instances.push_back(instance);
        }
    } else {
        const std::size_t n = dataset.instances.size();
        const std::size_t n_train = resolve_train_count(spec, n);

        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        stable_shuffle(order, shuffle_seed);

        std::vector<bool> in_train(n, false);
        for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = true;
        for (std::size_t i = 0; i < n; ++i) {
            (in_train[i] ? result.train : result.validation)
                .instances.push_back(dataset.instances[i]);
        }
    }
    return result;
}

void write_instances_jsonl(const std::string& path, const std::vector<PromptInstance>& instances) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot write file: " + path);
    for (const auto& instance : instances) {
        out << to_json(instance).dump() << '\n';
    }
    if (!out) throw io_error("write failed: " + path);
}

std::vector<PromptInstance> read_instances_jsonl(const std::string& path) {
    std::vector<PromptInstance> instances;
    std::size_t line_no = 0;
    for (const auto& line : read_lines(path)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            instances.push_back(prompt_instance_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw io_error(path + ":" + std::to_string(line_no) + ": bad instance record: " +
                           e.what());
        }
    }
    return instances;
}

void write_samples_jsonl(const std::string& path, const std::vector<Sample>& samples) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot write file: " + path);
    for (const auto& sample : samples) {
        out << to_json(sample).dump() << '\n';
    }
    if (!out) throw io_error("write failed: " + path);
}

std::vector<Sample> read_samples_jsonl(const std::string& path) {
    std::vector<Sample> samples;
    std::size_t line_no = 0;
    for (const auto& line : read_lines(path)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            samples.push_back(sample_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw io_error(path + ":" + std::to_string(line_no) + ": bad sample record: " +
                           e.what());
        }
    }
    return samples;
}

}  // namespace bsr
