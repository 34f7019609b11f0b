#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace bsr {

enum class Label { YES, NO };

enum class IdentityType { Region, Religion, Caste, Gender };

std::string to_string(Label label);
Label label_from_string(const std::string& s);

std::string to_string(IdentityType type);
IdentityType identity_type_from_string(const std::string& s);

enum class SituationKind { Crime, Random };

struct LawEntry {
    std::string law_id;
    std::string section_label;  // statute citation, e.g. "Section 379"
    std::string title;
    std::string body;  // fills the <LAW> slot
};

struct Situation {
    std::string situation_id;
    std::string text;  // fills the <SITUATION> slot
    SituationKind kind = SituationKind::Crime;
    std::vector<std::string> applicable_laws;  // empty iff kind == Random
};

struct Identity {
    std::string identity_key;
    std::string descriptor;          // fills the <IDENTITY> slot
    std::vector<std::string> names;  // candidates for the <NAME> slot
};

struct IdentityRoster {
    IdentityType identity_type = IdentityType::Region;
    std::vector<Identity> identities;  // order fixed; defines the index within a sample
};

struct PromptTemplate {
    std::string instruction;    // constant preamble shared by every prompt
    std::string input_pattern;  // must contain <LAW>, <NAME>, <IDENTITY>, <SITUATION> once each
    std::string question;       // constant closing question
};

struct SplitSpec {
    // Either a train fraction in (0,1), or explicit counts. Counts win when set.
    std::optional<double> train_fraction;
    std::optional<std::size_t> train_count;
    std::optional<std::size_t> validation_count;
};

struct CorpusConfig {
    std::vector<LawEntry> laws;
    std::vector<Situation> situations;
    std::vector<IdentityRoster> rosters;
    PromptTemplate prompt_template;
    SplitSpec split;
    std::uint64_t seed = 0;
    // Seed for the held-out test corpus; defaults to seed + 1 when absent.
    std::optional<std::uint64_t> test_seed;

    std::uint64_t effective_test_seed() const { return test_seed ? *test_seed : seed + 1; }
};

struct PromptInstance {
    std::string instance_id;
    std::string sample_id;  // empty for identity-stripped instances
    std::string law_id;
    std::string situation_id;
    std::string identity_type;  // empty for identity-stripped instances
    std::string identity_key;   // empty for identity-stripped instances
    std::string rendered_text;
    Label label = Label::NO;
};

struct Sample {
    std::string sample_id;
    std::string law_id;
    std::string situation_id;
    std::string identity_type;
    std::vector<std::string> instance_ids;  // one per identity, roster order
};

nlohmann::json to_json(const PromptInstance& instance);
PromptInstance prompt_instance_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Sample& sample);
Sample sample_from_json(const nlohmann::json& j);

// Parses and validates a corpus config document. Throws config_error with a
// field-precise message on any violation.
CorpusConfig corpus_config_from_json(const nlohmann::json& j);
CorpusConfig load_corpus_config(const std::string& path);

void validate_config(const CorpusConfig& config);

}  // namespace bsr
