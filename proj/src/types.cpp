#include "bsr/types.hpp"

#include <set>
#include <unordered_set>

#include "bsr/util.hpp"

namespace bsr {

std::string to_string(Label label) {
    return label == Label::YES ? "YES" : "NO";
}

Label label_from_string(const std::string& s) {
    if (s == "YES") return Label::YES;
    if (s == "NO") return Label::NO;
    throw config_error("invalid label: '" + s + "' (expected YES or NO)");
}

std::string to_string(IdentityType type) {
    switch (type) {
        case IdentityType::Region: return "Region";
        case IdentityType::Religion: return "Religion";
        case IdentityType::Caste: return "Caste";
        case IdentityType::Gender: return "Gender";
    }
    return "Region";
}

IdentityType identity_type_from_string(const std::string& s) {
    if (s == "Region") return IdentityType::Region;
    if (s == "Religion") return IdentityType::Religion;
    if (s == "Caste") return IdentityType::Caste;
    if (s == "Gender") return IdentityType::Gender;
    throw config_error("invalid identity_type: '" + s +
                       "' (expected Region, Religion, Caste or Gender)");
}

nlohmann::json to_json(const PromptInstance& instance) {
    nlohmann::json j = {
        {"instance_id", instance.instance_id},
        {"law_id", instance.law_id},
        {"situation_id", instance.situation_id},
        {"rendered_text", instance.rendered_text},
        {"label", to_string(instance.label)},
    };
    if (!instance.sample_id.empty()) j["sample_id"] = instance.sample_id;
    if (!instance.identity_type.empty()) j["identity_type"] = instance.identity_type;
    if (!instance.identity_key.empty()) j["identity_key"] = instance.identity_key;
    return j;
}

PromptInstance prompt_instance_from_json(const nlohmann::json& j) {
    PromptInstance instance;
    instance.instance_id = j.at("instance_id").get<std::string>();
    instance.law_id = j.at("law_id").get<std::string>();
    instance.situation_id = j.at("situation_id").get<std::string>();
    instance.rendered_text = j.at("rendered_text").get<std::string>();
    instance.label = label_from_string(j.at("label").get<std::string>());
    instance.sample_id = j.value("sample_id", "");
    instance.identity_type = j.value("identity_type", "");
    instance.identity_key = j.value("identity_key", "");
    return instance;
}

nlohmann::json to_json(const Sample& sample) {
    return {
        {"sample_id", sample.sample_id},
        {"law_id", sample.law_id},
        {"situation_id", sample.situation_id},
        {"identity_type", sample.identity_type},
        {"instance_ids", sample.instance_ids},
    };
}

Sample sample_from_json(const nlohmann::json& j) {
    Sample sample;
    sample.sample_id = j.at("sample_id").get<std::string>();
    sample.law_id = j.at("law_id").get<std::string>();
    sample.situation_id = j.at("situation_id").get<std::string>();
    sample.identity_type = j.at("identity_type").get<std::string>();
    sample.instance_ids = j.at("instance_ids").get<std::vector<std::string>>();
    return sample;
}

namespace {

std::string require_string(const nlohmann::json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j[key].is_string()) {
        throw config_error(where + ": missing or non-string field '" + key + "'");
    }
    return j[key].get<std::string>();
}

void check_id(const std::string& id, const std::string& where) {
    if (id.empty()) throw config_error(where + ": empty id");
    for (char c : id) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '_' || c == '-';
        if (!ok) {
            throw config_error(where + ": id '" + id +
                               "' contains characters outside [A-Za-z0-9_-]");
        }
    }
}

}  // namespace

CorpusConfig corpus_config_from_json(const nlohmann::json& j) {
    CorpusConfig config;

    if (!j.contains("laws") || !j["laws"].is_array()) {
        throw config_error("config: missing 'laws' array");
    }
    for (const auto& lj : j["laws"]) {
        LawEntry law;
        law.law_id = require_string(lj, "law_id", "laws[]");
        law.section_label = require_string(lj, "section_label", "law '" + law.law_id + "'");
        law.title = require_string(lj, "title", "law '" + law.law_id + "'");
        law.body = require_string(lj, "body", "law '" + law.law_id + "'");
        config.laws.push_back(std::move(law));
    }

    if (!j.contains("situations") || !j["situations"].is_array()) {
        throw config_error("config: missing 'situations' array");
    }
    for (const auto& sj : j["situations"]) {
        Situation situation;
        situation.situation_id = require_string(sj, "situation_id", "situations[]");
        const std::string where = "situation '" + situation.situation_id + "'";
        situation.text = require_string(sj, "text", where);
        std::string kind = require_string(sj, "kind", where);
        if (kind == "crime") {
            situation.kind = SituationKind::Crime;
        } else if (kind == "random") {
            situation.kind = SituationKind::Random;
        } else {
            throw config_error(where + ": kind must be 'crime' or 'random', got '" + kind + "'");
        }
        if (sj.contains("applicable_laws")) {
            situation.applicable_laws = sj["applicable_laws"].get<std::vector<std::string>>();
        }
        config.situations.push_back(std::move(situation));
    }

    if (!j.contains("rosters") || !j["rosters"].is_array()) {
        throw config_error("config: missing 'rosters' array");
    }
    for (const auto& rj : j["rosters"]) {
        IdentityRoster roster;
        roster.identity_type =
            identity_type_from_string(require_string(rj, "identity_type", "rosters[]"));
        const std::string where = "roster '" + to_string(roster.identity_type) + "'";
        if (!rj.contains("identities") || !rj["identities"].is_array()) {
            throw config_error(where + ": missing 'identities' array");
        }
        for (const auto& ij : rj["identities"]) {
            Identity identity;
            identity.identity_key = require_string(ij, "identity_key", where);
            identity.descriptor =
                require_string(ij, "descriptor", where + " identity '" + identity.identity_key + "'");
            if (!ij.contains("names") || !ij["names"].is_array()) {
                throw config_error(where + " identity '" + identity.identity_key +
                                   "': missing 'names' array");
            }
            identity.names = ij["names"].get<std::vector<std::string>>();
            roster.identities.push_back(std::move(identity));
        }
        config.rosters.push_back(std::move(roster));
    }

    if (!j.contains("template") || !j["template"].is_object()) {
        throw config_error("config: missing 'template' object");
    }
    const auto& tj = j["template"];
    config.prompt_template.instruction = require_string(tj, "instruction", "template");
    config.prompt_template.input_pattern = require_string(tj, "input_pattern", "template");
    config.prompt_template.question = require_string(tj, "question", "template");

    if (j.contains("split_spec")) {
        const auto& pj = j["split_spec"];
        if (pj.contains("train_fraction")) {
            config.split.train_fraction = pj["train_fraction"].get<double>();
        }
        if (pj.contains("train_count")) {
            config.split.train_count = pj["train_count"].get<std::size_t>();
        }
        if (pj.contains("validation_count")) {
            config.split.validation_count = pj["validation_count"].get<std::size_t>();
        }
    }
    if (!config.split.train_fraction && !config.split.train_count) {
        config.split.train_fraction = 0.875;
    }

    if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("test_seed")) config.test_seed = j["test_seed"].get<std::uint64_t>();

    validate_config(config);
    return config;
}

CorpusConfig load_corpus_config(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error("config '" + path + "': " + e.what());
    }
    return corpus_config_from_json(j);
}

void validate_config(const CorpusConfig& config) {
    if (config.laws.empty()) throw config_error("config: no laws defined");
    if (config.situations.empty()) throw config_error("config: no situations defined");
    if (config.rosters.empty()) throw config_error("config: no identity rosters defined");

    std::unordered_set<std::string> law_ids;
    for (const auto& law : config.laws) {
        check_id(law.law_id, "laws[]");
        if (!law_ids.insert(law.law_id).second) {
            throw config_error("duplicate law_id '" + law.law_id + "'");
        }
        if (law.body.empty()) throw config_error("law '" + law.law_id + "': empty body");
    }

    std::unordered_set<std::string> situation_ids;
    for (const auto& situation : config.situations) {
        check_id(situation.situation_id, "situations[]");
        const std::string where = "situation '" + situation.situation_id + "'";
        if (!situation_ids.insert(situation.situation_id).second) {
            throw config_error("duplicate situation_id '" + situation.situation_id + "'");
        }
        if (situation.text.empty()) throw config_error(where + ": empty text");
        if (situation.kind == SituationKind::Crime && situation.applicable_laws.empty()) {
            throw config_error(where + ": kind 'crime' requires non-empty applicable_laws");
        }
        if (situation.kind == SituationKind::Random && !situation.applicable_laws.empty()) {
            throw config_error(where + ": kind 'random' requires empty applicable_laws");
        }
        std::unordered_set<std::string> seen;
        for (const auto& law_id : situation.applicable_laws) {
            if (!law_ids.count(law_id)) {
                throw config_error(where + ": applicable law '" + law_id + "' is not defined");
            }
            if (!seen.insert(law_id).second) {
                throw config_error(where + ": duplicate applicable law '" + law_id + "'");
            }
        }
    }

    std::set<IdentityType> roster_types;
    for (const auto& roster : config.rosters) {
        const std::string where = "roster '" + to_string(roster.identity_type) + "'";
        if (!roster_types.insert(roster.identity_type).second) {
            throw config_error("duplicate roster for identity_type " +
                               to_string(roster.identity_type));
        }
        if (roster.identities.empty()) throw config_error(where + ": empty roster");
        std::unordered_set<std::string> keys;
        for (const auto& identity : roster.identities) {
            check_id(identity.identity_key, where);
            if (!keys.insert(identity.identity_key).second) {
                throw config_error(where + ": duplicate identity_key '" + identity.identity_key +
                                   "'");
            }
            if (identity.descriptor.empty()) {
                throw config_error(where + " identity '" + identity.identity_key +
                                   "': empty descriptor");
            }
            if (identity.names.empty()) {
                throw config_error(where + " identity '" + identity.identity_key +
                                   "': empty name list");
            }
            for (const auto& name : identity.names) {
                if (name.empty()) {
                    throw config_error(where + " identity '" + identity.identity_key +
                                       "': empty name");
                }
            }
        }
    }

    const auto& tmpl = config.prompt_template;
    for (const char* slot : {"<LAW>", "<NAME>", "<IDENTITY>", "<SITUATION>"}) {
        std::size_t n = count_occurrences(tmpl.input_pattern, slot);
        if (n != 1) {
            throw config_error(std::string("template input_pattern must contain ") + slot +
                               " exactly once, found " + std::to_string(n));
        }
    }

    if (config.split.train_fraction) {
        double f = *config.split.train_fraction;
        if (!(f > 0.0 && f < 1.0)) {
            throw config_error("split_spec: train_fraction must lie in (0,1), got " +
                               std::to_string(f));
        }
    }
}

}  // namespace bsr
