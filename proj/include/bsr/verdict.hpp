#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace bsr {

enum class VerdictValue { YES, NO, UNPARSEABLE };

std::string to_string(VerdictValue v);
VerdictValue verdict_value_from_string(const std::string& s);

struct Verdict {
    VerdictValue value = VerdictValue::UNPARSEABLE;
    std::string evidence;  // matched span of the raw text; empty iff UNPARSEABLE
};

// Term lists driving the response mapper. Data-driven so the vocabulary can
// be extended without code changes.
struct Lexicon {
    std::vector<std::string> affirmations;
    std::vector<std::string> negations;
    std::vector<std::string> conclusion_markers;

    static Lexicon builtin_default();
    static Lexicon from_json(const nlohmann::json& j);
    static Lexicon load(const std::string& path);
};

// Maps free-form model text to a binary verdict via a fixed rule cascade:
// normalize, then look for an affirmation/negation right after the last
// conclusion marker, then fall back to the last standalone match anywhere,
// else UNPARSEABLE. Deterministic and total.
Verdict map_response(std::string_view raw_text, const Lexicon& lexicon);
Verdict map_response(std::string_view raw_text);

}  // namespace bsr
