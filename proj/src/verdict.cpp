#include "bsr/verdict.hpp"

#include <algorithm>
#include <cctype>

#include "bsr/util.hpp"

namespace bsr {

std::string to_string(VerdictValue v) {
    switch (v) {
        case VerdictValue::YES: return "YES";
        case VerdictValue::NO: return "NO";
        case VerdictValue::UNPARSEABLE: return "UNPARSEABLE";
    }
    return "UNPARSEABLE";
}

VerdictValue verdict_value_from_string(const std::string& s) {
    if (s == "YES") return VerdictValue::YES;
    if (s == "NO") return VerdictValue::NO;
    if (s == "UNPARSEABLE") return VerdictValue::UNPARSEABLE;
    throw config_error("invalid verdict value: '" + s + "'");
}

Lexicon Lexicon::builtin_default() {
    Lexicon lex;
    lex.affirmations = {
        "yes", "yeah", "yep", "affirmative",
        "applicable", "applies", "apply", "applied",
    };
    lex.negations = {
        "no", "nope", "negative",
        "not applicable", "isn't applicable", "not be applicable", "inapplicable",
        "not apply", "doesn't apply", "don't apply", "won't apply", "wouldn't apply",
        "cannot apply", "can't apply",
        "not applied", "cannot be applied", "can't be applied",
    };
    lex.conclusion_markers = {
        "answer is", "answer:", "final answer",
        "verdict is", "verdict:", "conclusion is", "conclusion:", "in conclusion",
    };
    return lex;
}

Lexicon Lexicon::from_json(const nlohmann::json& j) {
    Lexicon lex;
    auto read_terms = [&j](const char* key) {
        if (!j.contains(key) || !j[key].is_array()) {
            throw config_error(std::string("lexicon: missing '") + key + "' array");
        }
        std::vector<std::string> terms;
        for (const auto& t : j[key]) {
            std::string term = collapse_whitespace(to_lower_ascii(t.get<std::string>()));
            if (term.empty()) throw config_error(std::string("lexicon: empty term in ") + key);
            terms.push_back(std::move(term));
        }
        return terms;
    };
    lex.affirmations = read_terms("affirmations");
    lex.negations = read_terms("negations");
    lex.conclusion_markers = read_terms("conclusion_markers");
    if (lex.affirmations.empty() || lex.negations.empty()) {
        throw config_error("lexicon: affirmations and negations must be non-empty");
    }
    return lex;
}

Lexicon Lexicon::load(const std::string& path) {
    try {
        return from_json(nlohmann::json::parse(read_text_file(path)));
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error("lexicon '" + path + "': " + e.what());
    }
}

namespace {

bool is_word_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
}

// Lowercased text with whitespace runs collapsed to single spaces, plus a
// map from each normalized position back to the raw position it came from.
struct NormalizedText {
    std::string text;
    std::vector<std::size_t> raw_pos;
};

NormalizedText normalize(std::string_view raw) {
    NormalizedText norm;
    norm.text.reserve(raw.size());
    norm.raw_pos.reserve(raw.size());
    bool pending_space = false;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        unsigned char c = static_cast<unsigned char>(raw[i]);
        if (std::isspace(c)) {
            pending_space = true;
            continue;
        }
        if (pending_space && !norm.text.empty()) {
            norm.text.push_back(' ');
            norm.raw_pos.push_back(i - 1);
        }
        pending_space = false;
        norm.text.push_back(static_cast<char>(std::tolower(c)));
        norm.raw_pos.push_back(i);
    }
    return norm;
}

struct TermMatch {
    std::size_t begin = 0;
    std::size_t end = 0;
    VerdictValue polarity = VerdictValue::UNPARSEABLE;

    std::size_t length() const { return end - begin; }
};

bool standalone_at(const std::string& text, std::size_t pos, std::size_t len) {
    if (pos > 0 && is_word_char(text[pos - 1])) return false;
    std::size_t after = pos + len;
    if (after < text.size() && is_word_char(text[after])) return false;
    return true;
}

void collect_matches(const std::string& text, const std::vector<std::string>& terms,
                     VerdictValue polarity, std::vector<TermMatch>& out) {
    for (const auto& term : terms) {
        if (term.empty()) continue;
        std::size_t pos = text.find(term);
        while (pos != std::string::npos) {
            if (standalone_at(text, pos, term.size())) {
                out.push_back({pos, pos + term.size(), polarity});
            }
            pos = text.find(term, pos + 1);
        }
    }
}

// Longest-match-wins overlap resolution: "not applicable" must shadow the
// "applicable" it contains. Returns surviving matches in text order.
std::vector<TermMatch> resolve_overlaps(std::vector<TermMatch> matches) {
    std::sort(matches.begin(), matches.end(), [](const TermMatch& a, const TermMatch& b) {
        if (a.length() != b.length()) return a.length() > b.length();
        if (a.begin != b.begin) return a.begin < b.begin;
        return a.polarity == VerdictValue::NO && b.polarity == VerdictValue::YES;
    });
    std::vector<TermMatch> selected;
    for (const auto& m : matches) {
        bool overlaps = false;
        for (const auto& s : selected) {
            if (m.begin < s.end && s.begin < m.end) {
                overlaps = true;
                break;
            }
        }
        if (!overlaps) selected.push_back(m);
    }
    std::sort(selected.begin(), selected.end(),
              [](const TermMatch& a, const TermMatch& b) { return a.begin < b.begin; });
    return selected;
}

Verdict make_verdict(const TermMatch& match, std::string_view raw, const NormalizedText& norm) {
    Verdict verdict;
    verdict.value = match.polarity;
    std::size_t raw_begin = norm.raw_pos[match.begin];
    std::size_t raw_end = norm.raw_pos[match.end - 1] + 1;
    verdict.evidence = std::string(raw.substr(raw_begin, raw_end - raw_begin));
    return verdict;
}

}  // namespace

Verdict map_response(std::string_view raw_text, const Lexicon& lexicon) {
    const NormalizedText norm = normalize(raw_text);
    if (norm.text.empty()) return Verdict{};

    std::vector<TermMatch> matches;
    collect_matches(norm.text, lexicon.affirmations, VerdictValue::YES, matches);
    collect_matches(norm.text, lexicon.negations, VerdictValue::NO, matches);
    matches = resolve_overlaps(std::move(matches));
    if (matches.empty()) return Verdict{};

    // Conclusion-marker rule: first match after the last marker wins.
    std::size_t marker_end = std::string::npos;
    for (const auto& marker : lexicon.conclusion_markers) {
        std::size_t pos = norm.text.find(marker);
        while (pos != std::string::npos) {
            if (standalone_at(norm.text, pos, marker.size())) {
                std::size_t end = pos + marker.size();
                if (marker_end == std::string::npos || end > marker_end) marker_end = end;
            }
            pos = norm.text.find(marker, pos + 1);
        }
    }
    if (marker_end != std::string::npos) {
        for (const auto& m : matches) {
            if (m.begin >= marker_end) return make_verdict(m, raw_text, norm);
        }
    }

    // Last standalone affirmation/negation anywhere in the text.
    return make_verdict(matches.back(), raw_text, norm);
}

Verdict map_response(std::string_view raw_text) {
    static const Lexicon lexicon = Lexicon::builtin_default();
    return map_response(raw_text, lexicon);
}

}  // namespace bsr
