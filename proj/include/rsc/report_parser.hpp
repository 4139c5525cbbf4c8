#pragma once
// Deterministic lexicon/pattern parser turning hierarchical report text
// into a CueSet.
//
// Scope rules, kept deliberately small and testable:
//   - sentences split on '.', ';' and newlines (a '.' between two digits
//     does not split, so "4.5 cm" survives);
//   - negation scope is one sentence: a head is Absent when a negation
//     token sits within 4 tokens before it or 3 tokens after it;
//   - certainty qualifiers apply sentence-wide and combine by minimum;
//   - a section yields at most one cue (presence beats negated matches).

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "rsc/cues.hpp"
#include "rsc/errors.hpp"
#include "rsc/lexicon.hpp"

namespace rsc {

struct ReportDocument {
    std::string global_text;
    std::map<Modality, std::string> modality_texts;
};

namespace textscan {

inline bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

struct Token {
    std::size_t begin = 0; // byte range in the source section
    std::size_t end = 0;
    std::string lower;
};

struct Sentence {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::vector<Token> tokens;
};

// A token is a run of alphanumerics, allowing single internal hyphens
// ("dural-based" is one token).
inline std::vector<Token> tokenize(const std::string& text, std::size_t begin, std::size_t end) {
    std::vector<Token> tokens;
    std::size_t i = begin;
    while (i < end) {
        if (!is_word_char(text[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < end &&
               (is_word_char(text[j]) ||
                (text[j] == '-' && j + 1 < end && is_word_char(text[j + 1]) && j > i)))
            ++j;
        Token t;
        t.begin = i;
        t.end = j;
        t.lower.reserve(j - i);
        for (std::size_t k = i; k < j; ++k)
            t.lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[k]))));
        tokens.push_back(std::move(t));
        i = j;
    }
    return tokens;
}

inline std::vector<Sentence> split_sentences(const std::string& text) {
    std::vector<Sentence> sentences;
    std::size_t start = 0;
    const std::size_t n = text.size();
    for (std::size_t i = 0; i <= n; ++i) {
        bool boundary = (i == n);
        if (!boundary) {
            const char c = text[i];
            if (c == ';' || c == '\n') {
                boundary = true;
            } else if (c == '.') {
                const bool digit_before =
                    i > 0 && std::isdigit(static_cast<unsigned char>(text[i - 1]));
                const bool digit_after =
                    i + 1 < n && std::isdigit(static_cast<unsigned char>(text[i + 1]));
                boundary = !(digit_before && digit_after);
            }
        }
        if (boundary) {
            Sentence s;
            s.begin = start;
            s.end = i;
            s.tokens = tokenize(text, start, i);
            if (!s.tokens.empty()) sentences.push_back(std::move(s));
            start = i + 1;
        }
    }
    return sentences;
}

inline std::vector<std::string> phrase_tokens(const std::string& phrase) {
    std::vector<std::string> out;
    for (const Token& t : tokenize(phrase, 0, phrase.size()))
        out.push_back(t.lower);
    return out;
}

struct PhraseMatch {
    std::size_t tok_begin = 0;
    std::size_t tok_len = 0;
    std::size_t byte_begin = 0;
    std::size_t byte_end = 0;
};

// Non-overlapping matches of any phrase in `phrases`, longest phrase
// preferred at each position, left to right.
inline std::vector<PhraseMatch> match_phrases(const std::vector<Token>& tokens,
                                              const std::vector<std::string>& phrases) {
    std::vector<std::vector<std::string>> tokenized;
    tokenized.reserve(phrases.size());
    for (const auto& p : phrases) tokenized.push_back(phrase_tokens(p));
    std::vector<std::size_t> order(phrases.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return tokenized[a].size() > tokenized[b].size();
    });

    std::vector<PhraseMatch> matches;
    std::size_t i = 0;
    while (i < tokens.size()) {
        bool matched = false;
        for (std::size_t pi : order) {
            const auto& pt = tokenized[pi];
            if (pt.empty() || i + pt.size() > tokens.size()) continue;
            bool ok = true;
            for (std::size_t k = 0; k < pt.size(); ++k)
                if (tokens[i + k].lower != pt[k]) {
                    ok = false;
                    break;
                }
            if (ok) {
                matches.push_back({i, pt.size(), tokens[i].begin, tokens[i + pt.size() - 1].end});
                i += pt.size();
                matched = true;
                break;
            }
        }
        if (!matched) ++i;
    }
    return matches;
}

inline bool token_in(const std::vector<std::string>& words, const std::string& lower) {
    return std::find(words.begin(), words.end(), lower) != words.end();
}

// Minimum certainty over all qualifiers appearing in the sentence; 1.0
// when no qualifier is present.
inline double sentence_certainty(const Sentence& s, const Lexicon& lx) {
    double c = 1.0;
    for (const Token& t : s.tokens) {
        auto it = lx.certainty.find(t.lower);
        if (it != lx.certainty.end()) c = std::min(c, it->second);
    }
    return c;
}

inline bool sentence_has_word(const Sentence& s, const std::vector<std::string>& words) {
    for (const Token& t : s.tokens)
        if (token_in(words, t.lower)) return true;
    return false;
}

} // namespace textscan

inline constexpr std::size_t kNegationPreWindow = 4;
inline constexpr std::size_t kNegationPostWindow = 3;

// ---------------------------------------------------------------------
// parse_modality_section: one section -> at most one QualCue for the
// substructure aligned with that modality.
// ---------------------------------------------------------------------
inline std::vector<QualCue> parse_modality_section(Modality modality, const std::string& text,
                                                   const Lexicon& lexicon) {
    using namespace textscan;
    const Substructure target = aligned_substructure(modality);
    const auto heads_it = lexicon.heads.find(target);
    if (heads_it == lexicon.heads.end()) return {};

    struct HeadHit {
        Polarity polarity;
        double certainty;
        std::string span;
    };
    std::vector<HeadHit> hits;

    for (const Sentence& s : split_sentences(text)) {
        const double cert = sentence_certainty(s, lexicon);
        for (const PhraseMatch& m : match_phrases(s.tokens, heads_it->second)) {
            bool negated = false;
            const std::size_t lo = m.tok_begin > kNegationPreWindow ? m.tok_begin - kNegationPreWindow : 0;
            for (std::size_t t = lo; t < m.tok_begin && !negated; ++t)
                negated = token_in(lexicon.negation_pre, s.tokens[t].lower);
            const std::size_t hi =
                std::min(s.tokens.size(), m.tok_begin + m.tok_len + kNegationPostWindow);
            for (std::size_t t = m.tok_begin + m.tok_len; t < hi && !negated; ++t)
                negated = token_in(lexicon.negation_post, s.tokens[t].lower);
            hits.push_back({negated ? Polarity::Absent : Polarity::Present, cert,
                            text.substr(m.byte_begin, m.byte_end - m.byte_begin)});
        }
    }
    if (hits.empty()) return {};

    // Presence wins unless every matched head is itself negated.
    const bool any_present =
        std::any_of(hits.begin(), hits.end(),
                    [](const HeadHit& h) { return h.polarity == Polarity::Present; });
    const Polarity polarity = any_present ? Polarity::Present : Polarity::Absent;

    QualCue cue;
    cue.substructure = target;
    cue.polarity = polarity;
    cue.source_modality = modality;
    cue.certainty = 1.0;
    bool first = true;
    for (const HeadHit& h : hits) {
        if (h.polarity != polarity) continue;
        cue.certainty = std::min(cue.certainty, h.certainty);
        if (first) {
            cue.evidence_span = h.span;
            first = false;
        }
    }
    return {cue};
}

// ---------------------------------------------------------------------
// parse_count: minimal lesion count from the global text. Digits and
// spelled numerals beat qualitative count words; the count must modify
// a lesion noun within the next few tokens.
// ---------------------------------------------------------------------
inline constexpr std::size_t kCountNounWindow = 3;

struct CountParse {
    int value = 0;
    double certainty = 1.0;
};

inline std::optional<CountParse> parse_count_detailed(const std::string& text,
                                                      const Lexicon& lexicon) {
    using namespace textscan;
    std::optional<CountParse> best_numeral;
    std::optional<CountParse> best_word;

    for (const Sentence& s : split_sentences(text)) {
        const double cert = sentence_certainty(s, lexicon);
        for (std::size_t i = 0; i < s.tokens.size(); ++i) {
            const std::string& w = s.tokens[i].lower;
            int numeral = 0;
            if (!w.empty() && w.size() <= 6 && std::all_of(w.begin(), w.end(), [](char c) {
                    return std::isdigit(static_cast<unsigned char>(c)) != 0;
                })) {
                numeral = std::atoi(w.c_str());
            } else if (auto it = lexicon.number_words.find(w); it != lexicon.number_words.end()) {
                numeral = it->second;
            }
            int word_value = 0;
            if (numeral == 0) {
                if (auto it = lexicon.count_words.find(w); it != lexicon.count_words.end())
                    word_value = it->second;
            }
            if (numeral <= 0 && word_value <= 0) continue;

            bool modifies_noun = false;
            for (std::size_t k = i + 1; k <= i + kCountNounWindow && k < s.tokens.size(); ++k)
                if (token_in(lexicon.lesion_nouns, s.tokens[k].lower)) {
                    modifies_noun = true;
                    break;
                }
            if (!modifies_noun) continue;

            if (numeral > 0) {
                if (!best_numeral || numeral > best_numeral->value)
                    best_numeral = CountParse{numeral, cert};
            } else {
                if (!best_word || word_value > best_word->value)
                    best_word = CountParse{word_value, cert};
            }
        }
    }
    if (best_numeral) return best_numeral;
    return best_word;
}

inline std::optional<int> parse_count(const std::string& text, const Lexicon& lexicon) {
    auto parsed = parse_count_detailed(text, lexicon);
    if (!parsed) return std::nullopt;
    return parsed->value;
}

// ---------------------------------------------------------------------
// parse_size: "AxBxC mm", "AxB mm", "A mm", "A cm" (cm -> mm by x10).
// Multiple size phrases resolve to the one with the largest maximal
// dimension (the "largest lesion" rule).
// ---------------------------------------------------------------------
struct SizeParse {
    std::optional<std::array<double, 3>> dims_mm;
    std::optional<double> diameter_mm;
    double certainty = 1.0;
    bool approx = false;
};

inline std::optional<SizeParse> parse_size(const std::string& text,
                                           const Lexicon& lexicon = Lexicon::defaults()) {
    using namespace textscan;
    static const std::regex re3(
        R"((\d+(?:\.\d+)?)\s*x\s*(\d+(?:\.\d+)?)\s*x\s*(\d+(?:\.\d+)?)\s*(mm|cm)\b)",
        std::regex::icase);
    static const std::regex re2(R"((\d+(?:\.\d+)?)\s*x\s*(\d+(?:\.\d+)?)\s*(mm|cm)\b)",
                                std::regex::icase);
    static const std::regex re1(R"((\d+(?:\.\d+)?)\s*(mm|cm)\b)", std::regex::icase);

    struct Candidate {
        std::vector<double> values_mm; // 1, 2 or 3 values, converted to mm
        std::size_t begin = 0;
        std::size_t end = 0;
    };
    std::vector<Candidate> candidates;

    auto overlaps = [&](std::size_t b, std::size_t e) {
        for (const auto& c : candidates)
            if (b < c.end && c.begin < e) return true;
        return false;
    };
    auto scan = [&](const std::regex& re, int nvals) {
        for (auto it = std::sregex_iterator(text.begin(), text.end(), re);
             it != std::sregex_iterator(); ++it) {
            const auto& m = *it;
            const std::size_t b = static_cast<std::size_t>(m.position(0));
            const std::size_t e = b + static_cast<std::size_t>(m.length(0));
            if (overlaps(b, e)) continue;
            std::string unit = m[nvals + 1].str();
            for (char& c : unit) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            const double scale = (unit == "cm") ? 10.0 : 1.0;
            Candidate cand;
            cand.begin = b;
            cand.end = e;
            for (int g = 1; g <= nvals; ++g) {
                const double v = std::stod(m[g].str());
                if (!(v > 0.0))
                    throw MalformedMeasurement("parse_size: non-positive measurement in \"" +
                                               m[0].str() + "\"");
                cand.values_mm.push_back(v * scale);
            }
            candidates.push_back(std::move(cand));
        }
    };
    scan(re3, 3);
    scan(re2, 2);
    scan(re1, 1);
    if (candidates.empty()) return std::nullopt;

    const Candidate* best = &candidates[0];
    auto max_dim = [](const Candidate& c) {
        return *std::max_element(c.values_mm.begin(), c.values_mm.end());
    };
    for (const auto& c : candidates) {
        if (max_dim(c) > max_dim(*best) ||
            (max_dim(c) == max_dim(*best) && c.begin < best->begin))
            best = &c;
    }

    SizeParse out;
    if (best->values_mm.size() == 3) {
        out.dims_mm = std::array<double, 3>{best->values_mm[0], best->values_mm[1],
                                            best->values_mm[2]};
    } else {
        // One or two diameters: keep the largest as the single diameter.
        out.diameter_mm = max_dim(*best);
    }
    for (const Sentence& s : split_sentences(text)) {
        if (best->begin >= s.begin && best->begin < s.end) {
            out.certainty = sentence_certainty(s, lexicon);
            out.approx = sentence_has_word(s, lexicon.approx_words);
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------
// classify_cohort: extra-axial phrases vote MEN, intra-axial phrases
// vote MET; majority wins, ties and no hits give Unknown.
// ---------------------------------------------------------------------
inline CohortCue classify_cohort(const std::string& global_text, const Lexicon& lexicon) {
    using namespace textscan;
    const auto tokens = tokenize(global_text, 0, global_text.size());
    const auto men = match_phrases(tokens, lexicon.cohort_men);
    const auto met = match_phrases(tokens, lexicon.cohort_met);

    CohortCue cue;
    if (men.size() == met.size()) return cue; // zero hits or tie -> Unknown
    cue.cohort = men.size() > met.size() ? Cohort::MEN : Cohort::MET;
    for (const PhraseMatch& m : (men.size() > met.size() ? men : met))
        cue.evidence_spans.push_back(global_text.substr(m.byte_begin, m.byte_end - m.byte_begin));
    return cue;
}

// ---------------------------------------------------------------------
// parse_report: full document -> CueSet.
// ---------------------------------------------------------------------
namespace detail {
inline bool blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; });
}
} // namespace detail

inline CueSet parse_report(const ReportDocument& doc, const Lexicon& lexicon) {
    bool any = !detail::blank(doc.global_text);
    for (const auto& [m, text] : doc.modality_texts)
        any = any || !detail::blank(text);
    if (!any)
        throw MalformedDocument("parse_report: every section is empty");

    CueSet cues;
    for (Modality m : kAllModalities) {
        auto it = doc.modality_texts.find(m);
        if (it == doc.modality_texts.end()) continue;
        for (QualCue& q : parse_modality_section(m, it->second, lexicon))
            cues.qual_cues.push_back(std::move(q));
    }

    if (auto size = parse_size(doc.global_text, lexicon)) {
        cues.quant.largest_dims_mm = size->dims_mm;
        cues.quant.largest_diameter_mm = size->diameter_mm;
        cues.quant.size_certainty = size->certainty;
        cues.quant.approx = size->approx;
    }
    if (auto count = parse_count_detailed(doc.global_text, lexicon)) {
        cues.quant.min_count = count->value;
        cues.quant.count_certainty = count->certainty;
    }
    cues.cohort = classify_cohort(doc.global_text, lexicon);
    return cues;
}

// ---------------------------------------------------------------------
// Report files: sections delimited by [GLOBAL], [T1], [T1C], [T2],
// [FLAIR] headers, case-insensitive, one per line. A file without
// headers is all-global.
// ---------------------------------------------------------------------
inline ReportDocument parse_report_document(const std::string& file_text) {
    ReportDocument doc;
    std::string* current = &doc.global_text;
    std::istringstream in(file_text);
    std::string line;
    while (std::getline(in, line)) {
        std::string trimmed;
        for (char c : line)
            if (!std::isspace(static_cast<unsigned char>(c)))
                trimmed.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        if (trimmed == "[global]") {
            current = &doc.global_text;
            continue;
        }
        bool is_header = false;
        for (Modality m : kAllModalities) {
            std::string header = "[";
            for (const char* p = to_string(m); *p; ++p)
                header.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(*p))));
            header += "]";
            if (trimmed == header) {
                current = &doc.modality_texts[m];
                is_header = true;
                break;
            }
        }
        if (is_header) continue;
        current->append(line);
        current->push_back('\n');
    }
    return doc;
}

inline ReportDocument load_report_document(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("report: cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_report_document(buf.str());
}

} // namespace rsc
