#pragma once
// Pattern lexicon driving the report parser. A default lexicon ships
// embedded; a JSON file can override any category (categories omitted
// from the file keep their defaults).

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsc/cues.hpp"
#include "rsc/errors.hpp"

namespace rsc {

struct Lexicon {
    // Finding head phrases per substructure, matched inside modality sections.
    std::map<Substructure, std::vector<std::string>> heads;
    // Negation tokens scanned before / after a head within one sentence.
    std::vector<std::string> negation_pre;
    std::vector<std::string> negation_post;
    // Hedging qualifiers -> certainty lambda; multiple qualifiers combine by min.
    std::map<std::string, double> certainty;
    // Qualitative count words -> minimal integer ("multiple" -> 2).
    std::map<std::string, int> count_words;
    // Spelled-out numerals; digits are always recognized.
    std::map<std::string, int> number_words;
    // Nouns a count must modify to register ("3 lesions", not "3 mm").
    std::vector<std::string> lesion_nouns;
    // Words that flag an approximate measurement without lowering certainty.
    std::vector<std::string> approx_words;
    // Location phrases voting extra-axial (MEN) vs intra-axial (MET).
    std::vector<std::string> cohort_men;
    std::vector<std::string> cohort_met;

    static Lexicon defaults() {
        Lexicon lx;
        lx.heads[Substructure::ET] = {"enhancement", "enhancing", "enhances"};
        lx.heads[Substructure::ED] = {"hyperintense signal", "hyperintensity", "edema"};
        lx.heads[Substructure::TC] = {"hypointense core", "hypointensity", "mass", "lesion",
                                      "lesions", "core"};
        lx.negation_pre = {"no", "without", "not", "negative", "absent"};
        lx.negation_post = {"absent", "not"};
        lx.certainty = {{"mild", 0.7},     {"slight", 0.7},    {"possible", 0.5},
                        {"possibly", 0.5}, {"probable", 0.5},  {"probably", 0.5},
                        {"equivocal", 0.3}, {"questionable", 0.3}};
        lx.count_words = {{"single", 1},   {"solitary", 1}, {"multiple", 2}, {"several", 2},
                          {"numerous", 2}, {"few", 2},      {"innumerable", 5}};
        lx.number_words = {{"one", 1}, {"two", 2},   {"three", 3}, {"four", 4},
                           {"five", 5}, {"six", 6},   {"seven", 7}, {"eight", 8},
                           {"nine", 9}, {"ten", 10},  {"eleven", 11}, {"twelve", 12}};
        lx.lesion_nouns = {"lesion", "lesions", "mass", "masses", "metastasis", "metastases",
                           "nodule", "nodules", "focus", "foci", "tumor", "tumors",
                           "meningioma", "meningiomas"};
        lx.approx_words = {"approximately", "about", "roughly"};
        lx.cohort_men = {"falx", "dural-based", "dural based", "skull base",
                         "cerebellopontine angle", "extra-axial", "dural tail"};
        lx.cohort_met = {"parenchymal", "intra-axial", "intraparenchymal", "metastasis",
                         "metastases", "metastatic", "ring enhancement"};
        return lx;
    }

    static Lexicon from_json(const Json& j) {
        Lexicon lx = defaults();
        if (j.contains("heads")) {
            for (const auto& [key, phrases] : j.at("heads").items())
                lx.heads[substructure_from_string(key)] = phrases.get<std::vector<std::string>>();
        }
        auto load_list = [&](const char* key, std::vector<std::string>& out) {
            if (j.contains(key)) out = j.at(key).get<std::vector<std::string>>();
        };
        load_list("negation_pre", lx.negation_pre);
        load_list("negation_post", lx.negation_post);
        load_list("lesion_nouns", lx.lesion_nouns);
        load_list("approx_words", lx.approx_words);
        load_list("cohort_men", lx.cohort_men);
        load_list("cohort_met", lx.cohort_met);
        if (j.contains("certainty"))
            lx.certainty = j.at("certainty").get<std::map<std::string, double>>();
        if (j.contains("count_words"))
            lx.count_words = j.at("count_words").get<std::map<std::string, int>>();
        if (j.contains("number_words"))
            lx.number_words = j.at("number_words").get<std::map<std::string, int>>();
        return lx;
    }

    static Lexicon load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in)
            throw IoError("lexicon: cannot open " + path.string());
        Json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("lexicon: invalid JSON in " + path.string() + ": " + e.what());
        }
        return from_json(j);
    }

    Json to_json() const {
        Json j;
        Json jheads;
        for (const auto& [k, phrases] : heads)
            jheads[to_string(k)] = phrases;
        j["heads"] = std::move(jheads);
        j["negation_pre"] = negation_pre;
        j["negation_post"] = negation_post;
        j["certainty"] = certainty;
        j["count_words"] = count_words;
        j["number_words"] = number_words;
        j["lesion_nouns"] = lesion_nouns;
        j["approx_words"] = approx_words;
        j["cohort_men"] = cohort_men;
        j["cohort_met"] = cohort_met;
        return j;
    }
};

} // namespace rsc
