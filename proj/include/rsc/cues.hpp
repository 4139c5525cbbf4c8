#pragma once
// Structured cues extracted from a report: qualitative per-substructure
// findings, quantitative global size/count, and the cohort location cue.
//
// CueSet is the contract between the parser and the loss engine. Any
// parser that emits this JSON shape can drive the losses; the bundled
// parser is deterministic lexicon rules.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsc/errors.hpp"

namespace rsc {

using Json = nlohmann::ordered_json;

enum class Modality { T1, T1c, T2, FLAIR };
enum class Substructure { ET, ED, TC, WT };
enum class Polarity { Present, Absent, Unstated };
enum class Cohort { MEN, MET, Unknown };

inline constexpr std::array<Modality, 4> kAllModalities{Modality::T1, Modality::T1c,
                                                        Modality::T2, Modality::FLAIR};

inline const char* to_string(Modality m) {
    switch (m) {
        case Modality::T1: return "T1";
        case Modality::T1c: return "T1c";
        case Modality::T2: return "T2";
        case Modality::FLAIR: return "FLAIR";
    }
    return "?";
}

inline const char* to_string(Substructure s) {
    switch (s) {
        case Substructure::ET: return "ET";
        case Substructure::ED: return "ED";
        case Substructure::TC: return "TC";
        case Substructure::WT: return "WT";
    }
    return "?";
}

inline const char* to_string(Polarity p) {
    switch (p) {
        case Polarity::Present: return "Present";
        case Polarity::Absent: return "Absent";
        case Polarity::Unstated: return "Unstated";
    }
    return "?";
}

inline const char* to_string(Cohort c) {
    switch (c) {
        case Cohort::MEN: return "MEN";
        case Cohort::MET: return "MET";
        case Cohort::Unknown: return "Unknown";
    }
    return "?";
}

inline Modality modality_from_string(const std::string& s) {
    for (Modality m : kAllModalities)
        if (s == to_string(m)) return m;
    throw FormatError("unknown modality: " + s);
}

inline Substructure substructure_from_string(const std::string& s) {
    for (Substructure k : {Substructure::ET, Substructure::ED, Substructure::TC, Substructure::WT})
        if (s == to_string(k)) return k;
    throw FormatError("unknown substructure: " + s);
}

inline Polarity polarity_from_string(const std::string& s) {
    for (Polarity p : {Polarity::Present, Polarity::Absent, Polarity::Unstated})
        if (s == to_string(p)) return p;
    throw FormatError("unknown polarity: " + s);
}

inline Cohort cohort_from_string(const std::string& s) {
    for (Cohort c : {Cohort::MEN, Cohort::MET, Cohort::Unknown})
        if (s == to_string(c)) return c;
    throw FormatError("unknown cohort: " + s);
}

// The substructure a modality section constrains: T1c->ET, FLAIR->ED,
// T1->TC, T2->TC.
inline Substructure aligned_substructure(Modality m) {
    switch (m) {
        case Modality::T1c: return Substructure::ET;
        case Modality::FLAIR: return Substructure::ED;
        case Modality::T1:
        case Modality::T2: return Substructure::TC;
    }
    return Substructure::TC;
}

struct QualCue {
    Substructure substructure = Substructure::TC; // ET/ED/TC only
    Polarity polarity = Polarity::Unstated;
    double certainty = 0.0; // lambda in [0,1]; 0 when Unstated
    Modality source_modality = Modality::T1;
    std::string evidence_span;
};

struct QuantCue {
    std::optional<std::array<double, 3>> largest_dims_mm; // axis order as written
    std::optional<double> largest_diameter_mm;            // single-diameter form
    std::optional<int> min_count;                         // N_qual >= 1
    bool approx = false;
    double size_certainty = 0.0;  // 0 when no size cue parsed
    double count_certainty = 0.0; // 0 when no count cue parsed

    bool has_size() const { return largest_dims_mm.has_value() || largest_diameter_mm.has_value(); }
    bool has_count() const { return min_count.has_value(); }
};

struct CohortCue {
    Cohort cohort = Cohort::Unknown;
    std::vector<std::string> evidence_spans; // empty when Unknown
};

struct CueSet {
    std::vector<QualCue> qual_cues; // stated cues only; one per (substructure, modality)
    QuantCue quant;
    CohortCue cohort;
};

// -------- JSON, fixed key order --------

inline Json to_json(const CueSet& cues) {
    Json j;
    j["qual_cues"] = Json::array();
    for (const auto& q : cues.qual_cues) {
        Json jq;
        jq["substructure"] = to_string(q.substructure);
        jq["polarity"] = to_string(q.polarity);
        jq["certainty"] = q.certainty;
        jq["modality"] = to_string(q.source_modality);
        jq["evidence"] = q.evidence_span;
        j["qual_cues"].push_back(std::move(jq));
    }
    Json jquant;
    if (cues.quant.largest_dims_mm) {
        const auto& d = *cues.quant.largest_dims_mm;
        jquant["largest_dims_mm"] = Json::array({d[0], d[1], d[2]});
    } else {
        jquant["largest_dims_mm"] = nullptr;
    }
    jquant["largest_diameter_mm"] =
        cues.quant.largest_diameter_mm ? Json(*cues.quant.largest_diameter_mm) : Json(nullptr);
    jquant["min_count"] = cues.quant.min_count ? Json(*cues.quant.min_count) : Json(nullptr);
    jquant["approx"] = cues.quant.approx;
    jquant["size_certainty"] = cues.quant.size_certainty;
    jquant["count_certainty"] = cues.quant.count_certainty;
    j["quant"] = std::move(jquant);

    Json jcohort;
    jcohort["label"] = to_string(cues.cohort.cohort);
    jcohort["evidence"] = cues.cohort.evidence_spans;
    j["cohort"] = std::move(jcohort);
    return j;
}

inline CueSet cueset_from_json(const Json& j) {
    CueSet cues;
    for (const auto& jq : j.at("qual_cues")) {
        QualCue q;
        q.substructure = substructure_from_string(jq.at("substructure").get<std::string>());
        q.polarity = polarity_from_string(jq.at("polarity").get<std::string>());
        q.certainty = jq.at("certainty").get<double>();
        q.source_modality = modality_from_string(jq.at("modality").get<std::string>());
        q.evidence_span = jq.at("evidence").get<std::string>();
        cues.qual_cues.push_back(std::move(q));
    }
    const auto& jquant = j.at("quant");
    if (!jquant.at("largest_dims_mm").is_null()) {
        const auto& d = jquant.at("largest_dims_mm");
        cues.quant.largest_dims_mm = std::array<double, 3>{d.at(0).get<double>(),
                                                           d.at(1).get<double>(),
                                                           d.at(2).get<double>()};
    }
    if (!jquant.at("largest_diameter_mm").is_null())
        cues.quant.largest_diameter_mm = jquant.at("largest_diameter_mm").get<double>();
    if (!jquant.at("min_count").is_null())
        cues.quant.min_count = jquant.at("min_count").get<int>();
    cues.quant.approx = jquant.at("approx").get<bool>();
    cues.quant.size_certainty = jquant.at("size_certainty").get<double>();
    cues.quant.count_certainty = jquant.at("count_certainty").get<double>();

    const auto& jcohort = j.at("cohort");
    cues.cohort.cohort = cohort_from_string(jcohort.at("label").get<std::string>());
    cues.cohort.evidence_spans = jcohort.at("evidence").get<std::vector<std::string>>();
    return cues;
}

inline std::string serialize_cueset(const CueSet& cues) { return to_json(cues).dump(2) + "\n"; }

} // namespace rsc
