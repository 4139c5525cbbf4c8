#include <doctest.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <string>

#include "rsc/lexicon.hpp"
#include "rsc/numfmt.hpp"
#include "rsc/report_parser.hpp"

#include "test_util.hpp"

using namespace rsc;

namespace {
const Lexicon kLex = Lexicon::defaults();

ReportDocument global_only(const std::string& text) {
    ReportDocument doc;
    doc.global_text = text;
    return doc;
}
} // namespace

TEST_CASE("parse_report extracts size, count and cohort from the global section") {
    const auto cues = parse_report(
        global_only("multiple punctate parenchymal lesions, largest measuring 45x39x47 mm"),
        kLex);
    REQUIRE(cues.quant.largest_dims_mm.has_value());
    CHECK((*cues.quant.largest_dims_mm)[0] == 45.0);
    CHECK((*cues.quant.largest_dims_mm)[1] == 39.0);
    CHECK((*cues.quant.largest_dims_mm)[2] == 47.0);
    CHECK_FALSE(cues.quant.largest_diameter_mm.has_value());
    REQUIRE(cues.quant.min_count.has_value());
    CHECK(*cues.quant.min_count == 2);
    CHECK(cues.cohort.cohort == Cohort::MET);
    CHECK(cues.qual_cues.empty());
}

TEST_CASE("empty-cue text parses to an all-unstated cue set") {
    ReportDocument doc = global_only("unremarkable study");
    doc.modality_texts[Modality::T1] = "";
    doc.modality_texts[Modality::FLAIR] = "";
    const auto cues = parse_report(doc, kLex);
    CHECK(cues.qual_cues.empty());
    CHECK_FALSE(cues.quant.has_size());
    CHECK_FALSE(cues.quant.has_count());
    CHECK_FALSE(cues.quant.approx);
    CHECK(cues.cohort.cohort == Cohort::Unknown);
    CHECK(cues.cohort.evidence_spans.empty());
}

TEST_CASE("modality sections align with their substructures") {
    SUBCASE("FLAIR edema is present") {
        const auto cues = parse_modality_section(Modality::FLAIR,
                                                 "surrounding extensive edema", kLex);
        REQUIRE(cues.size() == 1);
        CHECK(cues[0].substructure == Substructure::ED);
        CHECK(cues[0].polarity == Polarity::Present);
        CHECK(cues[0].certainty == 1.0);
        CHECK(cues[0].source_modality == Modality::FLAIR);
        CHECK(cues[0].evidence_span == "edema");
    }
    SUBCASE("T1c negated enhancement is absent") {
        const auto cues = parse_modality_section(Modality::T1c, "no enhancement", kLex);
        REQUIRE(cues.size() == 1);
        CHECK(cues[0].substructure == Substructure::ET);
        CHECK(cues[0].polarity == Polarity::Absent);
        CHECK(cues[0].certainty == 1.0);
    }
    SUBCASE("T1c ring enhancement is present") {
        const auto cues = parse_modality_section(Modality::T1c, "ring enhancement", kLex);
        REQUIRE(cues.size() == 1);
        CHECK(cues[0].substructure == Substructure::ET);
        CHECK(cues[0].polarity == Polarity::Present);
        CHECK(cues[0].certainty == 1.0);
    }
    SUBCASE("qualifiers combine by minimum") {
        const auto cues = parse_modality_section(
            Modality::FLAIR, "mild hyperintense signal, possible edema", kLex);
        REQUIRE(cues.size() == 1);
        CHECK(cues[0].substructure == Substructure::ED);
        CHECK(cues[0].polarity == Polarity::Present);
        CHECK(cues[0].certainty == 0.5);
    }
    SUBCASE("T1 and T2 constrain tumor core") {
        const auto t1 = parse_modality_section(Modality::T1, "hypointense core", kLex);
        REQUIRE(t1.size() == 1);
        CHECK(t1[0].substructure == Substructure::TC);
        const auto t2 = parse_modality_section(Modality::T2, "a hypointense mass", kLex);
        REQUIRE(t2.size() == 1);
        CHECK(t2[0].substructure == Substructure::TC);
    }
    SUBCASE("unmatched text yields nothing") {
        CHECK(parse_modality_section(Modality::T1c, "motion artifact degrades the study", kLex)
                  .empty());
    }
}

TEST_CASE("negation needs the same finding head; presence wins otherwise") {
    SUBCASE("absence pattern negating the head wins") {
        const auto cues = parse_modality_section(Modality::T1c,
                                                 "no abnormal focus of enhancement", kLex);
        REQUIRE(cues.size() == 1);
        CHECK(cues[0].polarity == Polarity::Absent);
    }
    SUBCASE("presence elsewhere beats an unrelated negation") {
        const auto cues = parse_modality_section(
            Modality::T1c, "no enhancement previously. now solid enhancement.", kLex);
        REQUIRE(cues.size() == 1);
        CHECK(cues[0].polarity == Polarity::Present);
    }
    SUBCASE("negation does not cross sentence boundaries") {
        const auto cues =
            parse_modality_section(Modality::T1c, "no hemorrhage; enhancement is seen", kLex);
        REQUIRE(cues.size() == 1);
        CHECK(cues[0].polarity == Polarity::Present);
    }
    SUBCASE("trailing negation") {
        const auto cues =
            parse_modality_section(Modality::T1c, "enhancement is absent", kLex);
        REQUIRE(cues.size() == 1);
        CHECK(cues[0].polarity == Polarity::Absent);
    }
    SUBCASE("paired templates over every head") {
        for (Modality m : kAllModalities) {
            for (const std::string& head : kLex.heads.at(aligned_substructure(m))) {
                const auto present = parse_modality_section(m, "there is " + head, kLex);
                REQUIRE(present.size() == 1);
                CHECK(present[0].polarity == Polarity::Present);
                const auto absent = parse_modality_section(m, "no " + head, kLex);
                REQUIRE(absent.size() == 1);
                CHECK(absent[0].polarity == Polarity::Absent);
            }
        }
    }
}

TEST_CASE("parse_count") {
    CHECK(parse_count("multiple lesions", kLex) == 2);
    CHECK(parse_count("a single lesion", kLex) == 1);
    CHECK(parse_count("three enhancing lesions", kLex) == 3);
    CHECK_FALSE(parse_count("the lesion is unchanged", kLex).has_value());
    CHECK_FALSE(parse_count("", kLex).has_value());

    SUBCASE("table-driven spelled numerals") {
        for (const auto& [word, value] : kLex.number_words) {
            const auto parsed = parse_count(word + " small lesions", kLex);
            REQUIRE(parsed.has_value());
            CHECK(*parsed == value);
        }
    }
    SUBCASE("digits beat count words") {
        CHECK(parse_count("multiple lesions, 4 metastases in total", kLex) == 4);
    }
    SUBCASE("count words map via lexicon") {
        CHECK(parse_count("several masses", kLex) == 2);
        CHECK(parse_count("innumerable tiny foci", kLex) == 5);
        CHECK(parse_count("a few nodules", kLex) == 2);
    }
    SUBCASE("numbers without a lesion noun are not counts") {
        CHECK_FALSE(parse_count("image 3 of 12", kLex).has_value());
        CHECK_FALSE(parse_count("measuring 45x39x47 mm", kLex).has_value());
    }
    SUBCASE("count never drops below one") {
        CHECK_FALSE(parse_count("0 lesions", kLex).has_value());
        for (int n = 1; n <= 12; ++n) {
            const auto parsed = parse_count(std::to_string(n) + " lesions", kLex);
            REQUIRE(parsed.has_value());
            CHECK(*parsed >= 1);
        }
    }
}

TEST_CASE("parse_size") {
    SUBCASE("three-dimensional measurement") {
        const auto size = parse_size("measuring 45x39x47 mm");
        REQUIRE(size.has_value());
        REQUIRE(size->dims_mm.has_value());
        CHECK((*size->dims_mm)[0] == 45.0);
        CHECK((*size->dims_mm)[2] == 47.0);
        CHECK(size->certainty == 1.0);
        CHECK_FALSE(size->approx);
    }
    SUBCASE("centimeters convert by the x10 oracle") {
        for (double cm : {1.0, 2.0, 3.5, 0.4}) {
            std::string text = "a mass of " + format_double(cm) + " cm";
            const auto size = parse_size(text);
            REQUIRE(size.has_value());
            REQUIRE(size->diameter_mm.has_value());
            CHECK(*size->diameter_mm == doctest::Approx(cm * 10.0).epsilon(1e-12));
        }
    }
    SUBCASE("approximately flags the measurement without lowering certainty") {
        const auto size = parse_size("approximately 2 cm");
        REQUIRE(size.has_value());
        CHECK(*size->diameter_mm == 20.0);
        CHECK(size->approx);
        CHECK(size->certainty == 1.0);
    }
    SUBCASE("empty text") { CHECK_FALSE(parse_size("").has_value()); }
    SUBCASE("two-axis form keeps the larger diameter") {
        const auto size = parse_size("13x18 mm nodule");
        REQUIRE(size.has_value());
        REQUIRE(size->diameter_mm.has_value());
        CHECK(*size->diameter_mm == 18.0);
        CHECK_FALSE(size->dims_mm.has_value());
    }
    SUBCASE("largest maximal dimension wins across phrases") {
        const auto size = parse_size("one lesion of 12 mm and another measuring 2x3x2 cm");
        REQUIRE(size.has_value());
        REQUIRE(size->dims_mm.has_value());
        CHECK((*size->dims_mm)[1] == 30.0);
    }
    SUBCASE("hedged sentence lowers size certainty") {
        const auto size = parse_size("possible lesion measuring 10 mm");
        REQUIRE(size.has_value());
        CHECK(size->certainty == 0.5);
    }
    SUBCASE("decimal sizes survive sentence splitting") {
        const auto size = parse_size("stable. measures 4.5 cm. unchanged");
        REQUIRE(size.has_value());
        CHECK(*size->diameter_mm == 45.0);
    }
    SUBCASE("non-positive measurement is malformed") {
        CHECK_THROWS_AS(parse_size("measuring 0x39x47 mm"), MalformedMeasurement);
    }
}

TEST_CASE("classify_cohort") {
    SUBCASE("extra-axial phrases vote MEN") {
        const auto cue = classify_cohort("dural-based mass along the falx cerebri", kLex);
        CHECK(cue.cohort == Cohort::MEN);
        REQUIRE(cue.evidence_spans.size() == 2);
        CHECK(cue.evidence_spans[0] == "dural-based");
        CHECK(cue.evidence_spans[1] == "falx");
    }
    SUBCASE("intra-axial phrases vote MET") {
        const auto cue =
            classify_cohort("multiple parenchymal lesions with surrounding edema", kLex);
        CHECK(cue.cohort == Cohort::MET);
        CHECK(cue.evidence_spans == std::vector<std::string>{"parenchymal"});
    }
    SUBCASE("no location keywords gives Unknown") {
        const auto cue = classify_cohort("lesion noted", kLex);
        CHECK(cue.cohort == Cohort::Unknown);
        CHECK(cue.evidence_spans.empty());
    }
    SUBCASE("tie gives Unknown with no evidence") {
        const auto cue = classify_cohort("falx region, parenchymal signal", kLex);
        CHECK(cue.cohort == Cohort::Unknown);
        CHECK(cue.evidence_spans.empty());
    }
}

TEST_CASE("parse_report rejects an all-empty document") {
    ReportDocument doc;
    doc.global_text = "  \n ";
    doc.modality_texts[Modality::T1] = "";
    CHECK_THROWS_AS(parse_report(doc, kLex), MalformedDocument);
}

TEST_CASE("parsing is deterministic") {
    ReportDocument doc = global_only(
        "Multiple parenchymal lesions, the largest measuring approximately 45x39x47 mm.");
    doc.modality_texts[Modality::T1c] = "ring enhancement. no hemorrhage.";
    doc.modality_texts[Modality::FLAIR] = "possible surrounding edema";
    const std::string a = serialize_cueset(parse_report(doc, kLex));
    const std::string b = serialize_cueset(parse_report(doc, kLex));
    CHECK(a == b);
}

TEST_CASE("parsing is invariant to case and whitespace runs") {
    ReportDocument doc = global_only("Multiple parenchymal lesions measuring 45x39x47 mm");
    doc.modality_texts[Modality::T1c] = "no enhancement";
    const auto base = parse_report(doc, kLex);

    ReportDocument shouty;
    shouty.global_text = "MULTIPLE   PARENCHYMAL\tLESIONS  MEASURING  45X39X47 MM";
    shouty.modality_texts[Modality::T1c] = "NO   ENHANCEMENT";
    const auto loud = parse_report(shouty, kLex);

    REQUIRE(loud.qual_cues.size() == base.qual_cues.size());
    for (std::size_t i = 0; i < base.qual_cues.size(); ++i) {
        CHECK(loud.qual_cues[i].substructure == base.qual_cues[i].substructure);
        CHECK(loud.qual_cues[i].polarity == base.qual_cues[i].polarity);
        CHECK(loud.qual_cues[i].certainty == base.qual_cues[i].certainty);
        CHECK(loud.qual_cues[i].source_modality == base.qual_cues[i].source_modality);
    }
    CHECK(loud.quant.largest_dims_mm == base.quant.largest_dims_mm);
    CHECK(loud.quant.min_count == base.quant.min_count);
    CHECK(loud.cohort.cohort == base.cohort.cohort);
}

TEST_CASE("modality-section size mentions are discarded") {
    ReportDocument doc = global_only("A single lesion.");
    doc.modality_texts[Modality::T1] = "Lesion measuring 30 mm.";
    const auto cues = parse_report(doc, kLex);
    CHECK_FALSE(cues.quant.has_size());
    REQUIRE(cues.qual_cues.size() == 1); // the head still registers as a TC cue
    CHECK(cues.qual_cues[0].substructure == Substructure::TC);
}

TEST_CASE("cue sets serialize with stable keys and survive the JSON round trip") {
    ReportDocument doc = global_only("a single parenchymal lesion measuring 2 cm");
    doc.modality_texts[Modality::FLAIR] = "mild edema";
    const CueSet cues = parse_report(doc, kLex);
    const Json j = to_json(cues);
    CHECK(j.begin().key() == "qual_cues");
    const CueSet back = cueset_from_json(j);
    CHECK(serialize_cueset(back) == serialize_cueset(cues));
}

TEST_CASE("evidence spans are verbatim substrings of their section") {
    const std::string text = "Mild Hyperintense Signal, possible EDEMA";
    const auto cues = parse_modality_section(Modality::FLAIR, text, kLex);
    REQUIRE(cues.size() == 1);
    CHECK(text.find(cues[0].evidence_span) != std::string::npos);
}

TEST_CASE("report documents load from header-delimited files") {
    const auto dir = testutil::scratch_dir("reports");
    {
        std::ofstream out(dir / "full.txt");
        out << "[GLOBAL]\nmultiple parenchymal lesions\n[t1c]\nring enhancement\n"
            << "[FLAIR]\nsurrounding edema\n[T2]\nhypointense mass\n";
    }
    const auto doc = load_report_document(dir / "full.txt");
    CHECK(doc.global_text == "multiple parenchymal lesions\n");
    CHECK(doc.modality_texts.at(Modality::T1c) == "ring enhancement\n");
    CHECK(doc.modality_texts.at(Modality::T2) == "hypointense mass\n");
    CHECK(doc.modality_texts.count(Modality::T1) == 0);

    {
        std::ofstream out(dir / "headerless.txt");
        out << "solitary dural-based mass\n";
    }
    const auto plain = load_report_document(dir / "headerless.txt");
    CHECK(plain.global_text == "solitary dural-based mass\n");
    CHECK(plain.modality_texts.empty());

    CHECK_THROWS_AS(load_report_document(dir / "absent.txt"), IoError);
}

TEST_CASE("alignment soundness holds over the bundled corpus") {
    const auto corpus = testutil::test_data_dir() / "corpus";
    REQUIRE(std::filesystem::exists(corpus));
    std::size_t reports = 0;
    for (const auto& entry : std::filesystem::directory_iterator(corpus)) {
        if (entry.path().extension() != ".txt") continue;
        ++reports;
        const auto doc = load_report_document(entry.path());
        const auto cues = parse_report(doc, kLex);
        for (const auto& q : cues.qual_cues) {
            CHECK(q.substructure == aligned_substructure(q.source_modality));
            CHECK(q.certainty >= 0.0);
            CHECK(q.certainty <= 1.0);
            CHECK(q.polarity != Polarity::Unstated);
        }
        // one cue per (substructure, modality)
        for (std::size_t i = 0; i < cues.qual_cues.size(); ++i)
            for (std::size_t j = i + 1; j < cues.qual_cues.size(); ++j)
                CHECK((cues.qual_cues[i].substructure != cues.qual_cues[j].substructure ||
                       cues.qual_cues[i].source_modality != cues.qual_cues[j].source_modality));
        if (cues.quant.min_count) CHECK(*cues.quant.min_count >= 1);
        if (cues.cohort.cohort == Cohort::Unknown) CHECK(cues.cohort.evidence_spans.empty());
    }
    CHECK(reports >= 40);
}

TEST_CASE("lexicon files override categories and keep defaults elsewhere") {
    const auto dir = testutil::scratch_dir("lexicon");
    {
        std::ofstream out(dir / "lex.json");
        out << R"({"count_words": {"myriad": 7}})";
    }
    const Lexicon lx = Lexicon::load(dir / "lex.json");
    CHECK(parse_count("myriad lesions", lx) == 7);
    CHECK_FALSE(parse_count("multiple lesions", lx).has_value()); // overridden away
    CHECK(parse_size("2 cm", lx).has_value());                    // defaults retained

    {
        std::ofstream out(dir / "bad.json");
        out << "{not json";
    }
    CHECK_THROWS_AS(Lexicon::load(dir / "bad.json"), FormatError);
    CHECK_THROWS_AS(Lexicon::load(dir / "missing.json"), IoError);
}
