#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <json.hpp>

#include "rsc/phantom.hpp"
#include "rsc/suite.hpp"
#include "rsc/vgr_io.hpp"

#include "test_util.hpp"

namespace {

const std::string kTool = RSC_TOOL_PATH;

int run(const std::string& args) {
    const int status = std::system((kTool + " " + args).c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

TEST_CASE("parse matches its golden fixture byte for byte") {
    const auto dir = testutil::scratch_dir("cli_parse");
    const auto corpus = testutil::test_data_dir() / "corpus";
    const auto out = dir / "out.json";
    REQUIRE(run("parse " + (corpus / "01_met_flagship.txt").string() + " -o " + out.string() +
                " 2>/dev/null") == 0);
    CHECK(slurp(out) == slurp(corpus / "golden" / "01_met_flagship.json"));
}

TEST_CASE("parse failure modes use exit code 2") {
    const auto dir = testutil::scratch_dir("cli_parse_err");
    const auto err_file = dir / "stderr.txt";
    CHECK(run("parse " + (dir / "missing.txt").string() + " 2>" + err_file.string()) == 2);
    // the diagnostic names the offending path
    CHECK(slurp(err_file).find("missing.txt") != std::string::npos);

    std::ofstream(dir / "empty.txt") << "";
    CHECK(run("parse " + (dir / "empty.txt").string() + " 2>/dev/null") == 2);

    std::ofstream(dir / "blank.txt") << "[GLOBAL]\n   \n[T1]\n\n";
    CHECK(run("parse " + (dir / "blank.txt").string() + " 2>/dev/null") == 2);
}

TEST_CASE("eval reports zero on a phantom round trip and flags dims mismatches") {
    const auto dir = testutil::scratch_dir("cli_eval");
    rsc::PhantomSpec spec;
    spec.name = "t";
    spec.dims = {8, 8, 8};
    spec.spacing = {1, 1, 1};
    spec.cohort = rsc::Cohort::MET;
    spec.shell_voxels = 1.0;
    rsc::LesionSpec lesion;
    lesion.center_vox = {3, 3, 3};
    lesion.semi_axes_mm = {1.8, 1.8, 1.8};
    lesion.has_et = true;
    lesion.has_ed = true;
    lesion.ed_rim_mm = 1.0;
    spec.lesions.push_back(lesion);

    const rsc::Phantom ph = rsc::generate(spec);
    const rsc::ProbMaps maps = rsc::ground_truth_probmaps(ph.labels);
    rsc::write_grid(maps.et, dir / "et.vgr");
    rsc::write_grid(maps.ed, dir / "ed.vgr");
    rsc::write_grid(maps.tc, dir / "tc.vgr");
    rsc::write_grid(ph.masks.dural, dir / "dural.vgr");
    rsc::write_grid(ph.masks.parench, dir / "parench.vgr");
    std::ofstream(dir / "report.txt") << ph.report_text;

    REQUIRE(run("parse " + (dir / "report.txt").string() + " -o " + (dir / "cues.json").string() +
                " 2>/dev/null") == 0);

    const std::string grids = " --et " + (dir / "et.vgr").string() + " --ed " +
                              (dir / "ed.vgr").string() + " --tc " + (dir / "tc.vgr").string();
    const std::string masks = " --dural " + (dir / "dural.vgr").string() + " --parench " +
                              (dir / "parench.vgr").string();

    SUBCASE("round trip evaluates to zero") {
        REQUIRE(run("eval" + grids + masks + " --cues " + (dir / "cues.json").string() +
                    " -o " + (dir / "bd.json").string() + " 2>/dev/null") == 0);
        const auto bd = nlohmann::json::parse(slurp(dir / "bd.json"));
        CHECK(bd.at("report_total").get<double>() <= 1e-6);
    }
    SUBCASE("all-unset cues evaluate to zero") {
        std::ofstream(dir / "nocues.json")
            << R"({"qual_cues":[],"quant":{"largest_dims_mm":null,"largest_diameter_mm":null,)"
            << R"("min_count":null,"approx":false,"size_certainty":0.0,"count_certainty":0.0},)"
            << R"("cohort":{"label":"Unknown","evidence":[]}})";
        REQUIRE(run("eval" + grids + masks + " --cues " + (dir / "nocues.json").string() +
                    " -o " + (dir / "bd0.json").string() + " 2>/dev/null") == 0);
        const auto bd = nlohmann::json::parse(slurp(dir / "bd0.json"));
        CHECK(bd.at("report_total").get<double>() == 0.0);
    }
    SUBCASE("mismatched grid dims exit 3") {
        rsc::write_grid(rsc::VoxelGrid({4, 4, 4}, {1, 1, 1}), dir / "small.vgr");
        CHECK(run("eval --et " + (dir / "small.vgr").string() + " --ed " +
                  (dir / "ed.vgr").string() + " --tc " + (dir / "tc.vgr").string() + masks +
                  " --cues " + (dir / "cues.json").string() + " 2>/dev/null") == 3);
    }
    SUBCASE("corrupt grid file exits 2") {
        std::ofstream(dir / "bad.vgr") << "not a grid";
        CHECK(run("eval --et " + (dir / "bad.vgr").string() + " --ed " +
                  (dir / "ed.vgr").string() + " --tc " + (dir / "tc.vgr").string() + masks +
                  " --cues " + (dir / "cues.json").string() + " 2>/dev/null") == 2);
    }
}

TEST_CASE("gradcheck exit codes") {
    CHECK(run("gradcheck --seed 7 --coords 40 --configs 4 >/dev/null 2>&1") == 0);
    CHECK(run("--human gradcheck --seed 7 --coords 40 --configs 4 >/dev/null 2>&1") == 0);
    // negative control: a corrupted gradient must be caught
    CHECK(run("gradcheck --seed 7 --coords 40 --configs 4 --corrupt-gradient >/dev/null 2>&1") ==
          4);
    // usage error
    CHECK(run("gradcheck --coords 0 >/dev/null 2>&1") == 1);
}

TEST_CASE("fit on empty cues leaves the field unchanged") {
    const auto dir = testutil::scratch_dir("cli_fit");
    std::ofstream(dir / "nocues.json")
        << R"({"qual_cues":[],"quant":{"largest_dims_mm":null,"largest_diameter_mm":null,)"
        << R"("min_count":null,"approx":false,"size_certainty":0.0,"count_certainty":0.0},)"
        << R"("cohort":{"label":"Unknown","evidence":[]}})";
    REQUIRE(run("fit --cues " + (dir / "nocues.json").string() +
                " --dims 6 6 6 --steps 30 --seed 5 -o " + (dir / "fit.json").string() +
                " 2>/dev/null") == 0);
    const auto report = nlohmann::json::parse(slurp(dir / "fit.json"));
    const auto trace = report.at("loss_trace");
    REQUIRE(trace.size() == 31);
    for (const auto& v : trace) CHECK(v.get<double>() == 0.0);
    CHECK(report.at("constraint_status").at("count_satisfied").get<bool>());
}

TEST_CASE("fit requires masks when the cues carry a cohort") {
    const auto dir = testutil::scratch_dir("cli_fit_cohort");
    std::ofstream(dir / "cues.json")
        << R"({"qual_cues":[],"quant":{"largest_dims_mm":null,"largest_diameter_mm":null,)"
        << R"("min_count":null,"approx":false,"size_certainty":0.0,"count_certainty":0.0},)"
        << R"("cohort":{"label":"MEN","evidence":["falx"]}})";
    CHECK(run("fit --cues " + (dir / "cues.json").string() + " --steps 5 2>/dev/null") == 1);
}

TEST_CASE("phantom requires a suite source and an output directory") {
    CHECK(run("phantom --out /tmp/rsc_cli_nowhere 2>/dev/null") == 1);
    CHECK(run("phantom --default-suite 2>/dev/null") == 1);
}

TEST_CASE("ablate emits the cumulative subsets as CSV") {
    const auto dir = testutil::scratch_dir("cli_ablate");
    {
        auto suite = rsc::build_default_suite();
        suite.resize(2);
        std::ofstream out(dir / "mini.json");
        out << rsc::suite_to_json(suite).dump(2) << "\n";
    }
    REQUIRE(run("ablate --suite " + (dir / "mini.json").string() + " --steps 40 -o " +
                (dir / "ab.csv").string() + " 2>/dev/null") == 0);
    const std::string csv = slurp(dir / "ab.csv");
    CHECK(csv.rfind("subset,n_phantoms,satisfied_fraction,mean_final_loss\n", 0) == 0);
    CHECK(csv.find("\nexist,") != std::string::npos);
    CHECK(csv.find("\nexist+global,") != std::string::npos);
    CHECK(csv.find("\nexist+global+prior,") != std::string::npos);
}
