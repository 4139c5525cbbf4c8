// rsc command-line tool: parse reports into cue JSON, evaluate report
// losses over voxel grids, verify gradients, fit logit fields against
// parsed constraints, generate phantom suites, and run the ablation.
//
// Machine-readable output goes to stdout, diagnostics to stderr.
// Exit codes: 0 success, 1 usage, 2 malformed input, 3 dims mismatch,
// 4 gradient check failure, 5 invalid spec / divergence.

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rsc/ablation.hpp"
#include "rsc/cues.hpp"
#include "rsc/errors.hpp"
#include "rsc/fitter.hpp"
#include "rsc/gradcheck.hpp"
#include "rsc/lexicon.hpp"
#include "rsc/loss.hpp"
#include "rsc/numfmt.hpp"
#include "rsc/phantom.hpp"
#include "rsc/report_parser.hpp"
#include "rsc/suite.hpp"
#include "rsc/vgr_io.hpp"
#include "rsc/voxel_grid.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitDimsMismatch = 3;
constexpr int kExitGradCheckFailed = 4;
constexpr int kExitInvalid = 5;

struct GlobalFlags {
    bool human = false;
    bool quiet = false;
};

void note(const GlobalFlags& flags, const std::string& msg) {
    if (!flags.quiet) std::cerr << msg << "\n";
}

rsc::Json read_json_file(const fs::path& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw rsc::IoError(std::string(what) + ": cannot open " + path.string());
    rsc::Json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw rsc::FormatError(std::string(what) + ": invalid JSON in " + path.string() + ": " +
                               e.what());
    }
    return j;
}

rsc::LossConfig load_config(const std::string& path) {
    if (path.empty()) return rsc::LossConfig{};
    return rsc::LossConfig::from_json(read_json_file(path, "config"));
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw rsc::IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw rsc::IoError("write failed for " + path.string());
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty())
        std::cout << text;
    else
        write_text(out_path, text);
}

// ---- subcommand bodies ----

int cmd_parse(const GlobalFlags& flags, const std::string& report_path,
              const std::string& lexicon_path, const std::string& out_path) {
    const rsc::Lexicon lexicon =
        lexicon_path.empty() ? rsc::Lexicon::defaults() : rsc::Lexicon::load(lexicon_path);
    const rsc::ReportDocument doc = rsc::load_report_document(report_path);
    const rsc::CueSet cues = rsc::parse_report(doc, lexicon);
    emit(rsc::serialize_cueset(cues), out_path);
    if (flags.human) {
        std::cerr << "parsed " << cues.qual_cues.size() << " qualitative cue(s), cohort "
                  << rsc::to_string(cues.cohort.cohort) << "\n";
    }
    return kExitOk;
}

int cmd_eval(const GlobalFlags& flags, const std::string& et_path, const std::string& ed_path,
             const std::string& tc_path, const std::string& dural_path,
             const std::string& parench_path, const std::string& cues_path,
             const std::string& config_path, const std::string& out_path) {
    rsc::ProbMaps maps{rsc::read_grid(et_path), rsc::read_grid(ed_path),
                       rsc::read_grid(tc_path)};
    maps.validate();
    rsc::AnatomyMasks masks{rsc::read_grid(dural_path), rsc::read_grid(parench_path)};
    masks.validate();
    rsc::require_same_shape(maps.et, masks.dural, "eval");
    const rsc::CueSet cues = rsc::cueset_from_json(read_json_file(cues_path, "cues"));
    const rsc::LossConfig cfg = load_config(config_path);

    const rsc::LossBreakdown bd = rsc::report_loss(cues, maps, masks, cfg);
    emit(bd.to_json().dump(2) + "\n", out_path);
    if (flags.human) {
        std::cerr << "report_total " << rsc::format_double(bd.report_total) << " (exist "
                  << rsc::format_double(bd.exist_sum()) << ", size "
                  << rsc::format_double(bd.size) << ", count " << rsc::format_double(bd.count)
                  << ", prior " << rsc::format_double(bd.prior) << ")\n";
    }
    return kExitOk;
}

int cmd_gradcheck(const GlobalFlags& flags, std::uint64_t seed, std::size_t coords,
                  std::size_t configs, const std::string& config_path, bool corrupt,
                  const std::string& out_path) {
    (void)config_path; // scenarios carry their own default config
    const rsc::GradSweepResult sweep =
        rsc::run_gradient_sweep(seed, configs, coords, 1e-4, corrupt);

    rsc::Json j;
    j["max_rel_err"] = sweep.max_rel_err;
    j["checked"] = sweep.checked;
    j["skipped"] = sweep.skipped;
    j["configs"] = sweep.n_configs;
    j["tolerance"] = 1e-4;
    const bool ok = sweep.max_rel_err < 1e-4;
    j["pass"] = ok;
    emit(j.dump(2) + "\n", out_path);
    if (!ok)
        std::cerr << "gradcheck failed: worst " << sweep.worst.worst_description() << "\n";
    else if (flags.human)
        std::cerr << "gradcheck ok: max relative error "
                  << rsc::format_double(sweep.max_rel_err) << " over " << sweep.checked
                  << " coordinates\n";
    return ok ? kExitOk : kExitGradCheckFailed;
}

int cmd_fit(const GlobalFlags& flags, const std::string& cues_path,
            const std::string& dural_path, const std::string& parench_path,
            const std::vector<std::uint32_t>& dims_arg, std::uint64_t seed, int steps, double lr,
            const std::string& config_path, const std::string& out_path) {
    const rsc::CueSet cues = rsc::cueset_from_json(read_json_file(cues_path, "cues"));
    const rsc::LossConfig cfg = load_config(config_path);

    rsc::AnatomyMasks masks;
    rsc::Dims3 dims{8, 8, 8};
    rsc::Spacing3 spacing{1.0, 1.0, 1.0};
    if (!dural_path.empty() && !parench_path.empty()) {
        masks = rsc::AnatomyMasks{rsc::read_grid(dural_path), rsc::read_grid(parench_path)};
        masks.validate();
        dims = masks.dural.dims();
        spacing = masks.dural.spacing();
    } else {
        if (cues.cohort.cohort != rsc::Cohort::Unknown) {
            std::cerr << "fit: cues carry a cohort prior; --dural and --parench are required\n";
            return kExitUsage;
        }
        if (dims_arg.size() == 3) dims = {dims_arg[0], dims_arg[1], dims_arg[2]};
        masks = rsc::AnatomyMasks{rsc::VoxelGrid(dims, spacing), rsc::VoxelGrid(dims, spacing)};
    }

    const rsc::LogitField field0 = rsc::LogitField::random_uniform(dims, spacing, seed);
    const rsc::FitReport report = rsc::fit(field0, cues, masks, cfg, steps, lr);
    emit(report.to_json().dump(2) + "\n", out_path);
    if (flags.human) {
        std::cerr << "fit: " << report.iterations << " steps, final soft loss "
                  << rsc::format_double(report.loss_trace.back()) << ", constraints "
                  << (report.constraint_status.all_satisfied() ? "satisfied" : "violated")
                  << "\n";
    }
    return kExitOk;
}

int cmd_phantom(const GlobalFlags& flags, const std::string& suite_path, bool default_suite,
                const std::string& out_dir, const std::string& emit_suite_path) {
    if (!emit_suite_path.empty()) {
        write_text(emit_suite_path, rsc::suite_to_json(rsc::build_default_suite()).dump(2) + "\n");
        note(flags, "wrote default suite manifest to " + emit_suite_path);
        return kExitOk;
    }
    std::vector<rsc::PhantomSpec> suite;
    if (default_suite)
        suite = rsc::build_default_suite();
    else if (!suite_path.empty())
        suite = rsc::suite_from_json(read_json_file(suite_path, "suite"));
    else {
        std::cerr << "phantom: provide --suite FILE or --default-suite\n";
        return kExitUsage;
    }
    if (out_dir.empty()) {
        std::cerr << "phantom: --out DIR is required\n";
        return kExitUsage;
    }

    fs::create_directories(out_dir);
    rsc::Json index;
    index["phantoms"] = rsc::Json::array();
    for (const auto& spec : suite) {
        const rsc::Phantom ph = rsc::generate(spec);
        const std::string base = spec.name;
        rsc::write_grid(ph.labels, fs::path(out_dir) / (base + "_labels.vgr"));
        rsc::write_grid(ph.masks.dural, fs::path(out_dir) / (base + "_dural.vgr"));
        rsc::write_grid(ph.masks.parench, fs::path(out_dir) / (base + "_parench.vgr"));
        write_text(fs::path(out_dir) / (base + "_report.txt"), ph.report_text);
        rsc::Json entry;
        entry["name"] = base;
        entry["labels"] = base + "_labels.vgr";
        entry["dural"] = base + "_dural.vgr";
        entry["parench"] = base + "_parench.vgr";
        entry["report"] = base + "_report.txt";
        index["phantoms"].push_back(std::move(entry));
    }
    write_text(fs::path(out_dir) / "index.json", index.dump(2) + "\n");
    note(flags, "wrote " + std::to_string(suite.size()) + " phantom(s) to " + out_dir);
    return kExitOk;
}

int cmd_ablate(const GlobalFlags& flags, const std::string& suite_path, bool default_suite,
               int steps, double lr, const std::string& config_path,
               const std::string& out_path) {
    std::vector<rsc::PhantomSpec> suite;
    if (default_suite)
        suite = rsc::build_default_suite();
    else if (!suite_path.empty())
        suite = rsc::suite_from_json(read_json_file(suite_path, "suite"));
    else {
        std::cerr << "ablate: provide --suite FILE or --default-suite\n";
        return kExitUsage;
    }
    const rsc::LossConfig cfg = load_config(config_path);
    rsc::AblationOptions opts;
    opts.steps = steps;
    opts.lr = lr;
    const auto rows = rsc::ablation_run(suite, rsc::cumulative_subsets(), cfg, opts);
    emit(rsc::ablation_csv(rows), out_path);
    if (flags.human) {
        for (const auto& r : rows)
            std::cerr << r.subset << ": " << rsc::format_double(100.0 * r.satisfied_fraction)
                      << "% satisfied\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"report-supervision constraint engine for 3D segmentation"};
    app.require_subcommand(1);

    GlobalFlags flags;
    app.add_flag("--human", flags.human, "add human-readable summaries on stderr");
    app.add_flag("--quiet", flags.quiet, "suppress non-error diagnostics");
    // Global defaults; a subcommand's own --config/--seed wins over these.
    std::string global_config;
    std::uint64_t global_seed = 0;
    auto* global_config_opt =
        app.add_option("--config", global_config, "loss config JSON for any subcommand");
    auto* global_seed_opt = app.add_option("--seed", global_seed, "seed for any subcommand");

    // parse
    std::string parse_report_path, parse_lexicon, parse_out;
    auto* parse_cmd = app.add_subcommand("parse", "parse a report file into cue JSON");
    parse_cmd->add_option("report", parse_report_path, "report text file")->required();
    parse_cmd->add_option("--lexicon", parse_lexicon, "lexicon JSON overriding the defaults");
    parse_cmd->add_option("-o,--out", parse_out, "output path (default stdout)");

    // eval
    std::string eval_et, eval_ed, eval_tc, eval_dural, eval_parench, eval_cues, eval_config,
        eval_out;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate the report loss on probability maps");
    eval_cmd->add_option("--et", eval_et, "ET probability grid (VGR1)")->required();
    eval_cmd->add_option("--ed", eval_ed, "ED probability grid (VGR1)")->required();
    eval_cmd->add_option("--tc", eval_tc, "TC probability grid (VGR1)")->required();
    eval_cmd->add_option("--dural", eval_dural, "dural mask grid (VGR1)")->required();
    eval_cmd->add_option("--parench", eval_parench, "parenchyma mask grid (VGR1)")->required();
    eval_cmd->add_option("--cues", eval_cues, "cue JSON (from `parse`)")->required();
    eval_cmd->add_option("--config", eval_config, "loss config JSON");
    eval_cmd->add_option("-o,--out", eval_out, "output path (default stdout)");

    // gradcheck
    std::uint64_t grad_seed = 7;
    std::size_t grad_coords = 1000, grad_configs = 20;
    std::string grad_config, grad_out;
    bool grad_corrupt = false;
    auto* grad_cmd =
        app.add_subcommand("gradcheck", "verify analytic gradients against finite differences");
    auto* grad_seed_opt = grad_cmd->add_option("--seed", grad_seed, "scenario seed");
    grad_cmd->add_option("--coords", grad_coords, "coordinates sampled per configuration");
    grad_cmd->add_option("--configs", grad_configs, "number of random configurations");
    grad_cmd->add_option("--config", grad_config, "loss config JSON");
    grad_cmd->add_option("-o,--out", grad_out, "output path (default stdout)");
    grad_cmd->add_flag("--corrupt-gradient", grad_corrupt,
                       "test hook: perturb the analytic gradient to force failure");

    // fit
    std::string fit_cues, fit_dural, fit_parench, fit_config, fit_out;
    std::vector<std::uint32_t> fit_dims;
    std::uint64_t fit_seed = 1;
    int fit_steps = 500;
    double fit_lr = 0.5;
    auto* fit_cmd = app.add_subcommand("fit", "gradient-descend a logit field against cues");
    fit_cmd->add_option("--cues", fit_cues, "cue JSON (from `parse`)")->required();
    fit_cmd->add_option("--dural", fit_dural, "dural mask grid (VGR1)");
    fit_cmd->add_option("--parench", fit_parench, "parenchyma mask grid (VGR1)");
    fit_cmd->add_option("--dims", fit_dims, "grid dims when no masks are given")
        ->expected(3);
    auto* fit_seed_opt = fit_cmd->add_option("--seed", fit_seed, "field initialization seed");
    fit_cmd->add_option("--steps", fit_steps, "gradient steps");
    fit_cmd->add_option("--lr", fit_lr, "learning rate");
    fit_cmd->add_option("--config", fit_config, "loss config JSON");
    fit_cmd->add_option("-o,--out", fit_out, "output path (default stdout)");

    // phantom
    std::string ph_suite, ph_out, ph_emit;
    bool ph_default = false;
    auto* ph_cmd = app.add_subcommand("phantom", "generate phantom volumes and reports");
    ph_cmd->add_option("--suite", ph_suite, "suite manifest JSON");
    ph_cmd->add_flag("--default-suite", ph_default, "use the bundled 50-phantom suite");
    ph_cmd->add_option("--out", ph_out, "output directory");
    ph_cmd->add_option("--emit-default-suite", ph_emit,
                       "write the bundled suite manifest to this path and exit");

    // ablate
    std::string ab_suite, ab_config, ab_out;
    bool ab_default = false;
    int ab_steps = 500;
    double ab_lr = 0.5;
    auto* ab_cmd = app.add_subcommand("ablate", "constraint-satisfaction ablation over a suite");
    ab_cmd->add_option("--suite", ab_suite, "suite manifest JSON");
    ab_cmd->add_flag("--default-suite", ab_default, "use the bundled 50-phantom suite");
    ab_cmd->add_option("--steps", ab_steps, "gradient steps per fit");
    ab_cmd->add_option("--lr", ab_lr, "learning rate");
    ab_cmd->add_option("--config", ab_config, "loss config JSON");
    ab_cmd->add_option("-o,--out", ab_out, "output path (default stdout)");

    for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; }))
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        // normalize: anything other than clean help/version is a usage error
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (global_config_opt->count() > 0) {
        if (eval_config.empty()) eval_config = global_config;
        if (grad_config.empty()) grad_config = global_config;
        if (fit_config.empty()) fit_config = global_config;
        if (ab_config.empty()) ab_config = global_config;
    }
    if (global_seed_opt->count() > 0) {
        if (grad_seed_opt->count() == 0) grad_seed = global_seed;
        if (fit_seed_opt->count() == 0) fit_seed = global_seed;
    }

    try {
        if (parse_cmd->parsed())
            return cmd_parse(flags, parse_report_path, parse_lexicon, parse_out);
        if (eval_cmd->parsed())
            return cmd_eval(flags, eval_et, eval_ed, eval_tc, eval_dural, eval_parench,
                            eval_cues, eval_config, eval_out);
        if (grad_cmd->parsed()) {
            if (grad_coords == 0 || grad_configs == 0) {
                std::cerr << "gradcheck: --coords and --configs must be positive\n";
                return kExitUsage;
            }
            return cmd_gradcheck(flags, grad_seed, grad_coords, grad_configs, grad_config,
                                 grad_corrupt, grad_out);
        }
        if (fit_cmd->parsed())
            return cmd_fit(flags, fit_cues, fit_dural, fit_parench, fit_dims, fit_seed,
                           fit_steps, fit_lr, fit_config, fit_out);
        if (ph_cmd->parsed()) return cmd_phantom(flags, ph_suite, ph_default, ph_out, ph_emit);
        if (ab_cmd->parsed())
            return cmd_ablate(flags, ab_suite, ab_default, ab_steps, ab_lr, ab_config, ab_out);
    } catch (const rsc::DimsMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDimsMismatch;
    } catch (const rsc::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const rsc::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const rsc::MalformedDocument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const rsc::MalformedMeasurement& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const rsc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
    return kExitUsage;
}
