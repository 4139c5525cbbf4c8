#pragma once
// Synthetic paired data: brain-like geometry (spherical brain, dural
// shell, parenchymal interior), ellipsoidal lesions with ET/ED/TC
// structure, anatomy masks, and a template report whose statements are
// all derived from the rasterized volume. Measuring the rasterization
// (rather than echoing the spec) is what makes the parse -> loss round
// trip exact by construction:
//   - the size sentence carries the bounding-box extents of the largest
//     whole-tumor component;
//   - the count word comes from the measured component count;
//   - each modality sentence asserts presence only when its class has
//     at least one voxel.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "rsc/components.hpp"
#include "rsc/cues.hpp"
#include "rsc/errors.hpp"
#include "rsc/numfmt.hpp"
#include "rsc/prob_maps.hpp"
#include "rsc/report_parser.hpp"
#include "rsc/voxel_grid.hpp"

namespace rsc {

struct LesionSpec {
    std::array<double, 3> center_vox{0, 0, 0}; // voxel coordinates
    std::array<double, 3> semi_axes_mm{1, 1, 1};
    bool has_et = false;
    bool has_ed = false;
    double ed_rim_mm = 0.0;
};

struct PhantomSpec {
    std::string name = "phantom";
    Dims3 dims{8, 8, 8};
    Spacing3 spacing{1.0, 1.0, 1.0};
    Cohort cohort = Cohort::MET;
    double shell_voxels = 2.0; // dural shell thickness in voxels
    std::uint64_t seed = 0;    // consumed by fitting harnesses for field init
    bool use_numerals = false; // spell the exact lesion count instead of "multiple"
    std::optional<Modality> uncertain_modality; // prefix that sentence with "possible"
    std::vector<LesionSpec> lesions;

    Json to_json() const {
        Json j;
        j["name"] = name;
        j["dims"] = Json::array({dims[0], dims[1], dims[2]});
        j["spacing"] = Json::array({spacing[0], spacing[1], spacing[2]});
        j["cohort"] = to_string(cohort);
        j["shell_voxels"] = shell_voxels;
        j["seed"] = seed;
        j["use_numerals"] = use_numerals;
        j["uncertain_modality"] =
            uncertain_modality ? Json(to_string(*uncertain_modality)) : Json(nullptr);
        j["lesions"] = Json::array();
        for (const auto& l : lesions) {
            Json jl;
            jl["center"] = Json::array({l.center_vox[0], l.center_vox[1], l.center_vox[2]});
            jl["semi_axes_mm"] =
                Json::array({l.semi_axes_mm[0], l.semi_axes_mm[1], l.semi_axes_mm[2]});
            jl["has_et"] = l.has_et;
            jl["has_ed"] = l.has_ed;
            jl["ed_rim_mm"] = l.ed_rim_mm;
            j["lesions"].push_back(std::move(jl));
        }
        return j;
    }

    static PhantomSpec from_json(const Json& j) {
        PhantomSpec s;
        s.name = j.at("name").get<std::string>();
        for (int a = 0; a < 3; ++a) {
            s.dims[a] = j.at("dims").at(a).get<std::uint32_t>();
            s.spacing[a] = j.at("spacing").at(a).get<double>();
        }
        s.cohort = cohort_from_string(j.at("cohort").get<std::string>());
        s.shell_voxels = j.at("shell_voxels").get<double>();
        s.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("use_numerals")) s.use_numerals = j.at("use_numerals").get<bool>();
        if (j.contains("uncertain_modality") && !j.at("uncertain_modality").is_null())
            s.uncertain_modality =
                modality_from_string(j.at("uncertain_modality").get<std::string>());
        for (const auto& jl : j.at("lesions")) {
            LesionSpec l;
            for (int a = 0; a < 3; ++a) {
                l.center_vox[a] = jl.at("center").at(a).get<double>();
                l.semi_axes_mm[a] = jl.at("semi_axes_mm").at(a).get<double>();
            }
            l.has_et = jl.at("has_et").get<bool>();
            l.has_ed = jl.at("has_ed").get<bool>();
            l.ed_rim_mm = jl.at("ed_rim_mm").get<double>();
            s.lesions.push_back(l);
        }
        return s;
    }
};

struct Phantom {
    VoxelGrid labels;
    AnatomyMasks masks;
    ReportDocument report;
    std::string report_text; // section-header file form of `report`
};

namespace detail {

enum class Compartment { Outside, Shell, Interior };

struct BrainGeometry {
    std::array<double, 3> center_mm;
    double radius_mm = 0.0;
    double shell_mm = 0.0;

    Compartment classify(const std::array<double, 3>& pos_mm) const {
        const double dx = pos_mm[0] - center_mm[0];
        const double dy = pos_mm[1] - center_mm[1];
        const double dz = pos_mm[2] - center_mm[2];
        const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
        if (d > radius_mm) return Compartment::Outside;
        if (d >= radius_mm - shell_mm) return Compartment::Shell;
        return Compartment::Interior;
    }
};

inline BrainGeometry brain_geometry(const Dims3& dims, const Spacing3& spacing,
                                    double shell_voxels) {
    BrainGeometry g;
    double min_extent = dims[0] * spacing[0];
    double min_spacing = spacing[0];
    for (int a = 0; a < 3; ++a) {
        g.center_mm[a] = (dims[a] - 1) * 0.5 * spacing[a];
        min_extent = std::min(min_extent, dims[a] * spacing[a]);
        min_spacing = std::min(min_spacing, spacing[a]);
    }
    g.radius_mm = 0.4 * min_extent;
    g.shell_mm = shell_voxels * min_spacing;
    return g;
}

inline const char* count_word(std::size_t n, bool use_numerals) {
    static const char* words[] = {"zero", "one",  "two",   "three", "four",  "five", "six",
                                  "seven", "eight", "nine", "ten",  "eleven", "twelve"};
    if (use_numerals && n >= 1 && n <= 12) return words[n];
    return n <= 1 ? "single" : "multiple";
}

inline std::string capitalize(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

inline std::string maybe_hedge(std::string sentence, bool hedge) {
    if (!hedge) return sentence;
    sentence[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(sentence[0])));
    return "Possible " + sentence;
}

} // namespace detail

// Anatomy masks alone, also used by the gradient-check harness.
inline AnatomyMasks make_shell_masks(const Dims3& dims, const Spacing3& spacing,
                                     double shell_voxels) {
    const auto geo = detail::brain_geometry(dims, spacing, shell_voxels);
    AnatomyMasks masks{VoxelGrid(dims, spacing), VoxelGrid(dims, spacing)};
    for (std::uint32_t z = 0; z < dims[2]; ++z)
        for (std::uint32_t y = 0; y < dims[1]; ++y)
            for (std::uint32_t x = 0; x < dims[0]; ++x) {
                const std::array<double, 3> pos{x * spacing[0], y * spacing[1], z * spacing[2]};
                const auto comp = geo.classify(pos);
                if (comp == detail::Compartment::Shell)
                    masks.dural(x, y, z) = 1.0f;
                else if (comp == detail::Compartment::Interior)
                    masks.parench(x, y, z) = 1.0f;
            }
    return masks;
}

inline Phantom generate(const PhantomSpec& spec) {
    if (spec.cohort != Cohort::MEN && spec.cohort != Cohort::MET)
        throw SpecInvalid("phantom: cohort must be MEN or MET");
    if (!(spec.shell_voxels > 0.0))
        throw SpecInvalid("phantom: shell thickness must be positive");
    for (int a = 0; a < 3; ++a)
        if (spec.dims[a] < 5)
            throw SpecInvalid("phantom: dims must be at least 5 so the brain fits");

    const auto geo = detail::brain_geometry(spec.dims, spec.spacing, spec.shell_voxels);
    const auto required =
        spec.cohort == Cohort::MEN ? detail::Compartment::Shell : detail::Compartment::Interior;

    Phantom ph;
    ph.labels = VoxelGrid(spec.dims, spec.spacing);
    ph.masks = make_shell_masks(spec.dims, spec.spacing, spec.shell_voxels);

    auto position_mm = [&](const std::array<double, 3>& vox) {
        return std::array<double, 3>{vox[0] * spec.spacing[0], vox[1] * spec.spacing[1],
                                     vox[2] * spec.spacing[2]};
    };

    for (const auto& l : spec.lesions) {
        for (int a = 0; a < 3; ++a) {
            if (!(l.semi_axes_mm[a] > 0.0))
                throw SpecInvalid("phantom: lesion semi-axes must be positive");
            if (l.center_vox[a] < 0.0 || l.center_vox[a] > spec.dims[a] - 1)
                throw SpecInvalid("phantom: lesion center outside the grid");
        }
        if (l.ed_rim_mm < 0.0)
            throw SpecInvalid("phantom: ed_rim_mm must be non-negative");
        if (geo.classify(position_mm(l.center_vox)) != required)
            throw SpecInvalid(
                spec.cohort == Cohort::MEN
                    ? "phantom: MEN lesion centers must lie in the dural shell"
                    : "phantom: MET lesion centers must lie in the parenchyma");
    }

    // Lesion voxels are clipped to the cohort compartment, which is what
    // guarantees zero prior mass for the ground truth.
    auto in_compartment = [&](std::uint32_t x, std::uint32_t y, std::uint32_t z) {
        const std::array<double, 3> pos{x * spec.spacing[0], y * spec.spacing[1],
                                        z * spec.spacing[2]};
        return geo.classify(pos) == required;
    };
    auto elliptic_rho2 = [&](const LesionSpec& l, std::uint32_t x, std::uint32_t y,
                             std::uint32_t z, double grow_mm) {
        double rho2 = 0.0;
        const std::array<double, 3> pos{x * spec.spacing[0], y * spec.spacing[1],
                                        z * spec.spacing[2]};
        const auto c = position_mm(l.center_vox);
        for (int a = 0; a < 3; ++a) {
            const double r = (pos[a] - c[a]) / (l.semi_axes_mm[a] + grow_mm);
            rho2 += r * r;
        }
        return rho2;
    };

    // Bodies first (ET/TC), then edema rims only onto background.
    for (const auto& l : spec.lesions) {
        for (std::uint32_t z = 0; z < spec.dims[2]; ++z)
            for (std::uint32_t y = 0; y < spec.dims[1]; ++y)
                for (std::uint32_t x = 0; x < spec.dims[0]; ++x) {
                    if (!in_compartment(x, y, z)) continue;
                    const double rho2 = elliptic_rho2(l, x, y, z, 0.0);
                    if (rho2 > 1.0) continue;
                    float label = kLabelTc;
                    if (l.has_et) {
                        // MEN: solid enhancement; MET: enhancing ring over a core.
                        if (spec.cohort == Cohort::MEN || rho2 > 0.36) label = kLabelEt;
                    }
                    ph.labels(x, y, z) = label;
                }
    }
    for (const auto& l : spec.lesions) {
        if (!l.has_ed || l.ed_rim_mm <= 0.0) continue;
        for (std::uint32_t z = 0; z < spec.dims[2]; ++z)
            for (std::uint32_t y = 0; y < spec.dims[1]; ++y)
                for (std::uint32_t x = 0; x < spec.dims[0]; ++x) {
                    if (!in_compartment(x, y, z)) continue;
                    if (ph.labels(x, y, z) != kLabelBackground) continue;
                    if (elliptic_rho2(l, x, y, z, 0.0) <= 1.0) continue;
                    if (elliptic_rho2(l, x, y, z, l.ed_rim_mm) <= 1.0)
                        ph.labels(x, y, z) = kLabelEd;
                }
    }

    // ---- measure, then write the report from the measurements ----
    std::size_t v_et = 0, v_ed = 0, v_tc = 0;
    for (std::size_t i = 0; i < ph.labels.voxel_count(); ++i) {
        if (ph.labels[i] == kLabelEt) ++v_et;
        else if (ph.labels[i] == kLabelEd) ++v_ed;
        else if (ph.labels[i] == kLabelTc) ++v_tc;
    }

    VoxelGrid wt_bin(spec.dims, spec.spacing);
    for (std::size_t i = 0; i < ph.labels.voxel_count(); ++i)
        wt_bin[i] = ph.labels[i] != kLabelBackground ? 1.0f : 0.0f;
    const ComponentSet comps = label_components(wt_bin, Connectivity::TwentySix);

    std::string global;
    if (comps.count == 0) {
        global = "Unremarkable study.";
    } else {
        const ComponentStats* largest = &comps.stats[0];
        for (const auto& s : comps.stats)
            if (s.max_extent_mm > largest->max_extent_mm) largest = &s;

        const std::string word = detail::count_word(comps.count, spec.use_numerals);
        if (spec.cohort == Cohort::MEN) {
            global = detail::capitalize((comps.count == 1 && !spec.use_numerals ? "a " : "") +
                                        word + " extra-axial dural-based " +
                                        (comps.count == 1 ? "mass" : "masses") +
                                        " along the falx cerebri.");
        } else {
            global = detail::capitalize((comps.count == 1 && !spec.use_numerals ? "a " : "") +
                                        word + " parenchymal intra-axial " +
                                        (comps.count == 1 ? "lesion" : "lesions") + ".");
        }
        global += " The largest lesion measures " + format_double(largest->extents_mm[0]) + "x" +
                  format_double(largest->extents_mm[1]) + "x" +
                  format_double(largest->extents_mm[2]) + " mm.";
    }

    auto hedged = [&](Modality m) {
        return spec.uncertain_modality && *spec.uncertain_modality == m;
    };
    const std::string t1 = detail::maybe_hedge(
        v_tc > 0 ? "There is a hypointense core." : "No hypointense core is seen.",
        hedged(Modality::T1));
    const std::string t1c = detail::maybe_hedge(
        v_et > 0 ? (spec.cohort == Cohort::MEN ? std::string("Solid homogeneous enhancement.")
                                               : std::string("Ring enhancement."))
                 : std::string("No enhancement."),
        hedged(Modality::T1c));
    const std::string t2 = "Heterogeneous signal intensity.";
    const std::string flair = detail::maybe_hedge(
        v_ed > 0 ? "Surrounding edema is noted." : "No surrounding edema.",
        hedged(Modality::FLAIR));

    ph.report.global_text = global;
    ph.report.modality_texts[Modality::T1] = t1;
    ph.report.modality_texts[Modality::T1c] = t1c;
    ph.report.modality_texts[Modality::T2] = t2;
    ph.report.modality_texts[Modality::FLAIR] = flair;

    ph.report_text = "[GLOBAL]\n" + global + "\n[T1]\n" + t1 + "\n[T1C]\n" + t1c + "\n[T2]\n" +
                     t2 + "\n[FLAIR]\n" + flair + "\n";
    return ph;
}

// One-hot probabilities from a label volume.
inline ProbMaps ground_truth_probmaps(const VoxelGrid& labels) {
    ProbMaps maps{VoxelGrid(labels.dims(), labels.spacing()),
                  VoxelGrid(labels.dims(), labels.spacing()),
                  VoxelGrid(labels.dims(), labels.spacing())};
    for (std::size_t i = 0; i < labels.voxel_count(); ++i) {
        const float label = labels[i];
        if (label == kLabelEt)
            maps.et[i] = 1.0f;
        else if (label == kLabelEd)
            maps.ed[i] = 1.0f;
        else if (label == kLabelTc)
            maps.tc[i] = 1.0f;
        else if (label != kLabelBackground)
            throw FormatError("ground_truth_probmaps: labels must be one of {0,1,2,3}");
    }
    return maps;
}

// ---- suite manifests ----

inline std::vector<PhantomSpec> suite_from_json(const Json& j) {
    std::vector<PhantomSpec> suite;
    for (const auto& jp : j.at("phantoms")) suite.push_back(PhantomSpec::from_json(jp));
    return suite;
}

inline Json suite_to_json(const std::vector<PhantomSpec>& suite) {
    Json j;
    j["phantoms"] = Json::array();
    for (const auto& s : suite) j["phantoms"].push_back(s.to_json());
    return j;
}

inline std::vector<PhantomSpec> load_suite(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("suite: cannot open " + path.string());
    Json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("suite: invalid JSON in " + path.string() + ": " + e.what());
    }
    return suite_from_json(j);
}

} // namespace rsc
