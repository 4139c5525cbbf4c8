#pragma once
// Report-derived constraint losses over 3D probability maps:
//   exist/absence per substructure   Present: max(0, 1 - V_k), Absent: V_k
//   size                             |d_max - max_c d_c| (optionally one-sided)
//   count                            max(0, N_qual - |C_pred|)
//   anatomical prior                 sum of WT mass in the wrong compartment
// plus the Dice+CE segmentation loss and the mixed-batch total.
//
// Volumes V_k are voxel counts. Hard variant thresholds at tau before
// measuring; soft variant uses probability mass directly (exist and
// prior only - size and count always run on the thresholded map and
// carry no gradient through component structure).

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rsc/components.hpp"
#include "rsc/cues.hpp"
#include "rsc/errors.hpp"
#include "rsc/prob_maps.hpp"
#include "rsc/voxel_grid.hpp"

namespace rsc {

struct LossWeights {
    double w_r = 0.2;
    double w_size = 1.0;
    double w_count = 0.5;
    double w_prior = 0.2;
};

enum class Variant { Hard, Soft };

inline const char* to_string(SizeMode m) {
    return m == SizeMode::MaxExtent ? "MaxExtent" : "Volume";
}
inline const char* to_string(Variant v) { return v == Variant::Hard ? "Hard" : "Soft"; }

inline SizeMode size_mode_from_string(const std::string& s) {
    if (s == "MaxExtent") return SizeMode::MaxExtent;
    if (s == "Volume") return SizeMode::Volume;
    throw FormatError("unknown size_mode: " + s);
}
inline Variant variant_from_string(const std::string& s) {
    if (s == "Hard") return Variant::Hard;
    if (s == "Soft") return Variant::Soft;
    throw FormatError("unknown variant: " + s);
}

struct LossConfig {
    double tau = 0.5;
    Connectivity connectivity = Connectivity::TwentySix;
    SizeMode size_mode = SizeMode::MaxExtent;
    bool size_one_sided = false;
    Variant variant = Variant::Hard;
    LossWeights weights;

    static LossConfig from_json(const Json& j) {
        LossConfig cfg;
        if (j.contains("tau")) cfg.tau = j.at("tau").get<double>();
        if (j.contains("connectivity")) {
            const int c = j.at("connectivity").get<int>();
            if (c != 6 && c != 26)
                throw FormatError("config: connectivity must be 6 or 26");
            cfg.connectivity = c == 6 ? Connectivity::Six : Connectivity::TwentySix;
        }
        if (j.contains("size_mode"))
            cfg.size_mode = size_mode_from_string(j.at("size_mode").get<std::string>());
        if (j.contains("size_one_sided")) cfg.size_one_sided = j.at("size_one_sided").get<bool>();
        if (j.contains("variant"))
            cfg.variant = variant_from_string(j.at("variant").get<std::string>());
        if (j.contains("weights")) {
            const auto& w = j.at("weights");
            if (w.contains("w_r")) cfg.weights.w_r = w.at("w_r").get<double>();
            if (w.contains("w_size")) cfg.weights.w_size = w.at("w_size").get<double>();
            if (w.contains("w_count")) cfg.weights.w_count = w.at("w_count").get<double>();
            if (w.contains("w_prior")) cfg.weights.w_prior = w.at("w_prior").get<double>();
        }
        return cfg;
    }

    Json to_json() const {
        Json j;
        j["tau"] = tau;
        j["connectivity"] = static_cast<int>(connectivity);
        j["size_mode"] = to_string(size_mode);
        j["size_one_sided"] = size_one_sided;
        j["variant"] = to_string(variant);
        j["weights"] = Json{{"w_r", weights.w_r},
                            {"w_size", weights.w_size},
                            {"w_count", weights.w_count},
                            {"w_prior", weights.w_prior}};
        return j;
    }
};

// ---- elementary volumes ----

// Count of voxels with p(x) >= tau.
inline double volume_hard(const VoxelGrid& p, double tau) {
    double n = 0.0;
    for (std::size_t i = 0; i < p.voxel_count(); ++i)
        if (p[i] >= tau) n += 1.0;
    return n;
}

// Total probability mass, accumulated in double.
inline double volume_soft(const VoxelGrid& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.voxel_count(); ++i) s += p[i];
    return s;
}

// ---- per-term losses ----

inline double exist_loss(Polarity polarity, double certainty, double v) {
    switch (polarity) {
        case Polarity::Present: return certainty * std::max(0.0, 1.0 - v);
        case Polarity::Absent: return certainty * v;
        case Polarity::Unstated: return 0.0;
    }
    return 0.0;
}

// Reported size of the largest lesion in the units of the chosen mode:
// max dimension in mm, or ellipsoid volume pi/6*a*b*c in mm^3 (a single
// diameter is treated as a sphere).
inline std::optional<double> reported_size(const QuantCue& quant, SizeMode mode) {
    if (quant.largest_dims_mm) {
        const auto& d = *quant.largest_dims_mm;
        if (mode == SizeMode::MaxExtent) return std::max({d[0], d[1], d[2]});
        return M_PI / 6.0 * d[0] * d[1] * d[2];
    }
    if (quant.largest_diameter_mm) {
        const double d = *quant.largest_diameter_mm;
        if (mode == SizeMode::MaxExtent) return d;
        return M_PI / 6.0 * d * d * d;
    }
    return std::nullopt;
}

// |d_max - max_c d_c|; with no components the largest predicted size is 0.
// Returns 0 when the report carries no size cue. Unscaled by certainty.
inline double size_loss(const QuantCue& quant, const ComponentSet& comps, SizeMode mode,
                        bool one_sided = false) {
    const auto d_max = reported_size(quant, mode);
    if (!d_max) return 0.0;
    const double predicted = largest_component_size(comps, mode);
    const double diff = *d_max - predicted;
    return one_sided ? std::max(0.0, diff) : std::fabs(diff);
}

// One-sided hinge: penalizes predicting fewer than N_qual components.
inline double count_loss(int n_qual, const ComponentSet& comps) {
    return std::max(0.0, static_cast<double>(n_qual) - static_cast<double>(comps.count));
}

// Dot product of WT mass with the compartment the cohort must avoid.
inline double prior_loss(const VoxelGrid& wt, const AnatomyMasks& masks, Cohort cohort) {
    if (cohort == Cohort::Unknown) return 0.0;
    require_same_shape(wt, masks.dural, "prior_loss");
    require_same_shape(wt, masks.parench, "prior_loss");
    const VoxelGrid& forbidden = (cohort == Cohort::MEN) ? masks.parench : masks.dural;
    double s = 0.0;
    for (std::size_t i = 0; i < wt.voxel_count(); ++i)
        s += static_cast<double>(wt[i]) * forbidden[i];
    return s;
}

// ---- composition ----

struct LossBreakdown {
    std::map<Substructure, double> exist_per_class; // ET, ED, TC always present
    double size = 0.0;  // certainty-scaled
    double count = 0.0; // certainty-scaled
    double prior = 0.0;
    double report_total = 0.0;
    SizeMode size_mode = SizeMode::MaxExtent;
    double tau = 0.5;
    Connectivity connectivity = Connectivity::TwentySix;
    Variant variant = Variant::Hard;
    bool size_one_sided = false;
    LossWeights weights;

    double exist_sum() const {
        double s = 0.0;
        for (const auto& [k, v] : exist_per_class) s += v;
        return s;
    }

    // Must reproduce report_total bit-for-bit.
    double recompute_total() const {
        return exist_sum() + weights.w_size * size + weights.w_count * count +
               weights.w_prior * prior;
    }

    Json to_json() const {
        Json j;
        Json je;
        for (Substructure k : {Substructure::ET, Substructure::ED, Substructure::TC})
            je[to_string(k)] = exist_per_class.count(k) ? exist_per_class.at(k) : 0.0;
        j["exist"] = std::move(je);
        j["size"] = size;
        j["count"] = count;
        j["prior"] = prior;
        j["report_total"] = report_total;
        j["size_mode"] = to_string(size_mode);
        j["config"] = Json{{"tau", tau},
                           {"connectivity", static_cast<int>(connectivity)},
                           {"variant", to_string(variant)},
                           {"size_one_sided", size_one_sided}};
        j["weights"] = Json{{"w_r", weights.w_r},
                            {"w_size", weights.w_size},
                            {"w_count", weights.w_count},
                            {"w_prior", weights.w_prior}};
        return j;
    }
};

inline LossBreakdown report_loss(const CueSet& cues, const ProbMaps& maps,
                                 const AnatomyMasks& masks, const LossConfig& cfg) {
    require_same_shape(maps.et, maps.ed, "report_loss");
    require_same_shape(maps.et, maps.tc, "report_loss");

    LossBreakdown bd;
    bd.size_mode = cfg.size_mode;
    bd.tau = cfg.tau;
    bd.connectivity = cfg.connectivity;
    bd.variant = cfg.variant;
    bd.size_one_sided = cfg.size_one_sided;
    bd.weights = cfg.weights;

    const auto channel = [&](Substructure k) -> const VoxelGrid& {
        switch (k) {
            case Substructure::ET: return maps.et;
            case Substructure::ED: return maps.ed;
            default: return maps.tc;
        }
    };

    // Existence / absence, summed over cues; conflicting cues from
    // different modalities each contribute their own term.
    for (Substructure k : {Substructure::ET, Substructure::ED, Substructure::TC})
        bd.exist_per_class[k] = 0.0;
    for (const QualCue& q : cues.qual_cues) {
        if (q.polarity == Polarity::Unstated) continue;
        const VoxelGrid& p = channel(q.substructure);
        const double v = cfg.variant == Variant::Hard ? volume_hard(p, cfg.tau) : volume_soft(p);
        bd.exist_per_class[q.substructure] += exist_loss(q.polarity, q.certainty, v);
    }

    // Size and count act on the thresholded whole-tumor components.
    if (cues.quant.has_size() || cues.quant.has_count()) {
        const VoxelGrid wt_bin = threshold(maps.make_wt(), cfg.tau);
        const ComponentSet comps = label_components(wt_bin, cfg.connectivity);
        if (cues.quant.has_size())
            bd.size = cues.quant.size_certainty *
                      size_loss(cues.quant, comps, cfg.size_mode, cfg.size_one_sided);
        if (cues.quant.has_count())
            bd.count = cues.quant.count_certainty * count_loss(*cues.quant.min_count, comps);
    }

    if (cues.cohort.cohort != Cohort::Unknown) {
        const VoxelGrid wt = maps.make_wt();
        bd.prior = cfg.variant == Variant::Hard
                       ? prior_loss(threshold(wt, cfg.tau), masks, cues.cohort.cohort)
                       : prior_loss(wt, masks, cues.cohort.cohort);
    }

    bd.report_total = bd.recompute_total();
    return bd;
}

// ---- segmentation loss (Dice + CE) ----

struct SegLossParts {
    double dice = 0.0; // mean over ET/ED/TC of (1 - soft Dice), eps = 1
    double ce = 0.0;   // voxel-mean 4-class cross-entropy
    double total() const { return dice + ce; }
};

inline SegLossParts seg_loss_parts(const ProbMaps& pred, const VoxelGrid& truth) {
    require_same_shape(pred.et, truth, "seg_loss");
    const std::size_t n = truth.voxel_count();
    constexpr double eps = 1.0;
    constexpr double clamp_lo = 1e-7, clamp_hi = 1.0 - 1e-7;

    const VoxelGrid* channels[3] = {&pred.et, &pred.ed, &pred.tc};
    const float labels[3] = {kLabelEt, kLabelEd, kLabelTc};

    SegLossParts parts;
    for (int k = 0; k < 3; ++k) {
        double inter = 0.0, psum = 0.0, tsum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double p = (*channels[k])[i];
            const double t = (truth[i] == labels[k]) ? 1.0 : 0.0;
            inter += p * t;
            psum += p;
            tsum += t;
        }
        const double dice = (2.0 * inter + eps) / (psum + tsum + eps);
        parts.dice += (1.0 - dice) / 3.0;
    }

    double ce = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const float label = truth[i];
        double p;
        if (label == kLabelEt)
            p = pred.et[i];
        else if (label == kLabelEd)
            p = pred.ed[i];
        else if (label == kLabelTc)
            p = pred.tc[i];
        else if (label == kLabelBackground)
            p = 1.0 - (static_cast<double>(pred.et[i]) + pred.ed[i] + pred.tc[i]);
        else
            throw FormatError("seg_loss: truth labels must be one of {0,1,2,3}");
        ce -= std::log(std::clamp(p, clamp_lo, clamp_hi));
    }
    parts.ce = ce / static_cast<double>(n);
    return parts;
}

inline double seg_loss(const ProbMaps& pred, const VoxelGrid& truth) {
    return seg_loss_parts(pred, truth).total();
}

// ---- mixed-batch total ----

struct MaskedCase {
    ProbMaps pred;
    VoxelGrid truth;
};

struct ReportCase {
    ProbMaps pred;
    CueSet cues;
    AnatomyMasks masks;
};

inline double total_loss(const std::vector<MaskedCase>& batch_masked,
                         const std::vector<ReportCase>& batch_report, const LossConfig& cfg) {
    if (batch_masked.empty() && batch_report.empty())
        throw BothBatchesEmpty("total_loss: both batches empty");
    double total = 0.0;
    if (!batch_masked.empty()) {
        double s = 0.0;
        for (const auto& item : batch_masked) s += seg_loss(item.pred, item.truth);
        total += s / static_cast<double>(batch_masked.size());
    }
    if (!batch_report.empty()) {
        double s = 0.0;
        for (const auto& item : batch_report)
            s += report_loss(item.cues, item.pred, item.masks, cfg).report_total;
        total += cfg.weights.w_r * s / static_cast<double>(batch_report.size());
    }
    return total;
}

} // namespace rsc
