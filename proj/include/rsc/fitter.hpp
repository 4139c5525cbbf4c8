#pragma once
// Differentiable surrogate of the report loss over a LogitField, its
// analytic gradient, a finite-difference checker, and a plain
// gradient-descent fitter.
//
// Surrogate composition:
//   exist  - soft volumes V_k = sum_x p_k(x) through the hinge of the
//            hard formula;
//   prior  - already smooth, sum_x wt(x) * M(x);
//   count  - max(0, N - soft_count) with soft_count = sum over hard
//            components (wt >= tau) of min(1, component probability
//            mass). Piecewise smooth: component topology is frozen at
//            the current threshold crossing, so gradients are valid
//            away from wt(x) == tau.
//   size   - omitted entirely: it has no useful gradient through
//            component structure, so it is not part of the objective.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rsc/components.hpp"
#include "rsc/cues.hpp"
#include "rsc/errors.hpp"
#include "rsc/logit_field.hpp"
#include "rsc/loss.hpp"
#include "rsc/numfmt.hpp"
#include "rsc/prob_maps.hpp"
#include "rsc/rng.hpp"
#include "rsc/voxel_grid.hpp"

namespace rsc {

// Which loss-term groups participate (the ablation axis). "global" is
// the size/count group; only count contributes to the soft objective.
struct TermSet {
    bool exist = true;
    bool global = true;
    bool prior = true;

    std::string name() const {
        std::string s;
        if (exist) s += "exist";
        if (global) s += s.empty() ? "global" : "+global";
        if (prior) s += s.empty() ? "prior" : "+prior";
        return s.empty() ? "none" : s;
    }
};

// Diagnostics from one soft-loss evaluation; the gradient checker uses
// them to stay away from kinks.
struct SoftLossInfo {
    std::array<double, 3> soft_volumes{0.0, 0.0, 0.0};
    bool count_active = false;       // count term present and hinge engaged
    double soft_count = 0.0;
    std::vector<double> comp_mass;   // S_c per component of the support
    std::vector<std::uint32_t> comp_label_of_voxel; // 0 = not in support
};

namespace detail {

struct ProbBuffers {
    std::vector<double> p[3];
    std::vector<double> wt;
};

inline void compute_probs(const LogitField& field, ProbBuffers& buf) {
    const std::size_t n = field.voxel_count();
    for (auto& ch : buf.p) ch.resize(n);
    buf.wt.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double e0 = std::exp(field.logits[0][i]);
        const double e1 = std::exp(field.logits[1][i]);
        const double e2 = std::exp(field.logits[2][i]);
        const double denom = 1.0 + e0 + e1 + e2;
        buf.p[0][i] = e0 / denom;
        buf.p[1][i] = e1 / denom;
        buf.p[2][i] = e2 / denom;
        buf.wt[i] = (e0 + e1 + e2) / denom;
    }
}

inline const VoxelGrid& forbidden_mask(const AnatomyMasks& masks, Cohort cohort) {
    return cohort == Cohort::MEN ? masks.parench : masks.dural;
}

} // namespace detail

inline double soft_report_loss(const LogitField& field, const CueSet& cues,
                               const AnatomyMasks& masks, const LossConfig& cfg,
                               const TermSet& terms = TermSet{}, SoftLossInfo* info = nullptr) {
    const std::size_t n = field.voxel_count();
    detail::ProbBuffers buf;
    detail::compute_probs(field, buf);

    std::array<double, 3> volumes{0.0, 0.0, 0.0};
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < n; ++i) volumes[c] += buf.p[c][i];
    if (info) info->soft_volumes = volumes;

    double loss = 0.0;
    if (terms.exist) {
        for (const QualCue& q : cues.qual_cues) {
            const int c = channel_of(q.substructure);
            if (c < 0) continue;
            loss += exist_loss(q.polarity, q.certainty, volumes[c]);
        }
    }

    if (terms.prior && cues.cohort.cohort != Cohort::Unknown && cfg.weights.w_prior != 0.0) {
        const VoxelGrid& forbidden = detail::forbidden_mask(masks, cues.cohort.cohort);
        if (forbidden.voxel_count() != n)
            throw DimsMismatch("soft_report_loss: mask dims differ from field dims");
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += buf.wt[i] * forbidden[i];
        loss += cfg.weights.w_prior * s;
    }

    if (terms.global && cues.quant.has_count() && cfg.weights.w_count != 0.0) {
        VoxelGrid support(field.dims, field.spacing);
        for (std::size_t i = 0; i < n; ++i)
            support[i] = buf.wt[i] >= cfg.tau ? 1.0f : 0.0f;
        const ComponentSet comps = label_components(support, cfg.connectivity);

        std::vector<double> mass(comps.count, 0.0);
        std::vector<std::uint32_t> label_of(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto label = static_cast<std::uint32_t>(comps.labels[i]);
            label_of[i] = label;
            if (label > 0) mass[label - 1] += buf.wt[i];
        }
        double soft_count = 0.0;
        for (double m : mass) soft_count += std::min(1.0, m);

        const double hinge =
            std::max(0.0, static_cast<double>(*cues.quant.min_count) - soft_count);
        loss += cfg.weights.w_count * cues.quant.count_certainty * hinge;

        if (info) {
            info->soft_count = soft_count;
            info->count_active = hinge > 0.0;
            info->comp_mass = std::move(mass);
            info->comp_label_of_voxel = std::move(label_of);
        }
    }
    return loss;
}

// Analytic gradient w.r.t. every logit. Treats component topology and
// hinge activity as locally constant, which is exact away from the
// kinks listed in SoftLossInfo.
inline void soft_report_grad(const LogitField& field, const CueSet& cues,
                             const AnatomyMasks& masks, const LossConfig& cfg,
                             const TermSet& terms, std::array<std::vector<double>, 3>& grad) {
    const std::size_t n = field.voxel_count();
    SoftLossInfo info;
    soft_report_loss(field, cues, masks, cfg, terms, &info);

    detail::ProbBuffers buf;
    detail::compute_probs(field, buf);

    // Per-class coefficient on V_k from the exist terms.
    std::array<double, 3> a{0.0, 0.0, 0.0};
    if (terms.exist) {
        for (const QualCue& q : cues.qual_cues) {
            const int c = channel_of(q.substructure);
            if (c < 0) continue;
            if (q.polarity == Polarity::Present && info.soft_volumes[c] < 1.0)
                a[c] -= q.certainty;
            else if (q.polarity == Polarity::Absent)
                a[c] += q.certainty;
        }
    }

    const bool use_prior =
        terms.prior && cues.cohort.cohort != Cohort::Unknown && cfg.weights.w_prior != 0.0;
    const VoxelGrid* forbidden = nullptr;
    if (use_prior) {
        forbidden = &detail::forbidden_mask(masks, cues.cohort.cohort);
        if (forbidden->voxel_count() != n)
            throw DimsMismatch("soft_report_grad: mask dims differ from field dims");
    }

    const bool use_count = terms.global && cues.quant.has_count() &&
                           cfg.weights.w_count != 0.0 && info.count_active;
    const double count_coeff = use_count ? cfg.weights.w_count * cues.quant.count_certainty : 0.0;

    for (auto& ch : grad) ch.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        // b = dL/dwt(i): prior mass plus the pull of undersized components.
        double b = 0.0;
        if (use_prior) b += cfg.weights.w_prior * (*forbidden)[i];
        if (use_count) {
            const std::uint32_t label = info.comp_label_of_voxel[i];
            if (label > 0 && info.comp_mass[label - 1] < 1.0) b -= count_coeff;
        }
        const double p0 = buf.p[0][i], p1 = buf.p[1][i], p2 = buf.p[2][i];
        const double dot = (a[0] + b) * p0 + (a[1] + b) * p1 + (a[2] + b) * p2;
        grad[0][i] = p0 * ((a[0] + b) - dot);
        grad[1][i] = p1 * ((a[1] + b) - dot);
        grad[2][i] = p2 * ((a[2] + b) - dot);
    }
}

// ---------------------------------------------------------------------
// Gradient verification against central finite differences.
// ---------------------------------------------------------------------

struct GradCheckResult {
    double max_rel_err = 0.0;
    std::size_t checked = 0;
    std::size_t skipped = 0;
    std::size_t worst_voxel = 0;
    int worst_channel = -1;
    double worst_analytic = 0.0;
    double worst_fd = 0.0;

    std::string worst_description() const {
        return "channel " + std::to_string(worst_channel) + " voxel " +
               std::to_string(worst_voxel) + " analytic " + format_double(worst_analytic) +
               " fd " + format_double(worst_fd);
    }
};

// Checks n_coords randomly sampled logit coordinates, skipping those
// within kink margins (component threshold, hinge boundaries, the
// min(1, S_c) corner). Pass test_hook_corrupt to force a failure.
inline GradCheckResult gradient_check(const LogitField& field, const CueSet& cues,
                                      const AnatomyMasks& masks, const LossConfig& cfg,
                                      const TermSet& terms, std::size_t n_coords, Rng& rng,
                                      double h = 1e-4, bool test_hook_corrupt = false) {
    constexpr double kKinkMargin = 1e-3;
    GradCheckResult result;

    SoftLossInfo info;
    soft_report_loss(field, cues, masks, cfg, terms, &info);

    // Scenario-wide kinks: a presence hinge or the count hinge sitting
    // exactly on its boundary invalidates finite differences everywhere.
    if (terms.exist)
        for (const QualCue& q : cues.qual_cues) {
            const int c = channel_of(q.substructure);
            if (c >= 0 && q.polarity == Polarity::Present &&
                std::fabs(info.soft_volumes[c] - 1.0) < kKinkMargin)
                return result;
        }
    const bool count_in_play = terms.global && cues.quant.has_count();
    if (count_in_play &&
        std::fabs(static_cast<double>(*cues.quant.min_count) - info.soft_count) < kKinkMargin)
        return result;

    std::array<std::vector<double>, 3> grad;
    soft_report_grad(field, cues, masks, cfg, terms, grad);

    detail::ProbBuffers buf;
    detail::compute_probs(field, buf);

    LogitField probe = field;
    const std::size_t n = field.voxel_count();
    for (std::size_t trial = 0; trial < n_coords; ++trial) {
        const int c = static_cast<int>(rng.below(3));
        const std::size_t i = static_cast<std::size_t>(rng.below(n));

        if (count_in_play) {
            if (std::fabs(buf.wt[i] - cfg.tau) < kKinkMargin) {
                ++result.skipped;
                continue;
            }
            const std::uint32_t label = info.comp_label_of_voxel.empty()
                                            ? 0
                                            : info.comp_label_of_voxel[i];
            if (label > 0 && std::fabs(info.comp_mass[label - 1] - 1.0) < kKinkMargin) {
                ++result.skipped;
                continue;
            }
        }

        const double saved = probe.logits[c][i];
        probe.logits[c][i] = saved + h;
        const double lp = soft_report_loss(probe, cues, masks, cfg, terms);
        probe.logits[c][i] = saved - h;
        const double lm = soft_report_loss(probe, cues, masks, cfg, terms);
        probe.logits[c][i] = saved;

        const double fd = (lp - lm) / (2.0 * h);
        double analytic = grad[c][i];
        if (test_hook_corrupt) analytic += 1e-2;

        ++result.checked;
        const double scale = std::max(std::fabs(analytic), std::fabs(fd));
        if (scale < 1e-8) continue; // both effectively zero
        const double rel = std::fabs(analytic - fd) / scale;
        if (rel > result.max_rel_err) {
            result.max_rel_err = rel;
            result.worst_voxel = i;
            result.worst_channel = c;
            result.worst_analytic = analytic;
            result.worst_fd = fd;
        }
    }
    return result;
}

// ---------------------------------------------------------------------
// fit: plain gradient descent with a fixed learning rate.
// ---------------------------------------------------------------------

struct ConstraintStatus {
    std::map<Substructure, bool> exist_satisfied; // ET/ED/TC
    bool count_satisfied = true;
    double prior_value = 0.0;   // final thresholded-WT voxels in the penalized compartment
    double prior_initial = 0.0; // same measure at the starting field
    bool prior_satisfied = true;

    bool all_satisfied() const {
        for (const auto& [k, ok] : exist_satisfied)
            if (!ok) return false;
        return count_satisfied && prior_satisfied;
    }

    Json to_json() const {
        Json j;
        Json je;
        for (Substructure k : {Substructure::ET, Substructure::ED, Substructure::TC})
            je[to_string(k)] = exist_satisfied.count(k) ? exist_satisfied.at(k) : true;
        j["exist_satisfied"] = std::move(je);
        j["count_satisfied"] = count_satisfied;
        j["prior_value"] = prior_value;
        j["prior_initial"] = prior_initial;
        j["prior_satisfied"] = prior_satisfied;
        return j;
    }
};

struct FitReport {
    int iterations = 0;
    std::vector<double> loss_trace; // length iterations + 1
    LossBreakdown final_breakdown;
    ConstraintStatus constraint_status;

    Json to_json() const {
        Json j;
        j["iterations"] = iterations;
        j["loss_trace"] = loss_trace;
        j["final_breakdown"] = final_breakdown.to_json();
        j["constraint_status"] = constraint_status.to_json();
        return j;
    }
};

// Hard (thresholded) WT mass inside the compartment the cohort forbids.
inline double hard_prior_mass(const LogitField& field, const AnatomyMasks& masks, Cohort cohort,
                              double tau) {
    if (cohort == Cohort::Unknown) return 0.0;
    const ProbMaps maps = field.to_probmaps();
    return prior_loss(threshold(maps.make_wt(), tau), masks, cohort);
}

// Constraint satisfaction is judged on the thresholded prediction: each
// Present cue needs at least one voxel of its class at tau, each Absent
// cue needs none, the component count must reach N_qual, and the hard
// prior mass must fall below 1% of its starting value.
inline ConstraintStatus evaluate_constraints(const LogitField& field, const CueSet& cues,
                                             const AnatomyMasks& masks, const LossConfig& cfg,
                                             double prior_initial) {
    ConstraintStatus st;
    const ProbMaps maps = field.to_probmaps();

    for (const QualCue& q : cues.qual_cues) {
        if (q.polarity == Polarity::Unstated) continue;
        const VoxelGrid& p = (q.substructure == Substructure::ET)   ? maps.et
                             : (q.substructure == Substructure::ED) ? maps.ed
                                                                    : maps.tc;
        const double v = volume_hard(p, cfg.tau);
        const bool ok = q.polarity == Polarity::Present ? v >= 1.0 : v == 0.0;
        auto it = st.exist_satisfied.find(q.substructure);
        if (it == st.exist_satisfied.end())
            st.exist_satisfied[q.substructure] = ok;
        else
            it->second = it->second && ok;
    }

    if (cues.quant.has_count()) {
        const ComponentSet comps =
            label_components(threshold(maps.make_wt(), cfg.tau), cfg.connectivity);
        st.count_satisfied =
            static_cast<double>(comps.count) >= static_cast<double>(*cues.quant.min_count);
    }

    st.prior_initial = prior_initial;
    if (cues.cohort.cohort != Cohort::Unknown) {
        st.prior_value = prior_loss(threshold(maps.make_wt(), cfg.tau), masks,
                                    cues.cohort.cohort);
        st.prior_satisfied = prior_initial == 0.0 ? st.prior_value == 0.0
                                                  : st.prior_value < 0.01 * prior_initial;
    }
    return st;
}

inline FitReport fit(const LogitField& field0, const CueSet& cues, const AnatomyMasks& masks,
                     const LossConfig& cfg, int steps, double lr,
                     const TermSet& terms = TermSet{}) {
    if (steps < 1) throw std::invalid_argument("fit: steps must be >= 1");
    if (!(lr > 0.0)) throw std::invalid_argument("fit: lr must be positive");

    LogitField field = field0;
    const std::size_t n = field.voxel_count();
    const double prior_initial =
        hard_prior_mass(field0, masks, cues.cohort.cohort, cfg.tau);

    FitReport report;
    report.iterations = steps;
    report.loss_trace.reserve(static_cast<std::size_t>(steps) + 1);
    report.loss_trace.push_back(soft_report_loss(field, cues, masks, cfg, terms));

    std::array<std::vector<double>, 3> grad;
    for (int step = 0; step < steps; ++step) {
        soft_report_grad(field, cues, masks, cfg, terms, grad);
        bool finite = true;
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < n; ++i) {
                field.logits[c][i] -= lr * grad[c][i];
                finite = finite && std::isfinite(field.logits[c][i]);
            }
        const double loss = soft_report_loss(field, cues, masks, cfg, terms);
        // NaN can slip through the hinge's max(), so check the field too.
        if (!finite || !std::isfinite(loss))
            throw DivergenceDetected("fit: field or loss became non-finite at step " +
                                     std::to_string(step + 1));
        report.loss_trace.push_back(loss);
    }

    report.final_breakdown = report_loss(cues, field.to_probmaps(), masks, cfg);
    report.constraint_status = evaluate_constraints(field, cues, masks, cfg, prior_initial);
    return report;
}

} // namespace rsc
