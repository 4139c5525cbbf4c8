#pragma once
// Randomized gradient-verification sweep: builds varied cue/field
// scenarios (hinges active and inactive, every term subset, all
// cohorts) and compares the analytic gradient against central finite
// differences coordinate by coordinate.

#include <cstdint>
#include <vector>

#include "rsc/fitter.hpp"
#include "rsc/phantom.hpp"
#include "rsc/rng.hpp"

namespace rsc {

struct GradCheckScenario {
    LogitField field;
    CueSet cues;
    AnatomyMasks masks;
    LossConfig cfg;
    TermSet terms;
};

inline GradCheckScenario make_gradcheck_scenario(std::uint64_t seed, std::size_t index) {
    Rng rng(seed * 1000003ull + index);
    GradCheckScenario sc;
    const Dims3 dims{6, 6, 6};
    const Spacing3 spacing{1.0, 1.0, 1.0};
    sc.masks = make_shell_masks(dims, spacing, 1.0);

    // Field scales chosen so presence hinges are active in some
    // scenarios (tiny volumes) and saturated in others.
    switch (index % 4) {
        case 0: sc.field = LogitField::random_uniform(dims, spacing, rng.next_u64(), -1.0, 1.0); break;
        case 1: sc.field = LogitField::random_uniform(dims, spacing, rng.next_u64(), -8.0, -5.0); break;
        case 2: sc.field = LogitField::random_uniform(dims, spacing, rng.next_u64(), -4.0, 0.0); break;
        default: sc.field = LogitField::random_uniform(dims, spacing, rng.next_u64(), -2.0, 2.0); break;
    }

    const double lambdas[4] = {1.0, 0.7, 0.5, 0.3};
    const Modality source[3] = {Modality::T1c, Modality::FLAIR, Modality::T1};
    const Substructure classes[3] = {Substructure::ET, Substructure::ED, Substructure::TC};
    for (int k = 0; k < 3; ++k) {
        const auto roll = rng.below(3);
        if (roll == 0) continue;
        QualCue q;
        q.substructure = classes[k];
        q.polarity = roll == 1 ? Polarity::Present : Polarity::Absent;
        q.certainty = lambdas[rng.below(4)];
        q.source_modality = source[k];
        q.evidence_span = "synthetic";
        sc.cues.qual_cues.push_back(q);
    }
    if (rng.below(2) == 0) {
        sc.cues.quant.min_count = static_cast<int>(1 + rng.below(4));
        sc.cues.quant.count_certainty = lambdas[rng.below(4)];
    }
    if (rng.below(3) == 0) {
        sc.cues.quant.largest_dims_mm = std::array<double, 3>{10.0, 8.0, 12.0};
        sc.cues.quant.size_certainty = 1.0;
    }
    const auto cohort_roll = rng.below(3);
    sc.cues.cohort.cohort =
        cohort_roll == 0 ? Cohort::Unknown : (cohort_roll == 1 ? Cohort::MEN : Cohort::MET);
    if (sc.cues.cohort.cohort != Cohort::Unknown)
        sc.cues.cohort.evidence_spans.push_back("synthetic");

    // Cycle through all 8 on/off combinations of the term groups.
    sc.terms.exist = (index & 1) == 0;
    sc.terms.global = (index & 2) == 0;
    sc.terms.prior = (index & 4) == 0;
    return sc;
}

struct GradSweepResult {
    double max_rel_err = 0.0;
    std::size_t checked = 0;
    std::size_t skipped = 0;
    std::size_t n_configs = 0;
    GradCheckResult worst;
};

inline GradSweepResult run_gradient_sweep(std::uint64_t seed, std::size_t n_configs,
                                          std::size_t coords_per_config, double h = 1e-4,
                                          bool test_hook_corrupt = false) {
    GradSweepResult sweep;
    sweep.n_configs = n_configs;
    for (std::size_t i = 0; i < n_configs; ++i) {
        const GradCheckScenario sc = make_gradcheck_scenario(seed, i);
        Rng coord_rng(seed * 7919ull + i);
        const GradCheckResult res =
            gradient_check(sc.field, sc.cues, sc.masks, sc.cfg, sc.terms, coords_per_config,
                           coord_rng, h, test_hook_corrupt);
        sweep.checked += res.checked;
        sweep.skipped += res.skipped;
        if (res.max_rel_err > sweep.max_rel_err) {
            sweep.max_rel_err = res.max_rel_err;
            sweep.worst = res;
        }
    }
    return sweep;
}

} // namespace rsc
