#pragma once

#include <cstdint>

#include "lingd/hsic.hpp"
#include "lingd/ica.hpp"

namespace lingd {

// Knobs shared by the discovery pipelines. Defaults follow the standard
// protocol: level 0.05 tests, 0.05 entry threshold on normalized demixers.
struct DiscoveryConfig {
    double alpha = 0.05;      // independence-test level
    double zero_tol = 0.05;   // entry threshold on max-normalized rows
    double rank_tol = 0.05;   // admissibility rank tolerance (relative)
    double dedup_tol = 1e-6;  // model deduplication tolerance on weights
    std::uint64_t seed = 0;

    // Threshold for deciding which rows carry the target's column. Rows of
    // the target and its children are clean: their entries are edge weights
    // over a unit diagonal, so the true support sits at the weight scale,
    // well above the demixer's estimation noise on dense rows.
    double support_tol = 0.2;

    bool bonferroni = false;       // divide alpha by the number of pairs
    bool blockwise_retest = false; // re-test each row against its group

    // Link level for grouping pairs that touch the target-column support.
    // Those rows are provably one-dimensional when the blanket is correct,
    // so any detected link there is an estimation artifact; a strict level
    // keeps such artifacts from aborting the extraction.
    double strict_group_alpha = 1e-5;

    // Fresh demixer draws after an extraction failure. A wandering start can
    // leak a subspace row into the target column; a genuine blanket error
    // fails every restart and still surfaces.
    int extraction_restarts = 5;

    // Regression coefficients count as zero below this t-statistic. A scale
    // cut would misread real edges once per-variable noise scales spread.
    double regression_t_crit = 3.0;

    HsicOptions hsic;
    IcaOptions ica;
};

}  // namespace lingd
