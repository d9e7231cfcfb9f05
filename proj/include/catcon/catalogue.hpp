#pragma once

#include <map>
#include <span>
#include <vector>

#include "catcon/types.hpp"

namespace catcon {

struct RunTrace;

/// Catalogue verdict for one treatment across a run's replicates.
struct CatalogueDecision {
    TreatmentId treatment;
    double score = 0.0;            // mean score across replicates
    double dispersion = 0.0;       // cross-replicate standard deviation
    double acceptance_rate = 0.0;  // fraction of replicates with score >= threshold
    bool included = false;         // score >= threshold
};

/// Per-treatment scores, one entry per replicate in replicate order.
using TreatmentScores = std::map<TreatmentId, std::vector<double>>;

/// Contribution of one settled action to its treatment's score:
/// +/- stake weighted by (1 + clamp(delta_action, -1, 1)) / 2, so an action
/// its raters fully rejected counts for nothing.
[[nodiscard]] double action_score(Action const& action, double actor_delta_action);

/// Sums action_score over every recorded action, per replicate. Every
/// treatment of the run's configuration appears, even with no actions.
[[nodiscard]] TreatmentScores aggregate_scores(RunTrace const& trace);

/// included = mean score >= threshold; acceptance_rate = share of
/// replicates at or above it; dispersion = sample standard deviation (0 for
/// a single replicate). Decisions come out in TreatmentId order.
[[nodiscard]] std::vector<CatalogueDecision> decide_catalogue(TreatmentScores const& scores, double threshold);

}  // namespace catcon
