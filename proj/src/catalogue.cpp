#include "catcon/catalogue.hpp"

#include <algorithm>

#include "catcon/harness.hpp"
#include "catcon/stats.hpp"

namespace catcon {

std::string to_string(Direction d) { return d == Direction::Endorse ? "endorse" : "oppose"; }

double action_score(Action const& action, double actor_delta_action)
{
    double const weight = (1.0 + std::clamp(actor_delta_action, -1.0, 1.0)) / 2.0;
    return sign_of(action.direction) * action.stake * weight;
}

TreatmentScores aggregate_scores(RunTrace const& trace)
{
    TreatmentScores scores;
    std::size_t const replicates = trace.replicates.size();
    for (std::size_t t = 0; t < trace.config.n_treatments; ++t) {
        scores[TreatmentId{t}].assign(replicates, 0.0);
    }
    for (std::size_t r = 0; r < replicates; ++r) {
        for (ActionRow const& row : trace.replicates[r].actions) {
            auto& per_rep = scores[row.action.treatment];
            if (per_rep.size() != replicates) per_rep.assign(replicates, 0.0);
            per_rep[r] += action_score(row.action, row.actor_delta_action);
        }
    }
    return scores;
}

std::vector<CatalogueDecision> decide_catalogue(TreatmentScores const& scores, double threshold)
{
    std::vector<CatalogueDecision> out;
    out.reserve(scores.size());
    for (auto const& [treatment, per_rep] : scores) {
        CatalogueDecision d;
        d.treatment = treatment;
        d.score = mean(per_rep);
        d.dispersion = sample_sd(per_rep);
        if (!per_rep.empty()) {
            auto const accepted = std::count_if(per_rep.begin(), per_rep.end(),
                                                [&](double s) { return s >= threshold; });
            d.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(per_rep.size());
        }
        d.included = d.score >= threshold;
        out.push_back(d);
    }
    return out;
}

}  // namespace catcon
