#pragma once

#include <cstddef>
#include <vector>

#include "catcon/ledger.hpp"
#include "catcon/types.hpp"

namespace catcon {

/// Frozen snapshot of everything submitted during one stage.
struct StageSubmissions {
    StageIndex stage = 0;
    std::vector<Action> actions;
    std::vector<Rating> ratings;
};

/// PerAgent: each agent's coefficients normalise only that agent's own
/// terms, so |delta_action| and |delta_rating| never exceed 1.
/// Global: one pair of coefficients shared by the whole stage.
enum class CoefficientScope { PerAgent, Global };

/// Throws ValidationError on: duplicate action ids, more than
/// `max_actions_per_agent` actions by one agent, stage mismatch, negative or
/// non-finite stakes, dangling rating targets, self-ratings, and repeated
/// (rater, action) pairs.
void validate_submissions(StageSubmissions const& subs, std::size_t max_actions_per_agent = 1);

// Single-agent views of the settlement rule. Each builds its own index;
// settle_stage is the efficient path for a whole stage.

/// 1 / sum |S_action * S_rating| over the agent's actions and the ratings
/// they received; 0 when that sum is empty or zero.
[[nodiscard]] double coeff_action(AgentId agent, StageSubmissions const& subs);
/// 1 / sum |S_own_rating * S_co_rating| over the agent's ratings and every
/// other rater of the same actions; 0 when empty or zero.
[[nodiscard]] double coeff_rating(AgentId agent, StageSubmissions const& subs);
[[nodiscard]] double action_component(AgentId agent, StageSubmissions const& subs);
[[nodiscard]] double rating_component(AgentId agent, StageSubmissions const& subs);

/// Settles one stage: an outcome for every actor and rater in `subs`,
/// nothing for absent agents. Sums run in (ActionId, rater AgentId) order so
/// results are bit-reproducible. Validates first.
[[nodiscard]] OutcomeMap settle_stage(StageSubmissions const& subs,
                                      CoefficientScope scope = CoefficientScope::PerAgent,
                                      std::size_t max_actions_per_agent = 1);

}  // namespace catcon
