#include "catcon/settlement.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "catcon/errors.hpp"

namespace catcon {

namespace {

/// Per-agent numerators and denominators of the two settlement sums.
struct Sums {
    double action_num = 0.0;
    double action_den = 0.0;
    double rating_num = 0.0;
    double rating_den = 0.0;
};

struct IndexedRating {
    AgentId rater;
    double stake;
};

/// Actions in id order, each with its ratings in rater order.
struct StageIndexView {
    std::vector<Action const*> actions;
    std::vector<std::vector<IndexedRating>> ratings_by_action;
};

StageIndexView build_index(StageSubmissions const& subs)
{
    StageIndexView view;
    view.actions.reserve(subs.actions.size());
    for (Action const& a : subs.actions) {
        view.actions.push_back(&a);
    }
    std::sort(view.actions.begin(), view.actions.end(), [](Action const* a, Action const* b) { return a->id < b->id; });

    std::unordered_map<ActionId, std::size_t> pos;
    pos.reserve(view.actions.size());
    for (std::size_t i = 0; i < view.actions.size(); ++i) {
        pos.emplace(view.actions[i]->id, i);
    }
    view.ratings_by_action.resize(view.actions.size());
    for (Rating const& r : subs.ratings) {
        auto it = pos.find(r.target_action);
        if (it == pos.end()) {
            throw ValidationError(fmt::format("rating by agent {} targets unknown action {}", r.rater.value,
                                              r.target_action.value));
        }
        view.ratings_by_action[it->second].push_back({r.rater, r.signed_stake});
    }
    for (auto& list : view.ratings_by_action) {
        std::sort(list.begin(), list.end(), [](IndexedRating const& a, IndexedRating const& b) {
            return a.rater < b.rater;
        });
    }
    return view;
}

std::map<AgentId, Sums> accumulate(StageIndexView const& view)
{
    std::map<AgentId, Sums> sums;
    for (std::size_t a = 0; a < view.actions.size(); ++a) {
        Action const& action = *view.actions[a];
        auto const& ratings = view.ratings_by_action[a];
        Sums& actor = sums[action.actor];
        for (IndexedRating const& r : ratings) {
            double term = action.stake * r.stake;
            actor.action_num += term;
            actor.action_den += std::abs(term);
        }
        for (IndexedRating const& own : ratings) {
            Sums& rater = sums[own.rater];
            for (IndexedRating const& other : ratings) {
                if (other.rater == own.rater) continue;
                double term = own.stake * other.stake;
                rater.rating_num += term;
                rater.rating_den += std::abs(term);
            }
        }
    }
    return sums;
}

double inverse_or_zero(double den) { return den > 0.0 ? 1.0 / den : 0.0; }

Sums sums_for(AgentId agent, StageSubmissions const& subs)
{
    auto sums = accumulate(build_index(subs));
    auto it = sums.find(agent);
    return it == sums.end() ? Sums{} : it->second;
}

}  // namespace

void validate_submissions(StageSubmissions const& subs, std::size_t max_actions_per_agent)
{
    std::unordered_map<ActionId, AgentId> actor_of;
    std::map<AgentId, std::size_t> per_agent;
    for (Action const& a : subs.actions) {
        if (a.stage != subs.stage) {
            throw ValidationError(fmt::format("action {} belongs to stage {}, not {}", a.id.value, a.stage, subs.stage));
        }
        if (!std::isfinite(a.stake) || a.stake < 0.0) {
            throw ValidationError(fmt::format("action {} has an invalid stake", a.id.value));
        }
        if (!actor_of.emplace(a.id, a.actor).second) {
            throw ValidationError(fmt::format("duplicate action id {}", a.id.value));
        }
        if (++per_agent[a.actor] > max_actions_per_agent) {
            throw ValidationError(fmt::format("agent {} submitted more than {} action(s) in stage {}", a.actor.value,
                                              max_actions_per_agent, subs.stage));
        }
    }
    std::set<std::pair<AgentId, ActionId>> seen;
    for (Rating const& r : subs.ratings) {
        auto it = actor_of.find(r.target_action);
        if (it == actor_of.end()) {
            throw ValidationError(fmt::format("rating by agent {} targets unknown action {}", r.rater.value,
                                              r.target_action.value));
        }
        if (r.stage != subs.stage) {
            throw ValidationError(fmt::format("rating by agent {} on action {} belongs to stage {}, not {}",
                                              r.rater.value, r.target_action.value, r.stage, subs.stage));
        }
        if (!std::isfinite(r.signed_stake)) {
            throw ValidationError(fmt::format("rating by agent {} on action {} has a non-finite stake", r.rater.value,
                                              r.target_action.value));
        }
        if (it->second == r.rater) {
            throw ValidationError(fmt::format("agent {} rated its own action {}", r.rater.value, r.target_action.value));
        }
        if (!seen.emplace(r.rater, r.target_action).second) {
            throw ValidationError(fmt::format("agent {} rated action {} more than once", r.rater.value,
                                              r.target_action.value));
        }
    }
}

double coeff_action(AgentId agent, StageSubmissions const& subs)
{
    return inverse_or_zero(sums_for(agent, subs).action_den);
}

double coeff_rating(AgentId agent, StageSubmissions const& subs)
{
    return inverse_or_zero(sums_for(agent, subs).rating_den);
}

double action_component(AgentId agent, StageSubmissions const& subs)
{
    Sums s = sums_for(agent, subs);
    return inverse_or_zero(s.action_den) * s.action_num;
}

double rating_component(AgentId agent, StageSubmissions const& subs)
{
    Sums s = sums_for(agent, subs);
    return inverse_or_zero(s.rating_den) * s.rating_num;
}

OutcomeMap settle_stage(StageSubmissions const& subs, CoefficientScope scope, std::size_t max_actions_per_agent)
{
    validate_submissions(subs, max_actions_per_agent);
    auto sums = accumulate(build_index(subs));

    double global_action = 0.0;
    double global_rating = 0.0;
    if (scope == CoefficientScope::Global) {
        double action_den = 0.0;
        double rating_den = 0.0;
        for (auto const& [id, s] : sums) {
            action_den += s.action_den;
            rating_den += s.rating_den;
        }
        global_action = inverse_or_zero(action_den);
        global_rating = inverse_or_zero(rating_den);
    }

    OutcomeMap out;
    for (auto const& [id, s] : sums) {
        StageOutcome o;
        if (scope == CoefficientScope::PerAgent) {
            o.coeff_action = inverse_or_zero(s.action_den);
            o.coeff_rating = inverse_or_zero(s.rating_den);
        } else {
            o.coeff_action = global_action;
            o.coeff_rating = global_rating;
        }
        o.delta_action = o.coeff_action * s.action_num;
        o.delta_rating = o.coeff_rating * s.rating_num;
        o.delta_total = o.delta_action + o.delta_rating;
        out.emplace(id, o);
    }
    return out;
}

}  // namespace catcon
