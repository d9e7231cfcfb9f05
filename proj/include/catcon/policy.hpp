#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "catcon/rng.hpp"
#include "catcon/types.hpp"

namespace catcon {

enum class PolicyMode { NonLearning, Learning };

/// How an agent turns a treatment's quality into an endorse/oppose opinion.
struct SignModel {
    enum class Kind {
        /// Endorse iff quality >= 0.5. Personal bias is ignored.
        TruthfulQuality,
        /// Endorse iff quality + personal bias >= 0.5, then flip the opinion
        /// with probability epsilon.
        NoisyQuality,
    };
    Kind kind = Kind::NoisyQuality;
    double epsilon = 0.1;
};

struct PolicyConfig {
    PolicyMode mode = PolicyMode::NonLearning;
    bool consumer_selection = true;
    double learning_rate = 0.1;
    double min_staking_rate = 0.05;
    double max_staking_rate = 0.5;
    double skip_probability = 0.1;
    SignModel sign_model;
    /// Ground-truth quality in [0, 1], indexed by TreatmentId value.
    std::vector<double> treatment_quality;
    /// Half-width of the Uniform(-w, w) personal bias each agent holds per
    /// treatment for the whole replicate.
    double opinion_spread = 0.3;
    /// Ratings each rater submits per stage (k).
    std::size_t ratings_per_rater = 3;
};

/// Throws ConfigError naming the offending "policy.*" field.
void validate(PolicyConfig const& config);

/// The agent's opinion of `treatment` under the configured sign model.
[[nodiscard]] Direction assess(Agent const& agent, TreatmentId treatment, PolicyConfig const& config, Rng& rng);

/// False (skip) with the agent's skip probability.
[[nodiscard]] bool decide_participation(Agent const& agent, Rng& rng);

/// Picks a treatment uniformly, takes a side by assess(), and stakes
/// staking_rate_action * balance clamped to [0, balance - fee].
/// Throws std::invalid_argument for an empty treatment list.
[[nodiscard]] Action choose_action(Agent const& agent, std::span<TreatmentId const> treatments,
                                   PolicyConfig const& config, Credit fee, ActionId id, StageIndex stage, Rng& rng);

/// Rates up to k distinct visible actions not authored by `agent`. With
/// consumer selection, targets are drawn without replacement with
/// probability proportional to their stake; otherwise uniformly. Each rating
/// carries staking_rate_rating * balance / k (capped so the agent's total
/// exposure stays within balance - reserved), signed +1 when the agent's
/// own opinion matches the action's direction and -1 otherwise.
[[nodiscard]] std::vector<Rating> choose_ratings(Agent const& agent, std::span<Action const> visible, std::size_t k,
                                                 PolicyConfig const& config, StageIndex stage, Rng& rng,
                                                 Credit reserved = 0.0);

/// Learning mode: scale each staking rate by (1 + eta) after a gain and by
/// (1 - eta) after a loss, clamped to the configured bounds. NonLearning
/// returns the agent unchanged.
[[nodiscard]] Agent update_staking_policy(Agent agent, StageOutcome const& outcome, PolicyConfig const& config);

/// The single-rate step of update_staking_policy.
[[nodiscard]] double next_staking_rate(double rate, double delta, PolicyConfig const& config);

}  // namespace catcon
