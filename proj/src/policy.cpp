#include "catcon/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "catcon/errors.hpp"

namespace catcon {

namespace {

bool in_unit(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

}  // namespace

void validate(PolicyConfig const& config)
{
    if (!(config.learning_rate > 0.0 && config.learning_rate < 1.0)) {
        throw ConfigError("policy.learning_rate", "must lie in (0, 1)");
    }
    if (!in_unit(config.min_staking_rate) || !in_unit(config.max_staking_rate)) {
        throw ConfigError("policy.staking_rate_bounds", "bounds must lie in [0, 1]");
    }
    if (config.min_staking_rate > config.max_staking_rate) {
        throw ConfigError("policy.staking_rate_bounds", "min must not exceed max");
    }
    if (!in_unit(config.skip_probability)) {
        throw ConfigError("policy.skip_probability", "must lie in [0, 1]");
    }
    if (!in_unit(config.sign_model.epsilon)) {
        throw ConfigError("policy.rating_sign_model.epsilon", "must lie in [0, 1]");
    }
    if (!std::isfinite(config.opinion_spread) || config.opinion_spread < 0.0) {
        throw ConfigError("policy.opinion_spread", "must be finite and non-negative");
    }
    for (double q : config.treatment_quality) {
        if (!in_unit(q)) {
            throw ConfigError("policy.treatment_quality", "every quality must lie in [0, 1]");
        }
    }
}

Direction assess(Agent const& agent, TreatmentId treatment, PolicyConfig const& config, Rng& rng)
{
    double const quality = treatment.value < config.treatment_quality.size()
                               ? config.treatment_quality[treatment.value]
                               : 0.5;
    if (config.sign_model.kind == SignModel::Kind::TruthfulQuality) {
        return quality >= 0.5 ? Direction::Endorse : Direction::Oppose;
    }
    double perceived = quality;
    if (treatment.value < agent.opinion_bias.size()) {
        perceived += agent.opinion_bias[treatment.value];
    }
    Direction d = perceived >= 0.5 ? Direction::Endorse : Direction::Oppose;
    return rng.bernoulli(config.sign_model.epsilon) ? opposite(d) : d;
}

bool decide_participation(Agent const& agent, Rng& rng) { return !rng.bernoulli(agent.skip_probability); }

Action choose_action(Agent const& agent, std::span<TreatmentId const> treatments, PolicyConfig const& config,
                     Credit fee, ActionId id, StageIndex stage, Rng& rng)
{
    if (treatments.empty()) {
        throw std::invalid_argument("choose_action: no treatments to vote on");
    }
    Action a;
    a.id = id;
    a.actor = agent.id;
    a.stage = stage;
    a.treatment = treatments[rng.below(treatments.size())];
    a.direction = assess(agent, a.treatment, config, rng);
    double const cap = std::max(0.0, agent.balance - fee);
    a.stake = std::clamp(agent.staking_rate_action * agent.balance, 0.0, cap);
    return a;
}

std::vector<Rating> choose_ratings(Agent const& agent, std::span<Action const> visible, std::size_t k,
                                   PolicyConfig const& config, StageIndex stage, Rng& rng, Credit reserved)
{
    std::vector<std::size_t> pool;
    pool.reserve(visible.size());
    for (std::size_t i = 0; i < visible.size(); ++i) {
        if (visible[i].actor != agent.id) {
            pool.push_back(i);
        }
    }
    std::size_t const picks = std::min(k, pool.size());
    if (picks == 0) {
        return {};
    }

    std::vector<std::size_t> chosen;
    chosen.reserve(picks);
    if (config.consumer_selection) {
        std::vector<double> weight(pool.size());
        for (std::size_t i = 0; i < pool.size(); ++i) {
            weight[i] = visible[pool[i]].stake;
        }
        for (std::size_t n = 0; n < picks; ++n) {
            double const total = std::accumulate(weight.begin(), weight.end(), 0.0);
            std::size_t pick = weight.size() - 1;
            if (total > 0.0) {
                double u = rng.uniform01() * total;
                for (std::size_t i = 0; i < weight.size(); ++i) {
                    if (u < weight[i]) {
                        pick = i;
                        break;
                    }
                    u -= weight[i];
                }
            } else {
                pick = rng.below(weight.size());
            }
            chosen.push_back(pool[pick]);
            pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
            weight.erase(weight.begin() + static_cast<std::ptrdiff_t>(pick));
        }
    } else {
        for (std::size_t n = 0; n < picks; ++n) {
            std::size_t const j = n + rng.below(pool.size() - n);
            std::swap(pool[n], pool[j]);
            chosen.push_back(pool[n]);
        }
    }

    double const budget = std::clamp(agent.staking_rate_rating * agent.balance, 0.0,
                                     std::max(0.0, agent.balance - reserved));
    double const magnitude = budget / static_cast<double>(k);

    std::vector<Rating> out;
    out.reserve(chosen.size());
    for (std::size_t idx : chosen) {
        Action const& target = visible[idx];
        Direction const opinion = assess(agent, target.treatment, config, rng);
        double const sign = opinion == target.direction ? 1.0 : -1.0;
        out.push_back({agent.id, target.id, stage, sign * magnitude});
    }
    return out;
}

double next_staking_rate(double rate, double delta, PolicyConfig const& config)
{
    if (config.mode == PolicyMode::NonLearning) {
        return rate;
    }
    if (delta > 0.0) {
        return std::min(config.max_staking_rate, rate * (1.0 + config.learning_rate));
    }
    if (delta < 0.0) {
        return std::max(config.min_staking_rate, rate * (1.0 - config.learning_rate));
    }
    return rate;
}

Agent update_staking_policy(Agent agent, StageOutcome const& outcome, PolicyConfig const& config)
{
    agent.staking_rate_action = next_staking_rate(agent.staking_rate_action, outcome.delta_action, config);
    agent.staking_rate_rating = next_staking_rate(agent.staking_rate_rating, outcome.delta_rating, config);
    return agent;
}

}  // namespace catcon
