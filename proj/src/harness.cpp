#include "catcon/harness.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <stdexcept>
#include <thread>

#include "catcon/catalogue.hpp"
#include "catcon/policy.hpp"
#include "catcon/rng.hpp"
#include "catcon/stats.hpp"

namespace catcon {

namespace {

/// Calls fn(i) for i in [0, n) on up to `threads` workers. Exceptions are
/// rethrown for the lowest failing index.
template <class Fn>
void parallel_for_index(std::size_t n, unsigned threads, Fn&& fn)
{
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    std::vector<std::exception_ptr> errors(n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
    }
    for (auto const& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace

ReplicateState init_replicate(SimConfig const& config, std::size_t replicate,
                              std::optional<std::span<double const>> action_rates)
{
    ReplicateState state;
    state.config = &config;
    state.replicate = replicate;
    for (std::size_t t = 0; t < config.n_treatments; ++t) {
        state.treatments.emplace_back(t);
    }

    PolicyConfig const& policy = config.policy;
    std::map<AgentId, Credit> balances;
    state.agents.reserve(config.n_agents);
    for (std::size_t i = 0; i < config.n_agents; ++i) {
        Rng rng = substream(config.seed, replicate, i, kGenesisStage);
        Agent a;
        a.id = AgentId{i};
        if (i >= config.n_agents - config.n_investors) {
            a.roles = RoleSet{Role::Investor};
        }
        a.balance = config.initial_balance.kind == BalanceDistribution::Kind::Constant
                        ? config.initial_balance.low
                        : rng.uniform(config.initial_balance.low, config.initial_balance.high);
        a.staking_rate_action = rng.uniform(policy.min_staking_rate, policy.max_staking_rate);
        a.staking_rate_rating = rng.uniform(policy.min_staking_rate, policy.max_staking_rate);
        if (action_rates) {
            a.staking_rate_action = (*action_rates)[i];
        }
        a.skip_probability = policy.skip_probability;
        a.opinion_bias.resize(config.n_treatments);
        for (double& b : a.opinion_bias) {
            b = rng.uniform(-policy.opinion_spread, policy.opinion_spread);
        }
        balances.emplace(a.id, a.balance);
        state.agents.push_back(std::move(a));
    }
    state.ledger = CreditLedger(std::move(balances));
    return state;
}

StageResult run_stage(ReplicateState& state)
{
    SimConfig const& cfg = *state.config;
    PolicyConfig const& policy = cfg.policy;
    std::size_t const n = state.agents.size();
    std::size_t const k = policy.ratings_per_rater;
    StageIndex const stage = state.ledger.next_stage();

    StageSubmissions subs;
    subs.stage = stage;

    std::vector<Rng> streams;
    streams.reserve(n);
    std::vector<char> participating(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        streams.push_back(substream(cfg.seed, state.replicate, i, stage));
        Agent const& a = state.agents[i];
        participating[i] = a.roles.active() && decide_participation(a, streams[i]);
    }

    std::vector<std::size_t> submissions(n, 0);
    std::vector<Credit> action_stake(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        Agent const& a = state.agents[i];
        if (!participating[i] || !a.roles.has(Role::Actor) || a.balance < cfg.fee) continue;
        Action act = choose_action(a, state.treatments, policy, cfg.fee, ActionId{state.next_action_id++}, stage,
                                   streams[i]);
        action_stake[i] = act.stake;
        ++submissions[i];
        subs.actions.push_back(act);
    }
    for (std::size_t i = 0; i < n; ++i) {
        Agent const& a = state.agents[i];
        if (!participating[i] || !a.roles.has(Role::Rater) || k == 0) continue;
        Credit const reserved = action_stake[i] + cfg.fee * static_cast<double>(submissions[i] + k);
        if (a.balance < reserved) continue;
        auto ratings = choose_ratings(a, subs.actions, k, policy, stage, streams[i], reserved);
        submissions[i] += ratings.size();
        subs.ratings.insert(subs.ratings.end(), ratings.begin(), ratings.end());
    }

    OutcomeMap outcomes = settle_stage(subs, cfg.coefficient_scope, cfg.max_actions_per_agent);
    if (cfg.fee > 0.0) {
        for (auto& [id, o] : outcomes) {
            o.fee = cfg.fee * static_cast<double>(submissions[id.value]);
        }
    }
    state.ledger.apply(stage, outcomes);

    for (auto const& [id, o] : outcomes) {
        state.agents[id.value] = update_staking_policy(std::move(state.agents[id.value]), o, policy);
    }
    for (Agent& a : state.agents) {
        a.balance = state.ledger.balance(a.id);
    }
    return {std::move(subs), state.ledger.stage_log().back()};
}

ReplicateTrace run_replicate(SimConfig const& config, std::size_t replicate,
                             std::optional<std::span<double const>> action_rates)
{
    ReplicateState state = init_replicate(config, replicate, action_rates);
    ReplicateTrace trace;
    trace.replicate = replicate;
    trace.initial_balances = state.ledger.balances();
    for (Agent const& a : state.agents) {
        trace.initial_staking_rate_action.emplace(a.id, a.staking_rate_action);
    }
    trace.rows.reserve(config.n_rounds * config.n_agents);
    trace.treatment_scores.reserve(config.n_rounds);

    std::vector<double> cumulative(config.n_treatments, 0.0);
    for (std::size_t t = 0; t < config.n_rounds; ++t) {
        StageResult res = run_stage(state);
        OutcomeMap const& outcomes = res.record.outcomes;
        for (Agent const& a : state.agents) {
            AgentRow row;
            row.replicate = replicate;
            row.stage = res.record.stage;
            row.agent = a.id;
            row.balance = a.balance;
            row.staking_rate_action = a.staking_rate_action;
            if (auto it = outcomes.find(a.id); it != outcomes.end()) {
                row.delta_action = it->second.delta_action;
                row.delta_rating = it->second.delta_rating;
                row.delta_total = it->second.delta_total;
            }
            trace.rows.push_back(row);
        }
        for (Action const& act : res.submissions.actions) {
            double const delta = outcomes.at(act.actor).delta_action;
            trace.actions.push_back({replicate, act, delta});
            cumulative[act.treatment.value] += action_score(act, delta);
        }
        trace.treatment_scores.push_back(cumulative);
    }
    trace.final_agents = std::move(state.agents);
    trace.ledger = std::move(state.ledger);
    return trace;
}

RunTrace run_simulation(SimConfig config, RunOptions const& options)
{
    validate(config);
    RunTrace trace;
    trace.config = config;
    trace.replicates.resize(config.n_replicates);
    SimConfig const& cfg = trace.config;
    parallel_for_index(cfg.n_replicates, options.threads,
                       [&](std::size_t r) { trace.replicates[r] = run_replicate(cfg, r); });
    spdlog::debug("simulated {} replicate(s) x {} stage(s) x {} agent(s)", cfg.n_replicates, cfg.n_rounds,
                 cfg.n_agents);
    return trace;
}

SweepResult sweep_staking_rate(SimConfig config, std::span<double const> grid, RunOptions const& options)
{
    if (grid.empty()) {
        throw std::invalid_argument("sweep grid must contain at least one staking rate");
    }
    for (double g : grid) {
        if (!(g >= 0.0 && g <= 1.0)) {
            throw std::invalid_argument(fmt::format("sweep rate {} lies outside [0, 1]", g));
        }
    }
    validate(config);
    PolicyConfig const& policy = config.policy;

    std::vector<double> rates(config.n_agents);
    std::vector<std::size_t> group_of(config.n_agents);
    for (std::size_t i = 0; i < config.n_agents; ++i) {
        group_of[i] = i % grid.size();
        rates[i] = grid[group_of[i]];
        if (policy.mode == PolicyMode::Learning) {
            rates[i] = std::clamp(rates[i], policy.min_staking_rate, policy.max_staking_rate);
        }
    }

    std::vector<std::vector<SweepRow>> per_replicate(config.n_replicates);
    parallel_for_index(config.n_replicates, options.threads, [&](std::size_t r) {
        ReplicateTrace rep = run_replicate(config, r, std::span<double const>(rates));
        std::vector<SweepRow> rows;
        for (std::size_t i = 0; i < config.n_agents; ++i) {
            if (!rep.final_agents[i].roles.active()) continue;
            SweepRow row;
            row.replicate = r;
            row.agent = AgentId{i};
            row.grid_rate = grid[group_of[i]];
            row.rate = policy.mode == PolicyMode::Learning ? rep.final_agents[i].staking_rate_action : rates[i];
            rows.push_back(row);
        }
        for (AgentRow const& ar : rep.rows) {
            // Rows are agent-ordered within a stage and investors sit at the end.
            if (ar.agent.value >= rows.size()) continue;
            rows[ar.agent.value].cumulative_delta += ar.delta_total;
            rows[ar.agent.value].cumulative_action += ar.delta_action;
        }
        per_replicate[r] = std::move(rows);
    });

    SweepResult result;
    result.mode = policy.mode;
    for (auto& rows : per_replicate) {
        result.rows.insert(result.rows.end(), rows.begin(), rows.end());
    }
    for (std::size_t g = 0; g < grid.size(); ++g) {
        std::vector<double> total;
        std::vector<double> action;
        for (SweepRow const& row : result.rows) {
            if (group_of[row.agent.value] != g) continue;
            total.push_back(row.cumulative_delta);
            action.push_back(row.cumulative_action);
        }
        result.groups.push_back({grid[g], total.size(), mean(total), sample_sd(total), mean(action)});
    }
    return result;
}

double sweep_spearman(SweepResult const& sweep)
{
    std::vector<double> rate;
    std::vector<double> delta;
    rate.reserve(sweep.rows.size());
    delta.reserve(sweep.rows.size());
    for (SweepRow const& row : sweep.rows) {
        rate.push_back(row.rate);
        delta.push_back(row.cumulative_delta);
    }
    return spearman(rate, delta);
}

}  // namespace catcon
