#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "catcon/config.hpp"
#include "catcon/ledger.hpp"
#include "catcon/settlement.hpp"
#include "catcon/types.hpp"

namespace catcon {

/// One row of the per-agent trace table. Balance and staking rate are the
/// end-of-stage values.
struct AgentRow {
    std::size_t replicate = 0;
    StageIndex stage = 0;
    AgentId agent;
    Credit balance = 0.0;
    double delta_action = 0.0;
    double delta_rating = 0.0;
    double delta_total = 0.0;
    double staking_rate_action = 0.0;
};

/// An action together with the delta_action its author settled at.
struct ActionRow {
    std::size_t replicate = 0;
    Action action;
    double actor_delta_action = 0.0;
};

struct ReplicateTrace {
    std::size_t replicate = 0;
    std::map<AgentId, Credit> initial_balances;
    std::map<AgentId, double> initial_staking_rate_action;
    std::vector<AgentRow> rows;  // stage-major, agent-minor
    std::vector<ActionRow> actions;
    /// Cumulative endorsement score, [stage][treatment].
    std::vector<std::vector<double>> treatment_scores;
    std::vector<Agent> final_agents;
    CreditLedger ledger;
};

struct RunTrace {
    SimConfig config;
    std::vector<ReplicateTrace> replicates;
};

/// Mutable state of one replicate between stages.
struct ReplicateState {
    SimConfig const* config = nullptr;
    std::size_t replicate = 0;
    std::vector<Agent> agents;  // indexed by AgentId value
    std::vector<TreatmentId> treatments;
    CreditLedger ledger;
    std::uint64_t next_action_id = 0;
};

/// Builds the genesis state of `replicate`. Agents draw their balance,
/// staking rates and opinion biases from their own genesis substream.
/// `action_rates`, when given, fixes each agent's initial action staking
/// rate (indexed by agent).
[[nodiscard]] ReplicateState init_replicate(SimConfig const& config, std::size_t replicate,
                                            std::optional<std::span<double const>> action_rates = std::nullopt);

struct StageResult {
    StageSubmissions submissions;
    StageRecord record;
};

/// One round: participation, actions, ratings, settlement, ledger update
/// and (Learning mode) staking-rate updates. Every agent draws from its own
/// (replicate, agent, stage) substream.
StageResult run_stage(ReplicateState& state);

struct RunOptions {
    /// Worker threads for replicates; 0 means hardware concurrency.
    unsigned threads = 1;
};

/// Runs one replicate to completion. Deterministic in (config, replicate).
[[nodiscard]] ReplicateTrace run_replicate(SimConfig const& config, std::size_t replicate,
                                           std::optional<std::span<double const>> action_rates = std::nullopt);

/// Runs all replicates, possibly concurrently; output is in replicate
/// order and independent of the thread count. Validates a copy of `config`.
[[nodiscard]] RunTrace run_simulation(SimConfig config, RunOptions const& options = {});

// ---------------------------------------------------------------------------
// Staking-rate sweep

struct SweepRow {
    std::size_t replicate = 0;
    AgentId agent;
    double grid_rate = 0.0;  // rate assigned at genesis
    double rate = 0.0;       // NonLearning: grid_rate; Learning: final realised rate
    double cumulative_delta = 0.0;
    double cumulative_action = 0.0;
};

struct SweepGroup {
    double grid_rate = 0.0;
    std::size_t agents = 0;
    double mean_cumulative_delta = 0.0;
    double sd_cumulative_delta = 0.0;
    double mean_cumulative_action = 0.0;
};

struct SweepResult {
    PolicyMode mode = PolicyMode::NonLearning;
    std::vector<SweepRow> rows;      // replicate-major, agent-minor
    std::vector<SweepGroup> groups;  // one per grid value, in grid order
};

/// Assigns grid[i % grid.size()] as agent i's action staking rate (clamped
/// to the policy bounds in Learning mode) and accumulates every active
/// agent's credit change over the run. Throws std::invalid_argument for an
/// empty grid or a rate outside [0, 1].
[[nodiscard]] SweepResult sweep_staking_rate(SimConfig config, std::span<double const> grid,
                                             RunOptions const& options = {});

/// Spearman rank correlation of (rate, cumulative_delta) over all rows.
[[nodiscard]] double sweep_spearman(SweepResult const& sweep);

}  // namespace catcon
