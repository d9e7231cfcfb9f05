#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "catcon/digest.hpp"
#include "catcon/types.hpp"

namespace catcon {

using OutcomeMap = std::map<AgentId, StageOutcome>;

struct StageRecord {
    StageIndex stage = 0;
    OutcomeMap outcomes;
    Digest prev_hash{};
    Digest hash{};
};

/// A balance that would have gone negative and was clamped to zero.
struct FloorEvent {
    StageIndex stage = 0;
    AgentId agent;
    Credit shortfall = 0.0;  // amount that could not be debited
};

struct ChainCheck {
    bool valid = true;
    std::optional<StageIndex> first_bad_stage;
};

/// Per-agent balances plus the append-only, hash-chained stage log.
///
/// Staked credit is at risk, not escrowed: balances only move when a stage
/// is applied. Each record's hash is SHA-256(prev_hash ‖ canonical bytes),
/// where the canonical bytes come from canonical_stage_json().
class CreditLedger {
  public:
    CreditLedger() = default;
    explicit CreditLedger(std::map<AgentId, Credit> initial_balances);

    /// Rebuilds a ledger from persisted parts without re-deriving anything,
    /// so that ledger_verify_chain can audit it.
    static CreditLedger restore(std::map<AgentId, Credit> balances, std::vector<StageRecord> log);

    /// Applies one settled stage. Throws LedgerError when `stage` is not the
    /// next index or an outcome names an unknown agent.
    void apply(StageIndex stage, OutcomeMap const& outcomes);

    [[nodiscard]] std::map<AgentId, Credit> const& balances() const noexcept { return balances_; }
    [[nodiscard]] Credit balance(AgentId id) const;
    [[nodiscard]] Credit total_supply() const noexcept { return total_supply_; }
    [[nodiscard]] Credit burned_fees() const noexcept { return burned_fees_; }
    [[nodiscard]] std::vector<StageRecord> const& stage_log() const noexcept { return log_; }
    [[nodiscard]] std::vector<FloorEvent> const& floor_events() const noexcept { return floor_events_; }
    [[nodiscard]] StageIndex next_stage() const noexcept { return log_.size(); }
    [[nodiscard]] Digest head_hash() const noexcept { return log_.empty() ? kZeroDigest : log_.back().hash; }

    /// Direct record access for audit tooling and tamper tests.
    [[nodiscard]] std::vector<StageRecord>& mutable_log_for_audit() noexcept { return log_; }

  private:
    std::map<AgentId, Credit> balances_;
    Credit total_supply_ = 0.0;
    Credit burned_fees_ = 0.0;
    std::vector<StageRecord> log_;
    std::vector<FloorEvent> floor_events_;
};

/// Value-returning form of CreditLedger::apply.
[[nodiscard]] CreditLedger ledger_apply(CreditLedger ledger, StageIndex stage, OutcomeMap const& outcomes);

[[nodiscard]] ChainCheck ledger_verify_chain(CreditLedger const& ledger);

/// 17-significant-digit decimal used everywhere a real is serialized.
/// Throws std::domain_error for NaN or infinity.
[[nodiscard]] std::string format_real(double value);

/// Sorted-key, whitespace-free JSON for one stage's outcomes.
[[nodiscard]] std::string canonical_stage_json(StageIndex stage, OutcomeMap const& outcomes);

[[nodiscard]] Digest stage_hash(Digest const& prev_hash, StageIndex stage, OutcomeMap const& outcomes);

}  // namespace catcon
