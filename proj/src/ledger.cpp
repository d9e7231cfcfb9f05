#include "catcon/ledger.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "catcon/errors.hpp"

namespace catcon {

namespace {

Credit sum_balances(std::map<AgentId, Credit> const& balances)
{
    Credit total = 0.0;
    for (auto const& [id, b] : balances) {
        total += b;
    }
    return total;
}

}  // namespace

std::string format_real(double value)
{
    if (!std::isfinite(value)) {
        throw std::domain_error("cannot serialize a non-finite real");
    }
    return fmt::format("{:.17g}", value);
}

std::string canonical_stage_json(StageIndex stage, OutcomeMap const& outcomes)
{
    // Object keys must be in bytewise order, so agent ids are sorted as
    // decimal strings ("10" < "2"), not numerically.
    std::vector<std::pair<std::string, StageOutcome const*>> entries;
    entries.reserve(outcomes.size());
    for (auto const& [id, outcome] : outcomes) {
        entries.emplace_back(std::to_string(id.value), &outcome);
    }
    std::sort(entries.begin(), entries.end(),
              [](auto const& a, auto const& b) { return a.first < b.first; });

    std::string out = "{\"outcomes\":{";
    bool first = true;
    for (auto const& [key, o] : entries) {
        if (!first) out += ',';
        first = false;
        out += fmt::format(
            "\"{}\":{{\"coeff_action\":{},\"coeff_rating\":{},\"delta_action\":{},"
            "\"delta_rating\":{},\"delta_total\":{},\"fee\":{}}}",
            key, format_real(o->coeff_action), format_real(o->coeff_rating), format_real(o->delta_action),
            format_real(o->delta_rating), format_real(o->delta_total), format_real(o->fee));
    }
    out += fmt::format("}},\"stage\":{}}}", stage);
    return out;
}

Digest stage_hash(Digest const& prev_hash, StageIndex stage, OutcomeMap const& outcomes)
{
    return sha256(prev_hash, canonical_stage_json(stage, outcomes));
}

CreditLedger::CreditLedger(std::map<AgentId, Credit> initial_balances) : balances_(std::move(initial_balances))
{
    for (auto const& [id, b] : balances_) {
        if (!(b >= 0.0) || !std::isfinite(b)) {
            throw LedgerError(fmt::format("initial balance of agent {} must be finite and non-negative", id.value));
        }
    }
    total_supply_ = sum_balances(balances_);
}

CreditLedger CreditLedger::restore(std::map<AgentId, Credit> balances, std::vector<StageRecord> log)
{
    CreditLedger ledger;
    ledger.balances_ = std::move(balances);
    ledger.total_supply_ = sum_balances(ledger.balances_);
    ledger.log_ = std::move(log);
    return ledger;
}

Credit CreditLedger::balance(AgentId id) const
{
    auto it = balances_.find(id);
    if (it == balances_.end()) {
        throw LedgerError(fmt::format("unknown agent {}", id.value));
    }
    return it->second;
}

void CreditLedger::apply(StageIndex stage, OutcomeMap const& outcomes)
{
    if (stage != next_stage()) {
        throw LedgerError(fmt::format("out-of-order settlement: expected stage {}, got {}", next_stage(), stage));
    }
    for (auto const& [id, o] : outcomes) {
        if (!balances_.contains(id)) {
            throw LedgerError(fmt::format("stage {} settles unknown agent {}", stage, id.value));
        }
        if (!std::isfinite(o.delta_total) || !std::isfinite(o.fee) || o.fee < 0.0) {
            throw LedgerError(fmt::format("stage {} carries a non-finite delta or negative fee for agent {}", stage,
                                          id.value));
        }
    }

    for (auto const& [id, o] : outcomes) {
        Credit& b = balances_[id];
        Credit next = b + o.delta_total - o.fee;
        burned_fees_ += o.fee;
        if (next < 0.0) {
            floor_events_.push_back({stage, id, -next});
            spdlog::debug("stage {}: balance of agent {} floored at 0 (shortfall {})", stage, id.value, -next);
            next = 0.0;
        }
        b = next;
    }
    total_supply_ = sum_balances(balances_);

    StageRecord rec;
    rec.stage = stage;
    rec.outcomes = outcomes;
    rec.prev_hash = head_hash();
    rec.hash = stage_hash(rec.prev_hash, stage, outcomes);
    log_.push_back(std::move(rec));
}

CreditLedger ledger_apply(CreditLedger ledger, StageIndex stage, OutcomeMap const& outcomes)
{
    ledger.apply(stage, outcomes);
    return ledger;
}

ChainCheck ledger_verify_chain(CreditLedger const& ledger)
{
    Digest expected_prev = kZeroDigest;
    StageIndex expected_stage = 0;
    for (StageRecord const& rec : ledger.stage_log()) {
        bool ok = rec.stage == expected_stage && rec.prev_hash == expected_prev;
        if (ok) {
            try {
                ok = stage_hash(rec.prev_hash, rec.stage, rec.outcomes) == rec.hash;
            } catch (std::domain_error const&) {
                ok = false;
            }
        }
        if (!ok) {
            return {false, expected_stage};
        }
        expected_prev = rec.hash;
        ++expected_stage;
    }
    return {true, std::nullopt};
}

}  // namespace catcon
