#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "catcon/catalogue.hpp"
#include "catcon/harness.hpp"

namespace catcon {

inline constexpr std::string_view kCodeVersion = "catcon 1.0.0";
inline constexpr int kTraceFormatVersion = 1;

inline constexpr std::string_view kTraceFile = "trace.csv";
inline constexpr std::string_view kMetadataFile = "metadata.json";
inline constexpr std::string_view kLedgerFile = "ledger.jsonl";
inline constexpr std::string_view kCatalogueFile = "catalogue.csv";
inline constexpr std::string_view kSweepFile = "sweep.csv";
inline constexpr std::string_view kSweepSummaryFile = "sweep_summary.csv";

inline constexpr std::string_view kTraceHeader =
    "replicate,stage,agent,balance,delta_action,delta_rating,delta_total,staking_rate_action";
inline constexpr std::string_view kCatalogueHeader = "treatment,score_mean,score_sd,acceptance_rate,included";
inline constexpr std::string_view kSweepHeader = "rate,agent,cumulative_delta,mode";
inline constexpr std::string_view kSweepSummaryHeader =
    "rate,agents,mean_cumulative_delta,sd_cumulative_delta,mean_cumulative_action,mode";

/// File-system failure while reading or writing outputs.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// One CSV line (no newline) in the trace table's byte-exact format.
[[nodiscard]] std::string format_trace_row(AgentRow const& row);

void write_trace_csv(RunTrace const& trace, std::ostream& out);
/// One line per stage record:
/// {"hash":HEX,"prev_hash":HEX,"record":<canonical stage json>,"replicate":R}
void write_ledger_jsonl(RunTrace const& trace, std::ostream& out);
void write_catalogue_csv(std::vector<CatalogueDecision> const& decisions, std::ostream& out);
void write_sweep_csv(SweepResult const& sweep, std::ostream& out);
void write_sweep_summary_csv(SweepResult const& sweep, std::ostream& out);

/// Config echo, generator id, code version, and per-replicate chain heads
/// plus the genesis balances and staking rates needed for replay.
[[nodiscard]] nlohmann::json make_metadata(RunTrace const& trace);

/// Writes trace.csv, ledger.jsonl, metadata.json and catalogue.csv into
/// `out_dir` (created if needed). Throws IoError.
void write_run_outputs(RunTrace const& trace, std::vector<CatalogueDecision> const& decisions,
                       std::filesystem::path const& out_dir);

/// Writes `contents` to out_dir/name. Throws IoError.
void write_text_file(std::filesystem::path const& out_dir, std::string_view name, std::string const& contents);

struct VerifyReport {
    enum class Status { Consistent, MissingInput, Inconsistent };
    Status status = Status::Consistent;
    std::optional<std::size_t> replicate;
    std::optional<StageIndex> stage;
    std::string message;

    [[nodiscard]] bool ok() const noexcept { return status == Status::Consistent; }
};

/// Audits an output directory: the ledger hash chains against the heads
/// in metadata, every trace row's bytes and deltas against the ledger,
/// and balances and staking rates by replay from genesis. Stops at the
/// first inconsistency.
[[nodiscard]] VerifyReport verify_output_dir(std::filesystem::path const& dir);

}  // namespace catcon
