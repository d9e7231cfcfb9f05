#include "catcon/trace_io.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "catcon/errors.hpp"
#include "catcon/rng.hpp"

namespace catcon {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::vector<std::string_view> split_csv(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        std::size_t const comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

template <class T>
bool parse_number(std::string_view text, T& out)
{
    auto const* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

std::optional<AgentRow> parse_trace_row(std::string_view line)
{
    auto const f = split_csv(line);
    if (f.size() != 8) return std::nullopt;
    AgentRow row;
    std::uint64_t agent = 0;
    if (!parse_number(f[0], row.replicate) || !parse_number(f[1], row.stage) || !parse_number(f[2], agent) ||
        !parse_number(f[3], row.balance) || !parse_number(f[4], row.delta_action) ||
        !parse_number(f[5], row.delta_rating) || !parse_number(f[6], row.delta_total) ||
        !parse_number(f[7], row.staking_rate_action)) {
        return std::nullopt;
    }
    row.agent = AgentId{agent};
    return row;
}

StageOutcome outcome_from_json(json const& o)
{
    StageOutcome out;
    out.coeff_action = o.at("coeff_action").get<double>();
    out.coeff_rating = o.at("coeff_rating").get<double>();
    out.delta_action = o.at("delta_action").get<double>();
    out.delta_rating = o.at("delta_rating").get<double>();
    out.delta_total = o.at("delta_total").get<double>();
    out.fee = o.at("fee").get<double>();
    return out;
}

std::ofstream open_for_write(fs::path const& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    return out;
}

void finish(std::ofstream& out, fs::path const& path)
{
    out.flush();
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

VerifyReport missing(std::string msg) { return {VerifyReport::Status::MissingInput, std::nullopt, std::nullopt, std::move(msg)}; }

VerifyReport inconsistent(std::size_t replicate, std::optional<StageIndex> stage, std::string msg)
{
    return {VerifyReport::Status::Inconsistent, replicate, stage, std::move(msg)};
}

}  // namespace

std::string format_trace_row(AgentRow const& row)
{
    return fmt::format("{},{},{},{},{},{},{},{}", row.replicate, row.stage, row.agent.value, format_real(row.balance),
                       format_real(row.delta_action), format_real(row.delta_rating), format_real(row.delta_total),
                       format_real(row.staking_rate_action));
}

void write_trace_csv(RunTrace const& trace, std::ostream& out)
{
    out << kTraceHeader << '\n';
    for (ReplicateTrace const& rep : trace.replicates) {
        for (AgentRow const& row : rep.rows) {
            out << format_trace_row(row) << '\n';
        }
    }
}

void write_ledger_jsonl(RunTrace const& trace, std::ostream& out)
{
    for (ReplicateTrace const& rep : trace.replicates) {
        for (StageRecord const& rec : rep.ledger.stage_log()) {
            out << "{\"hash\":\"" << to_hex(rec.hash) << "\",\"prev_hash\":\"" << to_hex(rec.prev_hash)
                << "\",\"record\":" << canonical_stage_json(rec.stage, rec.outcomes)
                << ",\"replicate\":" << rep.replicate << "}\n";
        }
    }
}

void write_catalogue_csv(std::vector<CatalogueDecision> const& decisions, std::ostream& out)
{
    out << kCatalogueHeader << '\n';
    for (CatalogueDecision const& d : decisions) {
        out << fmt::format("{},{},{},{},{}\n", d.treatment.value, format_real(d.score), format_real(d.dispersion),
                           format_real(d.acceptance_rate), d.included ? "true" : "false");
    }
}

void write_sweep_csv(SweepResult const& sweep, std::ostream& out)
{
    std::string const mode = to_string(sweep.mode);
    out << kSweepHeader << '\n';
    for (SweepRow const& row : sweep.rows) {
        out << fmt::format("{},{},{},{}\n", format_real(row.rate), row.agent.value, format_real(row.cumulative_delta),
                           mode);
    }
}

void write_sweep_summary_csv(SweepResult const& sweep, std::ostream& out)
{
    std::string const mode = to_string(sweep.mode);
    out << kSweepSummaryHeader << '\n';
    for (SweepGroup const& g : sweep.groups) {
        out << fmt::format("{},{},{},{},{},{}\n", format_real(g.grid_rate), g.agents,
                           format_real(g.mean_cumulative_delta), format_real(g.sd_cumulative_delta),
                           format_real(g.mean_cumulative_action), mode);
    }
}

json make_metadata(RunTrace const& trace)
{
    json reps = json::array();
    for (ReplicateTrace const& rep : trace.replicates) {
        json balances = json::array();
        for (auto const& [id, b] : rep.initial_balances) balances.push_back(b);
        json rates = json::array();
        for (auto const& [id, r] : rep.initial_staking_rate_action) rates.push_back(r);
        reps.push_back({
            {"replicate", rep.replicate},
            {"stages", rep.ledger.stage_log().size()},
            {"chain_head", to_hex(rep.ledger.head_hash())},
            {"initial_balances", balances},
            {"initial_staking_rate_action", rates},
        });
    }
    return {
        {"format_version", kTraceFormatVersion},
        {"code_version", kCodeVersion},
        {"prng", kRngId},
        {"config", config_to_json(trace.config)},
        {"files",
         {{"trace", kTraceFile}, {"ledger", kLedgerFile}, {"catalogue", kCatalogueFile}}},
        {"replicates", reps},
    };
}

void write_text_file(fs::path const& out_dir, std::string_view name, std::string const& contents)
{
    fs::path const path = out_dir / name;
    auto out = open_for_write(path);
    out << contents;
    finish(out, path);
}

void write_run_outputs(RunTrace const& trace, std::vector<CatalogueDecision> const& decisions,
                       fs::path const& out_dir)
{
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    }
    {
        fs::path const path = out_dir / kTraceFile;
        auto out = open_for_write(path);
        write_trace_csv(trace, out);
        finish(out, path);
    }
    {
        fs::path const path = out_dir / kLedgerFile;
        auto out = open_for_write(path);
        write_ledger_jsonl(trace, out);
        finish(out, path);
    }
    {
        std::ostringstream cat;
        write_catalogue_csv(decisions, cat);
        write_text_file(out_dir, kCatalogueFile, cat.str());
    }
    write_text_file(out_dir, kMetadataFile, make_metadata(trace).dump(2) + "\n");
}

VerifyReport verify_output_dir(fs::path const& dir)
{
    // Metadata: the trust anchor.
    std::ifstream meta_in(dir / kMetadataFile);
    if (!meta_in) {
        return missing(fmt::format("missing {} in {}", kMetadataFile, dir.string()));
    }
    json meta;
    SimConfig config;
    std::vector<std::vector<Credit>> init_balance;
    std::vector<std::vector<double>> init_rate;
    std::vector<std::string> heads;
    try {
        meta = json::parse(meta_in);
        config = config_from_json(meta.at("config"));
        json const& reps = meta.at("replicates");
        if (!reps.is_array() || reps.size() != config.n_replicates) {
            return missing("metadata lists the wrong number of replicates");
        }
        for (json const& rep : reps) {
            init_balance.push_back(rep.at("initial_balances").get<std::vector<Credit>>());
            init_rate.push_back(rep.at("initial_staking_rate_action").get<std::vector<double>>());
            heads.push_back(rep.at("chain_head").get<std::string>());
            if (init_balance.back().size() != config.n_agents || init_rate.back().size() != config.n_agents) {
                return missing("metadata genesis does not cover every agent");
            }
        }
    } catch (ConfigError const& e) {
        return missing(std::string("metadata config invalid: ") + e.what());
    } catch (json::exception const& e) {
        return missing(std::string("metadata unreadable: ") + e.what());
    }

    std::size_t const R = config.n_replicates;
    std::size_t const T = config.n_rounds;
    std::size_t const N = config.n_agents;

    // Ledger chains.
    std::ifstream ledger_in(dir / kLedgerFile);
    if (!ledger_in) {
        return missing(fmt::format("missing {} in {}", kLedgerFile, dir.string()));
    }
    std::vector<std::vector<StageRecord>> records(R);
    {
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(ledger_in, line)) {
            ++line_no;
            std::size_t r = 0;
            try {
                json const j = json::parse(line);
                r = j.at("replicate").get<std::size_t>();
                if (r >= R) {
                    return inconsistent(r, std::nullopt, fmt::format("ledger line {} names an unknown replicate", line_no));
                }
                StageRecord rec;
                rec.hash = digest_from_hex(j.at("hash").get<std::string>());
                rec.prev_hash = digest_from_hex(j.at("prev_hash").get<std::string>());
                json const& body = j.at("record");
                rec.stage = body.at("stage").get<StageIndex>();
                for (auto it = body.at("outcomes").begin(); it != body.at("outcomes").end(); ++it) {
                    std::uint64_t id = 0;
                    if (!parse_number(std::string_view(it.key()), id) || id >= N) {
                        return inconsistent(r, rec.stage, "ledger outcome names an unknown agent");
                    }
                    rec.outcomes.emplace(AgentId{id}, outcome_from_json(it.value()));
                }
                records[r].push_back(std::move(rec));
            } catch (std::exception const& e) {
                return inconsistent(r, records[r].size(), fmt::format("ledger line {} malformed: {}", line_no, e.what()));
            }
        }
    }
    for (std::size_t r = 0; r < R; ++r) {
        std::map<AgentId, Credit> genesis;
        for (std::size_t i = 0; i < N; ++i) genesis.emplace(AgentId{i}, init_balance[r][i]);
        CreditLedger ledger = CreditLedger::restore(std::move(genesis), records[r]);
        ChainCheck const check = ledger_verify_chain(ledger);
        if (!check.valid) {
            return inconsistent(r, check.first_bad_stage, "ledger hash chain does not verify");
        }
        if (records[r].size() != T) {
            return inconsistent(r, records[r].size(), fmt::format("ledger holds {} stages, expected {}",
                                                                   records[r].size(), T));
        }
        if (to_hex(ledger.head_hash()) != heads[r]) {
            return inconsistent(r, T - 1, "ledger chain head differs from metadata");
        }
    }

    // Trace rows against the ledger, replaying balances and rates.
    std::ifstream trace_in(dir / kTraceFile);
    if (!trace_in) {
        return missing(fmt::format("missing {} in {}", kTraceFile, dir.string()));
    }
    std::string line;
    if (!std::getline(trace_in, line) || line != kTraceHeader) {
        return inconsistent(0, std::nullopt, "trace header differs from the expected columns");
    }
    for (std::size_t r = 0; r < R; ++r) {
        std::vector<Credit> balance = init_balance[r];
        std::vector<double> rate = init_rate[r];
        for (StageIndex s = 0; s < T; ++s) {
            OutcomeMap const& outcomes = records[r][s].outcomes;
            for (std::size_t i = 0; i < N; ++i) {
                if (!std::getline(trace_in, line)) {
                    return inconsistent(r, s, "trace ends early");
                }
                auto const row = parse_trace_row(line);
                if (!row || format_trace_row(*row) != line) {
                    return inconsistent(r, s, fmt::format("agent {} row is malformed or not in canonical form", i));
                }
                if (row->replicate != r || row->stage != s || row->agent.value != i) {
                    return inconsistent(r, s, fmt::format("row out of order (expected agent {})", i));
                }
                StageOutcome expected;
                if (auto it = outcomes.find(AgentId{i}); it != outcomes.end()) {
                    expected = it->second;
                }
                if (row->delta_action != expected.delta_action || row->delta_rating != expected.delta_rating ||
                    row->delta_total != expected.delta_total) {
                    return inconsistent(r, s, fmt::format("agent {} deltas differ from the ledger", i));
                }
                Credit next = balance[i] + expected.delta_total - expected.fee;
                if (next < 0.0) next = 0.0;
                if (row->balance != next) {
                    return inconsistent(r, s, fmt::format("agent {} balance does not replay", i));
                }
                balance[i] = next;
                double const next_rate = next_staking_rate(rate[i], expected.delta_action, config.policy);
                if (row->staking_rate_action != next_rate) {
                    return inconsistent(r, s, fmt::format("agent {} staking rate does not replay", i));
                }
                rate[i] = next_rate;
            }
        }
    }
    if (std::getline(trace_in, line)) {
        return inconsistent(R - 1, T - 1, "trace has rows beyond the configured run");
    }
    return {};
}

}  // namespace catcon
