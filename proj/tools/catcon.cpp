// catcon: command-line front end for the staked doctor-voting simulator.
//
// Exit codes: 0 success, 1 invalid input (config, flags, missing metadata),
// 2 I/O failure, 3 verification found an inconsistency. Every failure prints
// exactly one line to stderr starting with "error:".

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "catcon/catalogue.hpp"
#include "catcon/config.hpp"
#include "catcon/errors.hpp"
#include "catcon/harness.hpp"
#include "catcon/trace_io.hpp"

namespace {

using namespace catcon;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitIo = 2;
constexpr int kExitInconsistent = 3;

int fail(int code, std::string const& msg)
{
    fmt::print(stderr, "error: {}\n", msg);
    return code;
}

void setup_logging()
{
    auto logger = spdlog::stderr_color_mt("catcon");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (char const* env = std::getenv("CATCON_LOG")) {
        spdlog::set_level(spdlog::level::from_str(env));
    }
}

struct RunFlags {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;
    unsigned threads = 0;
};

void add_common(CLI::App* cmd, RunFlags& flags, bool needs_out)
{
    cmd->add_option("--config", flags.config_path, "Run configuration (JSON)")->required();
    auto* out = cmd->add_option("--out", flags.out_dir, "Output directory");
    if (needs_out) out->required();
    cmd->add_option("--seed", flags.seed, "Override the config seed");
    cmd->add_option("--mode", flags.mode, "Override the policy mode")
        ->check(CLI::IsMember({"learning", "nonlearning"}));
    cmd->add_option("--threads", flags.threads, "Worker threads (0 = all cores)");
}

SimConfig load_with_overrides(RunFlags const& flags)
{
    SimConfig cfg = load_config(flags.config_path);
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.mode) cfg.policy.mode = policy_mode_from_string(*flags.mode);
    validate(cfg);
    return cfg;
}

std::optional<std::vector<double>> parse_grid(std::string const& text)
{
    std::vector<double> grid;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc{} || ptr != item.data() + item.size() || !(v >= 0.0 && v <= 1.0)) {
            return std::nullopt;
        }
        grid.push_back(v);
    }
    if (grid.empty() || (!text.empty() && text.back() == ',')) return std::nullopt;
    return grid;
}

int cmd_run(RunFlags const& flags)
{
    SimConfig const cfg = load_with_overrides(flags);
    RunTrace const trace = run_simulation(cfg, {flags.threads});
    auto const decisions = decide_catalogue(aggregate_scores(trace), cfg.catalogue_threshold);
    write_run_outputs(trace, decisions, flags.out_dir);
    fmt::print("wrote {} replicate(s) x {} stage(s) to {}\n", cfg.n_replicates, cfg.n_rounds, flags.out_dir);
    return kExitOk;
}

int cmd_sweep(RunFlags const& flags, std::string const& grid_spec)
{
    auto grid = parse_grid(grid_spec);
    if (!grid) {
        return fail(kExitInvalid, fmt::format("--grid: '{}' is not a comma-separated list of rates in [0, 1]",
                                              grid_spec));
    }
    SimConfig const cfg = load_with_overrides(flags);
    SweepResult const sweep = sweep_staking_rate(cfg, *grid, {flags.threads});

    std::error_code ec;
    fs::create_directories(flags.out_dir, ec);
    if (ec) throw IoError("cannot create " + flags.out_dir + ": " + ec.message());
    std::ostringstream rows;
    write_sweep_csv(sweep, rows);
    write_text_file(flags.out_dir, kSweepFile, rows.str());
    std::ostringstream summary;
    write_sweep_summary_csv(sweep, summary);
    write_text_file(flags.out_dir, kSweepSummaryFile, summary.str());
    fmt::print("{} sweep over {} rate(s): spearman rho = {:.4f}\n", to_string(sweep.mode), grid->size(),
               sweep_spearman(sweep));
    return kExitOk;
}

int cmd_catalogue(RunFlags const& flags, std::optional<double> threshold)
{
    SimConfig cfg = load_with_overrides(flags);
    if (threshold) cfg.catalogue_threshold = *threshold;
    validate(cfg);
    RunTrace const trace = run_simulation(cfg, {flags.threads});
    auto const decisions = decide_catalogue(aggregate_scores(trace), cfg.catalogue_threshold);

    std::error_code ec;
    fs::create_directories(flags.out_dir, ec);
    if (ec) throw IoError("cannot create " + flags.out_dir + ": " + ec.message());
    std::ostringstream out;
    write_catalogue_csv(decisions, out);
    write_text_file(flags.out_dir, kCatalogueFile, out.str());
    for (CatalogueDecision const& d : decisions) {
        fmt::print("treatment {}: {} (mean {:.1f}, sd {:.1f}, accepted in {:.0f}% of replicates)\n",
                   d.treatment.value, d.included ? "include" : "exclude", d.score, d.dispersion,
                   100.0 * d.acceptance_rate);
    }
    return kExitOk;
}

int cmd_verify(std::string const& dir)
{
    VerifyReport const report = verify_output_dir(dir);
    switch (report.status) {
    case VerifyReport::Status::Consistent:
        fmt::print("ok: {} is consistent\n", dir);
        return kExitOk;
    case VerifyReport::Status::MissingInput:
        return fail(kExitInvalid, report.message);
    case VerifyReport::Status::Inconsistent:
        break;
    }
    std::string where = fmt::format("replicate {}", report.replicate.value_or(0));
    if (report.stage) where += fmt::format(" stage {}", *report.stage);
    return fail(kExitInconsistent, fmt::format("{}: {}", where, report.message));
}

}  // namespace

int main(int argc, char** argv)
{
    setup_logging();

    CLI::App app{"Staked doctor-voting simulator for medical insurance catalogues"};
    app.require_subcommand(1, 1);

    RunFlags flags;
    std::string grid_spec;
    std::optional<double> threshold;
    std::string verify_dir;
    std::string validate_path;

    auto* run = app.add_subcommand("run", "Simulate and write trace, ledger, metadata and catalogue");
    add_common(run, flags, true);

    auto* sweep = app.add_subcommand("sweep", "Staking-rate sweep; writes sweep.csv and sweep_summary.csv");
    add_common(sweep, flags, true);
    sweep->add_option("--grid", grid_spec, "Comma-separated staking rates in [0, 1]")->required();

    auto* catalogue = app.add_subcommand("catalogue", "Simulate and write catalogue.csv");
    add_common(catalogue, flags, true);
    catalogue->add_option("--threshold", threshold, "Inclusion threshold on the mean score");

    auto* verify = app.add_subcommand("verify", "Audit an output directory");
    verify->add_option("dir", verify_dir, "Directory written by `run`")->required();

    auto* validate_cmd = app.add_subcommand("validate-config", "Check a configuration file");
    validate_cmd->add_option("--config", validate_path, "Run configuration (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (CLI::CallForHelp const& e) {
        return app.exit(e);
    } catch (CLI::CallForAllHelp const& e) {
        return app.exit(e);
    } catch (CLI::ParseError const& e) {
        return fail(kExitInvalid, e.what());
    }

    try {
        if (*run) return cmd_run(flags);
        if (*sweep) return cmd_sweep(flags, grid_spec);
        if (*catalogue) return cmd_catalogue(flags, threshold);
        if (*verify) return cmd_verify(verify_dir);
        if (*validate_cmd) {
            SimConfig const cfg = load_config(validate_path);
            fmt::print("ok: {} agents, {} rounds, {} replicate(s), {} mode\n", cfg.n_agents, cfg.n_rounds,
                       cfg.n_replicates, to_string(cfg.policy.mode));
            return kExitOk;
        }
    } catch (ConfigError const& e) {
        return fail(kExitInvalid, fmt::format("invalid config: {}", e.what()));
    } catch (IoError const& e) {
        return fail(kExitIo, e.what());
    } catch (std::exception const& e) {
        return fail(kExitInvalid, e.what());
    }
    return kExitInvalid;
}
