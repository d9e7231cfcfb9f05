#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"

#include "catcon/policy.hpp"
#include "catcon/settlement.hpp"
#include "catcon/types.hpp"

namespace catcon {

struct BalanceDistribution {
    enum class Kind { Constant, Uniform };
    Kind kind = Kind::Uniform;
    double low = 50.0;    // the constant when kind == Constant
    double high = 150.0;  // ignored when kind == Constant
};

/// Full parameterisation of a run. Field names match the JSON document
/// described by schema/simconfig.schema.json.
struct SimConfig {
    std::size_t n_agents = 100;
    std::size_t n_rounds = 500;
    std::size_t n_treatments = 5;
    /// The last n_investors agents are pure C3 investors.
    std::size_t n_investors = 0;
    BalanceDistribution initial_balance;
    PolicyConfig policy;
    Credit fee = 0.0;
    std::uint64_t seed = 20240601;
    std::size_t n_replicates = 1;
    CoefficientScope coefficient_scope = CoefficientScope::PerAgent;
    std::size_t max_actions_per_agent = 1;
    double catalogue_threshold = 0.0;
};

/// Checks every invariant and fills derived defaults (an empty
/// treatment_quality becomes (t + 0.5) / n_treatments). Throws ConfigError.
void validate(SimConfig& config);

/// Parses and validates; unknown keys are rejected. Throws ConfigError.
[[nodiscard]] SimConfig config_from_json(nlohmann::json const& doc);
[[nodiscard]] nlohmann::json config_to_json(SimConfig const& config);
/// Throws ConfigError (field "<file>") when the file cannot be read or parsed.
[[nodiscard]] SimConfig load_config(std::filesystem::path const& path);

[[nodiscard]] std::string to_string(PolicyMode mode);
[[nodiscard]] PolicyMode policy_mode_from_string(std::string const& s);

}  // namespace catcon
