#include "catcon/config.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <set>

#include "catcon/errors.hpp"

namespace catcon {

using nlohmann::json;

namespace {

void reject_unknown_keys(json const& obj, std::string const& prefix, std::set<std::string> const& allowed)
{
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.contains(it.key())) {
            throw ConfigError(prefix + it.key(), "unknown key");
        }
    }
}

json const& require_object(json const& node, std::string const& field)
{
    if (!node.is_object()) {
        throw ConfigError(field, "must be an object");
    }
    return node;
}

double read_real(json const& obj, std::string const& key, std::string const& field, double fallback)
{
    if (!obj.contains(key)) return fallback;
    json const& v = obj.at(key);
    if (!v.is_number()) {
        throw ConfigError(field, "must be a number");
    }
    double x = v.get<double>();
    if (!std::isfinite(x)) {
        throw ConfigError(field, "must be finite");
    }
    return x;
}

std::uint64_t read_uint(json const& obj, std::string const& key, std::string const& field, std::uint64_t fallback)
{
    if (!obj.contains(key)) return fallback;
    json const& v = obj.at(key);
    if (v.is_number_unsigned()) {
        return v.get<std::uint64_t>();
    }
    throw ConfigError(field, "must be a non-negative integer");
}

bool read_bool(json const& obj, std::string const& key, std::string const& field, bool fallback)
{
    if (!obj.contains(key)) return fallback;
    json const& v = obj.at(key);
    if (!v.is_boolean()) {
        throw ConfigError(field, "must be true or false");
    }
    return v.get<bool>();
}

std::string read_string(json const& obj, std::string const& key, std::string const& field, std::string fallback)
{
    if (!obj.contains(key)) return fallback;
    json const& v = obj.at(key);
    if (!v.is_string()) {
        throw ConfigError(field, "must be a string");
    }
    return v.get<std::string>();
}

PolicyConfig policy_from_json(json const& node)
{
    require_object(node, "policy");
    reject_unknown_keys(node, "policy.",
                        {"mode", "consumer_selection", "learning_rate", "staking_rate_bounds", "skip_probability",
                         "rating_sign_model", "treatment_quality", "opinion_spread", "ratings_per_rater"});
    PolicyConfig p;
    std::string mode = read_string(node, "mode", "policy.mode", to_string(p.mode));
    try {
        p.mode = policy_mode_from_string(mode);
    } catch (std::invalid_argument const&) {
        throw ConfigError("policy.mode", "must be \"learning\" or \"nonlearning\"");
    }
    p.consumer_selection = read_bool(node, "consumer_selection", "policy.consumer_selection", p.consumer_selection);
    p.learning_rate = read_real(node, "learning_rate", "policy.learning_rate", p.learning_rate);
    p.skip_probability = read_real(node, "skip_probability", "policy.skip_probability", p.skip_probability);
    p.opinion_spread = read_real(node, "opinion_spread", "policy.opinion_spread", p.opinion_spread);
    p.ratings_per_rater = read_uint(node, "ratings_per_rater", "policy.ratings_per_rater", p.ratings_per_rater);

    if (node.contains("staking_rate_bounds")) {
        json const& b = node.at("staking_rate_bounds");
        if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number()) {
            throw ConfigError("policy.staking_rate_bounds", "must be a [min, max] pair of numbers");
        }
        p.min_staking_rate = b[0].get<double>();
        p.max_staking_rate = b[1].get<double>();
    }
    if (node.contains("rating_sign_model")) {
        json const& m = require_object(node.at("rating_sign_model"), "policy.rating_sign_model");
        reject_unknown_keys(m, "policy.rating_sign_model.", {"kind", "epsilon"});
        std::string kind = read_string(m, "kind", "policy.rating_sign_model.kind", "noisy");
        if (kind == "truthful") {
            p.sign_model.kind = SignModel::Kind::TruthfulQuality;
            p.sign_model.epsilon = 0.0;
            if (m.contains("epsilon")) {
                throw ConfigError("policy.rating_sign_model.epsilon", "only valid for kind \"noisy\"");
            }
        } else if (kind == "noisy") {
            p.sign_model.kind = SignModel::Kind::NoisyQuality;
            p.sign_model.epsilon = read_real(m, "epsilon", "policy.rating_sign_model.epsilon", p.sign_model.epsilon);
        } else {
            throw ConfigError("policy.rating_sign_model.kind", "must be \"truthful\" or \"noisy\"");
        }
    }
    if (node.contains("treatment_quality")) {
        json const& q = node.at("treatment_quality");
        if (!q.is_array()) {
            throw ConfigError("policy.treatment_quality", "must be an array of numbers");
        }
        for (json const& v : q) {
            if (!v.is_number()) {
                throw ConfigError("policy.treatment_quality", "must be an array of numbers");
            }
            p.treatment_quality.push_back(v.get<double>());
        }
    }
    return p;
}

}  // namespace

std::string to_string(PolicyMode mode) { return mode == PolicyMode::Learning ? "learning" : "nonlearning"; }

PolicyMode policy_mode_from_string(std::string const& s)
{
    if (s == "learning") return PolicyMode::Learning;
    if (s == "nonlearning") return PolicyMode::NonLearning;
    throw std::invalid_argument("unknown policy mode: " + s);
}

void validate(SimConfig& config)
{
    if (config.n_agents < 2) throw ConfigError("n_agents", "must be at least 2");
    if (config.n_rounds < 1) throw ConfigError("n_rounds", "must be at least 1");
    if (config.n_treatments < 1) throw ConfigError("n_treatments", "must be at least 1");
    if (config.n_replicates < 1) throw ConfigError("n_replicates", "must be at least 1");
    if (config.n_investors >= config.n_agents) {
        throw ConfigError("n_investors", "must leave at least one non-investor agent");
    }
    if (config.max_actions_per_agent != 1) {
        throw ConfigError("max_actions_per_agent", "only 1 action per agent per stage is supported");
    }
    if (!std::isfinite(config.fee) || config.fee < 0.0) throw ConfigError("fee", "must be finite and non-negative");
    if (!std::isfinite(config.catalogue_threshold)) throw ConfigError("catalogue_threshold", "must be finite");

    auto const& dist = config.initial_balance;
    if (!std::isfinite(dist.low) || dist.low < 0.0) {
        throw ConfigError("initial_balance", "balances must be finite and non-negative");
    }
    if (dist.kind == BalanceDistribution::Kind::Uniform && !(std::isfinite(dist.high) && dist.low <= dist.high)) {
        throw ConfigError("initial_balance.high", "must be finite and not below low");
    }

    auto& policy = config.policy;
    if (policy.treatment_quality.empty()) {
        for (std::size_t t = 0; t < config.n_treatments; ++t) {
            policy.treatment_quality.push_back((static_cast<double>(t) + 0.5) / static_cast<double>(config.n_treatments));
        }
    } else if (policy.treatment_quality.size() != config.n_treatments) {
        throw ConfigError("policy.treatment_quality", fmt::format("must list exactly n_treatments ({}) values",
                                                                  config.n_treatments));
    }
    validate(policy);
}

SimConfig config_from_json(json const& doc)
{
    require_object(doc, "<root>");
    reject_unknown_keys(doc, "",
                        {"n_agents", "n_rounds", "n_treatments", "n_investors", "initial_balance", "policy", "fee",
                         "seed", "n_replicates", "coefficient_scope", "max_actions_per_agent",
                         "catalogue_threshold"});
    SimConfig c;
    c.n_agents = read_uint(doc, "n_agents", "n_agents", c.n_agents);
    c.n_rounds = read_uint(doc, "n_rounds", "n_rounds", c.n_rounds);
    c.n_treatments = read_uint(doc, "n_treatments", "n_treatments", c.n_treatments);
    c.n_investors = read_uint(doc, "n_investors", "n_investors", c.n_investors);
    c.n_replicates = read_uint(doc, "n_replicates", "n_replicates", c.n_replicates);
    c.max_actions_per_agent = read_uint(doc, "max_actions_per_agent", "max_actions_per_agent", c.max_actions_per_agent);
    c.seed = read_uint(doc, "seed", "seed", c.seed);
    c.fee = read_real(doc, "fee", "fee", c.fee);
    c.catalogue_threshold = read_real(doc, "catalogue_threshold", "catalogue_threshold", c.catalogue_threshold);

    std::string scope = read_string(doc, "coefficient_scope", "coefficient_scope", "per_agent");
    if (scope == "per_agent") {
        c.coefficient_scope = CoefficientScope::PerAgent;
    } else if (scope == "global") {
        c.coefficient_scope = CoefficientScope::Global;
    } else {
        throw ConfigError("coefficient_scope", "must be \"per_agent\" or \"global\"");
    }

    if (doc.contains("initial_balance")) {
        json const& b = require_object(doc.at("initial_balance"), "initial_balance");
        std::string kind = read_string(b, "kind", "initial_balance.kind", "uniform");
        if (kind == "constant") {
            reject_unknown_keys(b, "initial_balance.", {"kind", "value"});
            if (!b.contains("value")) throw ConfigError("initial_balance.value", "required for kind \"constant\"");
            c.initial_balance.kind = BalanceDistribution::Kind::Constant;
            c.initial_balance.low = c.initial_balance.high = read_real(b, "value", "initial_balance.value", 0.0);
        } else if (kind == "uniform") {
            reject_unknown_keys(b, "initial_balance.", {"kind", "low", "high"});
            c.initial_balance.kind = BalanceDistribution::Kind::Uniform;
            c.initial_balance.low = read_real(b, "low", "initial_balance.low", c.initial_balance.low);
            c.initial_balance.high = read_real(b, "high", "initial_balance.high", c.initial_balance.high);
        } else {
            throw ConfigError("initial_balance.kind", "must be \"constant\" or \"uniform\"");
        }
    }
    if (doc.contains("policy")) {
        c.policy = policy_from_json(doc.at("policy"));
    }
    validate(c);
    return c;
}

json config_to_json(SimConfig const& c)
{
    json balance;
    if (c.initial_balance.kind == BalanceDistribution::Kind::Constant) {
        balance = {{"kind", "constant"}, {"value", c.initial_balance.low}};
    } else {
        balance = {{"kind", "uniform"}, {"low", c.initial_balance.low}, {"high", c.initial_balance.high}};
    }
    json sign;
    if (c.policy.sign_model.kind == SignModel::Kind::TruthfulQuality) {
        sign = {{"kind", "truthful"}};
    } else {
        sign = {{"kind", "noisy"}, {"epsilon", c.policy.sign_model.epsilon}};
    }
    json policy = {
        {"mode", to_string(c.policy.mode)},
        {"consumer_selection", c.policy.consumer_selection},
        {"learning_rate", c.policy.learning_rate},
        {"staking_rate_bounds", {c.policy.min_staking_rate, c.policy.max_staking_rate}},
        {"skip_probability", c.policy.skip_probability},
        {"rating_sign_model", sign},
        {"treatment_quality", c.policy.treatment_quality},
        {"opinion_spread", c.policy.opinion_spread},
        {"ratings_per_rater", c.policy.ratings_per_rater},
    };
    return {
        {"n_agents", c.n_agents},
        {"n_rounds", c.n_rounds},
        {"n_treatments", c.n_treatments},
        {"n_investors", c.n_investors},
        {"initial_balance", balance},
        {"policy", policy},
        {"fee", c.fee},
        {"seed", c.seed},
        {"n_replicates", c.n_replicates},
        {"coefficient_scope", c.coefficient_scope == CoefficientScope::PerAgent ? "per_agent" : "global"},
        {"max_actions_per_agent", c.max_actions_per_agent},
        {"catalogue_threshold", c.catalogue_threshold},
    };
}

SimConfig load_config(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("<file>", "cannot open " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (json::parse_error const& e) {
        throw ConfigError("<file>", std::string("not valid JSON: ") + e.what());
    }
    return config_from_json(doc);
}

}  // namespace catcon
