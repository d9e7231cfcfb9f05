#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace catcon {

/// Opaque integer identifier, distinct per tag so ids from different
/// namespaces cannot be mixed up.
template <class Tag>
struct StrongId {
    std::uint64_t value = 0;

    constexpr StrongId() = default;
    constexpr explicit StrongId(std::uint64_t v) : value(v) {}

    friend constexpr auto operator<=>(StrongId, StrongId) = default;
};

struct AgentTag {};
struct TreatmentTag {};
struct ActionTag {};

using AgentId = StrongId<AgentTag>;
using TreatmentId = StrongId<TreatmentTag>;
using ActionId = StrongId<ActionTag>;
/// Round counter; the first settled stage is 0.
using StageIndex = std::uint64_t;

/// Credit points. Reals; see docs/canonical_serialization.md for the
/// on-disk decimal form.
using Credit = double;

enum class Role : std::uint8_t {
    Actor = 1u << 0,     // submits actions
    Rater = 1u << 1,     // rates other agents' actions
    Investor = 1u << 2,  // holds balance only
};

class RoleSet {
  public:
    constexpr RoleSet() = default;
    constexpr RoleSet(std::initializer_list<Role> roles)
    {
        for (Role r : roles) {
            bits_ |= static_cast<std::uint8_t>(r);
        }
    }

    [[nodiscard]] constexpr bool has(Role r) const { return (bits_ & static_cast<std::uint8_t>(r)) != 0; }
    constexpr void add(Role r) { bits_ |= static_cast<std::uint8_t>(r); }
    [[nodiscard]] constexpr bool empty() const { return bits_ == 0; }

    /// A pure investor never emits actions or ratings.
    [[nodiscard]] constexpr bool active() const { return has(Role::Actor) || has(Role::Rater); }

    friend constexpr bool operator==(RoleSet, RoleSet) = default;

  private:
    std::uint8_t bits_ = 0;
};

struct Agent {
    AgentId id;
    RoleSet roles{Role::Actor, Role::Rater};
    Credit balance = 0.0;
    double staking_rate_action = 0.0;
    double staking_rate_rating = 0.0;
    double skip_probability = 0.0;
    /// Personal offset added to each treatment's quality when this agent
    /// judges it; indexed by TreatmentId value. Empty means no bias.
    std::vector<double> opinion_bias;
};

enum class Direction : std::uint8_t { Endorse, Oppose };

[[nodiscard]] constexpr Direction opposite(Direction d)
{
    return d == Direction::Endorse ? Direction::Oppose : Direction::Endorse;
}

[[nodiscard]] constexpr double sign_of(Direction d) { return d == Direction::Endorse ? 1.0 : -1.0; }

struct Action {
    ActionId id;
    AgentId actor;
    StageIndex stage = 0;
    TreatmentId treatment;
    Direction direction = Direction::Endorse;
    Credit stake = 0.0;  // unsigned; direction does not enter settlement
};

struct Rating {
    AgentId rater;
    ActionId target_action;
    StageIndex stage = 0;
    Credit signed_stake = 0.0;  // > 0 approve, < 0 disapprove
};

/// Settlement result for one agent in one stage.
struct StageOutcome {
    double delta_action = 0.0;
    double delta_rating = 0.0;
    double delta_total = 0.0;
    double coeff_action = 0.0;
    double coeff_rating = 0.0;
    /// Transaction fees burned for this agent's submissions.
    Credit fee = 0.0;

    friend bool operator==(StageOutcome const&, StageOutcome const&) = default;
};

[[nodiscard]] std::string to_string(Direction d);

}  // namespace catcon

template <class Tag>
struct std::hash<catcon::StrongId<Tag>> {
    std::size_t operator()(catcon::StrongId<Tag> id) const noexcept { return std::hash<std::uint64_t>{}(id.value); }
};
