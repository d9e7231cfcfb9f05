#include "doctest.h"

#include <random>

#include "catcon/errors.hpp"
#include "catcon/settlement.hpp"
#include "support/settlement_oracle.hpp"

using namespace catcon;

namespace {

constexpr AgentId kActor{0};
constexpr AgentId kRaterA{1};
constexpr AgentId kRaterB{2};
constexpr AgentId kRaterC{3};

Action make_action(std::uint64_t id, AgentId actor, double stake)
{
    Action a;
    a.id = ActionId{id};
    a.actor = actor;
    a.stake = stake;
    return a;
}

Rating make_rating(AgentId rater, std::uint64_t action, double stake) { return {rater, ActionId{action}, 0, stake}; }

/// Actor stakes 10; raters stake +5 and -3.
StageSubmissions three_agent_scenario()
{
    StageSubmissions s;
    s.actions = {make_action(7, kActor, 10.0)};
    s.ratings = {make_rating(kRaterA, 7, 5.0), make_rating(kRaterB, 7, -3.0)};
    return s;
}

oracle::DenseStage random_dense(std::mt19937_64& gen, std::size_t n)
{
    std::uniform_real_distribution<double> stake(0.0, 100.0);
    std::uniform_real_distribution<double> signed_stake(-100.0, 100.0);
    std::bernoulli_distribution coin(0.6);
    oracle::DenseStage d(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (coin(gen)) d.action[i] = stake(gen);
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j && coin(gen)) d.rating[j][i] = signed_stake(gen);
        }
    }
    return d;
}

}  // namespace

TEST_CASE("coeff_action normalises by the actor's absolute stake products")
{
    auto s = three_agent_scenario();
    CHECK(coeff_action(kActor, s) == doctest::Approx(1.0 / 80.0).epsilon(1e-15));

    StageSubmissions unrated;
    unrated.actions = {make_action(1, kActor, 10.0)};
    CHECK(coeff_action(kActor, unrated) == 0.0);

    StageSubmissions zero_stake;
    zero_stake.actions = {make_action(1, kActor, 0.0)};
    zero_stake.ratings = {make_rating(kRaterA, 1, 5.0)};
    CHECK(coeff_action(kActor, zero_stake) == 0.0);
}

TEST_CASE("coeff_rating normalises by co-rating products")
{
    StageSubmissions s;
    s.actions = {make_action(1, kActor, 1.0)};
    s.ratings = {make_rating(kRaterA, 1, 4.0), make_rating(kRaterB, 1, 2.0), make_rating(kRaterC, 1, -6.0)};
    CHECK(coeff_rating(kRaterA, s) == doctest::Approx(1.0 / 32.0).epsilon(1e-15));
    CHECK(rating_component(kRaterA, s) == doctest::Approx(-0.5).epsilon(1e-15));

    StageSubmissions lone;
    lone.actions = {make_action(1, kActor, 1.0)};
    lone.ratings = {make_rating(kRaterA, 1, 4.0)};
    CHECK(coeff_rating(kRaterA, lone) == 0.0);
    CHECK(coeff_rating(kRaterB, lone) == 0.0);
}

TEST_CASE("action_component examples")
{
    CHECK(action_component(kActor, three_agent_scenario()) == doctest::Approx(0.25).epsilon(1e-15));

    StageSubmissions rejected;
    rejected.actions = {make_action(1, kActor, 10.0)};
    rejected.ratings = {make_rating(kRaterA, 1, -5.0)};
    CHECK(action_component(kActor, rejected) == -1.0);

    StageSubmissions unrated;
    unrated.actions = {make_action(1, kActor, 10.0)};
    CHECK(action_component(kActor, unrated) == 0.0);
}

TEST_CASE("two co-raters: agreement pays +1, disagreement costs 1")
{
    for (auto [a, b, expected] : {std::tuple{1.0, 1.0, 1.0}, {-1.0, -1.0, 1.0}, {1.0, -1.0, -1.0}, {-2.0, 7.0, -1.0}}) {
        StageSubmissions s;
        s.actions = {make_action(1, kActor, 3.0)};
        s.ratings = {make_rating(kRaterA, 1, a), make_rating(kRaterB, 1, b)};
        auto out = settle_stage(s);
        CHECK(out.at(kRaterA).delta_rating == expected);
        CHECK(out.at(kRaterB).delta_rating == expected);
    }
}

TEST_CASE("settle_stage on the three-agent scenario")
{
    auto out = settle_stage(three_agent_scenario());
    REQUIRE(out.size() == 3);
    CHECK(out.at(kActor).delta_action == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(out.at(kActor).delta_rating == 0.0);
    CHECK(out.at(kRaterA).delta_rating == -1.0);
    CHECK(out.at(kRaterB).delta_rating == -1.0);
    CHECK(out.at(kRaterA).delta_action == 0.0);
    for (auto const& [id, o] : out) {
        CHECK(o.delta_total == o.delta_action + o.delta_rating);
    }

    CHECK(settle_stage(StageSubmissions{}).empty());
}

TEST_CASE("settle_stage rejects malformed submissions")
{
    SUBCASE("dangling rating target")
    {
        auto s = three_agent_scenario();
        s.ratings.push_back(make_rating(kRaterC, 99, 1.0));
        CHECK_THROWS_WITH_AS((void)settle_stage(s), doctest::Contains("unknown action 99"), ValidationError);
    }
    SUBCASE("self rating")
    {
        auto s = three_agent_scenario();
        s.ratings.push_back(make_rating(kActor, 7, 1.0));
        CHECK_THROWS_AS((void)settle_stage(s), ValidationError);
    }
    SUBCASE("duplicate rating pair")
    {
        auto s = three_agent_scenario();
        s.ratings.push_back(make_rating(kRaterA, 7, 2.0));
        CHECK_THROWS_AS((void)settle_stage(s), ValidationError);
    }
    SUBCASE("second action by one agent")
    {
        auto s = three_agent_scenario();
        s.actions.push_back(make_action(8, kActor, 1.0));
        CHECK_THROWS_AS((void)settle_stage(s), ValidationError);
        CHECK_NOTHROW(validate_submissions(s, 2));
    }
    SUBCASE("negative action stake")
    {
        auto s = three_agent_scenario();
        s.actions[0].stake = -1.0;
        CHECK_THROWS_AS((void)settle_stage(s), ValidationError);
    }
}

TEST_CASE("settle_stage matches the oracle on every 3-agent {-1,0,1} configuration")
{
    // Action stake in {absent, 0, 1}; each of the six rating slots in
    // {absent, -1, 0, +1}.
    std::size_t configurations = 0;
    double worst = 0.0;
    for (int a = 0; a < 27; ++a) {
        for (int r = 0; r < 4096; ++r) {
            oracle::DenseStage d(3);
            int code = a;
            for (std::size_t i = 0; i < 3; ++i, code /= 3) {
                if (code % 3 != 0) d.action[i] = static_cast<double>(code % 3 - 1);
            }
            int rcode = r;
            for (std::size_t j = 0; j < 3; ++j) {
                for (std::size_t i = 0; i < 3; ++i) {
                    if (i == j) continue;
                    int const v = rcode % 4;
                    rcode /= 4;
                    if (v != 0) d.rating[j][i] = static_cast<double>(v - 2);
                }
            }
            worst = std::max(worst, oracle::max_abs_error(d, settle_stage(oracle::to_submissions(d))));
            ++configurations;
        }
    }
    CHECK(configurations == 27u * 4096u);
    CHECK(worst <= 1e-12);
}

TEST_CASE("settlement properties on random stages")
{
    std::mt19937_64 gen(12345);
    for (int trial = 0; trial < 2000; ++trial) {
        auto const dense = random_dense(gen, 2 + trial % 5);
        auto const subs = oracle::to_submissions(dense);
        auto const out = settle_stage(subs);

        CHECK(oracle::max_abs_error(dense, out) <= 1e-12);
        for (auto const& [id, o] : out) {
            REQUIRE(std::abs(o.delta_action) <= 1.0 + 1e-15);
            REQUIRE(std::abs(o.delta_rating) <= 1.0 + 1e-15);
            REQUIRE(o.delta_total == o.delta_action + o.delta_rating);
        }

        for (double lambda : {0.5, 3.0, 10.0}) {
            StageSubmissions scaled = subs;
            for (auto& a : scaled.actions) a.stake *= lambda;
            for (auto& r : scaled.ratings) r.signed_stake *= lambda;
            auto const out2 = settle_stage(scaled);
            REQUIRE(out2.size() == out.size());
            for (auto const& [id, o] : out) {
                CHECK(out2.at(id).delta_action == doctest::Approx(o.delta_action).epsilon(1e-9));
                CHECK(out2.at(id).delta_rating == doctest::Approx(o.delta_rating).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("an agent whose stakes are all zero settles at zero")
{
    StageSubmissions s;
    s.actions = {make_action(1, kActor, 0.0), make_action(2, kRaterA, 4.0)};
    s.ratings = {make_rating(kActor, 2, 0.0), make_rating(kRaterB, 2, 3.0), make_rating(kRaterA, 1, 2.0)};
    auto out = settle_stage(s);
    CHECK(out.at(kActor).delta_total == 0.0);
}

TEST_CASE("results do not depend on submission order")
{
    std::mt19937_64 gen(99);
    auto const dense = random_dense(gen, 6);
    auto subs = oracle::to_submissions(dense);
    auto const baseline = settle_stage(subs);
    std::shuffle(subs.actions.begin(), subs.actions.end(), gen);
    std::shuffle(subs.ratings.begin(), subs.ratings.end(), gen);
    CHECK(settle_stage(subs) == baseline);
}

TEST_CASE("global coefficient scope shares one normaliser per stage")
{
    StageSubmissions s;
    s.actions = {make_action(1, kActor, 10.0), make_action(2, kRaterA, 2.0)};
    s.ratings = {make_rating(kRaterA, 1, 5.0), make_rating(kActor, 2, -1.0)};
    auto out = settle_stage(s, CoefficientScope::Global);
    // Action products: |10*5| + |2*-1| = 52.
    CHECK(out.at(kActor).coeff_action == doctest::Approx(1.0 / 52.0));
    CHECK(out.at(kRaterA).coeff_action == doctest::Approx(1.0 / 52.0));
    CHECK(out.at(kActor).delta_action == doctest::Approx(50.0 / 52.0));
    CHECK(out.at(kRaterA).delta_action == doctest::Approx(-2.0 / 52.0));
}
