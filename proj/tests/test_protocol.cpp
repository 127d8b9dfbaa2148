#include "fixtures.hpp"

#include "popsim/error.hpp"
#include "popsim/protocol.hpp"

#include <doctest.h>

#include <random>

using namespace popsim;

TEST_CASE("unset pairs keep the identity transition") {
    ProtocolSpec p({"A", "B"});
    const auto a = p.at("A"), b = p.at("B");
    CHECK(p.is_identity(a, b));
    CHECK(p.delta(b, a) == StatePair{b, a});
    p.set_delta(a, a, {b, a});
    CHECK_FALSE(p.is_identity(a, a));
    CHECK(p.is_identity(b, b));
}

TEST_CASE("state lookup") {
    ProtocolSpec p({"A", "B"});
    CHECK(p.find("B")->index == 1);
    CHECK_FALSE(p.find("C"));
    CHECK_THROWS_AS(p.at("C"), Error);
    CHECK_THROWS_AS(ProtocolSpec({"A", "A"}), Error);
    CHECK(p.initial_state().index == 0);
    p.add_input("x", p.at("B"));
    CHECK(p.initial_state() == p.at("B"));
}

TEST_CASE("apply_rule examples") {
    auto p = fixtures::parse("states A B\noutput A=1 B=0\nA A -> B A\n");
    const auto a = p.at("A"), b = p.at("B");
    CHECK(apply_rule(p, Configuration({3, 0}), a, a) == Configuration({2, 1}));

    auto id = fixtures::parse("states A\noutput A=1\n");
    CHECK(apply_rule(id, Configuration({5}), id.at("A"), id.at("A")) == Configuration({5}));

    CHECK_THROWS_AS(apply_rule(p, Configuration({1, 0}), a, a), InvalidDrawError);
    CHECK_THROWS_AS(apply_rule(p, Configuration({1, 0}), a, b), InvalidDrawError);
}

TEST_CASE("apply_rule: two initial leaders of protocol 1") {
    auto p = protocol_1(4);
    auto leader = p.at("L1_T0_TS0_TR0_C0");
    auto after = apply_rule(p, Configuration::uniform(p.num_states(), leader, 4), leader, leader);
    CHECK(after[leader] == 2);
    CHECK(after[p.at("L1_T0_TS1_TR0_C0")] == 1);
    CHECK(after[p.at("L0_T1_TS0_TR0_C0")] == 1);
    CHECK(after.n() == 4);
}

TEST_CASE("successors examples") {
    auto id = fixtures::parse("states A B\noutput A=1 B=1\n");
    Configuration c({2, 3});
    CHECK(successors(id, c) == std::set<Configuration>{c});

    auto p = fixtures::parse("states A B\noutput A=1 B=0\nA A -> B A\n");
    CHECK(successors(p, Configuration({2, 0})) == std::set<Configuration>{Configuration({1, 1})});

    auto q = fixtures::parse("states A B\noutput A=1 B=1\nsym A B -> B B\n");
    CHECK(successors(q, Configuration({1, 1})) == std::set<Configuration>{Configuration({0, 2})});
}

TEST_CASE("consensus examples") {
    auto one = fixtures::parse("states A B\noutput A=1 B=1\n");
    auto split = fixtures::parse("states A B\noutput A=1 B=0\n");
    CHECK(is_consensus(one, Configuration({7, 0})));
    CHECK_FALSE(is_consensus(split, Configuration({1, 1})));
    CHECK(is_consensus(one, Configuration({3, 4})));
    CHECK(consensus_value(split, Configuration({0, 2})) == 0);
    CHECK_FALSE(consensus_value(split, Configuration({1, 1})));
}

TEST_CASE("configuration and agent population") {
    Configuration c({2, 1});
    CHECK(c.n() == 3);
    c.add(StateId{1}, 2);
    CHECK(c[StateId{1}] == 3);
    CHECK_THROWS_AS(c.remove(StateId{0}, 3), InvalidDrawError);

    auto pop = AgentPopulation::from_configuration(Configuration({2, 1}));
    CHECK(pop.n() == 3);
    CHECK(pop[2] == StateId{1});
    pop.set(0, StateId{1});
    CHECK(pop.configuration() == Configuration({1, 2}));
}

TEST_CASE("to_string lists nonempty states in index order") {
    auto p = fixtures::parse("states A B C\noutput A=1 B=0 C=0\n");
    CHECK(to_string(p, Configuration({3, 0, 1})) == "{A:3, C:1}");
}

TEST_CASE("property: apply_rule conserves agents") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t q = 1 + gen() % 5;
        std::vector<std::string> names;
        for (std::size_t i = 0; i < q; ++i)
            names.push_back("q" + std::to_string(i));
        ProtocolSpec p(names);
        for (std::size_t i = 0; i < q; ++i)
            for (std::size_t j = 0; j < q; ++j)
                p.set_delta(p.state(i), p.state(j), {p.state(gen() % q), p.state(gen() % q)});
        std::vector<std::uint64_t> counts(q);
        for (auto& c : counts)
            c = gen() % 4;
        Configuration config(counts);
        for (std::size_t i = 0; i < q; ++i)
            for (std::size_t j = 0; j < q; ++j)
                if (can_draw(config, p.state(i), p.state(j)))
                    CHECK(apply_rule(p, config, p.state(i), p.state(j)).n() == config.n());
    }
}
