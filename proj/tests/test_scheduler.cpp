#include "fixtures.hpp"

#include "popsim/error.hpp"
#include "popsim/rng.hpp"
#include "popsim/scheduler.hpp"

#include <doctest.h>

#include <map>
#include <random>

using namespace popsim;

namespace {

std::shared_ptr<const ProtocolSpec> share(ProtocolSpec p) {
    return std::make_shared<const ProtocolSpec>(std::move(p));
}

RunConfig config_for(std::shared_ptr<const ProtocolSpec> p, std::uint64_t n, Mode mode, std::uint64_t seed) {
    RunConfig cfg;
    cfg.initial = Configuration::uniform(p->num_states(), p->initial_state(), n);
    cfg.protocol = std::move(p);
    cfg.mode = mode;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST_CASE("rng: fixed stream and bounded draws") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i)
        CHECK(a.next() == b.next());
    std::mt19937_64 reference(42);
    Rng c(42);
    CHECK(c.next() == reference());
    Rng d(1);
    for (int i = 0; i < 1000; ++i) {
        CHECK(d.uniform(7) < 7);
        auto u = d.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    CHECK(derive_seed(9, 3) == derive_seed(9, 3));
}

TEST_CASE("choose_next_pair: n = 1 is always a no-op") {
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        CHECK_FALSE(choose_next_pair(rng, std::size_t{1}));
        CHECK_FALSE(choose_next_pair(rng, Configuration({1, 0})));
    }
    CHECK_THROWS_AS(choose_next_pair(rng, std::size_t{0}), EmptyPopulationError);
}

TEST_CASE("choose_next_pair: n = 2, {A:2}") {
    Rng rng(8);
    int noop = 0;
    const int draws = 200000;
    for (int i = 0; i < draws; ++i) {
        auto d = choose_next_pair(rng, Configuration({2}));
        if (!d)
            ++noop;
        else
            CHECK(*d == StatePair{StateId{0}, StateId{0}});
    }
    // binomial(200000, 1/2): sd ~ 224
    CHECK(std::abs(noop - draws / 2) < 1200);
}

TEST_CASE("count index matches the linear scan draw for draw") {
    std::mt19937_64 gen(2);
    for (int t = 0; t < 50; ++t) {
        std::vector<std::uint64_t> counts(1 + gen() % 9);
        for (auto& c : counts)
            c = gen() % 5;
        counts[0] += 1;
        Configuration config(counts);
        CountIndex index(config);
        CHECK(index.n() == config.n());
        std::uint64_t seen = 0;
        for (std::uint32_t s = 0; s < counts.size(); ++s) {
            CHECK(index.prefix(StateId{s}) == seen);
            for (std::uint64_t r = seen; r < seen + counts[s]; ++r)
                CHECK(index.locate(r) == StateId{s});
            seen += counts[s];
        }
        Rng r1(t), r2(t);
        for (int i = 0; i < 200; ++i)
            CHECK(index.draw(r1) == choose_next_pair(r2, config));
    }
}

TEST_CASE("step: identity protocol never changes the configuration") {
    auto p = share(fixtures::parse("states A B\noutput A=1 B=0\n"));
    auto cfg = config_for(p, 5, Mode::counts, 1);
    cfg.initial = Configuration({2, 3});
    Simulation sim(cfg);
    for (int i = 0; i < 100; ++i) {
        sim.step();
        CHECK(sim.configuration() == Configuration({2, 3}));
    }
}

TEST_CASE("step: first interaction of pairwise elimination and protocol 1") {
    for (auto mode : {Mode::counts, Mode::agents}) {
        auto elim = share(pairwise_elimination());
        Simulation sim(config_for(elim, 2, mode, 5));
        while (sim.interactions_made() == 0)
            sim.step();
        CHECK(sim.configuration()[elim->at("L")] == 1);

        auto p1 = share(protocol_1(4));
        Simulation sim1(config_for(p1, 2, mode, 6));
        while (sim1.interactions_made() == 0)
            sim1.step();
        CHECK(sim1.configuration()[p1->at("L1_T0_TS1_TR0_C0")] == 1);
        CHECK(sim1.configuration()[p1->at("L0_T1_TS0_TR0_C0")] == 1);
    }
}

TEST_CASE("run examples") {
    auto ladder = share(ladder_protocol(3));
    auto cfg = config_for(ladder, 4, Mode::counts, 1);
    cfg.stop = StopCondition::fixed_calls(0);
    auto r = run(cfg);
    CHECK(r.calls_made == 0);
    CHECK(r.final_config == Configuration({4, 0, 0}));
    CHECK(r.stop_reason == "calls");

    auto elim = share(pairwise_elimination());
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto e = config_for(elim, 2, seed % 2 ? Mode::agents : Mode::counts, seed);
        e.stop = StopCondition::class_count("single-leader", leader_states(*elim), 1);
        auto res = run(e);
        CHECK(res.interactions_made == 1);
        CHECK(res.stop_reason == "single-leader");
    }

    auto e = config_for(elim, 1, Mode::counts, 1);
    e.stop = StopCondition::class_count("single-leader", leader_states(*elim), 1);
    CHECK(run(e).calls_made == 0);
}

TEST_CASE("run: determinism and conservation") {
    auto p = share(protocol_1(4));
    for (auto mode : {Mode::counts, Mode::agents}) {
        auto cfg = config_for(p, 50, mode, 99);
        cfg.stop = StopCondition::class_count("single-leader", leader_states(*p), 1);
        cfg.probes.push_back({"leaders", linear_ticks(100, 5000), [p](const Configuration& c) {
                                  std::uint64_t k = 0;
                                  for (auto s : leader_states(*p))
                                      k += c[s];
                                  return static_cast<double>(k);
                              }});
        auto a = run(cfg), b = run(cfg);
        CHECK(a.serialize(*p) == b.serialize(*p));
        CHECK(a.final_config.n() == 50);
        CHECK(a.interactions_made <= a.calls_made);
        for (const auto& pr : a.probes)
            CHECK(pr.call <= a.calls_made);
        CHECK(a.serialize(*p).rfind("rng mt19937_64-lemire\n", 0) == 0);
    }
}

TEST_CASE("run: cap stop and default cap") {
    auto p = share(fixtures::parse("states A\noutput A=1\n"));
    auto cfg = config_for(p, 3, Mode::counts, 1);
    auto r = run(cfg);
    CHECK(r.stop_reason == "cap");
    CHECK(r.calls_made == 64 * 9);
    cfg.max_calls = 10;
    CHECK(run(cfg).calls_made == 10);
}

TEST_CASE("stop conditions") {
    auto ladder = share(ladder_protocol(3));
    auto cfg = config_for(ladder, 20, Mode::counts, 4);
    cfg.stop = StopCondition::first_state_entered("entered", {ladder->at("s2")}) | StopCondition::fixed_calls(1000000);
    auto r = run(cfg);
    CHECK(r.stop_reason == "entered");
    CHECK(r.final_config[ladder->at("s2")] == 1);

    cfg.stop = StopCondition::fixed_interactions(7);
    r = run(cfg);
    CHECK(r.interactions_made == 7);

    cfg.stop = StopCondition::predicate("half", [&](const Configuration& c) { return c[ladder->at("s1")] >= 5; });
    r = run(cfg);
    CHECK(r.final_config[ladder->at("s1")] == 5);
    CHECK(r.stop_reason == "half");
}

TEST_CASE("distinct visitors") {
    auto ladder = share(ladder_protocol(2));
    auto cfg = config_for(ladder, 2, Mode::agents, 3);
    cfg.audited = {ladder->at("s1")};
    cfg.stop = StopCondition::first_state_entered("entered", {ladder->at("s1")});
    auto r = run(cfg);
    CHECK(distinct_visitors(r, ladder->at("s1")) == 1);
    CHECK_THROWS_AS(distinct_visitors(r, ladder->at("s0")), MissingAuditError);

    auto l3 = share(ladder_protocol(3));
    auto never = config_for(l3, 10, Mode::agents, 3);
    never.audited = {l3->at("s2")};
    never.stop = StopCondition::fixed_calls(0);
    CHECK(distinct_visitors(run(never), l3->at("s2")) == 0);

    auto counts = config_for(l3, 10, Mode::counts, 3);
    counts.audited = {l3->at("s2")};
    CHECK_THROWS_AS(run(counts), Error);
}

TEST_CASE("property: distinct visitors never decrease during a run") {
    auto ladder = share(ladder_protocol(3));
    auto cfg = config_for(ladder, 200, Mode::agents, 12);
    cfg.audited = {ladder->at("s1"), ladder->at("s2")};
    cfg.stop = StopCondition::fixed_calls(4000);
    Simulation sim(cfg);
    std::uint64_t last1 = 0, last2 = 0;
    while (!sim.stopped()) {
        sim.step();
        CHECK(sim.visitors(ladder->at("s1")) >= last1);
        CHECK(sim.visitors(ladder->at("s2")) >= last2);
        last1 = sim.visitors(ladder->at("s1"));
        last2 = sim.visitors(ladder->at("s2"));
    }
    CHECK(last2 >= 2);
}

TEST_CASE("tick schedules and event format") {
    CHECK(linear_ticks(10, 35) == std::vector<std::uint64_t>{0, 10, 20, 30});
    auto g = geometric_ticks(1, 2.0, 20);
    CHECK(g == std::vector<std::uint64_t>{0, 1, 2, 4, 8, 16});

    auto elim = share(pairwise_elimination());
    std::vector<std::string> lines;
    auto cfg = config_for(elim, 2, Mode::counts, 5);
    cfg.stop = StopCondition::fixed_interactions(1);
    cfg.on_event = [&](const InteractionEvent& e) { lines.push_back(format_event(*elim, e)); };
    auto r = run(cfg);
    REQUIRE(lines.size() == r.calls_made);
    CHECK(lines.back() == std::to_string(r.calls_made) + ",0,L,L,L,F");
}
