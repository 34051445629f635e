#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <mopic/oracle.hpp>

using namespace mopic;

TEST_CASE("oracle trace: hopf template and empty diagram") {
    Diagram d;
    add_hopf_template(d, Sign::plus);
    CHECK(oracle::trace_components_bruteforce(d) == 2);
    Diagram e;
    CHECK(oracle::trace_components_bruteforce(e) == 0);
}

TEST_CASE("oracle trace agrees with the engine on random diagrams") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Diagram d = oracle::random_diagram(seed);
        auto engine = trace_components(d);
        int brute = oracle::trace_components_bruteforce(d);
        INFO("seed ", seed);
        CHECK(static_cast<int>(engine.size()) == brute);
    }
}

TEST_CASE("oracle simulation: sphere and twin") {
    {
        Sequence s;
        Birth b;
        b.groups.push_back({1, std::nullopt});
        s.steps.push_back(b);
        Death d;
        d.loops = {LoopId{0}};
        s.steps.push_back(d);
        center_division(s, 1);
        auto inv = oracle::recompute_invariants_by_simulation(s);
        CHECK(inv.mu == 1);
        CHECK(inv.chi == 2);
    }
    {
        Sequence s;
        Birth b;
        b.groups.push_back({2, std::nullopt});
        s.steps.push_back(b);
        s.steps.push_back(HopfMerge{{{BlockId{0}, Sign::plus}}});
        s.steps.push_back(HopfSplit{{{BlockId{0}, Sign::plus}}});
        Death d;
        d.loops = {LoopId{2}, LoopId{3}};
        s.steps.push_back(d);
        center_division(s, 2);
        auto inv = oracle::recompute_invariants_by_simulation(s);
        CHECK(inv.mu == 2);
        CHECK(inv.chi == 4);
        CHECK(inv.c1_minus == 1);
        CHECK(inv.c2_plus == 1);
    }
}

TEST_CASE("oracle simulation agrees with realize on random sequences") {
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
        Sequence s = oracle::random_sequence(seed);
        INFO("seed ", seed);
        SurfaceInvariants a = realize(s);
        SurfaceInvariants b = oracle::recompute_invariants_by_simulation(s);
        CHECK(a == b);
    }
}

TEST_CASE("random sequences replay and are deterministic per seed") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Sequence a = oracle::random_sequence(seed);
        Sequence b = oracle::random_sequence(seed);
        REQUIRE(a.steps.size() == b.steps.size());
        CHECK(realize(a) == realize(b));
        CHECK_NOTHROW(replay(a));
    }
}

TEST_CASE("random generator covers every transformation kind") {
    bool seen[7] = {};
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Sequence s = oracle::random_sequence(seed);
        for (const auto& t : s.steps) seen[t.index()] = true;
    }
    for (int i = 0; i < 7; ++i) {
        INFO("kind ", i);
        CHECK(seen[i]);
    }
}

TEST_CASE("mirrored random sequences replay with swapped halves") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Sequence s = oracle::random_sequence(seed);
        INFO("seed ", seed);
        Sequence m = mirror_time(s);
        SurfaceInvariants a = realize(s);
        SurfaceInvariants b = realize(m);
        CHECK(a.mu == b.mu);
        CHECK(a.chi == b.chi);
        CHECK(b.c1_plus == a.c2_minus);
        CHECK(b.c1_minus == a.c2_plus);
        CHECK(b.c2_plus == a.c1_minus);
        CHECK(b.c2_minus == a.c1_plus);
    }
}
