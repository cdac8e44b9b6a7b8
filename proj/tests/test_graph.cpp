#include <catch2/catch_amalgamated.hpp>

#include <costima/graph.hpp>

using namespace costima;

namespace {

ProblemInstance chain_instance() {
    ProblemInstance inst;
    inst.n = 3;
    inst.edges = {{0, 1, 0.5}, {1, 2, 0.4}};
    inst.seeds = {0};
    inst.budget = 0.0;
    inst.unit_cost = derive_unit_cost(inst);
    return inst;
}

}  // namespace

TEST_CASE("edge keys separate direction and endpoints") {
    CHECK(edge_key(1, 2) != edge_key(2, 1));
    CHECK(edge_key(0, 7) != edge_key(7, 7));
    CHECK(edge_key(3, 4) == edge_key(3, 4));
}

TEST_CASE("unit cost detection") {
    ProblemInstance inst = chain_instance();
    inst.candidates = {{0, 2, 1.0, 1.0}};
    inst.budget = 2.0;
    CHECK(derive_unit_cost(inst));

    SECTION("non-unit cost") {
        inst.candidates[0].cost = 0.5;
        CHECK_FALSE(derive_unit_cost(inst));
    }
    SECTION("fractional budget") {
        inst.budget = 1.5;
        CHECK_FALSE(derive_unit_cost(inst));
    }
    SECTION("no candidates is vacuously unit") {
        inst.candidates.clear();
        CHECK(derive_unit_cost(inst));
    }
}

TEST_CASE("validate accepts a well-formed instance") {
    ProblemInstance inst = chain_instance();
    inst.candidates = {{0, 2, 0.9, 0.3}};
    inst.budget = 1.0;
    inst.unit_cost = derive_unit_cost(inst);
    CHECK_NOTHROW(validate(inst));
}

TEST_CASE("validate rejects structural defects") {
    ProblemInstance inst = chain_instance();

    SECTION("edge endpoint out of range") {
        inst.edges.push_back({5, 0, 0.5});
        CHECK_THROWS_AS(validate(inst), Error);
    }
    SECTION("probability out of range") {
        inst.edges[0].prob = 1.5;
        CHECK_THROWS_AS(validate(inst), Error);
    }
    SECTION("self loop edge") {
        inst.edges.push_back({2, 2, 0.5});
        CHECK_THROWS_AS(validate(inst), Error);
    }
    SECTION("duplicate edge") {
        inst.edges.push_back({0, 1, 0.7});
        CHECK_THROWS_AS(validate(inst), Error);
    }
    SECTION("seed out of range") {
        inst.seeds = {9};
        CHECK_THROWS_AS(validate(inst), Error);
    }
    SECTION("negative budget") {
        inst.budget = -1.0;
        CHECK_THROWS_AS(validate(inst), Error);
    }
    SECTION("candidate from a non-seed") {
        inst.candidates = {{1, 0, 0.5, 1.0}};
        inst.budget = 1.0;
        CHECK_THROWS_WITH(validate(inst), Catch::Matchers::ContainsSubstring(
                                              "candidate source not a seed"));
    }
    SECTION("candidate duplicating an edge") {
        inst.candidates = {{0, 1, 0.5, 1.0}};
        inst.budget = 1.0;
        CHECK_THROWS_WITH(validate(inst), Catch::Matchers::ContainsSubstring(
                                              "candidate duplicates an existing edge"));
    }
    SECTION("candidate self loop") {
        inst.candidates = {{0, 0, 0.5, 1.0}};
        inst.budget = 1.0;
        CHECK_THROWS_AS(validate(inst), Error);
    }
    SECTION("duplicate candidates") {
        inst.candidates = {{0, 2, 0.5, 1.0}, {0, 2, 0.6, 1.0}};
        inst.budget = 1.0;
        CHECK_THROWS_AS(validate(inst), Error);
    }
    SECTION("candidate cost above one") {
        inst.candidates = {{0, 2, 0.5, 1.5}};
        inst.budget = 1.0;
        CHECK_THROWS_AS(validate(inst), Error);
    }
    SECTION("unit flag on a weighted instance") {
        inst.candidates = {{0, 2, 0.5, 0.25}};
        inst.budget = 1.0;
        inst.unit_cost = true;
        CHECK_THROWS_AS(validate(inst), Error);
    }
}

TEST_CASE("default candidate pool") {
    ProblemInstance inst;
    inst.n = 4;
    inst.edges = {{0, 1, 1.0}};
    inst.seeds = {0, 2};
    inst.budget = 1.0;

    const auto pool = default_candidates(inst, 0.5, 1.0);
    // Lexicographic (src, dst), skipping self loops and the existing edge.
    REQUIRE(pool.size() == 5);
    CHECK(pool[0].src == 0);
    CHECK(pool[0].dst == 2);
    CHECK(pool[1].dst == 3);
    CHECK(pool[2].src == 2);
    CHECK(pool[2].dst == 0);
    CHECK(pool[3].dst == 1);
    CHECK(pool[4].dst == 3);
    for (const auto& c : pool) {
        CHECK(c.prob == 0.5);
        CHECK(c.cost == 1.0);
    }

    SECTION("per-target cost table") {
        const std::vector<double> table{0.1, 0.2, 0.3, 0.4};
        const auto priced = default_candidates(inst, 1.0, table);
        REQUIRE(priced.size() == 5);
        CHECK(priced[0].cost == 0.3);  // (0,2)
        CHECK(priced[1].cost == 0.4);  // (0,3)
        CHECK(priced[3].cost == 0.2);  // (2,1)
    }
    SECTION("cost table must cover every node") {
        const std::vector<double> short_table{0.1, 0.2};
        CHECK_THROWS_AS(default_candidates(inst, 1.0, short_table), Error);
    }
}

TEST_CASE("total cost sums in list order") {
    const std::vector<CandidateEdge> edges{{0, 1, 1.0, 0.25}, {0, 2, 1.0, 0.5}};
    CHECK(total_cost_of(edges) == 0.75);
    CHECK(total_cost_of({}) == 0.0);
}
