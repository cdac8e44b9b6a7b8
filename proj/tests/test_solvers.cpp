#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <unordered_map>
#include <vector>

#include <costima/oracle.hpp>
#include <costima/solvers.hpp>

#include "support/generators.hpp"

using namespace costima;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

SolverConfig exact_cfg() {
    SolverConfig cfg;
    cfg.sigma_mode = SigmaMode::exact;
    return cfg;
}

ProblemInstance star(int targets, double budget) {
    ProblemInstance inst;
    inst.n = static_cast<NodeId>(targets) + 1;
    inst.seeds = {0};
    for (int t = 1; t <= targets; ++t)
        inst.candidates.push_back({0, static_cast<NodeId>(t), 1.0, 1.0});
    inst.budget = budget;
    inst.unit_cost = true;
    validate(inst);
    return inst;
}

// Two candidates where the ratio greedy grabs the cheap edge, the budget then
// blocks the strong one, and the single-edge fallback wins.
ProblemInstance fallback_gadget() {
    ProblemInstance inst;
    inst.n = 3;
    inst.seeds = {0};
    inst.candidates = {{0, 1, 1.0, 1.0}, {0, 2, 0.9, 0.3}};
    inst.budget = 1.0;
    inst.unit_cost = false;
    validate(inst);
    return inst;
}

void check_feasible(const ProblemInstance& inst, const Solution& sol) {
    std::unordered_map<std::uint64_t, const CandidateEdge*> by_key;
    for (const auto& c : inst.candidates) by_key[edge_key(c.src, c.dst)] = &c;
    double total = 0.0;
    for (const auto& e : sol.chosen) {
        auto it = by_key.find(edge_key(e.src, e.dst));
        REQUIRE(it != by_key.end());
        CHECK(it->second->prob == e.prob);
        CHECK(it->second->cost == e.cost);
        total += e.cost;
    }
    CHECK(total <= inst.budget + 1e-12);
    CHECK_THAT(sol.total_cost, WithinAbs(total, 1e-12));
}

void check_accepted_sigmas_non_decreasing(const Solution& sol) {
    double last = 0.0;
    bool seen = false;
    for (const auto& t : sol.trace) {
        if (!t.accepted) continue;
        if (seen) CHECK(t.sigma >= last - 1e-9);
        last = t.sigma;
        seen = true;
    }
}

}  // namespace

TEST_CASE("unit greedy rejects weighted instances with guidance") {
    auto inst = fallback_gadget();
    CHECK_THROWS_WITH(greedy_ima(inst, exact_cfg()), ContainsSubstring("cost_greedy"));
}

TEST_CASE("unit greedy with budget zero returns the empty solution") {
    const auto inst = star(3, 0.0);
    const auto sol = greedy_ima(inst, exact_cfg());
    CHECK(sol.chosen.empty());
    CHECK(sol.total_cost == 0.0);
    CHECK(sol.sigma == 1.0);
    CHECK(sol.trace.empty());
}

TEST_CASE("unit greedy fills the budget on a star") {
    const auto inst = star(3, 2.0);
    const auto sol = greedy_ima(inst, exact_cfg());
    REQUIRE(sol.chosen.size() == 2);  // exactly min(k, candidates)
    CHECK(sol.chosen[0].dst == 1);    // ties go to the lowest index
    CHECK(sol.chosen[1].dst == 2);
    CHECK(sol.sigma == 3.0);
    CHECK(sol.total_cost == 2.0);
    REQUIRE(sol.trace.size() == 2);
    CHECK(sol.trace[0].step == 1);
    CHECK(sol.trace[0].accepted);
    CHECK_THAT(sol.trace[0].marginal, WithinAbs(1.0, 1e-12));
    CHECK(sol.trace[1].step == 2);
    CHECK_THAT(exact_sigma(inst, sol.chosen), WithinAbs(sol.sigma, 1e-12));
}

TEST_CASE("unit greedy pads with zero-gain edges unless told to stop") {
    ProblemInstance inst;
    inst.n = 4;
    inst.edges = {{0, 1, 1.0}};
    inst.seeds = {0};
    inst.candidates = {{0, 2, 1.0, 1.0}, {0, 3, 0.0, 1.0}};
    inst.budget = 3.0;
    inst.unit_cost = true;
    validate(inst);

    const auto padded = greedy_ima(inst, exact_cfg());
    REQUIRE(padded.chosen.size() == 2);
    CHECK(padded.sigma == 3.0);

    auto cfg = exact_cfg();
    cfg.stop_on_zero_gain = true;
    const auto stopped = greedy_ima(inst, cfg);
    REQUIRE(stopped.chosen.size() == 1);
    CHECK(stopped.chosen[0].dst == 2);
    CHECK(stopped.sigma == 3.0);
    REQUIRE(stopped.trace.size() == 2);
    CHECK_FALSE(stopped.trace[1].accepted);
    CHECK(stopped.trace[1].reason == "zero-gain");
}

TEST_CASE("estimate mode agrees with exact mode on deterministic instances") {
    const auto inst = star(3, 2.0);
    SolverConfig cfg;
    cfg.sampling.num_samples = 128;
    cfg.sampling.base_seed = 17;
    const auto est = greedy_ima(inst, cfg);
    const auto ref = greedy_ima(inst, exact_cfg());
    CHECK(est.chosen == ref.chosen);
    CHECK(est.sigma == ref.sigma);  // every sample counts the same reach
}

TEST_CASE("estimated solves are reproducible call to call") {
    SplitMix64 rng(5150);
    support::TinyOptions opt;
    const auto inst = support::random_tiny(rng, opt);
    SolverConfig cfg;
    cfg.sampling.num_samples = 512;
    cfg.sampling.base_seed = 99;
    const auto a = cost_greedy(inst, cfg);
    const auto b = cost_greedy(inst, cfg);
    CHECK(a.chosen == b.chosen);
    CHECK(a.sigma == b.sigma);
    CHECK(a.total_cost == b.total_cost);
}

TEST_CASE("cost greedy on the fallback gadget returns the strong single edge") {
    const auto inst = fallback_gadget();
    const auto sol = cost_greedy(inst, exact_cfg());

    REQUIRE(sol.chosen.size() == 1);
    CHECK(sol.chosen[0].dst == 1);
    CHECK_THAT(sol.sigma, WithinAbs(2.0, 1e-12));
    CHECK(sol.total_cost == 1.0);

    // Loop history: the cheap edge was accepted, the strong one rejected on
    // budget, then the fallback replaced the whole set.
    REQUIRE(sol.trace.size() == 3);
    CHECK(sol.trace[0].accepted);
    CHECK(sol.trace[0].dst == 2);
    CHECK(sol.trace[1].reason == "budget");
    CHECK(sol.trace[1].dst == 1);
    CHECK(sol.trace[2].reason == "best-single-edge");
    CHECK(sol.trace[2].accepted);
    CHECK_THAT(sol.trace[2].marginal, WithinAbs(0.1, 1e-12));

    const auto brute = brute_force_opt(inst);
    CHECK(brute.chosen == sol.chosen);
    CHECK_THAT(brute.sigma, WithinAbs(sol.sigma, 1e-12));
}

TEST_CASE("cost greedy takes a lone candidate only when it gains") {
    ProblemInstance inst;
    inst.n = 3;
    inst.edges = {{0, 1, 1.0}};
    inst.seeds = {0};
    inst.candidates = {{0, 2, 0.5, 0.4}};
    inst.budget = 1.0;
    inst.unit_cost = false;
    validate(inst);

    const auto picked = cost_greedy(inst, exact_cfg());
    REQUIRE(picked.chosen.size() == 1);
    CHECK_THAT(picked.sigma, WithinAbs(2.5, 1e-12));

    ProblemInstance dull = inst;
    dull.candidates = {{0, 2, 0.0, 0.4}};  // can never fire
    validate(dull);
    const auto skipped = cost_greedy(dull, exact_cfg());
    CHECK(skipped.chosen.empty());
    CHECK_THAT(skipped.sigma, WithinAbs(2.0, 1e-12));
    REQUIRE_FALSE(skipped.trace.empty());
    CHECK(skipped.trace[0].reason == "zero-gain");
}

TEST_CASE("cost greedy treats zero-cost candidates as free") {
    ProblemInstance inst;
    inst.n = 3;
    inst.seeds = {0};
    inst.candidates = {{0, 1, 1.0, 0.0}, {0, 2, 1.0, 1.0}};
    inst.budget = 0.0;
    inst.unit_cost = false;
    validate(inst);

    const auto sol = cost_greedy(inst, exact_cfg());
    REQUIRE(sol.chosen.size() == 1);
    CHECK(sol.chosen[0].dst == 1);
    CHECK(sol.total_cost == 0.0);
    CHECK_THAT(sol.sigma, WithinAbs(2.0, 1e-12));
}

TEST_CASE("an unaffordable best single edge never leaks into the answer") {
    ProblemInstance inst;
    inst.n = 3;
    inst.seeds = {0};
    inst.candidates = {{0, 1, 1.0, 0.8}, {0, 2, 0.3, 0.1}};
    inst.budget = 0.5;
    inst.unit_cost = false;
    validate(inst);

    const auto sol = cost_greedy(inst, exact_cfg());
    // e_M = (0,1) is infeasible alone, so the greedy set stands.
    REQUIRE(sol.chosen.size() == 1);
    CHECK(sol.chosen[0].dst == 2);
    CHECK_THAT(sol.sigma, WithinAbs(1.3, 1e-12));
    check_feasible(inst, sol);
}

TEST_CASE("cost greedy with no candidates reports the bare spread") {
    ProblemInstance inst;
    inst.n = 2;
    inst.edges = {{0, 1, 0.5}};
    inst.seeds = {0};
    inst.unit_cost = true;
    validate(inst);
    const auto sol = cost_greedy(inst, exact_cfg());
    CHECK(sol.chosen.empty());
    CHECK_THAT(sol.sigma, WithinAbs(1.5, 1e-12));
}

TEST_CASE("enumeration solver matches brute force when it can see everything") {
    SplitMix64 rng(31337);
    support::TinyOptions opt;
    opt.max_candidates = 2;  // strictly below M = 3
    opt.max_free = 8;
    for (int round = 0; round < 15; ++round) {
        const auto inst = support::random_tiny(rng, opt);
        const auto enumd = enum_greedy(inst, exact_cfg());
        const auto brute = brute_force_opt(inst);
        CHECK(enumd.chosen == brute.chosen);
        CHECK_THAT(enumd.sigma, WithinAbs(brute.sigma, 1e-12));
        check_feasible(inst, enumd);
    }
}

TEST_CASE("enumeration solver solves the fallback gadget") {
    const auto sol = enum_greedy(fallback_gadget(), exact_cfg());
    REQUIRE(sol.chosen.size() == 1);
    CHECK(sol.chosen[0].dst == 1);
    CHECK_THAT(sol.sigma, WithinAbs(2.0, 1e-12));
}

TEST_CASE("enumeration solver enforces its caps") {
    const auto inst = star(6, 3.0);
    auto cfg = exact_cfg();
    cfg.enum_cap = 5;
    CHECK_THROWS_WITH(enum_greedy(inst, cfg), ContainsSubstring("smaller M"));
    cfg.enum_cap = 1000;
    cfg.enum_size = 0;
    CHECK_THROWS_WITH(enum_greedy(inst, cfg), ContainsSubstring(">= 1"));
}

TEST_CASE("all solvers stay feasible on random instances") {
    SplitMix64 rng(2718281828);
    support::TinyOptions weighted;
    weighted.max_free = 8;
    weighted.max_candidates = 5;
    for (int round = 0; round < 20; ++round) {
        const auto inst = support::random_tiny(rng, weighted);
        const auto cfg = exact_cfg();
        check_feasible(inst, cost_greedy(inst, cfg));
        check_feasible(inst, enum_greedy(inst, cfg));
        check_feasible(inst, brute_force_opt(inst));
        check_feasible(inst, baseline(inst, BaselineStrategy::random, round, cfg));
        check_feasible(inst, baseline(inst, BaselineStrategy::max_prob, 0, cfg));
        check_feasible(inst, baseline(inst, BaselineStrategy::high_outdegree_target, 0, cfg));
    }

    support::TinyOptions unit;
    unit.unit_cost = true;
    unit.max_free = 8;
    unit.max_candidates = 5;
    for (int round = 0; round < 20; ++round) {
        const auto inst = support::random_tiny(rng, unit);
        check_feasible(inst, greedy_ima(inst, exact_cfg()));
    }
}

TEST_CASE("accepted trace values never decrease in exact mode") {
    SplitMix64 rng(1618);
    support::TinyOptions opt;
    opt.max_free = 8;
    opt.max_candidates = 5;
    for (int round = 0; round < 15; ++round) {
        const auto inst = support::random_tiny(rng, opt);
        check_accepted_sigmas_non_decreasing(cost_greedy(inst, exact_cfg()));
    }
    opt.unit_cost = true;
    for (int round = 0; round < 15; ++round) {
        const auto inst = support::random_tiny(rng, opt);
        check_accepted_sigmas_non_decreasing(greedy_ima(inst, exact_cfg()));
    }
}

TEST_CASE("the solvers clear their approximation bars on random instances") {
    const double nem = 1.0 - std::exp(-1.0);
    SplitMix64 rng(8675309);

    support::TinyOptions unit;
    unit.unit_cost = true;
    unit.max_free = 8;
    unit.max_candidates = 5;
    for (int round = 0; round < 20; ++round) {
        const auto inst = support::random_tiny(rng, unit);
        const double opt_value = brute_force_opt(inst).sigma;
        CHECK(greedy_ima(inst, exact_cfg()).sigma >= nem * opt_value - 1e-9);
    }

    support::TinyOptions weighted;
    weighted.max_free = 8;
    weighted.max_candidates = 5;
    for (int round = 0; round < 20; ++round) {
        const auto inst = support::random_tiny(rng, weighted);
        const double opt_value = brute_force_opt(inst).sigma;
        CHECK(cost_greedy(inst, exact_cfg()).sigma >= 0.5 * nem * opt_value - 1e-9);
        CHECK(enum_greedy(inst, exact_cfg()).sigma >= nem * opt_value - 1e-9);
    }
}

TEST_CASE("enumeration dominates the ratio greedy when its set is small") {
    SplitMix64 rng(404);
    support::TinyOptions opt;
    opt.max_free = 8;
    opt.max_candidates = 5;
    int asserted = 0;
    for (int round = 0; round < 25; ++round) {
        const auto inst = support::random_tiny(rng, opt);
        const auto cost_sol = cost_greedy(inst, exact_cfg());
        if (cost_sol.chosen.size() >= 3) continue;  // outside the covered regime
        const auto enum_sol = enum_greedy(inst, exact_cfg());
        CHECK(enum_sol.sigma >= cost_sol.sigma - 1e-9);
        ++asserted;
    }
    CHECK(asserted > 0);
}

TEST_CASE("baselines order candidates by their own myopic rules") {
    CHECK_THROWS_WITH(baseline_from_name("greedy-ish"), ContainsSubstring("unknown strategy"));
    CHECK(baseline_name(BaselineStrategy::max_prob) == "max_prob");

    ProblemInstance inst;
    inst.n = 4;
    inst.edges = {{3, 1, 1.0}, {3, 2, 1.0}};  // node 3 is the hub
    inst.seeds = {0};
    inst.candidates = {{0, 1, 0.2, 1.0}, {0, 2, 0.9, 1.0}, {0, 3, 0.5, 1.0}};
    inst.budget = 1.0;
    inst.unit_cost = true;
    validate(inst);

    const auto probby = baseline(inst, BaselineStrategy::max_prob, 0, exact_cfg());
    REQUIRE(probby.chosen.size() == 1);
    CHECK(probby.chosen[0].dst == 2);

    const auto hubby = baseline(inst, BaselineStrategy::high_outdegree_target, 0, exact_cfg());
    REQUIRE(hubby.chosen.size() == 1);
    CHECK(hubby.chosen[0].dst == 3);

    const auto r1 = baseline(inst, BaselineStrategy::random, 42, exact_cfg());
    const auto r2 = baseline(inst, BaselineStrategy::random, 42, exact_cfg());
    CHECK(r1.chosen == r2.chosen);
    check_feasible(inst, r1);

    ProblemInstance broke = inst;
    broke.budget = 0.0;
    validate(broke);
    CHECK(baseline(broke, BaselineStrategy::random, 7, exact_cfg()).chosen.empty());
}
