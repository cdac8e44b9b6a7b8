#pragma once

// Test-side helpers: random tiny instances with a bounded number of
// enumerable coins, an independent sigma computation, and reference
// set-coverage algorithms to check the reduction against.

#include <algorithm>
#include <cstdint>
#include <span>
#include <unordered_set>
#include <vector>

#include <costima/costima.hpp>

namespace support {

struct TinyOptions {
    costima::NodeId min_n = 2;
    costima::NodeId max_n = 8;
    std::size_t max_edges = 10;
    std::size_t max_free = 12;  // fractional probabilities across edges and candidates
    std::size_t min_candidates = 0;
    std::size_t max_candidates = 6;
    bool unit_cost = false;
    unsigned max_seeds = 2;
};

// Random small instance. Probabilities are fractional only while the free
// budget lasts, so every generated instance stays within the exact oracle's
// enumeration limit.
inline costima::ProblemInstance random_tiny(costima::SplitMix64& rng, const TinyOptions& opt) {
    using namespace costima;
    ProblemInstance inst;
    inst.n = opt.min_n + static_cast<NodeId>(rng.next_below(opt.max_n - opt.min_n + 1));
    const unsigned num_seeds =
        1 + static_cast<unsigned>(rng.next_below(std::min<std::uint64_t>(opt.max_seeds, inst.n)));
    std::vector<NodeId> perm(inst.n);
    for (NodeId v = 0; v < inst.n; ++v) perm[v] = v;
    for (unsigned i = 0; i < num_seeds; ++i) {
        const auto pick = i + static_cast<NodeId>(rng.next_below(inst.n - i));
        std::swap(perm[i], perm[pick]);
    }
    inst.seeds.assign(perm.begin(), perm.begin() + num_seeds);
    std::sort(inst.seeds.begin(), inst.seeds.end());

    std::size_t free_left = opt.max_free;
    auto draw_prob = [&]() {
        if (free_left > 0 && rng.next_unit() < 0.6) {
            --free_left;
            return rng.next_real(0.1, 0.9);
        }
        return rng.next_below(2) == 0 ? 0.0 : 1.0;
    };

    if (inst.n > 1) {
        const std::size_t num_edges = rng.next_below(opt.max_edges + 1);
        std::unordered_set<std::uint64_t> used;
        while (inst.edges.size() < num_edges && used.size() < static_cast<std::size_t>(inst.n) * (inst.n - 1)) {
            const auto u = static_cast<NodeId>(rng.next_below(inst.n));
            auto v = static_cast<NodeId>(rng.next_below(inst.n - 1));
            if (v >= u) ++v;
            if (used.insert(edge_key(u, v)).second) inst.edges.push_back({u, v, 0.0});
        }
        std::sort(inst.edges.begin(), inst.edges.end(),
                  [](const Edge& a, const Edge& b) { return std::pair{a.src, a.dst} < std::pair{b.src, b.dst}; });
        for (auto& e : inst.edges) e.prob = draw_prob();
    }

    std::vector<std::pair<NodeId, NodeId>> eligible;
    {
        const auto existing = edge_key_set(inst);
        for (NodeId a : inst.seeds)
            for (NodeId v = 0; v < inst.n; ++v)
                if (v != a && !existing.count(edge_key(a, v))) eligible.emplace_back(a, v);
    }
    const std::size_t want =
        opt.min_candidates + rng.next_below(opt.max_candidates - opt.min_candidates + 1);
    for (std::size_t i = 0; i < eligible.size() && i < want; ++i) {
        const auto pick = i + rng.next_below(eligible.size() - i);
        std::swap(eligible[i], eligible[pick]);
    }
    eligible.resize(std::min(want, eligible.size()));
    std::sort(eligible.begin(), eligible.end());
    for (const auto& [a, v] : eligible) {
        CandidateEdge c;
        c.src = a;
        c.dst = v;
        c.prob = draw_prob();
        c.cost = opt.unit_cost ? 1.0 : rng.next_unit();
        inst.candidates.push_back(c);
    }

    if (opt.unit_cost) {
        inst.budget = static_cast<double>(rng.next_below(inst.candidates.size() + 2));
    } else {
        inst.budget = rng.next_unit() * total_cost_of(inst.candidates);
    }
    inst.unit_cost = derive_unit_cost(inst);
    validate(inst);
    return inst;
}

// Independent check of sigma(A, S): enumerates the free-edge outcomes itself,
// computes reachability as a bitmask fixpoint (instead of a BFS), and sums
// per-node reach probabilities (instead of per-outcome counts). Only for
// instances with at most 32 nodes.
inline double sigma_by_node_closure(const costima::ProblemInstance& inst,
                                    std::span<const costima::CandidateEdge> S) {
    using namespace costima;
    struct Arc {
        NodeId src, dst;
        double prob;
    };
    std::vector<Arc> arcs;
    for (const auto& e : inst.edges) arcs.push_back({e.src, e.dst, e.prob});
    for (const auto& e : S) arcs.push_back({e.src, e.dst, e.prob});

    std::vector<std::size_t> free_idx;
    for (std::size_t i = 0; i < arcs.size(); ++i)
        if (arcs[i].prob > 0.0 && arcs[i].prob < 1.0) free_idx.push_back(i);

    std::uint32_t seed_mask = 0;
    for (NodeId a : inst.seeds) seed_mask |= 1u << a;

    std::vector<double> node_prob(inst.n, 0.0);
    const std::uint64_t outcomes = 1ULL << free_idx.size();
    std::vector<std::uint32_t> adj(inst.n);
    for (std::uint64_t mask = 0; mask < outcomes; ++mask) {
        double p = 1.0;
        for (std::size_t j = 0; j < free_idx.size(); ++j)
            p *= (mask >> j & 1) ? arcs[free_idx[j]].prob : 1.0 - arcs[free_idx[j]].prob;
        std::fill(adj.begin(), adj.end(), 0u);
        for (std::size_t i = 0; i < arcs.size(); ++i) {
            const bool live = arcs[i].prob == 1.0 ||
                              (arcs[i].prob > 0.0 &&
                               (mask >> (std::find(free_idx.begin(), free_idx.end(), i) -
                                         free_idx.begin()) &
                                1) != 0);
            if (live) adj[arcs[i].src] |= 1u << arcs[i].dst;
        }
        std::uint32_t reached = seed_mask;
        while (true) {
            std::uint32_t next = reached;
            for (NodeId v = 0; v < inst.n; ++v)
                if (reached >> v & 1) next |= adj[v];
            if (next == reached) break;
            reached = next;
        }
        for (NodeId v = 0; v < inst.n; ++v)
            if (reached >> v & 1) node_prob[v] += p;
    }
    double sigma = 0.0;
    for (double q : node_prob) sigma += q;
    return sigma;
}

// Textbook greedy set coverage: k rounds, pick the set covering the most new
// elements, ties to the lowest index (zero-gain rounds still pick).
inline std::vector<std::size_t> greedy_msc(const costima::MscInstance& msc) {
    std::vector<bool> covered(msc.universe_size, false);
    std::vector<bool> used(msc.sets.size(), false);
    std::vector<std::size_t> family;
    for (std::uint64_t round = 0; round < msc.k; ++round) {
        std::size_t best = msc.sets.size();
        std::size_t best_gain = 0;
        for (std::size_t j = 0; j < msc.sets.size(); ++j) {
            if (used[j]) continue;
            std::size_t gain = 0;
            for (costima::NodeId x : msc.sets[j]) gain += covered[x] ? 0 : 1;
            if (best == msc.sets.size() || gain > best_gain) {
                best = j;
                best_gain = gain;
            }
        }
        used[best] = true;
        family.push_back(best);
        for (costima::NodeId x : msc.sets[best]) covered[x] = true;
    }
    return family;
}

// Best coverage achievable with exactly k sets, by exhausting all
// combinations.
inline std::size_t brute_msc_optimum(const costima::MscInstance& msc) {
    std::size_t best = 0;
    costima::detail::for_each_combination(
        msc.sets.size(), msc.k, [&](std::span<const int> idx) {
            std::vector<std::size_t> family(idx.begin(), idx.end());
            best = std::max(best, costima::msc_coverage(msc, family));
        });
    return best;
}

}  // namespace support
