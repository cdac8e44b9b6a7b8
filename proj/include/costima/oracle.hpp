#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "costima/diffusion.hpp"
#include "costima/graph.hpp"

namespace costima {

// Edges with p in {0,1} are fixed up front, so the 2^m blow-up counts only
// genuinely random edges.
inline constexpr std::size_t kMaxFreeEdges = 24;

namespace detail {

struct EnumPlan {
    DiffusionGraph graph;
    std::vector<bool> base_live;          // p==1 live, p==0 blocked, free off
    std::vector<std::uint32_t> free_pos;  // universe positions of free edges
    std::vector<double> free_prob;
};

inline EnumPlan make_enum_plan(const ProblemInstance& inst,
                               std::span<const CandidateEdge> S) {
    EnumPlan plan;
    plan.graph = build_diffusion_graph(inst, S);
    plan.base_live.assign(plan.graph.universe_size, false);
    std::uint32_t pos = 0;
    auto classify = [&](double prob) {
        if (prob == 1.0)
            plan.base_live[pos] = true;
        else if (prob != 0.0) {
            plan.free_pos.push_back(pos);
            plan.free_prob.push_back(prob);
        }
        ++pos;
    };
    for (const auto& e : inst.edges) classify(e.prob);
    for (const auto& e : S) classify(e.prob);
    if (plan.free_pos.size() > kMaxFreeEdges)
        throw Error("instance too large for exact enumeration: " +
                    std::to_string(plan.free_pos.size()) + " free edges (limit " +
                    std::to_string(kMaxFreeEdges) + ")");
    return plan;
}

inline double outcome_probability(const EnumPlan& plan, std::uint64_t mask) {
    double p = 1.0;
    for (std::size_t j = 0; j < plan.free_pos.size(); ++j)
        p *= (mask >> j & 1) ? plan.free_prob[j] : 1.0 - plan.free_prob[j];
    return p;
}

// Calls fn(probability, live_mask) for every outcome, in mask index order.
// That order is the accumulation convention for all exact sums.
template <typename Fn>
void for_each_outcome(const EnumPlan& plan, Fn&& fn) {
    std::vector<bool> live = plan.base_live;
    const std::uint64_t outcomes = 1ULL << plan.free_pos.size();
    for (std::uint64_t mask = 0; mask < outcomes; ++mask) {
        for (std::size_t j = 0; j < plan.free_pos.size(); ++j)
            live[plan.free_pos[j]] = (mask >> j & 1) != 0;
        fn(outcome_probability(plan, mask), live);
    }
}

inline void check_added_sets(const ProblemInstance& inst, std::span<const CandidateEdge> S) {
    check_subset_of_candidates(inst, S);
}

}  // namespace detail

// Full enumeration of live-edge outcomes with probabilities, for tiny
// instances. Only free edges (0 < p < 1) are enumerated.
struct ExactDistribution {
    std::vector<std::pair<std::vector<bool>, double>> outcomes;
    std::size_t total_edges = 0;
};

inline ExactDistribution exact_distribution(const ProblemInstance& inst,
                                            std::span<const CandidateEdge> S) {
    detail::check_added_sets(inst, S);
    const auto plan = detail::make_enum_plan(inst, S);
    ExactDistribution dist;
    dist.total_edges = plan.graph.universe_size;
    dist.outcomes.reserve(std::size_t{1} << plan.free_pos.size());
    detail::for_each_outcome(plan, [&](double p, const std::vector<bool>& live) {
        dist.outcomes.emplace_back(live, p);
    });
    return dist;
}

// sigma(A, S) = sum over outcomes X of P[X] * |R(A, X)|, exactly (up to
// floating accumulation, in mask index order).
inline double exact_sigma(const ProblemInstance& inst, std::span<const CandidateEdge> S) {
    detail::check_added_sets(inst, S);
    const auto plan = detail::make_enum_plan(inst, S);
    ReachScratch ws(inst.n);
    double sigma = 0.0;
    detail::for_each_outcome(plan, [&](double p, const std::vector<bool>& live) {
        sigma += p * detail::mask_reach_count(plan.graph, inst.seeds, live, ws, ws.fresh_stamp());
    });
    return sigma;
}

// delta(S1, S2) for S2 a subset of S1: the expected number of nodes reached
// under S1 but lost when the edges T = S1 \ S2 are removed from each outcome.
// Computed from its own sum, not as a difference of two exact_sigma calls.
inline double exact_delta(const ProblemInstance& inst, std::span<const CandidateEdge> S1,
                          std::span<const CandidateEdge> S2) {
    detail::check_added_sets(inst, S1);
    std::unordered_set<std::uint64_t> s1_keys;
    for (const auto& e : S1) s1_keys.insert(edge_key(e.src, e.dst));
    for (const auto& e : S2)
        if (!s1_keys.count(edge_key(e.src, e.dst)))
            throw Error("S2 is not a subset of S1");

    std::unordered_set<std::uint64_t> s2_keys;
    for (const auto& e : S2) s2_keys.insert(edge_key(e.src, e.dst));
    const auto plan = detail::make_enum_plan(inst, S1);
    // Universe positions of the removed edges T.
    std::vector<std::uint32_t> removed;
    for (std::size_t j = 0; j < S1.size(); ++j)
        if (!s2_keys.count(edge_key(S1[j].src, S1[j].dst)))
            removed.push_back(static_cast<std::uint32_t>(inst.edges.size() + j));

    ReachScratch ws(inst.n);
    std::vector<bool> pruned;
    double delta = 0.0;
    detail::for_each_outcome(plan, [&](double p, const std::vector<bool>& live) {
        const auto full =
            detail::mask_reach_count(plan.graph, inst.seeds, live, ws, ws.fresh_stamp());
        pruned = live;
        for (auto pos : removed) pruned[pos] = false;
        const auto cut =
            detail::mask_reach_count(plan.graph, inst.seeds, pruned, ws, ws.fresh_stamp());
        delta += p * (static_cast<double>(full) - static_cast<double>(cut));
    });
    return delta;
}

// Memoizing exact-sigma evaluator over subsets of the candidate list,
// keyed by bitmask. Exact values are pure, so caching is invisible.
class ExactSigmaCache {
public:
    explicit ExactSigmaCache(const ProblemInstance& inst) : inst_(&inst) {}

    double of_mask(std::uint64_t mask) {
        if (auto it = memo_.find(mask); it != memo_.end()) return it->second;
        std::vector<CandidateEdge> subset;
        for (std::size_t i = 0; i < inst_->candidates.size(); ++i)
            if (mask >> i & 1) subset.push_back(inst_->candidates[i]);
        const double value = exact_sigma(*inst_, subset);
        memo_.emplace(mask, value);
        return value;
    }

    // Order-insensitive: the subset is always materialized in ascending index
    // order, so accumulation order (and thus the exact value bit pattern) does
    // not depend on the order edges were chosen in.
    double of_indices(std::span<const int> indices) {
        if (inst_->candidates.size() > 64) {
            std::vector<int> sorted(indices.begin(), indices.end());
            std::sort(sorted.begin(), sorted.end());
            std::vector<CandidateEdge> subset;
            for (int i : sorted) subset.push_back(inst_->candidates[i]);
            return exact_sigma(*inst_, subset);
        }
        std::uint64_t mask = 0;
        for (int i : indices) mask |= 1ULL << i;
        return of_mask(mask);
    }

private:
    const ProblemInstance* inst_;
    std::unordered_map<std::uint64_t, double> memo_;
};

inline constexpr std::size_t kMaxBruteForceCandidates = 16;

// Exhaustive search over candidate subsets. Ties in sigma go to the
// lexicographically smallest index set.
inline Solution brute_force_opt(const ProblemInstance& inst) {
    const std::size_t c = inst.candidates.size();
    if (c > kMaxBruteForceCandidates)
        throw Error("instance too large for brute force: " + std::to_string(c) +
                    " candidates (limit " + std::to_string(kMaxBruteForceCandidates) + ")");
    ExactSigmaCache cache(inst);
    std::vector<int> best_indices;
    double best_value = 0.0;
    bool have_best = false;
    std::vector<int> indices;
    for (std::uint64_t mask = 0; mask < (1ULL << c); ++mask) {
        indices.clear();
        double cost = 0.0;
        for (std::size_t i = 0; i < c; ++i)
            if (mask >> i & 1) {
                indices.push_back(static_cast<int>(i));
                cost += inst.candidates[i].cost;
            }
        if (cost > inst.budget) continue;
        const double value = cache.of_mask(mask);
        const bool better =
            !have_best || value > best_value ||
            (value == best_value && std::lexicographical_compare(indices.begin(), indices.end(),
                                                                 best_indices.begin(),
                                                                 best_indices.end()));
        if (better) {
            have_best = true;
            best_value = value;
            best_indices = indices;
        }
    }
    Solution sol;
    for (int i : best_indices) {
        sol.chosen.push_back(inst.candidates[i]);
        sol.total_cost += inst.candidates[i].cost;
    }
    sol.sigma = best_value;
    return sol;
}

}  // namespace costima
