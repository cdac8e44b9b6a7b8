#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "costima/rng.hpp"

namespace costima {

using NodeId = std::uint32_t;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An existing edge of the network with its propagation probability.
struct Edge {
    NodeId src = 0;
    NodeId dst = 0;
    double prob = 0.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

// An edge that may be added: source must be a seed, (src,dst) must not exist.
struct CandidateEdge {
    NodeId src = 0;
    NodeId dst = 0;
    double prob = 0.0;
    double cost = 1.0;

    friend bool operator==(const CandidateEdge&, const CandidateEdge&) = default;
};

// One decision made by a solver: the edge it committed on at a given step,
// the objective seen at that point, and whether the edge entered the solution.
struct TraceEntry {
    int step = 0;
    NodeId src = 0;
    NodeId dst = 0;
    double prob = 0.0;
    double cost = 0.0;
    double marginal = 0.0;  // objective gain relative to the previous set
    double sigma = 0.0;     // objective of the set including this edge
    bool accepted = false;
    std::string reason;     // empty, "budget", "zero-gain", "best-single-edge", "enumerated"
};

struct Solution {
    std::vector<CandidateEdge> chosen;
    double total_cost = 0.0;
    double sigma = 0.0;
    std::vector<TraceEntry> trace;
};

// Immutable after load; shared read-only by parallel workers.
struct ProblemInstance {
    NodeId n = 0;
    std::vector<Edge> edges;
    std::vector<NodeId> seeds;  // sorted, unique
    std::vector<CandidateEdge> candidates;
    double budget = 0.0;
    bool unit_cost = false;  // true iff all candidate costs are 1 and budget is integral
};

inline std::uint64_t edge_key(NodeId src, NodeId dst) { return pack_pair(src, dst); }

inline bool is_integral(double x) { return std::floor(x) == x; }

inline bool derive_unit_cost(const ProblemInstance& inst) {
    if (!(inst.budget >= 0.0) || !is_integral(inst.budget)) return false;
    for (const auto& c : inst.candidates)
        if (c.cost != 1.0) return false;
    return true;
}

inline std::unordered_set<std::uint64_t> edge_key_set(const ProblemInstance& inst) {
    std::unordered_set<std::uint64_t> keys;
    keys.reserve(inst.edges.size() * 2);
    for (const auto& e : inst.edges) keys.insert(edge_key(e.src, e.dst));
    return keys;
}

// Candidate index by (src,dst) identity.
inline std::unordered_map<std::uint64_t, std::size_t> candidate_index_map(
    const ProblemInstance& inst) {
    std::unordered_map<std::uint64_t, std::size_t> map;
    map.reserve(inst.candidates.size() * 2);
    for (std::size_t i = 0; i < inst.candidates.size(); ++i)
        map.emplace(edge_key(inst.candidates[i].src, inst.candidates[i].dst), i);
    return map;
}

inline bool is_seed(const ProblemInstance& inst, NodeId v) {
    return std::binary_search(inst.seeds.begin(), inst.seeds.end(), v);
}

// Checks every structural invariant; throws Error naming the offender.
inline void validate(const ProblemInstance& inst) {
    if (!(inst.budget >= 0.0))
        throw Error("budget must be >= 0, got " + std::to_string(inst.budget));
    for (std::size_t i = 0; i + 1 < inst.seeds.size(); ++i)
        if (inst.seeds[i] >= inst.seeds[i + 1]) throw Error("seed list not sorted/unique");
    for (NodeId a : inst.seeds)
        if (a >= inst.n) throw Error("seed " + std::to_string(a) + " out of range [0," +
                                     std::to_string(inst.n) + ")");

    std::unordered_set<std::uint64_t> seen;
    seen.reserve(inst.edges.size() * 2);
    for (const auto& e : inst.edges) {
        const std::string name =
            "edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) + ")";
        if (e.src >= inst.n || e.dst >= inst.n) throw Error(name + ": node out of range");
        if (e.src == e.dst) throw Error(name + ": self-loop");
        if (!(e.prob >= 0.0 && e.prob <= 1.0)) throw Error(name + ": prob outside [0,1]");
        if (!seen.insert(edge_key(e.src, e.dst)).second) throw Error(name + ": duplicate");
    }

    std::unordered_set<std::uint64_t> cand_seen;
    cand_seen.reserve(inst.candidates.size() * 2);
    for (const auto& c : inst.candidates) {
        const std::string name =
            "candidate (" + std::to_string(c.src) + "," + std::to_string(c.dst) + ")";
        if (c.src >= inst.n || c.dst >= inst.n) throw Error(name + ": node out of range");
        if (c.src == c.dst) throw Error(name + ": self-loop");
        if (!(c.prob >= 0.0 && c.prob <= 1.0)) throw Error(name + ": prob outside [0,1]");
        if (!(c.cost >= 0.0 && c.cost <= 1.0)) throw Error(name + ": cost outside [0,1]");
        if (!is_seed(inst, c.src)) throw Error(name + ": candidate source not a seed");
        if (seen.count(edge_key(c.src, c.dst)))
            throw Error(name + ": candidate duplicates an existing edge");
        if (!cand_seen.insert(edge_key(c.src, c.dst)).second)
            throw Error(name + ": duplicate candidate");
    }

    if (inst.unit_cost && !derive_unit_cost(inst))
        throw Error("unit_cost flag set but costs are not all 1 or budget is not integral");
}

// All (a,v) with a seed, v != a, (a,v) not in E, in (a,v) lexicographic order.
// Self-loops are excluded: they cannot extend reachability from the seeds.
inline std::vector<CandidateEdge> default_candidates(const ProblemInstance& inst,
                                                     double prob, double cost) {
    auto existing = edge_key_set(inst);
    std::vector<CandidateEdge> out;
    for (NodeId a : inst.seeds)
        for (NodeId v = 0; v < inst.n; ++v) {
            if (v == a || existing.count(edge_key(a, v))) continue;
            out.push_back({a, v, prob, cost});
        }
    return out;
}

// Per-target cost table variant; cost_by_dst must have one entry per node.
inline std::vector<CandidateEdge> default_candidates(const ProblemInstance& inst,
                                                     double prob,
                                                     std::span<const double> cost_by_dst) {
    if (cost_by_dst.size() != inst.n)
        throw Error("cost table size " + std::to_string(cost_by_dst.size()) +
                    " does not match node count " + std::to_string(inst.n));
    auto existing = edge_key_set(inst);
    std::vector<CandidateEdge> out;
    for (NodeId a : inst.seeds)
        for (NodeId v = 0; v < inst.n; ++v) {
            if (v == a || existing.count(edge_key(a, v))) continue;
            out.push_back({a, v, prob, cost_by_dst[v]});
        }
    return out;
}

inline double total_cost_of(std::span<const CandidateEdge> edges) {
    double total = 0.0;
    for (const auto& e : edges) total += e.cost;
    return total;
}

}  // namespace costima
