#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "costima/graph.hpp"
#include "costima/io.hpp"
#include "costima/rng.hpp"

namespace costima {

// Maximum set coverage: pick k of the sets maximizing the size of their union.
struct MscInstance {
    NodeId universe_size = 0;
    std::vector<std::vector<NodeId>> sets;  // each sorted, duplicate-free
    std::uint64_t k = 0;
};

inline void validate(const MscInstance& msc) {
    if (msc.k < 1) throw Error("k must be >= 1");
    if (msc.k > msc.sets.size())
        throw Error("k = " + std::to_string(msc.k) + " exceeds the number of sets (" +
                    std::to_string(msc.sets.size()) + ")");
    for (std::size_t j = 0; j < msc.sets.size(); ++j) {
        const auto& set = msc.sets[j];
        if (set.empty()) throw Error("set " + std::to_string(j) + " is empty");
        for (std::size_t i = 0; i < set.size(); ++i) {
            if (set[i] >= msc.universe_size)
                throw Error("set " + std::to_string(j) + " contains element " +
                            std::to_string(set[i]) + " outside the universe");
            if (i > 0 && set[i] <= set[i - 1])
                throw Error("set " + std::to_string(j) + " is not sorted and duplicate-free");
        }
    }
}

// Node layout of the generated instance.
inline NodeId msc_seed_node() { return 0; }
inline NodeId msc_set_node(std::size_t j) { return static_cast<NodeId>(1 + j); }
inline NodeId msc_element_node(const MscInstance& msc, NodeId element) {
    return static_cast<NodeId>(1 + msc.sets.size() + element);
}

// Size of the union of the indexed sets.
inline std::size_t msc_coverage(const MscInstance& msc, std::span<const std::size_t> indices) {
    std::vector<bool> covered(msc.universe_size, false);
    std::size_t count = 0;
    for (auto j : indices) {
        if (j >= msc.sets.size()) throw Error("set index out of range");
        for (NodeId x : msc.sets[j])
            if (!covered[x]) {
                covered[x] = true;
                ++count;
            }
    }
    return count;
}

// Builds the influence instance whose optimal augmentation mirrors the
// coverage problem: one seed, one node per set, one node per element; each
// set node points to its elements with probability 1, and the candidates are
// the unit-cost certain edges from the seed to every set node, with budget k.
// The instance is fully deterministic, so exact evaluation enumerates zero
// coins at any size. extra_seeds appends that many isolated seed nodes, which
// shift sigma by a constant and change nothing else.
inline ProblemInstance msc_to_ima(const MscInstance& msc, NodeId extra_seeds = 0) {
    validate(msc);
    ProblemInstance inst;
    inst.n = static_cast<NodeId>(1 + msc.sets.size() + msc.universe_size + extra_seeds);
    inst.seeds.push_back(msc_seed_node());
    for (NodeId t = 0; t < extra_seeds; ++t)
        inst.seeds.push_back(static_cast<NodeId>(1 + msc.sets.size() + msc.universe_size + t));
    for (std::size_t j = 0; j < msc.sets.size(); ++j)
        for (NodeId x : msc.sets[j]) inst.edges.push_back({msc_set_node(j), msc_element_node(msc, x), 1.0});
    for (std::size_t j = 0; j < msc.sets.size(); ++j)
        inst.candidates.push_back({msc_seed_node(), msc_set_node(j), 1.0, 1.0});
    inst.budget = static_cast<double>(msc.k);
    inst.unit_cost = true;
    validate(inst);
    return inst;
}

// Maps a solution on msc_to_ima(msc) back to the family of chosen set
// indices, in the order they were chosen.
inline std::vector<std::size_t> ima_to_msc_solution(const Solution& sol, const MscInstance& msc) {
    std::vector<std::size_t> family;
    for (const auto& e : sol.chosen) {
        if (e.src != msc_seed_node() || e.dst < 1 || e.dst > msc.sets.size())
            throw Error("solution edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) +
                        ") does not select a set node");
        family.push_back(e.dst - 1);
    }
    return family;
}

// One line per set, space-separated element ids, '#' comments. Elements are
// sorted and duplicates dropped; the universe is the largest id plus one.
inline MscInstance load_msc(const std::string& path, std::uint64_t k) {
    MscInstance msc;
    msc.k = k;
    const std::string text = detail::read_file(path);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        const std::string_view raw(text.data() + pos,
                                   (nl == std::string::npos ? text.size() : nl) - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const auto line = detail::strip_line(raw);
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(line_no);
        std::vector<NodeId> set;
        for (const auto& tok : detail::split_fields(line)) {
            const auto v = detail::parse_u64(tok, where);
            if (v > 0xffffffffULL) throw Error(where + ": element id too large");
            set.push_back(static_cast<NodeId>(v));
        }
        std::sort(set.begin(), set.end());
        set.erase(std::unique(set.begin(), set.end()), set.end());
        for (NodeId x : set) msc.universe_size = std::max(msc.universe_size, x + 1);
        msc.sets.push_back(std::move(set));
    }
    validate(msc);
    return msc;
}

// Random coverage instance: num_sets sets, each of a size drawn uniformly
// from [min_size, max_size], elements sampled without replacement.
inline MscInstance random_msc(NodeId universe_size, std::size_t num_sets, std::size_t min_size,
                              std::size_t max_size, std::uint64_t k, std::uint64_t rng_seed) {
    if (universe_size < 1) throw Error("universe must be >= 1");
    if (min_size < 1 || min_size > max_size) throw Error("set size range invalid");
    if (max_size > universe_size) throw Error("set size exceeds universe");
    MscInstance msc;
    msc.universe_size = universe_size;
    msc.k = k;
    SplitMix64 rng(rng_seed);
    std::vector<NodeId> perm(universe_size);
    for (NodeId v = 0; v < universe_size; ++v) perm[v] = v;
    for (std::size_t j = 0; j < num_sets; ++j) {
        const std::size_t size =
            min_size + static_cast<std::size_t>(rng.next_below(max_size - min_size + 1));
        for (std::size_t i = 0; i < size; ++i) {
            const auto pick = i + static_cast<std::size_t>(rng.next_below(universe_size - i));
            std::swap(perm[i], perm[pick]);
        }
        std::vector<NodeId> set(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(size));
        std::sort(set.begin(), set.end());
        msc.sets.push_back(std::move(set));
    }
    validate(msc);
    return msc;
}

}  // namespace costima
