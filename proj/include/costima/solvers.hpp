#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "costima/diffusion.hpp"
#include "costima/graph.hpp"
#include "costima/oracle.hpp"

namespace costima {

enum class SigmaMode { estimate, exact };

// Ties are always broken toward the lowest candidate index; that policy is
// fixed, not configurable, so runs are reproducible.
struct SolverConfig {
    SigmaMode sigma_mode = SigmaMode::estimate;
    SamplingConfig sampling;
    int enum_size = 3;                   // subset size M of the enumeration solver
    std::uint64_t enum_cap = 1'000'000;  // limit on enumerated subsets of size <= M
    bool stop_on_zero_gain = false;
};

namespace detail {

// One evaluation of a candidate pool against a common base set S. In estimate
// mode raw_gain holds the integer sums of newly reached nodes per candidate,
// so argmax comparisons are exact; gain/set_value are the derived means.
struct PoolEval {
    double base_value = 0.0;                  // sigma(A, S)
    std::vector<double> set_value;            // sigma(A, S u {pool[j]})
    std::vector<double> gain;                 // set_value[j] - base_value
    std::vector<unsigned long long> raw_gain; // estimate mode only
};

// Estimates sigma(A, S) and sigma(A, S u {e}) for every pool candidate e in
// one pass over a shared coin block. Per sample, the base reach R0 is computed
// once; a live candidate e = (a, v) with a seeded source contributes exactly
// the nodes reachable from v outside R0, which matches the plain estimator on
// S u {e} coin for coin because R0 is closed under live reachability.
inline PoolEval estimate_pool(const ProblemInstance& inst, std::span<const int> chosen,
                              std::span<const int> pool, std::uint64_t block_seed,
                              const SamplingConfig& sampling) {
    std::vector<CandidateEdge> S;
    S.reserve(chosen.size());
    for (int i : chosen) S.push_back(inst.candidates[i]);
    const DiffusionGraph g = build_diffusion_graph(inst, S);

    struct Chunk {
        unsigned long long base = 0;
        std::vector<unsigned long long> extras;
    };
    const unsigned workers = worker_count(sampling.parallel);
    std::vector<Chunk> chunks(workers);
    for (auto& c : chunks) c.extras.assign(pool.size(), 0);

    run_sample_chunks(sampling.num_samples, workers,
                      [&](unsigned w, std::uint64_t begin, std::uint64_t end) {
                          ReachScratch ws(inst.n);
                          auto& out = chunks[w];
                          const auto batch = static_cast<std::uint32_t>(1 + pool.size());
                          for (std::uint64_t i = begin; i < end; ++i) {
                              const auto base_stamp = ws.fresh_stamps(batch);
                              out.base += live_reach_count(g, inst.seeds, block_seed, i, ws,
                                                           base_stamp);
                              for (std::size_t j = 0; j < pool.size(); ++j) {
                                  const auto& cand = inst.candidates[pool[j]];
                                  if (edge_coin(block_seed, i, cand.src, cand.dst) < cand.prob)
                                      out.extras[j] += extra_reach_count(
                                          g, cand.dst, block_seed, i, ws, base_stamp,
                                          base_stamp + 1 + static_cast<std::uint32_t>(j));
                              }
                          }
                      });

    unsigned long long base_sum = 0;
    std::vector<unsigned long long> extras(pool.size(), 0);
    for (const auto& c : chunks) {  // chunk order = sample index order
        base_sum += c.base;
        for (std::size_t j = 0; j < pool.size(); ++j) extras[j] += c.extras[j];
    }
    PoolEval out;
    const auto n_samples = static_cast<double>(sampling.num_samples);
    out.base_value = static_cast<double>(base_sum) / n_samples;
    out.set_value.resize(pool.size());
    out.gain.resize(pool.size());
    out.raw_gain = std::move(extras);
    for (std::size_t j = 0; j < pool.size(); ++j) {
        out.gain[j] = static_cast<double>(out.raw_gain[j]) / n_samples;
        out.set_value[j] = static_cast<double>(base_sum + out.raw_gain[j]) / n_samples;
    }
    return out;
}

inline PoolEval exact_pool(ExactSigmaCache& cache, const ProblemInstance& inst,
                           std::span<const int> chosen, std::span<const int> pool) {
    PoolEval out;
    out.base_value = cache.of_indices(chosen);
    out.set_value.resize(pool.size());
    out.gain.resize(pool.size());
    std::vector<int> plus(chosen.begin(), chosen.end());
    plus.push_back(0);
    for (std::size_t j = 0; j < pool.size(); ++j) {
        plus.back() = pool[j];
        out.set_value[j] = cache.of_indices(plus);
        out.gain[j] = out.set_value[j] - out.base_value;
    }
    (void)inst;
    return out;
}

// Uniform sigma evaluation front end for the solvers. Estimate mode derives
// one coin block per greedy iteration (base_seed + iteration); exact mode
// ignores the iteration and memoizes by candidate subset.
struct SigmaEval {
    const ProblemInstance& inst;
    const SolverConfig& cfg;
    ExactSigmaCache* cache = nullptr;

    PoolEval pool_eval(std::span<const int> chosen, std::span<const int> pool,
                       std::uint64_t iteration) const {
        if (cache) return exact_pool(*cache, inst, chosen, pool);
        return estimate_pool(inst, chosen, pool, cfg.sampling.base_seed + iteration,
                             cfg.sampling);
    }

    double value(std::span<const int> chosen, std::uint64_t iteration) const {
        if (cache) return cache->of_indices(chosen);
        return estimate_pool(inst, chosen, {}, cfg.sampling.base_seed + iteration,
                             cfg.sampling)
            .base_value;
    }
};

inline std::optional<ExactSigmaCache> make_cache(const ProblemInstance& inst,
                                                 const SolverConfig& cfg) {
    if (cfg.sigma_mode == SigmaMode::exact) return std::optional<ExactSigmaCache>(std::in_place, inst);
    if (cfg.sampling.num_samples < 1) throw Error("num_samples must be >= 1");
    return std::nullopt;
}

inline bool gain_greater(const PoolEval& ev, std::size_t j, std::size_t best) {
    if (!ev.raw_gain.empty()) return ev.raw_gain[j] > ev.raw_gain[best];
    return ev.gain[j] > ev.gain[best];
}

// True when adding the candidate cannot help: zero newly reached nodes in
// estimate mode, non-positive exact gain otherwise.
inline bool zero_gain(const PoolEval& ev, std::size_t j) {
    if (!ev.raw_gain.empty()) return ev.raw_gain[j] == 0;
    return ev.gain[j] <= 0.0;
}

// Strictly-better predicate for the gain-per-cost order. Zero-cost candidates
// outrank every positive-cost one (they are free and sigma is monotone) and
// compare among themselves by gain; positive costs compare by gain/cost as
// plain double division. Scanning the pool in ascending index order makes ties
// keep the lower index.
inline bool ratio_better(const ProblemInstance& inst, const PoolEval& ev,
                         std::span<const int> pool, std::size_t j, std::size_t best) {
    const double cj = inst.candidates[pool[j]].cost;
    const double cb = inst.candidates[pool[best]].cost;
    const bool zj = cj == 0.0;
    const bool zb = cb == 0.0;
    if (zj != zb) return zj;
    if (zj) return gain_greater(ev, j, best);
    return ev.gain[j] / cj > ev.gain[best] / cb;
}

inline TraceEntry make_entry(const CandidateEdge& cand, double marginal, double sigma,
                             bool accepted, std::string reason) {
    TraceEntry t;
    t.src = cand.src;
    t.dst = cand.dst;
    t.prob = cand.prob;
    t.cost = cand.cost;
    t.marginal = marginal;
    t.sigma = sigma;
    t.accepted = accepted;
    t.reason = std::move(reason);
    return t;
}

inline void push_entry(std::vector<TraceEntry>& trace, TraceEntry t) {
    t.step = static_cast<int>(trace.size()) + 1;
    trace.push_back(std::move(t));
}

inline void renumber(std::vector<TraceEntry>& trace) {
    for (std::size_t i = 0; i < trace.size(); ++i) trace[i].step = static_cast<int>(i) + 1;
}

// Gain-per-cost greedy over `pool`. Every pass evaluates the whole remaining
// pool under one coin block, picks the ratio winner, accepts it iff it has
// positive gain and the accumulated cost stays within budget, and removes it
// from the pool either way. Returns the first unused coin block index.
inline std::uint64_t ratio_greedy_loop(const SigmaEval& ev, std::vector<int>& chosen,
                                       double& running_total, std::vector<int> pool,
                                       std::vector<TraceEntry>& trace,
                                       std::uint64_t iteration) {
    const ProblemInstance& inst = ev.inst;
    while (!pool.empty()) {
        const PoolEval pe = ev.pool_eval(chosen, pool, iteration);
        ++iteration;
        std::size_t best = 0;
        for (std::size_t j = 1; j < pool.size(); ++j)
            if (ratio_better(inst, pe, pool, j, best)) best = j;
        const auto& cand = inst.candidates[pool[best]];
        if (zero_gain(pe, best)) {
            push_entry(trace,
                       make_entry(cand, pe.gain[best], pe.set_value[best], false, "zero-gain"));
            if (ev.cfg.stop_on_zero_gain) break;
            pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
            continue;
        }
        if (running_total + cand.cost <= inst.budget) {
            chosen.push_back(pool[best]);
            running_total += cand.cost;
            push_entry(trace, make_entry(cand, pe.gain[best], pe.set_value[best], true, ""));
        } else {
            push_entry(trace,
                       make_entry(cand, pe.gain[best], pe.set_value[best], false, "budget"));
        }
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
    }
    return iteration;
}

inline std::vector<int> all_candidate_indices(const ProblemInstance& inst) {
    std::vector<int> all(inst.candidates.size());
    std::iota(all.begin(), all.end(), 0);
    return all;
}

inline void fill_solution_edges(Solution& sol, const ProblemInstance& inst,
                                std::span<const int> chosen) {
    for (int i : chosen) sol.chosen.push_back(inst.candidates[i]);
}

}  // namespace detail

// Unit-cost greedy: k times, append the candidate maximizing sigma(A, S u {e})
// over the remaining pool. By default it fills the whole budget even with
// zero-gain picks; stop_on_zero_gain truncates instead. Solution.sigma is a
// final evaluation of the chosen set under the first unused coin block (in
// exact mode that equals the last accepted trace value).
inline Solution greedy_ima(const ProblemInstance& inst, const SolverConfig& cfg) {
    validate(inst);
    if (!derive_unit_cost(inst))
        throw Error(
            "greedy requires unit costs and an integer budget; use the cost-ratio greedy "
            "(cost_greedy) for weighted costs");
    auto cache = detail::make_cache(inst, cfg);
    const detail::SigmaEval ev{inst, cfg, cache ? &*cache : nullptr};

    const auto k = std::min<std::uint64_t>(static_cast<std::uint64_t>(inst.budget),
                                           inst.candidates.size());
    std::vector<int> pool = detail::all_candidate_indices(inst);
    std::vector<int> chosen;
    Solution sol;
    std::uint64_t iteration = 1;
    for (std::uint64_t step = 0; step < k; ++step) {
        const auto pe = ev.pool_eval(chosen, pool, iteration);
        ++iteration;
        std::size_t best = 0;
        for (std::size_t j = 1; j < pool.size(); ++j)
            if (detail::gain_greater(pe, j, best)) best = j;
        const auto& cand = inst.candidates[pool[best]];
        if (cfg.stop_on_zero_gain && detail::zero_gain(pe, best)) {
            detail::push_entry(sol.trace, detail::make_entry(cand, pe.gain[best],
                                                             pe.set_value[best], false,
                                                             "zero-gain"));
            break;
        }
        chosen.push_back(pool[best]);
        sol.total_cost += cand.cost;
        detail::push_entry(sol.trace,
                           detail::make_entry(cand, pe.gain[best], pe.set_value[best], true, ""));
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
    }
    detail::fill_solution_edges(sol, inst, chosen);
    sol.sigma = ev.value(chosen, iteration);
    return sol;
}

// Budgeted greedy: scans for the best single edge e_M ignoring cost, then runs
// the gain-per-cost loop, and returns whichever of the greedy set and {e_M}
// scores higher when both are re-evaluated under one fresh coin block (ties
// keep the greedy set). e_M enters that comparison only if it fits the budget
// by itself, so the result is always feasible.
inline Solution cost_greedy(const ProblemInstance& inst, const SolverConfig& cfg) {
    validate(inst);
    auto cache = detail::make_cache(inst, cfg);
    const detail::SigmaEval ev{inst, cfg, cache ? &*cache : nullptr};

    Solution sol;
    if (inst.candidates.empty()) {
        sol.sigma = ev.value({}, 0);
        return sol;
    }
    const std::vector<int> all = detail::all_candidate_indices(inst);

    // Single-edge scan, coin block 0. The best edge by sigma(A, {e}) is the
    // best by gain because the base term is shared.
    const auto scan = ev.pool_eval({}, all, 0);
    std::size_t em = 0;
    for (std::size_t j = 1; j < all.size(); ++j)
        if (detail::gain_greater(scan, j, em)) em = j;
    const int em_idx = all[em];

    std::vector<int> chosen;
    double running = 0.0;
    const auto next_block = detail::ratio_greedy_loop(ev, chosen, running, all, sol.trace, 1);

    const double sigma_greedy = ev.value(chosen, next_block);
    const auto& em_cand = inst.candidates[em_idx];
    const bool em_feasible = em_cand.cost <= inst.budget;
    if (em_feasible) {
        const int em_set[] = {em_idx};
        const double sigma_em = ev.value(em_set, next_block);
        if (sigma_em > sigma_greedy) {
            sol.chosen.push_back(em_cand);
            sol.total_cost = em_cand.cost;
            sol.sigma = sigma_em;
            detail::push_entry(sol.trace, detail::make_entry(em_cand, sigma_em - sigma_greedy,
                                                             sigma_em, true,
                                                             "best-single-edge"));
            return sol;
        }
    }
    detail::fill_solution_edges(sol, inst, chosen);
    sol.total_cost = running;
    sol.sigma = sigma_greedy;
    return sol;
}

namespace detail {

// Binomial count with saturation at `cap + 1` so callers can compare against
// the cap without overflow.
inline std::uint64_t subsets_up_to(std::size_t n, std::size_t m, std::uint64_t cap) {
    std::uint64_t total = 0;
    for (std::size_t j = 0; j <= std::min(m, n); ++j) {
        // C(n, j) incrementally; bail out as soon as the running total passes cap.
        long double c = 1.0L;
        for (std::size_t i = 0; i < j; ++i) c = c * static_cast<long double>(n - i) / (i + 1);
        if (c > static_cast<long double>(cap) || (total += static_cast<std::uint64_t>(c + 0.5L)) > cap)
            return cap + 1;
    }
    return total;
}

// Lexicographic combinations of {0..n-1} of a fixed size; fn(indices) per
// combination.
template <typename Fn>
void for_each_combination(std::size_t n, std::size_t size, Fn&& fn) {
    if (size > n) return;
    std::vector<int> idx(size);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        fn(static_cast<std::span<const int>>(idx));
        std::size_t i = size;
        while (i > 0 && idx[i - 1] == static_cast<int>(n - size + i - 1)) --i;
        if (i == 0) break;
        ++idx[i - 1];
        for (std::size_t j = i; j < size; ++j) idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace detail

// Enumeration solver: the best feasible subset of size < M competes against
// every feasible size-M subset completed by the gain-per-cost greedy on the
// remaining pool and budget. All cross-subset comparisons are evaluated under
// coin block 0 so estimate mode compares like with like; the winner is the
// highest value, ties to the lexicographically smallest candidate-index set.
inline Solution enum_greedy(const ProblemInstance& inst, const SolverConfig& cfg) {
    validate(inst);
    if (cfg.enum_size < 1) throw Error("enumeration size must be >= 1");
    auto cache = detail::make_cache(inst, cfg);
    const detail::SigmaEval ev{inst, cfg, cache ? &*cache : nullptr};

    const std::size_t c = inst.candidates.size();
    const auto m = static_cast<std::size_t>(cfg.enum_size);
    const auto subsets = detail::subsets_up_to(c, m, cfg.enum_cap);
    if (subsets > cfg.enum_cap)
        throw Error("enumeration over " + std::to_string(c) + " candidates up to size " +
                    std::to_string(m) + " exceeds the cap of " + std::to_string(cfg.enum_cap) +
                    " subsets; use a smaller M or the cost-ratio greedy");

    struct Branch {
        double value = 0.0;
        std::vector<int> sorted;  // ascending indices, for tie-breaking
        std::vector<int> order;   // acceptance order
        double total = 0.0;
        std::vector<TraceEntry> trace;
        bool set = false;
    };
    Branch best;
    auto offer = [&](double value, std::vector<int> sorted, std::vector<int> order,
                     double total, std::vector<TraceEntry> trace) {
        const bool better = !best.set || value > best.value ||
                            (value == best.value &&
                             std::lexicographical_compare(sorted.begin(), sorted.end(),
                                                          best.sorted.begin(), best.sorted.end()));
        if (!better) return;
        best = {value, std::move(sorted), std::move(order), total, std::move(trace), true};
    };

    auto subset_cost = [&](std::span<const int> idx) {
        double total = 0.0;
        for (int i : idx) total += inst.candidates[i].cost;
        return total;
    };
    auto enumerated_trace = [&](std::span<const int> idx, double value) {
        std::vector<TraceEntry> trace;
        for (int i : idx)
            detail::push_entry(trace,
                               detail::make_entry(inst.candidates[i], 0.0, value, true,
                                                  "enumerated"));
        return trace;
    };

    // Subsets of size < M stand as they are.
    for (std::size_t size = 0; size < m; ++size) {
        if (size > c) break;
        detail::for_each_combination(c, size, [&](std::span<const int> idx) {
            const double total = subset_cost(idx);
            if (total > inst.budget) return;
            const double value = ev.value(idx, 0);
            std::vector<int> sorted(idx.begin(), idx.end());
            offer(value, sorted, sorted, total, enumerated_trace(idx, value));
        });
    }

    // Size-M subsets are completed by the gain-per-cost greedy over what is
    // left of the pool and the budget.
    detail::for_each_combination(c, m, [&](std::span<const int> idx) {
        double running = subset_cost(idx);
        if (running > inst.budget) return;
        std::vector<int> chosen(idx.begin(), idx.end());
        std::vector<int> pool;
        for (int i = 0; i < static_cast<int>(c); ++i)
            if (!std::binary_search(idx.begin(), idx.end(), i)) pool.push_back(i);
        std::vector<TraceEntry> trace = enumerated_trace(idx, 0.0);
        detail::ratio_greedy_loop(ev, chosen, running, std::move(pool), trace, 1);
        const double value = ev.value(chosen, 0);
        for (auto& t : trace)
            if (t.reason == "enumerated") t.sigma = value;
        std::vector<int> sorted = chosen;
        std::sort(sorted.begin(), sorted.end());
        offer(value, std::move(sorted), std::move(chosen), running, std::move(trace));
    });

    Solution sol;
    detail::fill_solution_edges(sol, inst, best.order);
    sol.total_cost = best.total;
    sol.sigma = best.value;
    sol.trace = std::move(best.trace);
    detail::renumber(sol.trace);
    return sol;
}

enum class BaselineStrategy { random, max_prob, high_outdegree_target };

inline BaselineStrategy baseline_from_name(std::string_view name) {
    if (name == "random") return BaselineStrategy::random;
    if (name == "max_prob") return BaselineStrategy::max_prob;
    if (name == "high_outdegree_target") return BaselineStrategy::high_outdegree_target;
    throw Error("unknown strategy: " + std::string(name));
}

inline std::string_view baseline_name(BaselineStrategy s) {
    switch (s) {
        case BaselineStrategy::random: return "random";
        case BaselineStrategy::max_prob: return "max_prob";
        case BaselineStrategy::high_outdegree_target: return "high_outdegree_target";
    }
    throw Error("unknown strategy");
}

// Myopic comparators: order the candidates by the named criterion, then accept
// greedily while the budget allows. Only the final set gets a sigma value.
inline Solution baseline(const ProblemInstance& inst, BaselineStrategy strategy,
                         std::uint64_t rng_seed, const SolverConfig& cfg = {}) {
    validate(inst);
    auto cache = detail::make_cache(inst, cfg);
    const detail::SigmaEval ev{inst, cfg, cache ? &*cache : nullptr};

    std::vector<int> order = detail::all_candidate_indices(inst);
    switch (strategy) {
        case BaselineStrategy::random: {
            SplitMix64 rng(rng_seed);
            for (std::size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[rng.next_below(i)]);
            break;
        }
        case BaselineStrategy::max_prob:
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
                return inst.candidates[a].prob > inst.candidates[b].prob;
            });
            break;
        case BaselineStrategy::high_outdegree_target: {
            std::vector<std::uint32_t> outdeg(inst.n, 0);
            for (const auto& e : inst.edges) ++outdeg[e.src];
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
                return outdeg[inst.candidates[a].dst] > outdeg[inst.candidates[b].dst];
            });
            break;
        }
    }

    Solution sol;
    std::vector<int> chosen;
    for (int i : order) {
        const auto& cand = inst.candidates[i];
        if (sol.total_cost + cand.cost <= inst.budget) {
            chosen.push_back(i);
            sol.total_cost += cand.cost;
            detail::push_entry(sol.trace, detail::make_entry(cand, 0.0, 0.0, true, ""));
        } else {
            detail::push_entry(sol.trace, detail::make_entry(cand, 0.0, 0.0, false, "budget"));
        }
    }
    detail::fill_solution_edges(sol, inst, chosen);
    sol.sigma = ev.value(chosen, 0);
    return sol;
}

}  // namespace costima
