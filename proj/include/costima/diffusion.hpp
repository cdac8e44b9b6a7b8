#pragma once

#include <cmath>
#include <cstdlib>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "costima/graph.hpp"
#include "costima/rng.hpp"

namespace costima {

struct SamplingConfig {
    std::uint64_t num_samples = 10000;
    std::uint64_t base_seed = 0;
    std::optional<double> lambda;  // target relative accuracy
    std::optional<double> delta;   // failure probability
    bool parallel = true;
};

// Sample count for a (1+lambda)-approximation with probability 1-delta,
// ceil((n^2 / lambda^2) * ln(1/delta)), with constant factor 1. The bound is
// far beyond practical counts; callers normally pick num_samples explicitly.
inline std::uint64_t required_samples(NodeId n, double lambda, double delta) {
    if (!(lambda > 0.0)) throw Error("lambda must be > 0");
    if (!(delta > 0.0 && delta < 1.0)) throw Error("delta must be in (0,1)");
    const long double count = std::ceil(static_cast<long double>(n) * n / (lambda * lambda) *
                                        std::log(1.0L / delta));
    if (count > 0x1p62) throw Error("required sample count exceeds 2^62; pick num_samples explicitly");
    return static_cast<std::uint64_t>(count);
}

// Number of sampling workers: 1 when parallel is off, else the COSTIMA_THREADS
// env var, else hardware concurrency.
inline unsigned worker_count(bool parallel) {
    if (!parallel) return 1;
    if (const char* env = std::getenv("COSTIMA_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// CSR adjacency over the combined edge universe E followed by S. mask_pos is
// the edge's index in that universe (edges first, then the added set).
struct DiffusionGraph {
    NodeId n = 0;
    std::vector<std::uint32_t> offsets;
    std::vector<NodeId> targets;
    std::vector<double> probs;
    std::vector<std::uint32_t> mask_pos;
    std::size_t universe_size = 0;
};

inline DiffusionGraph build_diffusion_graph(const ProblemInstance& inst,
                                            std::span<const CandidateEdge> added) {
    DiffusionGraph g;
    g.n = inst.n;
    g.universe_size = inst.edges.size() + added.size();
    std::vector<std::uint32_t> degree(inst.n, 0);
    for (const auto& e : inst.edges) ++degree[e.src];
    for (const auto& e : added) ++degree[e.src];
    g.offsets.assign(inst.n + 1, 0);
    for (NodeId v = 0; v < inst.n; ++v) g.offsets[v + 1] = g.offsets[v] + degree[v];
    g.targets.resize(g.universe_size);
    g.probs.resize(g.universe_size);
    g.mask_pos.resize(g.universe_size);
    std::vector<std::uint32_t> cursor(g.offsets.begin(), g.offsets.end() - 1);
    std::uint32_t pos = 0;
    auto put = [&](NodeId src, NodeId dst, double prob) {
        const std::uint32_t slot = cursor[src]++;
        g.targets[slot] = dst;
        g.probs[slot] = prob;
        g.mask_pos[slot] = pos++;
    };
    for (const auto& e : inst.edges) put(e.src, e.dst, e.prob);
    for (const auto& e : added) put(e.src, e.dst, e.prob);
    return g;
}

// Reusable BFS workspace. Visited marks are stamps so clearing is O(1).
class ReachScratch {
public:
    explicit ReachScratch(NodeId n) : mark_(n, 0) {}

    // First of `count` consecutive fresh stamps; stamps from one batch stay
    // valid together even across the wrap-around reset.
    std::uint32_t fresh_stamps(std::uint32_t count) {
        if (stamp_ > 0xffffffffU - count) {
            std::fill(mark_.begin(), mark_.end(), 0);
            stamp_ = 0;
        }
        const std::uint32_t first = stamp_ + 1;
        stamp_ += count;
        return first;
    }

    std::uint32_t fresh_stamp() { return fresh_stamps(1); }

    std::vector<std::uint32_t> mark_;
    std::vector<NodeId> queue_;

private:
    std::uint32_t stamp_ = 0;
};

namespace detail {

// Reach count from the seeds with each edge's liveness decided by its
// identity-keyed coin.
inline std::uint32_t live_reach_count(const DiffusionGraph& g, std::span<const NodeId> seeds,
                                      std::uint64_t seed, std::uint64_t sample_index,
                                      ReachScratch& ws, std::uint32_t stamp) {
    auto& mark = ws.mark_;
    auto& queue = ws.queue_;
    queue.clear();
    for (NodeId a : seeds) {
        if (mark[a] != stamp) {
            mark[a] = stamp;
            queue.push_back(a);
        }
    }
    std::uint32_t count = static_cast<std::uint32_t>(queue.size());
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const NodeId u = queue[head];
        for (std::uint32_t i = g.offsets[u]; i < g.offsets[u + 1]; ++i) {
            const NodeId v = g.targets[i];
            if (mark[v] == stamp) continue;
            if (edge_coin(seed, sample_index, u, v) < g.probs[i]) {
                mark[v] = stamp;
                queue.push_back(v);
                ++count;
            }
        }
    }
    return count;
}

// Count of nodes reachable from `start` through live edges that are not
// already marked with base_stamp (the seeds' reach set from the same sample).
// Nodes marked base_stamp are closed under live reachability, so the walk
// stops at them.
inline std::uint32_t extra_reach_count(const DiffusionGraph& g, NodeId start,
                                       std::uint64_t seed, std::uint64_t sample_index,
                                       ReachScratch& ws, std::uint32_t base_stamp,
                                       std::uint32_t stamp) {
    auto& mark = ws.mark_;
    auto& queue = ws.queue_;
    if (mark[start] == base_stamp) return 0;
    queue.clear();
    mark[start] = stamp;
    queue.push_back(start);
    std::uint32_t count = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const NodeId u = queue[head];
        for (std::uint32_t i = g.offsets[u]; i < g.offsets[u + 1]; ++i) {
            const NodeId v = g.targets[i];
            if (mark[v] == stamp || mark[v] == base_stamp) continue;
            if (edge_coin(seed, sample_index, u, v) < g.probs[i]) {
                mark[v] = stamp;
                queue.push_back(v);
                ++count;
            }
        }
    }
    return count;
}

// Reach count where liveness comes from an explicit mask over the universe.
inline std::uint32_t mask_reach_count(const DiffusionGraph& g, std::span<const NodeId> seeds,
                                      const std::vector<bool>& live, ReachScratch& ws,
                                      std::uint32_t stamp) {
    auto& mark = ws.mark_;
    auto& queue = ws.queue_;
    queue.clear();
    for (NodeId a : seeds) {
        if (mark[a] != stamp) {
            mark[a] = stamp;
            queue.push_back(a);
        }
    }
    std::uint32_t count = static_cast<std::uint32_t>(queue.size());
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const NodeId u = queue[head];
        for (std::uint32_t i = g.offsets[u]; i < g.offsets[u + 1]; ++i) {
            const NodeId v = g.targets[i];
            if (mark[v] == stamp || !live[g.mask_pos[i]]) continue;
            mark[v] = stamp;
            queue.push_back(v);
            ++count;
        }
    }
    return count;
}

// Runs fn(worker, begin, end) over contiguous index ranges. Ranges are fixed
// by N and the worker count, never by scheduling.
template <typename Fn>
void run_sample_chunks(std::uint64_t num_samples, unsigned workers, Fn&& fn) {
    if (workers <= 1 || num_samples < 2048) {
        fn(0u, std::uint64_t{0}, num_samples);
        return;
    }
    const std::uint64_t chunk = (num_samples + workers - 1) / workers;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const std::uint64_t begin = std::min<std::uint64_t>(num_samples, w * chunk);
        const std::uint64_t end = std::min<std::uint64_t>(num_samples, begin + chunk);
        if (begin >= end) break;
        threads.emplace_back([&fn, w, begin, end] { fn(w, begin, end); });
    }
    for (auto& t : threads) t.join();
}

inline void check_subset_of_candidates(const ProblemInstance& inst,
                                       std::span<const CandidateEdge> S) {
    auto index = candidate_index_map(inst);
    std::unordered_set<std::uint64_t> seen;
    for (const auto& e : S) {
        const auto key = edge_key(e.src, e.dst);
        auto it = index.find(key);
        if (it == index.end() || inst.candidates[it->second].prob != e.prob)
            throw Error("edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) +
                        ") is not a candidate of this instance");
        if (!seen.insert(key).second)
            throw Error("edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) +
                        ") appears twice in the added set");
    }
}

}  // namespace detail

// Digest of an edge set, independent of the order it was handed over in.
inline std::uint64_t hash_edge_set(std::span<const CandidateEdge> S) {
    std::vector<std::uint64_t> keys;
    keys.reserve(S.size());
    for (const auto& e : S) keys.push_back(edge_key(e.src, e.dst));
    std::sort(keys.begin(), keys.end());
    std::uint64_t h = mix64(0x5eedf00dULL ^ keys.size());
    for (auto k : keys) h = mix64(h ^ k);
    return h;
}

// One sampled outcome of every coin in E followed by S.
struct LiveEdgeGraph {
    const ProblemInstance* instance = nullptr;
    std::vector<CandidateEdge> added;
    std::vector<bool> live;
};

// The bit for edge i is independently live with probability prob(i), fully
// determined by (base_seed, sample_index, src, dst).
inline LiveEdgeGraph sample_live_edge(const ProblemInstance& inst,
                                      std::span<const CandidateEdge> S,
                                      std::uint64_t sample_index, const SamplingConfig& cfg) {
    detail::check_subset_of_candidates(inst, S);
    LiveEdgeGraph x;
    x.instance = &inst;
    x.added.assign(S.begin(), S.end());
    x.live.resize(inst.edges.size() + S.size());
    std::size_t pos = 0;
    for (const auto& e : inst.edges)
        x.live[pos++] = edge_coin(cfg.base_seed, sample_index, e.src, e.dst) < e.prob;
    for (const auto& e : S)
        x.live[pos++] = edge_coin(cfg.base_seed, sample_index, e.src, e.dst) < e.prob;
    return x;
}

// All nodes with a live directed path from some seed, sorted. Seeds are always
// included.
inline std::vector<NodeId> reach(const LiveEdgeGraph& x, std::span<const NodeId> seeds) {
    const ProblemInstance& inst = *x.instance;
    const DiffusionGraph g = build_diffusion_graph(inst, x.added);
    ReachScratch ws(inst.n);
    const auto stamp = ws.fresh_stamp();
    detail::mask_reach_count(g, seeds, x.live, ws, stamp);
    std::vector<NodeId> out;
    for (NodeId v = 0; v < inst.n; ++v)
        if (ws.mark_[v] == stamp) out.push_back(v);
    return out;
}

struct SigmaEstimate {
    double value = 0.0;
    std::uint64_t samples = 0;
    double variance = 0.0;
    std::uint64_t rng_seed = 0;
    std::uint64_t edge_set_hash = 0;
};

namespace detail {

struct ChunkSums {
    unsigned long long sum = 0;
    unsigned __int128 sum_sq = 0;
};

inline SigmaEstimate reduce_counts(const std::vector<ChunkSums>& chunks, std::uint64_t n_samples,
                                   std::uint64_t seed, std::uint64_t set_hash) {
    unsigned long long sum = 0;
    unsigned __int128 sum_sq = 0;
    for (const auto& c : chunks) {  // chunk order = sample index order
        sum += c.sum;
        sum_sq += c.sum_sq;
    }
    SigmaEstimate est;
    est.samples = n_samples;
    est.rng_seed = seed;
    est.edge_set_hash = set_hash;
    est.value = static_cast<double>(sum) / static_cast<double>(n_samples);
    if (n_samples > 1) {
        const long double mean = static_cast<long double>(sum) / n_samples;
        const long double ss = static_cast<long double>(sum_sq) - mean * mean * n_samples;
        est.variance = static_cast<double>(std::max(0.0L, ss / (n_samples - 1)));
    }
    return est;
}

}  // namespace detail

// Monte Carlo estimate of sigma(A, S): the mean reach count over
// cfg.num_samples live-edge samples. Deterministic in (base_seed,
// num_samples, S) regardless of the worker count; reach counts are integers,
// so the reduction is exact.
inline SigmaEstimate estimate_sigma(const ProblemInstance& inst,
                                    std::span<const CandidateEdge> S,
                                    const SamplingConfig& cfg) {
    if (cfg.num_samples < 1) throw Error("num_samples must be >= 1");
    detail::check_subset_of_candidates(inst, S);
    const DiffusionGraph g = build_diffusion_graph(inst, S);
    const unsigned workers = worker_count(cfg.parallel);
    std::vector<detail::ChunkSums> chunks(workers);
    detail::run_sample_chunks(
        cfg.num_samples, workers,
        [&](unsigned w, std::uint64_t begin, std::uint64_t end) {
            ReachScratch ws(inst.n);
            auto& out = chunks[w];
            for (std::uint64_t i = begin; i < end; ++i) {
                const std::uint32_t c =
                    detail::live_reach_count(g, inst.seeds, cfg.base_seed, i, ws, ws.fresh_stamp());
                out.sum += c;
                out.sum_sq += static_cast<unsigned long long>(c) * c;
            }
        });
    return detail::reduce_counts(chunks, cfg.num_samples, cfg.base_seed, hash_edge_set(S));
}

// Paired estimate of sigma(A, S u {e}) - sigma(A, S) under common random
// numbers: every edge keeps its identity-keyed coin, so the per-sample
// difference is the count of nodes newly reached through e and never negative.
inline double marginal_gain(const ProblemInstance& inst, std::span<const CandidateEdge> S,
                            const CandidateEdge& e, const SamplingConfig& cfg) {
    if (cfg.num_samples < 1) throw Error("num_samples must be >= 1");
    detail::check_subset_of_candidates(inst, S);
    for (const auto& s : S)
        if (s.src == e.src && s.dst == e.dst)
            throw Error("edge already part of the added set");
    const DiffusionGraph g = build_diffusion_graph(inst, S);
    const unsigned workers = worker_count(cfg.parallel);
    std::vector<unsigned long long> sums(workers, 0);
    detail::run_sample_chunks(
        cfg.num_samples, workers,
        [&](unsigned w, std::uint64_t begin, std::uint64_t end) {
            ReachScratch ws(inst.n);
            for (std::uint64_t i = begin; i < end; ++i) {
                const auto base_stamp = ws.fresh_stamps(2);
                detail::live_reach_count(g, inst.seeds, cfg.base_seed, i, ws, base_stamp);
                if (edge_coin(cfg.base_seed, i, e.src, e.dst) < e.prob)
                    sums[w] += detail::extra_reach_count(g, e.dst, cfg.base_seed, i, ws,
                                                         base_stamp, base_stamp + 1);
            }
        });
    unsigned long long total = 0;
    for (auto s : sums) total += s;
    return static_cast<double>(total) / static_cast<double>(cfg.num_samples);
}

}  // namespace costima
