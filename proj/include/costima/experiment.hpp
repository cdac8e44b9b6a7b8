#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "costima/graph.hpp"
#include "costima/io.hpp"
#include "costima/oracle.hpp"
#include "costima/rng.hpp"
#include "costima/solvers.hpp"

namespace costima {

// Value distribution on [0,1]: a constant (consumes no randomness) or uniform
// on [lo, hi).
struct Dist {
    enum class Kind { constant, uniform };
    Kind kind = Kind::constant;
    double lo = 0.0;
    double hi = 0.0;

    static Dist constant(double v) { return {Kind::constant, v, v}; }
    static Dist uniform(double lo, double hi) { return {Kind::uniform, lo, hi}; }

    double sample(SplitMix64& rng) const {
        if (kind == Kind::constant) return lo;
        return rng.next_real(lo, hi);
    }
};

// "0.5" for a constant, "uniform:0.1,0.9" for a range.
inline Dist dist_from_string(const std::string& text) {
    if (text.rfind("uniform:", 0) == 0) {
        const auto body = text.substr(8);
        const auto comma = body.find(',');
        if (comma == std::string::npos)
            throw Error("distribution '" + text + "' needs two comma-separated bounds");
        const double lo = detail::parse_real(body.substr(0, comma), "distribution " + text);
        const double hi = detail::parse_real(body.substr(comma + 1), "distribution " + text);
        if (!(lo <= hi)) throw Error("distribution '" + text + "' has lo > hi");
        return Dist::uniform(lo, hi);
    }
    return Dist::constant(detail::parse_real(text, "distribution " + text));
}

inline void check_unit_interval(const Dist& d, const std::string& what) {
    if (!(d.lo >= 0.0 && d.hi <= 1.0 && d.lo <= d.hi))
        throw Error(what + " distribution must lie within [0,1]");
}

struct RandomInstanceSpec {
    NodeId n = 0;
    double density = 0.0;  // expected fraction of the n(n-1) ordered pairs
    Dist edge_prob = Dist::constant(0.5);
    NodeId num_seeds = 1;
    std::uint64_t candidate_sample = 0;  // 0 keeps every eligible pair
    Dist cand_prob = Dist::constant(0.5);
    Dist cost = Dist::constant(1.0);
    double budget = 1.0;
    std::uint64_t rng_seed = 0;
};

namespace detail {

// Distinct ordered pairs (u,v), u != v, as sorted (src,dst) pairs. Below the
// pair-count threshold every pair gets an independent Bernoulli(density)
// draw; above it, exactly round(density * n(n-1)) distinct pairs are sampled,
// which keeps generation linear in the edge count at any scale.
inline std::vector<std::pair<NodeId, NodeId>> sample_pairs(NodeId n, double density,
                                                           SplitMix64& rng) {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    const std::uint64_t all = static_cast<std::uint64_t>(n) * (n - 1);
    if (all <= (1ULL << 21)) {
        for (NodeId u = 0; u < n; ++u)
            for (NodeId v = 0; v < n; ++v)
                if (u != v && rng.next_unit() < density) pairs.emplace_back(u, v);
        return pairs;
    }
    const auto target = static_cast<std::uint64_t>(std::llround(density * static_cast<double>(all)));
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(target * 2);
    while (pairs.size() < target) {
        const NodeId u = static_cast<NodeId>(rng.next_below(n));
        NodeId v = static_cast<NodeId>(rng.next_below(n - 1));
        if (v >= u) ++v;
        if (seen.insert(pack_pair(u, v)).second) pairs.emplace_back(u, v);
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

}  // namespace detail

// Reproducible random instance: same spec, same bytes. Draw order is fixed
// (edges, then probabilities in edge order, then seeds, then candidates, then
// candidate probabilities and costs in candidate order), so downstream spec
// fields never perturb earlier choices.
inline ProblemInstance gen_random_instance(const RandomInstanceSpec& spec) {
    if (spec.n < 1) throw Error("n must be >= 1");
    if (!(spec.density >= 0.0 && spec.density <= 1.0)) throw Error("density must be in [0,1]");
    if (spec.num_seeds < 1 || spec.num_seeds > spec.n)
        throw Error("seed count must be in [1, n]");
    check_unit_interval(spec.edge_prob, "edge probability");
    check_unit_interval(spec.cand_prob, "candidate probability");
    check_unit_interval(spec.cost, "cost");
    if (!(spec.budget >= 0.0)) throw Error("budget must be >= 0");

    SplitMix64 rng(spec.rng_seed);
    ProblemInstance inst;
    inst.n = spec.n;
    inst.budget = spec.budget;

    auto pairs = spec.n > 1 ? detail::sample_pairs(spec.n, spec.density, rng)
                            : std::vector<std::pair<NodeId, NodeId>>{};
    inst.edges.reserve(pairs.size());
    for (const auto& [u, v] : pairs) inst.edges.push_back({u, v, 0.0});
    for (auto& e : inst.edges) e.prob = spec.edge_prob.sample(rng);

    std::vector<NodeId> perm(spec.n);
    for (NodeId v = 0; v < spec.n; ++v) perm[v] = v;
    for (NodeId i = 0; i < spec.num_seeds; ++i) {
        const auto pick = i + static_cast<NodeId>(rng.next_below(spec.n - i));
        std::swap(perm[i], perm[pick]);
    }
    inst.seeds.assign(perm.begin(), perm.begin() + spec.num_seeds);
    std::sort(inst.seeds.begin(), inst.seeds.end());

    // Eligible candidate pairs in lexicographic order: seed sources only, no
    // self-loops, no duplicates of existing edges.
    const auto existing = edge_key_set(inst);
    std::vector<std::pair<NodeId, NodeId>> eligible;
    for (NodeId a : inst.seeds)
        for (NodeId v = 0; v < spec.n; ++v)
            if (v != a && !existing.count(edge_key(a, v))) eligible.emplace_back(a, v);
    if (spec.candidate_sample > 0 && spec.candidate_sample < eligible.size()) {
        std::vector<std::uint64_t> idx(eligible.size());
        for (std::uint64_t i = 0; i < idx.size(); ++i) idx[i] = i;
        for (std::uint64_t i = 0; i < spec.candidate_sample; ++i) {
            const auto pick = i + rng.next_below(idx.size() - i);
            std::swap(idx[i], idx[pick]);
        }
        idx.resize(spec.candidate_sample);
        std::sort(idx.begin(), idx.end());
        std::vector<std::pair<NodeId, NodeId>> sampled;
        sampled.reserve(idx.size());
        for (auto i : idx) sampled.push_back(eligible[i]);
        eligible = std::move(sampled);
    }
    inst.candidates.reserve(eligible.size());
    for (const auto& [a, v] : eligible) inst.candidates.push_back({a, v, 0.0, 0.0});
    for (auto& c : inst.candidates) {
        c.prob = spec.cand_prob.sample(rng);
        c.cost = spec.cost.sample(rng);
    }
    inst.unit_cost = derive_unit_cost(inst);
    validate(inst);
    return inst;
}

struct ExperimentAlgo {
    std::string name;  // greedy | cost-greedy | enum-greedy | brute | baseline:<strategy>
    SolverConfig cfg;
};

struct ExperimentSpec {
    std::vector<std::string> instances;  // .json instance files, or edge lists
    std::vector<ExperimentAlgo> algos;
    std::uint64_t repetitions = 1;
    std::string out_dir;
    std::uint64_t base_seed = 0;
    std::optional<double> budget_override;
};

struct ResultRecord {
    std::string instance;
    std::string algo;
    std::uint64_t repetition = 0;
    double budget = 0.0;
    double sigma = 0.0;
    double total_cost = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t samples = 0;
    double wall_ms = 0.0;  // kept out of the deterministic result files
    bool failed = false;
    std::string error;
};

namespace detail {

inline std::string path_stem(const std::string& path) {
    const auto slash = path.find_last_of('/');
    const auto base = slash == std::string::npos ? path : path.substr(slash + 1);
    const auto dot = base.find_last_of('.');
    return dot == std::string::npos || dot == 0 ? base : base.substr(0, dot);
}

inline Solution run_algo(const ProblemInstance& inst, const ExperimentAlgo& algo,
                         std::uint64_t run_seed) {
    SolverConfig cfg = algo.cfg;
    cfg.sampling.base_seed = run_seed;
    if (algo.name == "greedy") return greedy_ima(inst, cfg);
    if (algo.name == "cost-greedy") return cost_greedy(inst, cfg);
    if (algo.name == "enum-greedy") return enum_greedy(inst, cfg);
    if (algo.name == "brute") return brute_force_opt(inst);
    if (algo.name.rfind("baseline:", 0) == 0)
        return baseline(inst, baseline_from_name(algo.name.substr(9)), run_seed, cfg);
    throw Error("unknown algorithm: " + algo.name);
}

inline void check_algo_name(const std::string& name) {
    if (name == "greedy" || name == "cost-greedy" || name == "enum-greedy" || name == "brute")
        return;
    if (name.rfind("baseline:", 0) == 0) {
        baseline_from_name(name.substr(9));
        return;
    }
    throw Error("unknown algorithm: " + name);
}

}  // namespace detail

// Runs every (instance, algo, repetition) combination with seed
// base_seed + repetition. Failures become records with an error message
// instead of aborting the batch.
inline std::vector<ResultRecord> run_experiment(const ExperimentSpec& spec) {
    if (spec.repetitions < 1) throw Error("repetitions must be >= 1");
    if (spec.instances.empty()) throw Error("no instances given");
    if (spec.algos.empty()) throw Error("no algorithms given");
    for (const auto& a : spec.algos) detail::check_algo_name(a.name);

    std::vector<ResultRecord> records;
    for (const auto& path : spec.instances) {
        ProblemInstance inst;
        std::string load_error;
        try {
            const auto format = path.size() >= 5 && path.rfind(".json") == path.size() - 5
                                    ? InstanceFormat::json
                                    : InstanceFormat::edgelist;
            inst = load_instance(path, format,
                                 spec.budget_override.value_or(0.0));
            if (spec.budget_override) {
                inst.budget = *spec.budget_override;
                inst.unit_cost = derive_unit_cost(inst);
                validate(inst);
            }
        } catch (const std::exception& ex) {
            load_error = ex.what();
        }
        for (const auto& algo : spec.algos) {
            for (std::uint64_t rep = 0; rep < spec.repetitions; ++rep) {
                ResultRecord rec;
                rec.instance = detail::path_stem(path);
                rec.algo = algo.name;
                rec.repetition = rep;
                rec.seed = spec.base_seed + rep;
                rec.samples =
                    algo.cfg.sigma_mode == SigmaMode::estimate && algo.name != "brute"
                        ? algo.cfg.sampling.num_samples
                        : 0;
                if (!load_error.empty()) {
                    rec.failed = true;
                    rec.error = load_error;
                    records.push_back(std::move(rec));
                    continue;
                }
                rec.budget = inst.budget;
                const auto start = std::chrono::steady_clock::now();
                try {
                    const Solution sol = detail::run_algo(inst, algo, rec.seed);
                    rec.sigma = sol.sigma;
                    rec.total_cost = sol.total_cost;
                } catch (const std::exception& ex) {
                    rec.failed = true;
                    rec.error = ex.what();
                }
                rec.wall_ms = std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - start)
                                  .count();
                records.push_back(std::move(rec));
            }
        }
    }
    return records;
}

// results.csv and results.json hold only run-deterministic fields; wall-clock
// times go to timings.csv so reruns of the same spec produce byte-identical
// result files.
inline std::string experiment_results_csv(const std::vector<ResultRecord>& records) {
    std::string out = "instance,algo,repetition,budget,sigma,total_cost,seed,samples,status\n";
    for (const auto& r : records) {
        out += r.instance + "," + r.algo + "," + std::to_string(r.repetition) + ",";
        out += detail::fixed9(r.budget) + ",";
        if (r.failed)
            out += ",,";
        else
            out += detail::fixed9(r.sigma) + "," + detail::fixed9(r.total_cost) + ",";
        out += std::to_string(r.seed) + "," + std::to_string(r.samples) + ",";
        out += r.failed ? "error" : "ok";
        out += "\n";
    }
    return out;
}

inline std::string experiment_results_json(const std::vector<ResultRecord>& records) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : records) {
        nlohmann::json row;
        row["instance"] = r.instance;
        row["algo"] = r.algo;
        row["repetition"] = r.repetition;
        row["budget"] = r.budget;
        row["seed"] = r.seed;
        row["samples"] = r.samples;
        if (r.failed) {
            row["status"] = "error";
            row["error"] = r.error;
        } else {
            row["status"] = "ok";
            row["sigma"] = r.sigma;
            row["total_cost"] = r.total_cost;
        }
        arr.push_back(std::move(row));
    }
    return arr.dump(2) + "\n";
}

inline std::string experiment_timings_csv(const std::vector<ResultRecord>& records) {
    std::string out = "instance,algo,repetition,wall_ms\n";
    char buf[64];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf, "%.3f", r.wall_ms);
        out += r.instance + "," + r.algo + "," + std::to_string(r.repetition) + "," + buf + "\n";
    }
    return out;
}

// Returns the number of failed records.
inline std::size_t write_experiment_outputs(const std::vector<ResultRecord>& records,
                                            const std::string& out_dir) {
    detail::write_atomically(out_dir + "/results.csv", experiment_results_csv(records));
    detail::write_atomically(out_dir + "/results.json", experiment_results_json(records));
    detail::write_atomically(out_dir + "/timings.csv", experiment_timings_csv(records));
    std::size_t failures = 0;
    for (const auto& r : records) failures += r.failed ? 1 : 0;
    return failures;
}

}  // namespace costima
