// Command-line front end: sigma estimation, the exact oracle, the solvers,
// instance generators, and the batch experiment harness.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <costima/costima.hpp>

namespace {

using namespace costima;

std::string hex64(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

InstanceFormat pick_format(const std::string& path, const std::string& flag) {
    if (flag == "json") return InstanceFormat::json;
    if (flag == "edgelist") return InstanceFormat::edgelist;
    return ends_with(path, ".json") ? InstanceFormat::json : InstanceFormat::edgelist;
}

// Loads an instance; for JSON files an explicit --budget replaces the stored
// one (edge lists take the budget directly, they have nowhere to store it).
ProblemInstance load_for_cli(const std::string& path, const std::string& format_flag,
                             std::optional<double> budget) {
    const auto format = pick_format(path, format_flag);
    ProblemInstance inst = load_instance(path, format, budget.value_or(0.0));
    if (budget && format == InstanceFormat::json) {
        inst.budget = *budget;
        inst.unit_cost = derive_unit_cost(inst);
        validate(inst);
    }
    return inst;
}

// Added-edge set for estimate/oracle: either a file of `src dst [prob]` lines
// or an inline list like "0:3,0:5". Probabilities default to the matching
// candidate's; every edge must be one of the instance's candidates.
std::vector<CandidateEdge> parse_added_edges(const std::string& arg,
                                             const ProblemInstance& inst) {
    std::vector<CandidateEdge> out;
    if (arg.empty()) return out;
    const auto index = candidate_index_map(inst);
    auto resolve = [&](NodeId src, NodeId dst, std::optional<double> prob,
                       const std::string& where) {
        const auto it = index.find(edge_key(src, dst));
        if (it == index.end() && !prob)
            throw Error(where + ": edge (" + std::to_string(src) + "," + std::to_string(dst) +
                        ") is not a candidate of this instance");
        CandidateEdge c;
        c.src = src;
        c.dst = dst;
        c.prob = prob ? *prob : inst.candidates[it->second].prob;
        if (it != index.end()) c.cost = inst.candidates[it->second].cost;
        out.push_back(c);
    };
    if (std::filesystem::exists(arg)) {
        detail::for_each_record(arg, [&](int ln, const std::vector<std::string>& f) {
            const std::string where = arg + ":" + std::to_string(ln);
            if (f.size() != 2 && f.size() != 3)
                throw Error(where + ": expected `src dst [prob]`");
            const auto src = detail::parse_u64(f[0], where);
            const auto dst = detail::parse_u64(f[1], where);
            std::optional<double> prob;
            if (f.size() == 3) prob = detail::parse_real(f[2], where);
            resolve(static_cast<NodeId>(src), static_cast<NodeId>(dst), prob, where);
        });
        return out;
    }
    std::string token;
    auto flush = [&]() {
        if (token.empty()) return;
        const auto colon = token.find(':');
        if (colon == std::string::npos)
            throw Error("inline edge '" + token + "' must look like src:dst");
        const auto src = detail::parse_u64(token.substr(0, colon), "--edges-added");
        const auto dst = detail::parse_u64(token.substr(colon + 1), "--edges-added");
        resolve(static_cast<NodeId>(src), static_cast<NodeId>(dst), std::nullopt,
                "--edges-added");
        token.clear();
    };
    for (char ch : arg) {
        if (ch == ',' || ch == ';' || ch == ' ')
            flush();
        else
            token += ch;
    }
    flush();
    return out;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty())
        std::cout << text;
    else
        detail::write_atomically(out_path, text);
}

struct CommonSigmaFlags {
    std::string instance;
    std::string format;
    std::optional<double> budget;
    std::uint64_t samples = 10000;
    std::uint64_t seed = 0;
    std::optional<double> lambda;
    std::optional<double> delta;
    bool no_parallel = false;
    std::string out;

    void attach(CLI::App* cmd, bool sampling) {
        cmd->add_option("--instance", instance, "instance file (.json or edge list)")
            ->required();
        cmd->add_option("--format", format, "instance format: json|edgelist (default: by extension)");
        cmd->add_option("--budget", budget, "budget (required for edge lists, overrides JSON)");
        if (sampling) {
            cmd->add_option("--samples", samples, "Monte Carlo sample count");
            cmd->add_option("--seed", seed, "base RNG seed");
            cmd->add_option("--lambda", lambda, "accuracy target; with --delta derives the sample count");
            cmd->add_option("--delta", delta, "failure probability for --lambda");
            cmd->add_flag("--no-parallel", no_parallel, "single sampling worker");
        }
        cmd->add_option("--out", out, "write the report here instead of stdout");
    }

    SamplingConfig sampling_config(NodeId n) const {
        SamplingConfig cfg;
        cfg.num_samples = samples;
        cfg.base_seed = seed;
        cfg.parallel = !no_parallel;
        if (lambda.has_value() != delta.has_value())
            throw Error("--lambda and --delta must be given together");
        if (lambda) {
            const auto required = required_samples(n, *lambda, *delta);
            if (required > 1000000000ULL)
                throw Error("required sample count " + std::to_string(required) +
                            " exceeds 1e9; pass --samples explicitly");
            cfg.num_samples = required;
            cfg.lambda = lambda;
            cfg.delta = delta;
        }
        return cfg;
    }
};

int run_cli(int argc, char** argv) {
    CLI::App app{
        "Influence maximization by edge augmentation: estimate or exactly compute expected "
        "spread, solve for the best candidate edges, generate instances, run experiment "
        "batches. COSTIMA_THREADS overrides the sampling worker count."};
    app.require_subcommand(1);
    int exit_code = 0;

    // estimate
    auto est_flags = std::make_shared<CommonSigmaFlags>();
    auto est_added = std::make_shared<std::string>();
    auto* est = app.add_subcommand("estimate", "Monte Carlo estimate of the expected spread");
    est_flags->attach(est, true);
    est->add_option("--edges-added", *est_added,
                    "candidate edges to add: a file of `src dst [prob]` lines or inline `0:3,0:5`");
    est->callback([est_flags, est_added] {
        const auto inst = load_for_cli(est_flags->instance, est_flags->format, est_flags->budget);
        const auto added = parse_added_edges(*est_added, inst);
        const auto cfg = est_flags->sampling_config(inst.n);
        const auto r = estimate_sigma(inst, added, cfg);
        std::string text = "{\n";
        text += "  \"edge_set_hash\": \"" + hex64(r.edge_set_hash) + "\",\n";
        text += "  \"rng_seed\": " + std::to_string(r.rng_seed) + ",\n";
        text += "  \"samples\": " + std::to_string(r.samples) + ",\n";
        text += "  \"value\": " + detail::fixed9(r.value) + ",\n";
        text += "  \"variance\": " + detail::fixed9(r.variance) + "\n}\n";
        emit(text, est_flags->out);
    });

    // oracle
    auto ora_flags = std::make_shared<CommonSigmaFlags>();
    auto ora_added = std::make_shared<std::string>();
    auto* ora = app.add_subcommand("oracle",
                                   "exact expected spread by outcome enumeration (tiny instances)");
    ora_flags->attach(ora, false);
    ora->add_option("--edges-added", *ora_added, "candidate edges to add, as in `estimate`");
    ora->callback([ora_flags, ora_added] {
        const auto inst = load_for_cli(ora_flags->instance, ora_flags->format, ora_flags->budget);
        const auto added = parse_added_edges(*ora_added, inst);
        const double value = exact_sigma(inst, added);
        std::string text = "{\n";
        text += "  \"edge_set_hash\": \"" + hex64(hash_edge_set(added)) + "\",\n";
        text += "  \"value\": " + detail::fixed9(value) + "\n}\n";
        emit(text, ora_flags->out);
    });

    // solve
    auto sol_flags = std::make_shared<CommonSigmaFlags>();
    struct SolveFlags {
        std::string algo;
        std::string sigma_mode = "estimate";
        int M = 3;
        std::uint64_t enum_cap = 1000000;
        bool stop_on_zero_gain = false;
        std::string solution_format;
    };
    auto solve_flags = std::make_shared<SolveFlags>();
    auto* solve = app.add_subcommand("solve", "pick candidate edges under the budget");
    sol_flags->attach(solve, true);
    solve
        ->add_option("--algo", solve_flags->algo,
                     "greedy | cost-greedy | enum-greedy | brute | baseline:<random|max_prob|"
                     "high_outdegree_target>")
        ->required();
    solve->add_option("--sigma", solve_flags->sigma_mode, "sigma evaluation: estimate | exact");
    solve->add_option("--M", solve_flags->M, "subset size for enum-greedy");
    solve->add_option("--enum-cap", solve_flags->enum_cap, "max enumerated subsets for enum-greedy");
    solve->add_flag("--stop-on-zero-gain", solve_flags->stop_on_zero_gain,
                    "stop the greedy loops once the best remaining gain is zero");
    solve->add_option("--solution-format", solve_flags->solution_format,
                      "json | csv (default: by --out extension, else json)");
    solve->callback([sol_flags, solve_flags] {
        const auto inst = load_for_cli(sol_flags->instance, sol_flags->format, sol_flags->budget);
        SolverConfig cfg;
        if (solve_flags->sigma_mode == "exact")
            cfg.sigma_mode = SigmaMode::exact;
        else if (solve_flags->sigma_mode == "estimate")
            cfg.sigma_mode = SigmaMode::estimate;
        else
            throw Error("unknown sigma mode: " + solve_flags->sigma_mode);
        cfg.sampling = sol_flags->sampling_config(inst.n);
        cfg.enum_size = solve_flags->M;
        cfg.enum_cap = solve_flags->enum_cap;
        cfg.stop_on_zero_gain = solve_flags->stop_on_zero_gain;

        Solution sol;
        const auto& algo = solve_flags->algo;
        if (algo == "greedy")
            sol = greedy_ima(inst, cfg);
        else if (algo == "cost-greedy")
            sol = cost_greedy(inst, cfg);
        else if (algo == "enum-greedy")
            sol = enum_greedy(inst, cfg);
        else if (algo == "brute")
            sol = brute_force_opt(inst);
        else if (algo.rfind("baseline:", 0) == 0)
            sol = baseline(inst, baseline_from_name(algo.substr(9)), cfg.sampling.base_seed, cfg);
        else
            throw Error("unknown algorithm: " + algo);

        auto format = SolutionFormat::json;
        if (solve_flags->solution_format == "csv" ||
            (solve_flags->solution_format.empty() && ends_with(sol_flags->out, ".csv")))
            format = SolutionFormat::csv;
        else if (!solve_flags->solution_format.empty() && solve_flags->solution_format != "json")
            throw Error("unknown solution format: " + solve_flags->solution_format);
        if (sol_flags->out.empty())
            std::cout << (format == SolutionFormat::json ? solution_to_json(sol)
                                                         : solution_to_csv(sol));
        else
            write_solution(sol, sol_flags->out, format);
    });

    // gen-msc
    struct GenMscFlags {
        std::uint64_t universe = 0;
        std::string sets;
        std::uint64_t k = 1;
        std::uint64_t extra_seeds = 0;
        std::string out;
    };
    auto msc_flags = std::make_shared<GenMscFlags>();
    auto* genmsc = app.add_subcommand(
        "gen-msc", "build the influence instance equivalent to a set-coverage instance");
    genmsc->add_option("--universe", msc_flags->universe, "universe size (required for random sets)");
    genmsc
        ->add_option("--sets", msc_flags->sets,
                     "sets file (one set per line, space-separated element ids) or "
                     "random:<num_sets>,<min_size>,<max_size>,<rng_seed>")
        ->required();
    genmsc->add_option("--k", msc_flags->k, "number of sets to pick (the budget)")->required();
    genmsc->add_option("--extra-seeds", msc_flags->extra_seeds, "append this many isolated seeds");
    genmsc->add_option("--out", msc_flags->out, "instance JSON path")->required();
    genmsc->callback([msc_flags] {
        MscInstance msc;
        if (msc_flags->sets.rfind("random:", 0) == 0) {
            if (msc_flags->universe < 1)
                throw Error("--universe is required with random sets");
            const auto body = msc_flags->sets.substr(7);
            std::vector<std::uint64_t> nums;
            std::string tok;
            for (char ch : body + ",") {
                if (ch == ',') {
                    nums.push_back(detail::parse_u64(tok, "--sets " + msc_flags->sets));
                    tok.clear();
                } else
                    tok += ch;
            }
            if (nums.size() != 4)
                throw Error("--sets random spec needs num_sets,min_size,max_size,rng_seed");
            msc = random_msc(static_cast<NodeId>(msc_flags->universe), nums[0], nums[1], nums[2],
                             msc_flags->k, nums[3]);
        } else {
            msc = load_msc(msc_flags->sets, msc_flags->k);
            if (msc_flags->universe > msc.universe_size)
                msc.universe_size = static_cast<NodeId>(msc_flags->universe);
        }
        const auto inst = msc_to_ima(msc, static_cast<NodeId>(msc_flags->extra_seeds));
        save_instance_json(inst, msc_flags->out);
        std::cout << "wrote " << msc_flags->out << ": n=" << inst.n
                  << " edges=" << inst.edges.size() << " candidates=" << inst.candidates.size()
                  << " budget=" << detail::fixed9(inst.budget) << "\n";
    });

    // gen-random
    struct GenRandomFlags {
        std::uint64_t n = 0;
        double density = 0.0;
        std::string prob = "0.5";
        std::uint64_t seeds = 1;
        std::string candidates = "all";
        std::string cand_prob = "0.5";
        std::string cost = "1";
        double budget = 1.0;
        std::uint64_t seed = 0;
        std::string out;
    };
    auto rng_flags = std::make_shared<GenRandomFlags>();
    auto* genrand = app.add_subcommand("gen-random", "generate a reproducible random instance");
    genrand->add_option("--n", rng_flags->n, "node count")->required();
    genrand->add_option("--density", rng_flags->density, "fraction of ordered node pairs with an edge")
        ->required();
    genrand->add_option("--prob", rng_flags->prob, "edge probability: const or uniform:lo,hi");
    genrand->add_option("--seeds", rng_flags->seeds, "seed node count");
    genrand->add_option("--candidates", rng_flags->candidates,
                        "candidate policy: all | sample:<count>");
    genrand->add_option("--cand-prob", rng_flags->cand_prob, "candidate probability distribution");
    genrand->add_option("--cost", rng_flags->cost, "candidate cost distribution");
    genrand->add_option("--budget", rng_flags->budget, "budget stored in the instance");
    genrand->add_option("--seed", rng_flags->seed, "generator RNG seed");
    genrand->add_option("--out", rng_flags->out, "instance JSON path")->required();
    genrand->callback([rng_flags] {
        RandomInstanceSpec spec;
        spec.n = static_cast<NodeId>(rng_flags->n);
        spec.density = rng_flags->density;
        spec.edge_prob = dist_from_string(rng_flags->prob);
        spec.num_seeds = static_cast<NodeId>(rng_flags->seeds);
        if (rng_flags->candidates == "all")
            spec.candidate_sample = 0;
        else if (rng_flags->candidates.rfind("sample:", 0) == 0)
            spec.candidate_sample =
                detail::parse_u64(rng_flags->candidates.substr(7), "--candidates");
        else
            throw Error("unknown candidate policy: " + rng_flags->candidates);
        spec.cand_prob = dist_from_string(rng_flags->cand_prob);
        spec.cost = dist_from_string(rng_flags->cost);
        spec.budget = rng_flags->budget;
        spec.rng_seed = rng_flags->seed;
        const auto inst = gen_random_instance(spec);
        save_instance_json(inst, rng_flags->out);
        std::cout << "wrote " << rng_flags->out << ": n=" << inst.n
                  << " edges=" << inst.edges.size() << " candidates=" << inst.candidates.size()
                  << " budget=" << detail::fixed9(inst.budget) << "\n";
    });

    // experiment
    struct ExperimentFlags {
        std::vector<std::string> instances;
        std::vector<std::string> algos;
        std::uint64_t reps = 1;
        std::uint64_t seed = 0;
        std::uint64_t samples = 10000;
        std::string sigma_mode = "estimate";
        int M = 3;
        bool stop_on_zero_gain = false;
        std::optional<double> budget;
        std::string out_dir;
        bool no_parallel = false;
    };
    auto exp_flags = std::make_shared<ExperimentFlags>();
    auto* exp = app.add_subcommand("experiment", "run an algorithm batch and tabulate results");
    exp->add_option("--instances", exp_flags->instances, "instance files")->required();
    exp->add_option("--algos", exp_flags->algos,
                    "algorithms: greedy cost-greedy enum-greedy brute baseline:<name>")
        ->required();
    exp->add_option("--reps", exp_flags->reps, "repetitions per (instance, algo)");
    exp->add_option("--seed", exp_flags->seed, "base seed; run seed = base + repetition");
    exp->add_option("--samples", exp_flags->samples, "Monte Carlo samples per estimate");
    exp->add_option("--sigma", exp_flags->sigma_mode, "sigma evaluation: estimate | exact");
    exp->add_option("--M", exp_flags->M, "subset size for enum-greedy");
    exp->add_option("--budget", exp_flags->budget, "override every instance's budget");
    exp->add_flag("--stop-on-zero-gain", exp_flags->stop_on_zero_gain,
                  "stop the greedy loops once the best remaining gain is zero");
    exp->add_flag("--no-parallel", exp_flags->no_parallel, "single sampling worker");
    exp->add_option("--out-dir", exp_flags->out_dir, "directory for results.csv/.json, timings.csv")
        ->required();
    exp->callback([exp_flags, &exit_code] {
        ExperimentSpec spec;
        spec.instances = exp_flags->instances;
        SolverConfig cfg;
        if (exp_flags->sigma_mode == "exact")
            cfg.sigma_mode = SigmaMode::exact;
        else if (exp_flags->sigma_mode == "estimate")
            cfg.sigma_mode = SigmaMode::estimate;
        else
            throw Error("unknown sigma mode: " + exp_flags->sigma_mode);
        cfg.sampling.num_samples = exp_flags->samples;
        cfg.sampling.parallel = !exp_flags->no_parallel;
        cfg.enum_size = exp_flags->M;
        cfg.stop_on_zero_gain = exp_flags->stop_on_zero_gain;
        for (const auto& name : exp_flags->algos) spec.algos.push_back({name, cfg});
        spec.repetitions = exp_flags->reps;
        spec.base_seed = exp_flags->seed;
        spec.budget_override = exp_flags->budget;
        spec.out_dir = exp_flags->out_dir;
        std::filesystem::create_directories(spec.out_dir);
        const auto records = run_experiment(spec);
        const auto failures = write_experiment_outputs(records, spec.out_dir);
        std::cout << records.size() << " runs, " << failures << " failed; results in "
                  << spec.out_dir << "\n";
        if (failures > 0) {
            for (const auto& r : records)
                if (r.failed)
                    std::cerr << "failed: " << r.instance << " " << r.algo << " rep "
                              << r.repetition << ": " << r.error << "\n";
            exit_code = 1;
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}
