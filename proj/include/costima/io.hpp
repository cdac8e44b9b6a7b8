#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "costima/graph.hpp"

namespace costima {

enum class InstanceFormat { edgelist, json };

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Strips a trailing '#' comment and surrounding whitespace.
inline std::string_view strip_line(std::string_view line) {
    if (auto pos = line.find('#'); pos != std::string_view::npos) line = line.substr(0, pos);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
        line.remove_suffix(1);
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t'))
        line.remove_prefix(1);
    return line;
}

// Whitespace-separated fields of one non-comment line.
inline std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> fields;
    std::istringstream ss{std::string(line)};
    std::string tok;
    while (ss >> tok) fields.push_back(tok);
    return fields;
}

inline std::uint64_t parse_u64(const std::string& tok, const std::string& where) {
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
        v = std::stoull(tok, &used);
    } catch (const std::exception&) {
        throw Error(where + ": expected integer, got '" + tok + "'");
    }
    if (used != tok.size()) throw Error(where + ": expected integer, got '" + tok + "'");
    return v;
}

inline double parse_real(const std::string& tok, const std::string& where) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(tok, &used);
    } catch (const std::exception&) {
        throw Error(where + ": expected real, got '" + tok + "'");
    }
    if (used != tok.size()) throw Error(where + ": expected real, got '" + tok + "'");
    return v;
}

// For each non-empty line calls fn(line_number, fields).
template <typename Fn>
void for_each_record(const std::string& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        auto line = strip_line(raw);
        if (line.empty()) continue;
        fn(line_no, split_fields(line));
    }
}

inline void write_atomically(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp);
        out << content;
        if (!out) throw Error("write failed for " + tmp);
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw Error("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

inline std::string fixed9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9f", v);
    return buf;
}

inline int line_of_byte_offset(const std::string& text, std::size_t offset) {
    int line = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

}  // namespace detail

// Edge-list family: edges file with `src dst prob` lines, seeds file with one
// id per line, candidates file with `src dst prob cost` lines. '#' starts a
// comment anywhere. Node count is inferred as 1 + the largest id seen.
inline ProblemInstance load_edgelist(const std::string& edges_path,
                                     const std::string& seeds_path,
                                     const std::string& candidates_path, double budget) {
    ProblemInstance inst;
    inst.budget = budget;
    NodeId max_id = 0;
    bool any_node = false;
    auto note = [&](std::uint64_t id, const std::string& where) {
        if (id > 0xffffffffULL) throw Error(where + ": node id too large");
        max_id = std::max(max_id, static_cast<NodeId>(id));
        any_node = true;
        return static_cast<NodeId>(id);
    };

    detail::for_each_record(edges_path, [&](int ln, const std::vector<std::string>& f) {
        const std::string where = edges_path + ":" + std::to_string(ln);
        if (f.size() != 3) throw Error(where + ": expected `src dst prob`");
        Edge e;
        e.src = note(detail::parse_u64(f[0], where), where);
        e.dst = note(detail::parse_u64(f[1], where), where);
        e.prob = detail::parse_real(f[2], where);
        inst.edges.push_back(e);
    });
    detail::for_each_record(seeds_path, [&](int ln, const std::vector<std::string>& f) {
        const std::string where = seeds_path + ":" + std::to_string(ln);
        if (f.size() != 1) throw Error(where + ": expected one node id");
        inst.seeds.push_back(note(detail::parse_u64(f[0], where), where));
    });
    if (!candidates_path.empty()) {
        detail::for_each_record(candidates_path, [&](int ln, const std::vector<std::string>& f) {
            const std::string where = candidates_path + ":" + std::to_string(ln);
            if (f.size() != 4) throw Error(where + ": expected `src dst prob cost`");
            CandidateEdge c;
            c.src = note(detail::parse_u64(f[0], where), where);
            c.dst = note(detail::parse_u64(f[1], where), where);
            c.prob = detail::parse_real(f[2], where);
            c.cost = detail::parse_real(f[3], where);
            inst.candidates.push_back(c);
        });
    }
    inst.n = any_node ? max_id + 1 : 0;
    std::sort(inst.seeds.begin(), inst.seeds.end());
    inst.seeds.erase(std::unique(inst.seeds.begin(), inst.seeds.end()), inst.seeds.end());
    inst.unit_cost = derive_unit_cost(inst);
    validate(inst);
    return inst;
}

inline ProblemInstance load_instance_json(const std::string& path) {
    const std::string text = detail::read_file(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(path + ":" + std::to_string(detail::line_of_byte_offset(text, e.byte)) +
                    ": " + e.what());
    }
    try {
        ProblemInstance inst;
        inst.n = doc.at("n").get<NodeId>();
        for (const auto& row : doc.at("edges"))
            inst.edges.push_back({row.at(0).get<NodeId>(), row.at(1).get<NodeId>(),
                                  row.at(2).get<double>()});
        for (const auto& s : doc.at("seeds")) inst.seeds.push_back(s.get<NodeId>());
        for (const auto& row : doc.at("candidates"))
            inst.candidates.push_back({row.at(0).get<NodeId>(), row.at(1).get<NodeId>(),
                                       row.at(2).get<double>(), row.at(3).get<double>()});
        inst.budget = doc.at("budget").get<double>();
        std::sort(inst.seeds.begin(), inst.seeds.end());
        inst.seeds.erase(std::unique(inst.seeds.begin(), inst.seeds.end()), inst.seeds.end());
        inst.unit_cost = derive_unit_cost(inst);
        validate(inst);
        return inst;
    } catch (const nlohmann::json::exception& e) {
        throw Error(path + ": " + e.what());
    }
}

// For the edge-list format `path` names the edges file; the seeds and
// candidates files are `path + ".seeds"` and `path + ".cands"` (the latter
// optional), budget defaults to 0 (it normally arrives on the command line).
inline ProblemInstance load_instance(const std::string& path, InstanceFormat format,
                                     double budget = 0.0) {
    if (format == InstanceFormat::json) return load_instance_json(path);
    std::string cands = path + ".cands";
    if (!std::filesystem::exists(cands)) cands.clear();
    return load_edgelist(path, path + ".seeds", cands, budget);
}

// Doubles are emitted in shortest round-trip form so a save/load cycle
// reproduces the instance field-by-field.
inline void save_instance_json(const ProblemInstance& inst, const std::string& path) {
    nlohmann::json doc;
    doc["n"] = inst.n;
    auto& edges = doc["edges"] = nlohmann::json::array();
    for (const auto& e : inst.edges) edges.push_back({e.src, e.dst, e.prob});
    doc["seeds"] = inst.seeds;
    auto& cands = doc["candidates"] = nlohmann::json::array();
    for (const auto& c : inst.candidates) cands.push_back({c.src, c.dst, c.prob, c.cost});
    doc["budget"] = inst.budget;
    detail::write_atomically(path, doc.dump(2) + "\n");
}

enum class SolutionFormat { json, csv };

// Bit-stable: keys sorted, reals at a fixed 9 decimal digits.
inline std::string solution_to_json(const Solution& sol) {
    using detail::fixed9;
    std::string out = "{\n  \"chosen\": [";
    for (std::size_t i = 0; i < sol.chosen.size(); ++i) {
        const auto& c = sol.chosen[i];
        out += (i ? ",\n    " : "\n    ");
        out += "{\"cost\": " + fixed9(c.cost) + ", \"dst\": " + std::to_string(c.dst) +
               ", \"prob\": " + fixed9(c.prob) + ", \"src\": " + std::to_string(c.src) + "}";
    }
    out += sol.chosen.empty() ? "],\n" : "\n  ],\n";
    out += "  \"sigma\": " + fixed9(sol.sigma) + ",\n";
    out += "  \"total_cost\": " + fixed9(sol.total_cost) + ",\n";
    out += "  \"trace\": [";
    for (std::size_t i = 0; i < sol.trace.size(); ++i) {
        const auto& t = sol.trace[i];
        out += (i ? ",\n    " : "\n    ");
        out += "{\"accepted\": " + std::string(t.accepted ? "true" : "false") +
               ", \"cost\": " + fixed9(t.cost) + ", \"dst\": " + std::to_string(t.dst) +
               ", \"marginal\": " + fixed9(t.marginal) + ", \"prob\": " + fixed9(t.prob) +
               ", \"reason\": \"" + t.reason + "\"" + ", \"sigma\": " + fixed9(t.sigma) +
               ", \"src\": " + std::to_string(t.src) + ", \"step\": " + std::to_string(t.step) +
               "}";
    }
    out += sol.trace.empty() ? "]\n" : "\n  ]\n";
    out += "}\n";
    return out;
}

inline std::string solution_to_csv(const Solution& sol) {
    using detail::fixed9;
    std::string out;
    out += "# sigma " + fixed9(sol.sigma) + "\n";
    out += "# total_cost " + fixed9(sol.total_cost) + "\n";
    out += "step,src,dst,prob,cost,marginal,sigma,accepted,reason\n";
    for (const auto& t : sol.trace) {
        out += std::to_string(t.step) + "," + std::to_string(t.src) + "," +
               std::to_string(t.dst) + "," + fixed9(t.prob) + "," + fixed9(t.cost) + "," +
               fixed9(t.marginal) + "," + fixed9(t.sigma) + "," +
               (t.accepted ? "accepted" : "rejected") + "," + t.reason + "\n";
    }
    return out;
}

inline void write_solution(const Solution& sol, const std::string& path,
                           SolutionFormat format) {
    detail::write_atomically(
        path, format == SolutionFormat::json ? solution_to_json(sol) : solution_to_csv(sol));
}

}  // namespace costima
