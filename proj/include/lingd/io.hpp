#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lingd/dataset.hpp"
#include "lingd/errors.hpp"
#include "lingd/graph.hpp"
#include "lingd/isa_ling.hpp"
#include "lingd/sem.hpp"

namespace lingd {

using json = nlohmann::json;

// {"d": n, "edges": [{"src": i, "dst": j, "w": x}, ...], "names": [...]}
inline json graph_to_json(const WeightedDigraph& g,
                          const std::vector<std::string>& names = {}) {
    json edges = json::array();
    for (Index j = 0; j < g.d(); ++j)
        for (Index i = 0; i < g.d(); ++i)
            if (g.B(j, i) != 0.0)
                edges.push_back({{"src", i}, {"dst", j}, {"w", g.B(j, i)}});
    json out = {{"d", g.d()}, {"edges", edges}};
    if (!names.empty()) out["names"] = names;
    return out;
}

inline WeightedDigraph graph_from_json(const json& j,
                                       std::vector<std::string>* names = nullptr) {
    if (!j.is_object() || !j.contains("d") || !j.contains("edges"))
        throw Error("graph json: need an object with 'd' and 'edges'");
    const Index d = j.at("d").get<Index>();
    if (d < 1) throw Error("graph json: d must be positive");
    WeightedDigraph g(d);
    for (const auto& e : j.at("edges")) {
        const int src = e.at("src").get<int>();
        const int dst = e.at("dst").get<int>();
        if (src < 0 || src >= d || dst < 0 || dst >= d)
            throw Error("graph json: edge endpoint out of range");
        g.add_edge(src, dst, e.at("w").get<double>());
    }
    if (names) {
        names->clear();
        if (j.contains("names")) {
            *names = j.at("names").get<std::vector<std::string>>();
            if (static_cast<Index>(names->size()) != d)
                throw Error("graph json: names length mismatch");
        }
    }
    return g;
}

inline json model_to_json(const LocalModel& m) {
    json edges = json::array();
    for (const auto& e : m.edges)
        edges.push_back({{"src", e.src}, {"dst", e.dst}, {"w", e.w}});
    return {{"edges", edges}};
}

inline LocalModel model_from_json(const json& j) {
    LocalModel m;
    for (const auto& e : j.at("edges"))
        m.edges.push_back({e.at("src").get<int>(), e.at("dst").get<int>(),
                           e.at("w").get<double>()});
    m.canonicalize();
    return m;
}

// {"target": t, "models": [{"edges": [...], "stable": b}, ...], "seed": s}
inline json model_class_to_json(const LocalModelClass& cls,
                                std::uint64_t seed) {
    json models = json::array();
    for (const auto& member : cls.members) {
        json m = model_to_json(member.model);
        m["stable"] = member.stable;
        models.push_back(std::move(m));
    }
    return {{"target", cls.target}, {"models", models}, {"seed", seed}};
}

inline LocalModelClass model_class_from_json(const json& j) {
    if (!j.is_object() || !j.contains("target") || !j.contains("models"))
        throw Error("model json: need an object with 'target' and 'models'");
    LocalModelClass cls;
    cls.target = j.at("target").get<int>();
    for (const auto& m : j.at("models")) {
        LocalMember member;
        member.model = model_from_json(m);
        member.stable = m.value("stable", false);
        cls.members.push_back(std::move(member));
    }
    return cls;
}

// Flat key = value configuration; '#' starts a comment.
inline std::map<std::string, std::string> parse_config(std::istream& is) {
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw Error("config line " + std::to_string(lineno) +
                        ": expected key = value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) throw Error("config line " + std::to_string(lineno) +
                                     ": empty key");
        out[key] = value;
    }
    return out;
}

inline std::map<std::string, std::string> parse_config_file(
    const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open '" + path + "'");
    return parse_config(is);
}

namespace detail {

struct ConfigReader {
    const std::map<std::string, std::string>& kv;

    bool has(const std::string& key) const { return kv.count(key) > 0; }

    std::string str(const std::string& key, const std::string& fallback) const {
        auto it = kv.find(key);
        return it == kv.end() ? fallback : it->second;
    }

    double num(const std::string& key, double fallback) const {
        auto it = kv.find(key);
        if (it == kv.end()) return fallback;
        try {
            std::size_t used = 0;
            const double v = std::stod(it->second, &used);
            if (used != it->second.size()) throw Error("");
            return v;
        } catch (...) {
            throw Error("config: bad number for '" + key + "'");
        }
    }

    long integer(const std::string& key, long fallback) const {
        const double v = num(key, static_cast<double>(fallback));
        const long n = static_cast<long>(v);
        if (static_cast<double>(n) != v)
            throw Error("config: expected integer for '" + key + "'");
        return n;
    }

    bool flag(const std::string& key, bool fallback) const {
        auto it = kv.find(key);
        if (it == kv.end()) return fallback;
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw Error("config: expected true/false for '" + key + "'");
    }

    std::vector<long> integers(const std::string& key,
                               std::vector<long> fallback) const {
        auto it = kv.find(key);
        if (it == kv.end()) return fallback;
        std::vector<long> out;
        std::stringstream ss(it->second);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                out.push_back(std::stol(cell));
            } catch (...) {
                throw Error("config: bad integer list for '" + key + "'");
            }
        }
        if (out.empty()) throw Error("config: empty list for '" + key + "'");
        return out;
    }
};

}  // namespace detail

inline SemSpec sem_spec_from_config(
    const std::map<std::string, std::string>& kv) {
    detail::ConfigReader r{kv};
    SemSpec spec;
    spec.d = static_cast<int>(r.integer("d", spec.d));
    const std::string kind = r.str("graph", "erdos_renyi_dag");
    if (kind == "erdos_renyi_dag")
        spec.graph_kind = GraphKind::erdos_renyi_dag;
    else if (kind == "disjoint_cycle_dcg")
        spec.graph_kind = GraphKind::disjoint_cycle_dcg;
    else
        throw Error("config: unknown graph kind '" + kind + "'");
    spec.expected_degree = r.num("expected_degree", spec.expected_degree);
    spec.weight_low = r.num("weight_low", spec.weight_low);
    spec.weight_high = r.num("weight_high", spec.weight_high);
    spec.noise_power = static_cast<int>(r.integer("noise_power", spec.noise_power));
    spec.noise_scale_low = r.num("noise_scale_low", spec.noise_scale_low);
    spec.noise_scale_high = r.num("noise_scale_high", spec.noise_scale_high);
    spec.seed = static_cast<std::uint64_t>(r.integer("seed", 0));
    spec.max_degree = static_cast<int>(r.integer("max_degree", spec.max_degree));
    spec.num_cycles = static_cast<int>(r.integer("cycles", spec.num_cycles));
    spec.cycle_len_min =
        static_cast<int>(r.integer("cycle_len_min", spec.cycle_len_min));
    spec.cycle_len_max =
        static_cast<int>(r.integer("cycle_len_max", spec.cycle_len_max));
    spec.rejection_limit =
        static_cast<int>(r.integer("rejection_limit", spec.rejection_limit));
    spec.validate();
    return spec;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    os << text;
}

inline std::string read_text(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

inline json read_json_file(const std::string& path) {
    const std::string text = read_text(path);
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw Error("invalid json in '" + path + "'");
    return j;
}

}  // namespace lingd
