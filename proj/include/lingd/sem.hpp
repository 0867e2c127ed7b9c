#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lingd/dataset.hpp"
#include "lingd/errors.hpp"
#include "lingd/graph.hpp"
#include "lingd/rng.hpp"

namespace lingd {

enum class GraphKind { erdos_renyi_dag, disjoint_cycle_dcg };

// Generation protocol: random graph topology, signed uniform weights, and
// odd-power uniform noise (heavy-tailed, hence non-Gaussian).
struct SemSpec {
    int d = 10;
    GraphKind graph_kind = GraphKind::erdos_renyi_dag;
    double expected_degree = 3.0;
    double weight_low = 0.5;
    double weight_high = 0.9;
    int noise_power = 5;
    double noise_scale_low = 0.75;
    double noise_scale_high = 1.25;
    std::uint64_t seed = 0;

    // disjoint_cycle_dcg extras
    int max_degree = 4;
    int num_cycles = 2;
    int cycle_len_min = 2;
    int cycle_len_max = 3;
    int rejection_limit = 10000;

    void validate() const {
        if (d < 1) throw Error("sem: d must be positive");
        if (!(0.0 < weight_low && weight_low < weight_high))
            throw Error("sem: need 0 < weight_low < weight_high");
        if (noise_power < 1 || noise_power % 2 == 0)
            throw Error("sem: noise_power must be odd and >= 1");
        if (!(0.0 < noise_scale_low && noise_scale_low <= noise_scale_high))
            throw Error("sem: bad noise scale band");
        if (graph_kind == GraphKind::disjoint_cycle_dcg) {
            if (num_cycles < 0) throw Error("sem: num_cycles < 0");
            if (cycle_len_min < 2 || cycle_len_max < cycle_len_min)
                throw Error("sem: bad cycle length band");
            if (num_cycles * cycle_len_max > d)
                throw Error("sem: cycles do not fit in d vertices");
            if (max_degree < 2) throw Error("sem: max_degree < 2");
        }
    }
};

namespace detail {
// Stream tags; one child stream per sampled object.
inline constexpr std::uint64_t kGraphStream = 1;
inline constexpr std::uint64_t kNoiseStream = 2;
}  // namespace detail

// Erdos-Renyi DAG: edges oriented along a random vertex ordering, each pair
// wired with probability expected_degree / (d - 1).
inline WeightedDigraph random_dag(const SemSpec& spec) {
    spec.validate();
    if (spec.graph_kind != GraphKind::erdos_renyi_dag)
        throw Error("random_dag: spec.graph_kind mismatch");
    Rng rng = Rng(spec.seed).child(detail::kGraphStream);
    const int d = spec.d;
    const double p =
        d > 1 ? std::min(1.0, spec.expected_degree / (d - 1)) : 0.0;

    IndexList order(d);
    for (int i = 0; i < d; ++i) order[i] = i;
    rng.shuffle(order);

    WeightedDigraph g(d);
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b)
            if (rng.uniform() < p)
                g.add_edge(order[a], order[b],
                           rng.signed_uniform(spec.weight_low, spec.weight_high));
    return g;
}

// Stable directed cyclic graph with vertex-disjoint cycles: a DAG backbone
// over "units" (each inserted cycle is one unit, every other vertex its own),
// so the only cycles are the inserted ones. Resampled until stable.
inline WeightedDigraph random_stable_dcg(const SemSpec& spec) {
    spec.validate();
    if (spec.graph_kind != GraphKind::disjoint_cycle_dcg)
        throw Error("random_stable_dcg: spec.graph_kind mismatch");
    const int d = spec.d;
    const double p =
        d > 1 ? std::min(1.0, spec.expected_degree / (d - 1)) : 0.0;
    const Rng base = Rng(spec.seed).child(detail::kGraphStream);

    for (int attempt = 0; attempt < spec.rejection_limit; ++attempt) {
        Rng rng = base.child(static_cast<std::uint64_t>(attempt));

        IndexList verts(d);
        for (int i = 0; i < d; ++i) verts[i] = i;
        rng.shuffle(verts);

        // Carve cycle vertex sets off the front of the shuffled list.
        std::vector<IndexList> units;
        std::size_t used = 0;
        for (int c = 0; c < spec.num_cycles; ++c) {
            const int len =
                spec.cycle_len_min +
                static_cast<int>(rng.uniform_int(
                    static_cast<std::uint64_t>(spec.cycle_len_max - spec.cycle_len_min + 1)));
            units.emplace_back(verts.begin() + used, verts.begin() + used + len);
            used += static_cast<std::size_t>(len);
        }
        for (std::size_t i = used; i < verts.size(); ++i)
            units.push_back({verts[i]});
        rng.shuffle(units);

        WeightedDigraph g(d);
        std::vector<int> degree(d, 0);
        for (const auto& unit : units) {
            if (unit.size() < 2) continue;
            for (std::size_t i = 0; i < unit.size(); ++i) {
                const int src = unit[i];
                const int dst = unit[(i + 1) % unit.size()];
                g.add_edge(src, dst,
                           rng.signed_uniform(spec.weight_low, spec.weight_high));
                degree[src] += 1;
                degree[dst] += 1;
            }
        }

        // Backbone edges: earlier unit to later unit only, so contracting
        // each unit leaves a DAG and no new cycle can form.
        for (std::size_t a = 0; a < units.size(); ++a)
            for (std::size_t b = a + 1; b < units.size(); ++b)
                for (int src : units[a])
                    for (int dst : units[b]) {
                        if (rng.uniform() >= p) continue;
                        if (degree[src] >= spec.max_degree ||
                            degree[dst] >= spec.max_degree)
                            continue;
                        g.add_edge(src, dst, rng.signed_uniform(spec.weight_low,
                                                                spec.weight_high));
                        degree[src] += 1;
                        degree[dst] += 1;
                    }

        if (!has_disjoint_cycles(g))
            throw Error("random_stable_dcg: construction broke disjointness");
        if (is_stable(g)) return g;
    }
    throw RejectionLimit("random_stable_dcg: no stable draw within limit");
}

inline WeightedDigraph random_graph(const SemSpec& spec) {
    return spec.graph_kind == GraphKind::erdos_renyi_dag ? random_dag(spec)
                                                         : random_stable_dcg(spec);
}

struct SimulatedData {
    Dataset data;
    Matrix noise;  // n x d, the exogenous draws
};

// Equilibrium samples X = (I - B)^{-1} E with E_i = U^power, U ~ Unif(-c_i, c_i)
// and per-variable c_i drawn once per dataset from the scale band.
inline SimulatedData simulate_with_noise(const WeightedDigraph& g, Index n,
                                         const SemSpec& spec) {
    if (n < 1) throw Error("simulate: n must be positive");
    const Index d = g.d();
    const Matrix A = mixing_matrix(g);
    Rng rng = Rng(spec.seed).child(detail::kNoiseStream);

    Vector c(d);
    for (Index j = 0; j < d; ++j)
        c(j) = rng.uniform(spec.noise_scale_low, spec.noise_scale_high);

    SimulatedData out;
    out.noise.resize(n, d);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < d; ++j) {
            const double u = rng.uniform(-c(j), c(j));
            double e = 1.0;
            for (int k = 0; k < spec.noise_power; ++k) e *= u;
            out.noise(i, j) = e;
        }

    out.data.values = out.noise * A.transpose();
    out.data.names.reserve(static_cast<std::size_t>(d));
    for (Index j = 0; j < d; ++j)
        out.data.names.push_back("X" + std::to_string(j));
    out.data.validate();
    return out;
}

inline Dataset simulate(const WeightedDigraph& g, Index n, const SemSpec& spec) {
    return simulate_with_noise(g, n, spec).data;
}

}  // namespace lingd
