#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <vector>

#include "lingd/errors.hpp"
#include "lingd/linalg.hpp"

namespace lingd {

// Directed weighted graph stored as its coefficient matrix:
// B(j, i) != 0  <=>  edge i -> j carrying that weight. No self-loops.
struct WeightedDigraph {
    Matrix B;

    WeightedDigraph() : B(Matrix::Zero(0, 0)) {}
    explicit WeightedDigraph(Index d) : B(Matrix::Zero(d, d)) {}
    explicit WeightedDigraph(Matrix b) : B(std::move(b)) { validate(); }

    Index d() const { return B.rows(); }

    void add_edge(int src, int dst, double w) {
        if (src == dst) throw Error("graph: self-loop");
        B(dst, src) = w;
    }

    bool has_edge(int src, int dst) const { return B(dst, src) != 0.0; }

    Index edge_count() const {
        return (B.array() != 0.0).count();
    }

    void validate() const {
        if (B.rows() != B.cols()) throw Error("graph: matrix not square");
        if (!B.allFinite()) throw Error("graph: non-finite weight");
        if (B.rows() > 0 && B.diagonal().cwiseAbs().maxCoeff() != 0.0)
            throw Error("graph: nonzero diagonal (self-loop)");
    }
};

// Mixing matrix A = (I - B)^{-1}. Throws SingularMatrix if I - B is singular.
inline Matrix mixing_matrix(const WeightedDigraph& g) {
    return invert(Matrix::Identity(g.d(), g.d()) - g.B);
}

inline IndexList parents(const WeightedDigraph& g, int i) {
    IndexList out;
    for (Index j = 0; j < g.d(); ++j)
        if (g.B(i, j) != 0.0) out.push_back(static_cast<int>(j));
    return out;
}

inline IndexList children(const WeightedDigraph& g, int i) {
    IndexList out;
    for (Index j = 0; j < g.d(); ++j)
        if (g.B(j, i) != 0.0) out.push_back(static_cast<int>(j));
    return out;
}

// Vertices sharing a child with i, excluding i's parents and children.
inline IndexList spouses(const WeightedDigraph& g, int i) {
    const IndexList ch = children(g, i);
    const IndexList pa = parents(g, i);
    std::set<int> excluded(pa.begin(), pa.end());
    excluded.insert(ch.begin(), ch.end());
    excluded.insert(i);
    std::set<int> out;
    for (int c : ch)
        for (int p : parents(g, c))
            if (!excluded.count(p)) out.insert(p);
    return IndexList(out.begin(), out.end());
}

inline IndexList markov_blanket(const WeightedDigraph& g, int i) {
    std::set<int> mb;
    for (int v : parents(g, i)) mb.insert(v);
    for (int v : children(g, i)) mb.insert(v);
    for (int v : spouses(g, i)) mb.insert(v);
    mb.erase(i);
    return IndexList(mb.begin(), mb.end());
}

// Undirected graph linking adjacent vertices and co-parents of a child.
inline Adjacency moral_graph(const WeightedDigraph& g) {
    const Index d = g.d();
    Adjacency m = Adjacency::Constant(d, d, false);
    auto link = [&](Index a, Index b) {
        if (a == b) return;
        m(a, b) = m(b, a) = true;
    };
    for (Index j = 0; j < d; ++j)
        for (Index i = 0; i < d; ++i)
            if (g.B(j, i) != 0.0) link(i, j);
    for (Index c = 0; c < d; ++c) {
        const IndexList pa = parents(g, static_cast<int>(c));
        for (std::size_t a = 0; a < pa.size(); ++a)
            for (std::size_t b = a + 1; b < pa.size(); ++b)
                link(pa[a], pa[b]);
    }
    return m;
}

// Convergent coefficient matrix: effects of one-time noise dissipate.
inline bool is_stable(const WeightedDigraph& g) {
    return spectral_radius(g.B) < 1.0;
}

// All simple cycles (Johnson-style enumeration). Throws CycleEnumLimit when
// more than max_cycles are found.
inline std::vector<IndexList> simple_cycles(const WeightedDigraph& g,
                                            std::size_t max_cycles = 10000) {
    const int d = static_cast<int>(g.d());
    std::vector<IndexList> adj(d);
    for (int i = 0; i < d; ++i) adj[i] = children(g, i);

    std::vector<IndexList> cycles;
    std::vector<bool> blocked(d, false);
    std::vector<std::set<int>> block_map(d);
    IndexList stack;

    auto unblock = [&](auto&& self, int u) -> void {
        blocked[u] = false;
        std::set<int> todo;
        todo.swap(block_map[u]);
        for (int w : todo)
            if (blocked[w]) self(self, w);
    };

    for (int s = 0; s < d; ++s) {
        std::fill(blocked.begin(), blocked.end(), false);
        for (auto& b : block_map) b.clear();
        stack.clear();

        auto circuit = [&](auto&& self, int v) -> bool {
            bool found = false;
            stack.push_back(v);
            blocked[v] = true;
            for (int w : adj[v]) {
                if (w < s) continue;  // vertices below s already handled
                if (w == s) {
                    if (cycles.size() >= max_cycles)
                        throw CycleEnumLimit("simple_cycles: cycle cap exceeded");
                    cycles.push_back(stack);
                    found = true;
                } else if (!blocked[w]) {
                    if (self(self, w)) found = true;
                }
            }
            if (found) {
                unblock(unblock, v);
            } else {
                for (int w : adj[v])
                    if (w >= s) block_map[w].insert(v);
            }
            stack.pop_back();
            return found;
        };
        circuit(circuit, s);
    }
    return cycles;
}

// True iff no vertex lies on two distinct simple cycles.
inline bool has_disjoint_cycles(const WeightedDigraph& g,
                                std::size_t max_cycles = 10000) {
    const auto cycles = simple_cycles(g, max_cycles);
    std::set<int> seen;
    for (const auto& cycle : cycles)
        for (int v : cycle)
            if (!seen.insert(v).second) return false;
    return true;
}

inline IndexList vertices_on_cycles(const WeightedDigraph& g,
                                    std::size_t max_cycles = 10000) {
    std::set<int> on;
    for (const auto& cycle : simple_cycles(g, max_cycles))
        on.insert(cycle.begin(), cycle.end());
    return IndexList(on.begin(), on.end());
}

// One distributionally equivalent model: I - B' = P D (I - B) where P permutes
// rows and D rescales them back to a unit diagonal.
struct EquivalenceMember {
    WeightedDigraph graph;
    IndexList row_source;  // row i of I - B' is built from row row_source[i] of I - B
    Vector row_scale;      // the scaling applied to that source row
};

struct EquivalenceClass {
    std::vector<EquivalenceMember> members;
};

inline constexpr Index kEquivClassGuard = 9;
inline constexpr double kEquivDedupTol = 1e-9;

// Exhaustive enumeration of the equivalence class over all d! row
// permutations with nonzero diagonal. Reference implementation; guarded.
inline EquivalenceClass equivalence_class(const WeightedDigraph& g,
                                          Index guard = kEquivClassGuard) {
    const Index d = g.d();
    if (d > guard) throw TooLarge("equivalence_class: d exceeds guard");
    const Matrix demix = Matrix::Identity(d, d) - g.B;

    EquivalenceClass out;
    IndexList perm(static_cast<std::size_t>(d));
    for (Index i = 0; i < d; ++i) perm[i] = static_cast<int>(i);

    do {
        bool ok = true;
        for (Index i = 0; i < d && ok; ++i)
            if (std::abs(demix(perm[i], i)) < kPivotTol) ok = false;
        if (!ok) continue;

        Matrix bprime(d, d);
        Vector scale(d);
        for (Index i = 0; i < d; ++i) {
            scale(i) = 1.0 / demix(perm[i], i);
            bprime.row(i) = -scale(i) * demix.row(perm[i]);
            bprime(i, i) += 1.0;  // row scaled to unit diagonal, then negated
        }
        bprime.diagonal().setZero();

        bool duplicate = false;
        for (const auto& m : out.members)
            if ((m.graph.B - bprime).cwiseAbs().maxCoeff() < kEquivDedupTol) {
                duplicate = true;
                break;
            }
        if (duplicate) continue;

        EquivalenceMember member;
        member.graph = WeightedDigraph(bprime);
        member.row_source = perm;
        member.row_scale = scale;
        out.members.push_back(std::move(member));
    } while (std::next_permutation(perm.begin(), perm.end()));

    return out;
}

// Covariance entailed by (B, Omega): A Omega A^T with A = (I - B)^{-1}.
inline Matrix implied_covariance(const WeightedDigraph& g, const Vector& omega) {
    const Matrix A = mixing_matrix(g);
    return A * omega.asDiagonal() * A.transpose();
}

// Noise covariance of an equivalence member, derived from the base omega and
// the member's construction record.
inline Vector member_omega(const EquivalenceMember& m, const Vector& omega) {
    Vector out(omega.size());
    for (Index i = 0; i < omega.size(); ++i)
        out(i) = m.row_scale(i) * m.row_scale(i) * omega(m.row_source[i]);
    return out;
}

}  // namespace lingd
