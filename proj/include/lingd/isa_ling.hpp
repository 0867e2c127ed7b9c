#pragma once

#include <algorithm>
#include <set>
#include <vector>

#include "lingd/config.hpp"
#include "lingd/dataset.hpp"
#include "lingd/errors.hpp"
#include "lingd/isa.hpp"
#include "lingd/linalg.hpp"

namespace lingd {

struct WeightedEdge {
    int src = -1;
    int dst = -1;
    double w = 0.0;
};

inline bool operator<(const WeightedEdge& a, const WeightedEdge& b) {
    if (a.dst != b.dst) return a.dst < b.dst;
    if (a.src != b.src) return a.src < b.src;
    return a.w < b.w;
}

// Directed weighted edges into the target and the target's children.
struct LocalModel {
    std::vector<WeightedEdge> edges;

    void canonicalize() { std::sort(edges.begin(), edges.end()); }

    bool same_structure(const LocalModel& other) const {
        if (edges.size() != other.edges.size()) return false;
        for (std::size_t i = 0; i < edges.size(); ++i)
            if (edges[i].src != other.edges[i].src ||
                edges[i].dst != other.edges[i].dst)
                return false;
        return true;
    }

    double max_weight_gap(const LocalModel& other) const {
        double gap = 0.0;
        for (std::size_t i = 0; i < edges.size(); ++i)
            gap = std::max(gap, std::abs(edges[i].w - other.edges[i].w));
        return gap;
    }
};

struct LocalMember {
    LocalModel model;
    Matrix local_b;                 // m x m coefficient matrix over S
    std::vector<IndexList> perms;   // row -> position maps that produced it
    bool stable = false;
};

struct LocalModelClass {
    int target = -1;
    IndexList S;  // ordered variable set the local coefficients live on
    std::vector<LocalMember> members;
};

namespace detail {

inline Matrix normalize_rows(const Matrix& w) {
    Matrix out = w;
    for (Index i = 0; i < out.rows(); ++i) {
        const double peak = out.row(i).cwiseAbs().maxCoeff();
        if (peak > 0.0) out.row(i) /= peak;
    }
    return out;
}

inline Matrix threshold_entries(const Matrix& w, double tol) {
    Matrix out = w;
    for (Index i = 0; i < out.rows(); ++i)
        for (Index j = 0; j < out.cols(); ++j)
            if (std::abs(out(i, j)) <= tol) out(i, j) = 0.0;
    return out;
}

}  // namespace detail

// Rows carrying the target's column: the target itself and its children.
// Rows are max-normalized before thresholding.
inline IndexList support_column(const Matrix& w, int t_pos,
                                double zero_tol = 0.05) {
    if (zero_tol <= 0.0) throw Error("support_column: zero_tol must be positive");
    const Matrix wn = detail::normalize_rows(w);
    IndexList support;
    for (Index i = 0; i < wn.rows(); ++i)
        if (std::abs(wn(i, t_pos)) > zero_tol)
            support.push_back(static_cast<int>(i));
    if (support.empty())
        throw EmptySupport("support_column: no row carries the target column");
    return support;
}

namespace detail {

struct AdmissibleSearch {
    const Matrix& w;
    double rank_tol;
    double slot_tol;  // diagonal entries must clear this (relative to row max)
    std::vector<IndexList> groups;     // sorted rows, larger groups first
    std::vector<bool> position_used;
    Vector row_peak;
    IndexList pos_of_row;
    std::vector<IndexList> found;
    long nodes = 0;
    static constexpr long kNodeCap = 500000;

    void assign(const IndexList& rows, const IndexList& positions) {
        for (std::size_t k = 0; k < rows.size(); ++k)
            pos_of_row[static_cast<std::size_t>(rows[k])] = positions[k];
    }

    bool feasible(const IndexList& rows, const IndexList& positions) const {
        if (rows.size() == 1) {
            const double entry = std::abs(w(rows[0], positions[0]));
            return entry > slot_tol * row_peak(rows[0]) && entry > 0.0;
        }
        const Matrix block = submatrix(w, rows, positions);
        double peak = 0.0;
        for (int r : rows) peak = std::max(peak, row_peak(r));
        for (Index c = 0; c < block.cols(); ++c) {
            const double col_peak = block.col(c).cwiseAbs().maxCoeff();
            if (col_peak == 0.0 || col_peak <= slot_tol * peak) return false;
        }
        return numerical_rank(block, rank_tol) ==
               static_cast<Index>(rows.size());
    }

    void search(std::size_t gi) {
        if (++nodes > kNodeCap)
            throw CombinatorialLimit("admissible_permutations: search budget");
        if (gi == groups.size()) {
            found.push_back(pos_of_row);
            return;
        }
        const IndexList& rows = groups[gi];
        const std::size_t k = rows.size();
        IndexList avail;
        for (std::size_t p = 0; p < position_used.size(); ++p)
            if (!position_used[p]) avail.push_back(static_cast<int>(p));
        IndexList combo(k);
        pick(gi, rows, avail, combo, 0, 0);
    }

    void pick(std::size_t gi, const IndexList& rows, const IndexList& avail,
              IndexList& combo, std::size_t depth, std::size_t start) {
        if (depth == rows.size()) {
            if (!feasible(rows, combo)) return;
            for (int p : combo) position_used[static_cast<std::size_t>(p)] = true;
            assign(rows, combo);
            search(gi + 1);
            for (int p : combo) position_used[static_cast<std::size_t>(p)] = false;
            return;
        }
        for (std::size_t a = start; a < avail.size(); ++a) {
            combo[depth] = avail[a];
            pick(gi, rows, avail, combo, depth + 1, a + 1);
        }
    }
};

}  // namespace detail

// All admissible row->position maps: assignments of each subspace's rows to
// an equally sized set of column positions whose diagonal block is full-rank.
// Within-group order is canonical (sorted rows onto sorted positions); the
// block rescaling makes it immaterial. Expects a support-cleaned matrix.
//
// slot_tol demands diagonal entries at the support scale: on estimated
// demixers, population-zero slots carry noise that would otherwise admit
// phantom placements (reversed local cycles with blown-up weights).
inline std::vector<IndexList> admissible_permutations(
    const Matrix& w, const std::vector<IndexList>& partition,
    double rank_tol = 0.05, double slot_tol = 0.0) {
    detail::AdmissibleSearch search{w, rank_tol, slot_tol};
    search.groups = partition;
    search.row_peak = w.cwiseAbs().rowwise().maxCoeff();
    for (auto& g : search.groups) std::sort(g.begin(), g.end());
    std::sort(search.groups.begin(), search.groups.end(),
              [](const IndexList& a, const IndexList& b) {
                  if (a.size() != b.size()) return a.size() > b.size();
                  return a < b;
              });
    search.position_used.assign(static_cast<std::size_t>(w.rows()), false);
    search.pos_of_row.assign(static_cast<std::size_t>(w.rows()), -1);
    search.search(0);
    if (search.found.empty())
        throw NoAdmissible("admissible_permutations: none found");
    std::sort(search.found.begin(), search.found.end());
    return search.found;
}

inline std::vector<IndexList> admissible_permutations(
    const IsaSolution& sol, double rank_tol = 0.05, double zero_tol = 0.05) {
    const Matrix cleaned =
        detail::threshold_entries(detail::normalize_rows(sol.W), zero_tol);
    return admissible_permutations(cleaned, sol.partition, rank_tol);
}

// Core post-processing of a subspace solution: for every admissible
// permutation, rescale diagonal blocks to identity, read off the local
// coefficient matrix, and emit the edges into the target and its children.
// Duplicate models (same edges, weights within dedup_tol) are merged.
inline LocalModelClass extract_local_models(const IsaSolution& sol, int t_pos,
                                            const DiscoveryConfig& cfg = {}) {
    sol.validate();
    const Index m = sol.m();
    if (t_pos < 0 || t_pos >= m) throw Error("extract_local_models: bad target");
    const Matrix cleaned = detail::threshold_entries(
        detail::normalize_rows(sol.W), cfg.zero_tol);

    const IndexList support = support_column(cleaned, t_pos, cfg.support_tol);
    for (int r : support) {
        bool singleton = false;
        for (const auto& group : sol.partition)
            if (group.size() == 1 && group[0] == r) singleton = true;
        if (!singleton)
            throw AssertionViolated(
                "extract_local_models: a target-column row is entangled in a "
                "multi-dimensional subspace");
    }

    const auto perms = admissible_permutations(cleaned, sol.partition,
                                               cfg.rank_tol, cfg.support_tol);

    LocalModelClass out;
    out.target = sol.S[static_cast<std::size_t>(t_pos)];
    out.S = sol.S;
    for (const auto& pos_of_row : perms) {
        Matrix bprime = Matrix::Zero(m, m);
        for (const auto& group : sol.partition) {
            IndexList rows = group;
            std::sort(rows.begin(), rows.end());
            IndexList positions;
            for (int r : rows)
                positions.push_back(pos_of_row[static_cast<std::size_t>(r)]);
            std::sort(positions.begin(), positions.end());
            // sorted rows onto sorted positions; the block inverse absorbs
            // any within-group reordering
            Matrix rows_block(static_cast<Index>(rows.size()), m);
            for (std::size_t k = 0; k < rows.size(); ++k)
                rows_block.row(static_cast<Index>(k)) = cleaned.row(rows[k]);
            const Matrix diag_block =
                submatrix(cleaned, rows, positions);
            const Matrix scaled = invert(diag_block) * rows_block;
            for (std::size_t k = 0; k < positions.size(); ++k)
                bprime.row(positions[k]) = -scaled.row(static_cast<Index>(k));
        }
        bprime.diagonal().setZero();  // unit diagonal by construction

        LocalModel model;
        const double emit_tol = std::max(cfg.zero_tol, cfg.support_tol);
        for (int r : support) {
            const int p = pos_of_row[static_cast<std::size_t>(r)];
            for (Index j = 0; j < m; ++j) {
                if (j == p) continue;
                const double w = bprime(p, j);
                if (std::abs(w) > emit_tol)
                    model.edges.push_back(
                        {sol.S[static_cast<std::size_t>(j)],
                         sol.S[static_cast<std::size_t>(p)], w});
            }
        }
        model.canonicalize();

        bool merged = false;
        for (auto& member : out.members)
            if (member.model.same_structure(model) &&
                member.model.max_weight_gap(model) < cfg.dedup_tol) {
                member.perms.push_back(pos_of_row);
                merged = true;
                break;
            }
        if (merged) continue;
        LocalMember member;
        member.model = std::move(model);
        member.local_b = std::move(bprime);
        member.perms.push_back(pos_of_row);
        member.stable = spectral_radius(member.local_b) < 1.0;
        out.members.push_back(std::move(member));
    }

    std::sort(out.members.begin(), out.members.end(),
              [](const LocalMember& a, const LocalMember& b) {
                  if (a.model.edges.size() != b.model.edges.size())
                      return a.model.edges.size() < b.model.edges.size();
                  return a.model.edges < b.model.edges;
              });
    return out;
}

// Subspace analysis on {target} ∪ blanket followed by model extraction.
// The rows carrying the target's column are passed to the grouping as
// strict rows: they are provably singletons when the blanket is correct.
// Extraction failures retry with fresh demixer seeds before propagating:
// a wandering start within a non-demixable subspace can dirty the support,
// while a genuine blanket error fails every draw.
inline LocalModelClass local_isa_ling(int target, const IndexList& blanket,
                                      const Dataset& data,
                                      const DiscoveryConfig& cfg = {}) {
    if (blanket.empty()) throw Error("local_isa_ling: empty blanket");
    std::set<int> s_set(blanket.begin(), blanket.end());
    s_set.insert(target);
    const IndexList S(s_set.begin(), s_set.end());
    Matrix x_s(data.n(), static_cast<Index>(S.size()));
    for (std::size_t i = 0; i < S.size(); ++i) {
        if (S[i] < 0 || S[i] >= data.d())
            throw Error("local_isa_ling: vertex outside the dataset");
        x_s.col(static_cast<Index>(i)) = data.values.col(S[i]);
    }
    const int t_pos = static_cast<int>(
        std::lower_bound(S.begin(), S.end(), target) - S.begin());
    const Matrix centered = x_s.rowwise() - x_s.colwise().mean();

    const int tries = std::max(1, cfg.extraction_restarts);
    const Rng base(cfg.seed);
    for (int attempt = 0;; ++attempt) {
        try {
            IsaSolution sol;
            sol.S = S;
            sol.W = fastica(x_s, base.child(static_cast<std::uint64_t>(attempt)).seed(),
                            cfg.ica);
            const IndexList support = support_column(sol.W, t_pos, cfg.support_tol);
            const Matrix components = centered * sol.W.transpose();
            sol.partition = group_components(components, cfg, support);
            sol.validate();
            return extract_local_models(sol, t_pos, cfg);
        } catch (const AssertionViolated&) {
            if (attempt + 1 >= tries) throw;
        } catch (const NoAdmissible&) {
            if (attempt + 1 >= tries) throw;
        } catch (const EmptySupport&) {
            if (attempt + 1 >= tries) throw;
        }
    }
}

// Keep only members whose local coefficient matrix is convergent. Under
// disjoint global cycles exactly one member survives.
inline LocalModelClass stable_filter(LocalModelClass cls) {
    std::vector<LocalMember> kept;
    for (auto& member : cls.members)
        if (member.stable) kept.push_back(std::move(member));
    if (kept.empty())
        throw AllFiltered("stable_filter: no convergent model remains");
    cls.members = std::move(kept);
    return cls;
}

// Sink-peeling post-processing for the case where neither the target nor its
// children lie on a cycle: repeatedly take the column with a single surviving
// entry, normalize that row, and emit its edges when it carries the target.
// emit_tol plays the same role as the extraction support threshold: target
// membership and emitted weights must clear the support scale, not just the
// row-cleaning threshold.
inline LocalModel acyclic_postprocess(const IsaSolution& sol, int t_pos,
                                      double zero_tol = 0.05,
                                      double emit_tol = 0.2) {
    sol.validate();
    const Index m = sol.m();
    const Matrix cleaned =
        detail::threshold_entries(detail::normalize_rows(sol.W), zero_tol);
    emit_tol = std::max(zero_tol, emit_tol);

    std::set<int> u1, u2;
    for (int i = 0; i < m; ++i) {
        u1.insert(i);
        u2.insert(i);
    }
    LocalModel model;
    while (!u1.empty()) {
        int col = -1, row = -1;
        for (int j : u1) {
            int nnz = 0, last = -1;
            for (int r : u2)
                if (cleaned(r, j) != 0.0) {
                    ++nnz;
                    last = r;
                }
            if (nnz == 1) {
                col = j;
                row = last;
                break;
            }
        }
        if (col < 0)
            throw AssertionViolated(
                "acyclic_postprocess: no single-support column; a cycle "
                "touches the target's neighbourhood");
        const double pivot = cleaned(row, col);
        if (std::abs(cleaned(row, t_pos) / pivot) > emit_tol || col == t_pos) {
            for (int i : u1) {
                if (i == col || cleaned(row, i) == 0.0) continue;
                const double w = -cleaned(row, i) / pivot;
                if (std::abs(w) > emit_tol)
                    model.edges.push_back({sol.S[static_cast<std::size_t>(i)],
                                           sol.S[static_cast<std::size_t>(col)],
                                           w});
            }
        }
        if (col == t_pos) break;
        u1.erase(col);
        u2.erase(row);
    }
    model.canonicalize();
    return model;
}

}  // namespace lingd
