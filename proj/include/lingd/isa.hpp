#pragma once

#include <numeric>
#include <vector>

#include "lingd/config.hpp"
#include "lingd/graph.hpp"
#include "lingd/hsic.hpp"
#include "lingd/ica.hpp"
#include "lingd/linalg.hpp"

namespace lingd {

// Demixer of X_S together with the grouping of its rows into mutually
// independent, irreducible subspaces.
struct IsaSolution {
    IndexList S;  // original column indices, in order
    Matrix W;     // m x m demixer; row i of W * X_S is one component
    std::vector<IndexList> partition;  // disjoint row groups covering [m]

    Index m() const { return W.rows(); }

    void validate() const {
        std::vector<bool> seen(static_cast<std::size_t>(m()), false);
        for (const auto& group : partition)
            for (int r : group) {
                if (r < 0 || r >= m() || seen[static_cast<std::size_t>(r)])
                    throw Error("isa: partition is not a partition");
                seen[static_cast<std::size_t>(r)] = true;
            }
        for (bool s : seen)
            if (!s) throw Error("isa: partition does not cover all rows");
    }
};

namespace detail {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void merge(int a, int b) { parent[find(a)] = find(b); }
};

inline std::vector<IndexList> groups_of(UnionFind& uf, int m) {
    std::vector<IndexList> by_root(static_cast<std::size_t>(m));
    for (int r = 0; r < m; ++r)
        by_root[static_cast<std::size_t>(uf.find(r))].push_back(r);
    std::vector<IndexList> out;
    for (auto& g : by_root)
        if (!g.empty()) out.push_back(std::move(g));
    return out;
}

}  // namespace detail

// Group estimated components into subspaces: link two rows when the
// independence test rejects, then take connected components.
//
// The kernels are evaluated on at most a fifth of the rows the demixer was
// fit on: estimation error leaks O(1/sqrt(n)) cross-component dependence,
// and testing on the full fit sample turns that leakage into spurious links.
// Rows listed in strict_rows are linked only at cfg.strict_group_alpha.
inline std::vector<IndexList> group_components(const Matrix& components,
                                               const DiscoveryConfig& cfg,
                                               const IndexList& strict_rows = {}) {
    const int m = static_cast<int>(components.cols());
    const int pairs = m * (m - 1) / 2;
    const double alpha =
        cfg.bonferroni && pairs > 0 ? cfg.alpha / pairs : cfg.alpha;

    HsicOptions hsic = cfg.hsic;
    hsic.n_max = std::min<int>(
        hsic.n_max,
        static_cast<int>(std::max<Index>(500, components.rows() / 5)));

    std::vector<bool> strict(static_cast<std::size_t>(m), false);
    for (int r : strict_rows) strict[static_cast<std::size_t>(r)] = true;

    const Index sub = std::min<Index>(components.rows(), hsic.n_max);
    const bool cache_all =
        static_cast<std::size_t>(m) * sub * sub * sizeof(double) <
        (std::size_t{512} << 20);
    std::vector<KernelSummary> cache;
    if (cache_all)
        for (int i = 0; i < m; ++i)
            cache.push_back(kernel_summary(components.col(i), hsic));

    detail::UnionFind uf(m);
    for (int i = 0; i < m; ++i) {
        const KernelSummary ki =
            cache_all ? KernelSummary{} : kernel_summary(components.col(i), hsic);
        for (int j = i + 1; j < m; ++j) {
            const double level =
                strict[static_cast<std::size_t>(i)] ||
                        strict[static_cast<std::size_t>(j)]
                    ? std::min(alpha, cfg.strict_group_alpha)
                    : alpha;
            const Independence verdict =
                cache_all
                    ? hsic_test_kernels(cache[static_cast<std::size_t>(i)],
                                        cache[static_cast<std::size_t>(j)],
                                        level)
                    : hsic_test_kernels(
                          ki, kernel_summary(components.col(j), hsic), level);
            if (verdict == Independence::dependent) uf.merge(i, j);
        }
    }
    auto partition = detail::groups_of(uf, m);

    if (cfg.blockwise_retest) {
        // a row chained into a group by transitivity must still be dependent
        // on the rest of its group as a block; otherwise split it back out
        std::vector<IndexList> refined;
        for (const auto& group : partition) {
            IndexList keep = group;
            for (int r : group) {
                if (keep.size() < 2) break;
                IndexList rest;
                for (int o : keep)
                    if (o != r) rest.push_back(o);
                Matrix block(components.rows(), static_cast<Index>(rest.size()));
                for (std::size_t k = 0; k < rest.size(); ++k)
                    block.col(static_cast<Index>(k)) = components.col(rest[k]);
                if (hsic_test(components.col(r), block, alpha, hsic) ==
                    Independence::independent) {
                    refined.push_back({r});
                    keep = rest;
                }
            }
            refined.push_back(keep);
        }
        partition = std::move(refined);
    }
    return partition;
}

// ICA followed by independence-test grouping of the estimated components.
inline IsaSolution estimate_isa(const Matrix& x_s, const IndexList& S,
                                const DiscoveryConfig& cfg = {},
                                const IndexList& strict_rows = {}) {
    IsaSolution sol;
    sol.S = S;
    sol.W = fastica(x_s, cfg.seed, cfg.ica);
    const Matrix components =
        (x_s.rowwise() - x_s.colwise().mean()) * sol.W.transpose();
    sol.partition = group_components(components, cfg, strict_rows);
    sol.validate();
    return sol;
}

// Partition of the rows of (A_{S,S})^{-1} X_S by shared exogenous sources:
// two rows belong together when their noise supports overlap (closed
// transitively). This is the grouping the demixer is guaranteed to induce.
inline std::vector<IndexList> source_support_partition(
    const WeightedDigraph& g, const IndexList& S, double tol = 1e-9) {
    const Matrix A = mixing_matrix(g);
    const Matrix w = local_demixer(A, S);
    Matrix a_rows(static_cast<Index>(S.size()), g.d());
    for (std::size_t i = 0; i < S.size(); ++i)
        a_rows.row(static_cast<Index>(i)) = A.row(S[i]);
    const Matrix mix = w * a_rows;  // m x d map from noises to components

    const int m = static_cast<int>(S.size());
    detail::UnionFind uf(m);
    for (Index source = 0; source < g.d(); ++source) {
        int first = -1;
        for (int r = 0; r < m; ++r)
            if (std::abs(mix(r, source)) > tol) {
                if (first < 0)
                    first = r;
                else
                    uf.merge(first, r);
            }
    }
    return detail::groups_of(uf, m);
}

struct IsaCheckReport {
    int cross_pairs = 0;
    int cross_independent = 0;
    int within_pairs = 0;
    int within_dependent = 0;
    bool pass = false;
};

// Test-oriented check that the rows of (A_{S,S})^{-1} X_S really decompose
// into independent irreducible blocks: cross-group component pairs should
// accept independence, within-group pairs should reject it.
inline IsaCheckReport verify_isa_characterization(const WeightedDigraph& g,
                                                  const IndexList& S,
                                                  const Matrix& data_all,
                                                  const DiscoveryConfig& cfg = {}) {
    const Matrix A = mixing_matrix(g);
    const Matrix w = local_demixer(A, S);
    Matrix x_s(data_all.rows(), static_cast<Index>(S.size()));
    for (std::size_t i = 0; i < S.size(); ++i)
        x_s.col(static_cast<Index>(i)) = data_all.col(S[i]);
    const Matrix components =
        (x_s.rowwise() - x_s.colwise().mean()) * w.transpose();

    const auto partition = source_support_partition(g, S);
    std::vector<int> group_of(S.size());
    for (std::size_t gi = 0; gi < partition.size(); ++gi)
        for (int r : partition[gi]) group_of[static_cast<std::size_t>(r)] = static_cast<int>(gi);

    IsaCheckReport report;
    const int m = static_cast<int>(S.size());
    std::vector<KernelSummary> kernels;
    for (int i = 0; i < m; ++i)
        kernels.push_back(kernel_summary(components.col(i), cfg.hsic));
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            const auto verdict =
                hsic_test_kernels(kernels[static_cast<std::size_t>(i)],
                                  kernels[static_cast<std::size_t>(j)],
                                  cfg.alpha);
            if (group_of[i] == group_of[j]) {
                ++report.within_pairs;
                if (verdict == Independence::dependent)
                    ++report.within_dependent;
            } else {
                ++report.cross_pairs;
                if (verdict == Independence::independent)
                    ++report.cross_independent;
            }
        }
    report.pass = report.cross_independent == report.cross_pairs &&
                  report.within_dependent == report.within_pairs;
    return report;
}

}  // namespace lingd
