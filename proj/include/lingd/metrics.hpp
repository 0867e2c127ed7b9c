#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "lingd/errors.hpp"
#include "lingd/graph.hpp"
#include "lingd/isa_ling.hpp"

namespace lingd {

// Ground-truth local structure: all incoming edges of the target and of the
// target's children.
inline LocalModel local_truth(const WeightedDigraph& g, int target) {
    LocalModel model;
    IndexList heads = children(g, target);
    heads.push_back(target);
    for (int j : heads)
        for (int i : parents(g, j)) model.edges.push_back({i, j, g.B(j, i)});
    model.canonicalize();
    return model;
}

namespace detail {

using EdgePair = std::pair<int, int>;

inline std::set<EdgePair> edge_set(const LocalModel& m) {
    std::set<EdgePair> out;
    for (const auto& e : m.edges) out.insert({e.src, e.dst});
    return out;
}

}  // namespace detail

// Structural Hamming distance between local edge sets: one per missing edge,
// one per extra edge, and a reversal (i->j present as j->i) counts once.
inline int shd_local(const LocalModel& truth, const LocalModel& est) {
    const auto t = detail::edge_set(truth);
    const auto e = detail::edge_set(est);
    std::set<std::pair<int, int>> pairs;  // unordered vertex pairs touched
    for (const auto& [a, b] : t) pairs.insert(std::minmax(a, b));
    for (const auto& [a, b] : e) pairs.insert(std::minmax(a, b));

    int cost = 0;
    for (const auto& [a, b] : pairs) {
        const bool t_ab = t.count({a, b}), t_ba = t.count({b, a});
        const bool e_ab = e.count({a, b}), e_ba = e.count({b, a});
        const int diff = (t_ab != e_ab) + (t_ba != e_ba);
        if (diff == 2 && t_ab + t_ba == 1 && e_ab + e_ba == 1)
            cost += 1;  // pure reversal
        else
            cost += diff;
    }
    return cost;
}

inline constexpr std::size_t kClassMatchGuard = 8;

// Distance between model classes: minimum-cost perfect matching under
// shd_local, padding the smaller class with empty models (an unmatched model
// costs its own edge count), normalized by the larger class size.
inline double shd_local_class(const std::vector<LocalModel>& truth,
                              const std::vector<LocalModel>& est) {
    const std::size_t n = std::max(truth.size(), est.size());
    if (n == 0) return 0.0;
    if (n > kClassMatchGuard)
        throw TooLarge("shd_local_class: class exceeds matching guard");
    const LocalModel empty;
    auto truth_at = [&](std::size_t i) -> const LocalModel& {
        return i < truth.size() ? truth[i] : empty;
    };
    auto est_at = [&](std::size_t i) -> const LocalModel& {
        return i < est.size() ? est[i] : empty;
    };
    std::vector<std::vector<int>> cost(n, std::vector<int>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            cost[i][j] = shd_local(truth_at(i), est_at(j));

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    int best = std::numeric_limits<int>::max();
    do {
        int total = 0;
        for (std::size_t i = 0; i < n; ++i) total += cost[i][perm[i]];
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(best) / static_cast<double>(n);
}

// Local model with some edges left undirected (endpoints only).
struct PartialLocalModel {
    std::vector<WeightedEdge> directed;
    std::vector<std::pair<int, int>> undirected;
};

inline constexpr std::size_t kOrientationGuard = 12;

// Average shd_local over every orientation of the undirected edges.
inline double shd_local_pdag(const LocalModel& truth,
                             const PartialLocalModel& est) {
    const std::size_t u = est.undirected.size();
    if (u > kOrientationGuard)
        throw CombinatorialLimit("shd_local_pdag: too many undirected edges");
    double total = 0.0;
    const std::size_t combos = std::size_t{1} << u;
    for (std::size_t mask = 0; mask < combos; ++mask) {
        LocalModel oriented;
        oriented.edges = est.directed;
        for (std::size_t k = 0; k < u; ++k) {
            const auto& [a, b] = est.undirected[k];
            if (mask >> k & 1)
                oriented.edges.push_back({a, b, 0.0});
            else
                oriented.edges.push_back({b, a, 0.0});
        }
        oriented.canonicalize();
        total += static_cast<double>(shd_local(truth, oriented));
    }
    return total / static_cast<double>(combos);
}

// Euclidean distance between edge-weight vectors over the union of edge
// slots; an edge absent on one side contributes its full weight.
inline double weight_distance(const LocalModel& truth, const LocalModel& est) {
    std::map<detail::EdgePair, double> slots;
    for (const auto& e : truth.edges) slots[{e.src, e.dst}] += e.w;
    for (const auto& e : est.edges) slots[{e.src, e.dst}] -= e.w;
    double sq = 0.0;
    for (const auto& [slot, gap] : slots) sq += gap * gap;
    return std::sqrt(sq);
}

}  // namespace lingd
