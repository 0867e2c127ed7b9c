#pragma once

#include <limits>
#include <set>
#include <vector>

#include "lingd/config.hpp"
#include "lingd/dataset.hpp"
#include "lingd/errors.hpp"
#include "lingd/graph.hpp"
#include "lingd/hsic.hpp"
#include "lingd/isa_ling.hpp"
#include "lingd/linalg.hpp"

namespace lingd {

struct Regression {
    Vector beta;      // coefficient per index of S, in order
    Vector residual;  // centred residual series
};

// Least squares of column i on columns S from empirical moments:
// beta = cov(X_S, X_S)^{-1} cov(X_S, X_i), residual from centred data.
inline Regression regress(const Matrix& values, const IndexList& S, int i) {
    for (int s : S)
        if (s == i) throw Error("regress: target inside regressor set");
    Regression out;
    const Matrix centered = values.rowwise() - values.colwise().mean();
    if (S.empty()) {
        out.beta = Vector(0);
        out.residual = centered.col(i);
        return out;
    }
    const Matrix cov = covariance(values);
    const Matrix cov_ss = submatrix(cov, S, S);
    Vector cov_si(static_cast<Index>(S.size()));
    for (std::size_t k = 0; k < S.size(); ++k) cov_si(static_cast<Index>(k)) = cov(S[k], i);
    out.beta = invert(cov_ss) * cov_si;
    out.residual = centered.col(i);
    for (std::size_t k = 0; k < S.size(); ++k)
        out.residual -= out.beta(static_cast<Index>(k)) * centered.col(S[k]);
    return out;
}

inline Regression regress(const Dataset& data, const IndexList& S, int i) {
    return regress(data.values, S, i);
}

namespace detail {

// Moment source backed by observed samples. A coefficient counts as zero
// when its t-statistic is small: a fixed cut on standardised coefficients
// misreads real edges once the noise scales spread, while population zeros
// keep |t| near one at any scale. Residual independence by HSIC.
struct EmpiricalMoments {
    const Matrix& values;
    Matrix centered;
    Matrix cov;
    double alpha;
    double t_crit;
    HsicOptions hsic;

    EmpiricalMoments(const Matrix& v, double alpha_, double t_crit_,
                     const HsicOptions& h)
        : values(v), alpha(alpha_), t_crit(t_crit_), hsic(h) {
        centered = values.rowwise() - values.colwise().mean();
        cov = covariance(values);
    }

    struct Fit {
        Vector beta;
        std::vector<bool> zero;
        Vector tstat;  // |t| per coefficient

        double target_load(std::size_t k) const {
            return tstat(static_cast<Index>(k));
        }
    };

    Fit fit(const IndexList& S, int i) const {
        Fit out;
        if (S.empty()) return out;
        const Matrix inv_ss = invert(submatrix(cov, S, S));
        Vector cov_si(static_cast<Index>(S.size()));
        for (std::size_t k = 0; k < S.size(); ++k)
            cov_si(static_cast<Index>(k)) = cov(S[k], i);
        out.beta = inv_ss * cov_si;
        const double resid_var =
            std::max(cov(i, i) - cov_si.dot(out.beta), 1e-300);
        const double n = static_cast<double>(values.rows());
        out.zero.resize(S.size());
        out.tstat.resize(static_cast<Index>(S.size()));
        for (std::size_t k = 0; k < S.size(); ++k) {
            const double se = std::sqrt(
                resid_var * inv_ss(static_cast<Index>(k), static_cast<Index>(k)) / n);
            out.tstat(static_cast<Index>(k)) =
                std::abs(out.beta(static_cast<Index>(k))) / std::max(se, 1e-300);
            out.zero[k] = out.tstat(static_cast<Index>(k)) < t_crit;
        }
        return out;
    }

    // Dependence of the residual on the regressors, as the ratio of the
    // statistic to its level-alpha threshold (<= 1 accepts independence),
    // with a second ratio against a far smaller level as a fallback gate.
    struct Dependence {
        double ratio = 0.0;
        double fallback_ratio = 0.0;
    };

    Dependence residual_dependence(const IndexList& S, int i,
                                   const Vector& b) const {
        if (S.empty()) return {};
        Vector resid = centered.col(i);
        Matrix block(centered.rows(), static_cast<Index>(S.size()));
        for (std::size_t k = 0; k < S.size(); ++k) {
            resid -= b(static_cast<Index>(k)) * centered.col(S[k]);
            block.col(static_cast<Index>(k)) = centered.col(S[k]);
        }
        const HsicAnalysis a = hsic_analyze(resid, block, hsic);
        if (a.shape <= 0.0)
            return {a.stat > 0.0 ? 2.0 : 0.0, a.stat > 0.0 ? 2.0 : 0.0};
        return {a.stat / a.threshold(alpha),
                a.stat / a.threshold(alpha / 100.0)};
    }
};

// Moment source implied by a known model: exact covariance, exact zeros, and
// an algebraic residual-independence decision via source supports.
struct ModelMoments {
    Matrix A;    // mixing matrix
    Matrix cov;  // A Omega A^T
    Vector sd;
    double tol = 1e-9;

    ModelMoments(const WeightedDigraph& g, const Vector& omega) {
        A = mixing_matrix(g);
        cov = A * omega.asDiagonal() * A.transpose();
        sd = cov.diagonal().cwiseSqrt();
    }

    struct Fit {
        Vector beta;
        std::vector<bool> zero;
        Vector loads;  // |standardised coefficient|

        double target_load(std::size_t k) const {
            return loads(static_cast<Index>(k));
        }
    };

    Fit fit(const IndexList& S, int i) const {
        Fit out;
        if (S.empty()) return out;
        Vector cov_si(static_cast<Index>(S.size()));
        for (std::size_t k = 0; k < S.size(); ++k)
            cov_si(static_cast<Index>(k)) = cov(S[k], i);
        out.beta = invert(submatrix(cov, S, S)) * cov_si;
        out.zero.resize(S.size());
        out.loads.resize(static_cast<Index>(S.size()));
        for (std::size_t k = 0; k < S.size(); ++k) {
            const double load =
                std::abs(out.beta(static_cast<Index>(k))) * sd(S[k]) / sd(i);
            out.loads(static_cast<Index>(k)) = load;
            out.zero[k] = load < tol;
        }
        return out;
    }

    struct Dependence {
        double ratio = 0.0;
        double fallback_ratio = 0.0;
    };

    Dependence residual_dependence(const IndexList& S, int i,
                                   const Vector& b) const {
        if (S.empty()) return {};
        // residual in noise coordinates: row i of A minus beta^T A_S
        Vector noise_row = A.row(i).transpose();
        for (std::size_t k = 0; k < S.size(); ++k)
            noise_row -= b(static_cast<Index>(k)) * A.row(S[k]).transpose();
        for (Index src = 0; src < A.cols(); ++src) {
            if (std::abs(noise_row(src)) <= tol) continue;
            for (int s : S)
                if (std::abs(A(s, src)) > tol) return {2.0, 2.0};
        }
        return {};
    }
};

// Peel "local leaves" bottom-up. Every remaining vertex is a candidate each
// round, ranked by how dependent its regression residual remains; edges are
// recorded only for leaves whose regression loads on the target (the target
// itself and its children). A vertex that stops loading on the target is a
// finished spouse: it sheds no edges when peeled, and when no leaf is
// acceptable the most finished one is dropped to unblock hidden-confounded
// spouse clusters. A cyclic neighbourhood leaves neither a leaf nor a
// droppable vertex, which is the assertion failure.
template <typename Moments>
LocalModel peel_local_leaves(int target, const IndexList& blanket,
                             const Moments& mom) {
    std::set<int> u(blanket.begin(), blanket.end());
    u.insert(target);
    LocalModel model;

    while (!u.empty()) {
        // rank candidates by residual dependence, but never take the target
        // while any other candidate passes: accepting the target ends the
        // peel, so a premature pass there (a child still unpeeled) is fatal,
        // whereas deferring it is always safe
        struct Candidate {
            int vertex = -1;
            double ratio = std::numeric_limits<double>::infinity();
            double fallback = std::numeric_limits<double>::infinity();
            typename Moments::Fit fit;
            IndexList rest;
            int target_pos = -1;
        };
        Candidate best_other, target_cand;
        for (int j : u) {
            IndexList rest;
            int target_pos = -1;
            for (int v : u)
                if (v != j) {
                    if (v == target) target_pos = static_cast<int>(rest.size());
                    rest.push_back(v);
                }
            auto fit = mom.fit(rest, j);
            const auto dep = mom.residual_dependence(rest, j, fit.beta);
            Candidate& slot = j == target ? target_cand : best_other;
            if (dep.ratio < slot.ratio) {
                slot.vertex = j;
                slot.ratio = dep.ratio;
                slot.fallback = dep.fallback_ratio;
                slot.fit = std::move(fit);
                slot.rest = std::move(rest);
                slot.target_pos = target_pos;
            }
        }
        // near-threshold rejections of true leaves are far more common than
        // non-leaves slipping under the strict fallback level, so exhaust
        // both tiers of non-target candidates before ending at the target
        Candidate* chosen = nullptr;
        if (best_other.vertex >= 0 && best_other.ratio <= 1.0)
            chosen = &best_other;
        else if (best_other.vertex >= 0 && best_other.fallback <= 1.0)
            chosen = &best_other;
        else if (target_cand.vertex >= 0 && target_cand.ratio <= 1.0)
            chosen = &target_cand;
        else if (target_cand.vertex >= 0 && target_cand.fallback <= 1.0)
            chosen = &target_cand;

        const int leaf = chosen ? chosen->vertex : -1;

        if (leaf < 0) {
            // no acceptable leaf: drop the vertex most plausibly finished
            // with the target, if any; otherwise the model is cyclic or the
            // blanket is wrong
            int drop = -1;
            double weakest = std::numeric_limits<double>::infinity();
            for (int k : u) {
                if (k == target) continue;
                IndexList rest;
                int target_pos = -1;
                for (int v : u)
                    if (v != k) {
                        if (v == target)
                            target_pos = static_cast<int>(rest.size());
                        rest.push_back(v);
                    }
                const auto fit = mom.fit(rest, k);
                const double load =
                    fit.target_load(static_cast<std::size_t>(target_pos));
                if (fit.zero[static_cast<std::size_t>(target_pos)] &&
                    load < weakest) {
                    weakest = load;
                    drop = k;
                }
            }
            if (drop < 0)
                throw AssertionViolated(
                    "inverse_direct_lingam: no independent residual; the "
                    "model is cyclic or the blanket is wrong");
            u.erase(drop);
            continue;
        }

        const bool loads_on_target =
            leaf == target ||
            !chosen->fit.zero[static_cast<std::size_t>(chosen->target_pos)];
        if (loads_on_target) {
            // refit on the selected parents alone: the full-set coefficients
            // carry avoidable variance from the nuisance regressors
            IndexList selected;
            for (std::size_t k = 0; k < chosen->rest.size(); ++k)
                if (!chosen->fit.zero[k]) selected.push_back(chosen->rest[k]);
            if (!selected.empty()) {
                const auto refit = mom.fit(selected, leaf);
                for (std::size_t k = 0; k < selected.size(); ++k)
                    model.edges.push_back(
                        {selected[k], leaf, refit.beta(static_cast<Index>(k))});
            }
        }
        if (leaf == target) break;
        u.erase(leaf);
    }
    model.canonicalize();
    return model;
}

}  // namespace detail

// Bottom-up local discovery for acyclic models: repeatedly find a remaining
// vertex whose regression residual is independent of the rest (a local
// leaf), record its incoming weighted edges, and peel it, stopping at the
// target. Spouses that stop loading on the target are dropped first.
inline LocalModel inverse_direct_lingam(int target, const IndexList& blanket,
                                        const Dataset& data,
                                        const DiscoveryConfig& cfg = {}) {
    if (target < 0 || target >= data.d())
        throw Error("inverse_direct_lingam: bad target");
    HsicOptions hsic = cfg.hsic;
    // the residual tests gate structural decisions; pool subsample blocks
    // for power instead of settling for one capped draw
    hsic.max_blocks = std::max(hsic.max_blocks, 5);
    detail::EmpiricalMoments mom(data.values, cfg.alpha, cfg.regression_t_crit,
                                 hsic);
    return detail::peel_local_leaves(target, blanket, mom);
}

// Same peeling on model-implied moments: exact covariance and an algebraic
// residual-independence decision. Test oracle for the asymptotic claims.
inline LocalModel inverse_direct_lingam_population(const WeightedDigraph& g,
                                                   const Vector& omega,
                                                   int target,
                                                   const IndexList& blanket,
                                                   double zero_tol = 1e-9) {
    detail::ModelMoments mom(g, omega);
    mom.tol = zero_tol;
    return detail::peel_local_leaves(target, blanket, mom);
}

}  // namespace lingd
