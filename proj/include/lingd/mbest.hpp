#pragma once

#include <cmath>
#include <set>
#include <vector>

#include "lingd/dataset.hpp"
#include "lingd/errors.hpp"
#include "lingd/graph.hpp"
#include "lingd/linalg.hpp"

namespace lingd {

struct LassoOptions {
    int max_sweeps = 10000;
    double kkt_tol = 1e-6;
};

// L1-penalised least squares, (1/2n)||y - Xb||^2 + lambda*|b|_1, by cyclic
// coordinate descent. Columns of X are standardised internally and the
// coefficients are reported on that standardised scale; zero-variance
// columns get coefficient zero.
inline Vector lasso(const Matrix& x, const Vector& y, double lambda,
                    const LassoOptions& opts = {}) {
    if (lambda < 0.0) throw Error("lasso: lambda must be nonnegative");
    const Index n = x.rows();
    const Index p = x.cols();
    if (y.size() != n) throw Error("lasso: size mismatch");
    if (n < 2) throw Error("lasso: need at least two samples");

    Matrix xs(n, p);
    std::vector<bool> live(static_cast<std::size_t>(p), true);
    for (Index j = 0; j < p; ++j) {
        const double mu = x.col(j).mean();
        const Vector c = x.col(j).array() - mu;
        const double sd = std::sqrt(c.squaredNorm() / static_cast<double>(n));
        if (sd == 0.0) {
            live[static_cast<std::size_t>(j)] = false;
            xs.col(j).setZero();
        } else {
            xs.col(j) = c / sd;
        }
    }
    Vector yc = y.array() - y.mean();

    Vector beta = Vector::Zero(p);
    Vector resid = yc;
    const double inv_n = 1.0 / static_cast<double>(n);
    auto soft = [](double v, double t) {
        if (v > t) return v - t;
        if (v < -t) return v + t;
        return 0.0;
    };

    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        for (Index j = 0; j < p; ++j) {
            if (!live[static_cast<std::size_t>(j)]) continue;
            const double rho = xs.col(j).dot(resid) * inv_n + beta(j);
            const double bnew = soft(rho, lambda);
            if (bnew != beta(j)) {
                resid += xs.col(j) * (beta(j) - bnew);
                beta(j) = bnew;
            }
        }
        // KKT residual: gradient matches the subdifferential everywhere
        double worst = 0.0;
        for (Index j = 0; j < p; ++j) {
            if (!live[static_cast<std::size_t>(j)]) continue;
            const double grad = xs.col(j).dot(resid) * inv_n;
            const double viol = beta(j) != 0.0
                                    ? std::abs(grad - lambda * (beta(j) > 0 ? 1.0 : -1.0))
                                    : std::max(0.0, std::abs(grad) - lambda);
            worst = std::max(worst, viol);
        }
        if (worst < opts.kkt_tol) return beta;
    }
    throw NoConvergence("lasso: sweep budget exhausted");
}

inline double default_lasso_lambda(Index d, Index n, double kappa = 0.5) {
    return kappa * std::sqrt(std::log(static_cast<double>(d)) /
                             static_cast<double>(n));
}

inline constexpr double kLassoZeroTol = 1e-8;

namespace detail {

// Standardised design without the target column, plus the standardised target.
struct NodewiseDesign {
    Matrix x;        // n x (d-1), unit-variance columns
    Vector y;        // centred, unit variance
    IndexList cols;  // original column index per design column
};

inline NodewiseDesign nodewise_design(const Dataset& data, int target) {
    const Index d = data.d();
    const Index n = data.n();
    NodewiseDesign out;
    out.x.resize(n, d - 1);
    for (Index j = 0; j < d; ++j) {
        if (j == target) continue;
        out.cols.push_back(static_cast<int>(j));
        const Vector c =
            data.values.col(j).array() - data.values.col(j).mean();
        const double sd = std::sqrt(c.squaredNorm() / static_cast<double>(n));
        out.x.col(static_cast<Index>(out.cols.size()) - 1) =
            sd > 0.0 ? Vector(c / sd) : Vector(Vector::Zero(n));
    }
    const Vector yc =
        data.values.col(target).array() - data.values.col(target).mean();
    const double sdy = std::sqrt(yc.squaredNorm() / static_cast<double>(n));
    if (sdy <= 0.0) throw DegenerateInput("nodewise: constant target column");
    out.y = yc / sdy;
    return out;
}

inline double refit_rss(const Matrix& x, const Vector& y,
                        const std::set<int>& support) {
    if (support.empty()) return y.squaredNorm();
    Matrix xa(x.rows(), static_cast<Index>(support.size()));
    Index k = 0;
    for (int j : support) xa.col(k++) = x.col(j);
    const Vector b = (xa.transpose() * xa).ldlt().solve(xa.transpose() * y);
    return (y - xa * b).squaredNorm();
}

}  // namespace detail

// Markov blanket of column T by nodewise sparse regression.
//
// With an explicit lambda the blanket is the support of a single lasso fit.
// By default the penalty is chosen per target: the lasso path is scored by
// BIC on an OLS refit of each support, and the winner is polished by greedy
// single add/drop moves under the same score. A fixed small-sample rate
// cannot balance misses against false picks here because the noise scales
// differ per variable; the path search can.
inline IndexList nodewise_lasso_mb(const Dataset& data, int target,
                                   double lambda = -1.0,
                                   const LassoOptions& opts = {}) {
    const Index d = data.d();
    const Index n = data.n();
    if (target < 0 || target >= d) throw Error("nodewise_lasso_mb: bad target");
    const auto design = detail::nodewise_design(data, target);
    const Index p = d - 1;

    if (lambda >= 0.0) {
        const Vector beta = lasso(design.x, design.y, lambda, opts);
        IndexList mb;
        for (Index k = 0; k < p; ++k)
            if (std::abs(beta(k)) > kLassoZeroTol)
                mb.push_back(design.cols[static_cast<std::size_t>(k)]);
        return mb;
    }

    const double penalty = std::log(static_cast<double>(n));
    auto score = [&](const std::set<int>& support) {
        const double rss = detail::refit_rss(design.x, design.y, support);
        return static_cast<double>(n) * std::log(rss / static_cast<double>(n)) +
               penalty * static_cast<double>(support.size());
    };

    const double lam_max =
        (design.x.transpose() * design.y).cwiseAbs().maxCoeff() /
        static_cast<double>(n);
    std::set<int> best;
    double best_score = score(best);
    for (int k = 0; k < 30; ++k) {
        const double lam = lam_max * std::pow(1e-3, k / 29.0);
        const Vector beta = lasso(design.x, design.y, lam, opts);
        std::set<int> support;
        for (Index j = 0; j < p; ++j)
            if (std::abs(beta(j)) > kLassoZeroTol)
                support.insert(static_cast<int>(j));
        const double s = score(support);
        if (s < best_score) {
            best_score = s;
            best = std::move(support);
        }
    }

    for (int pass = 0; pass < 2 * static_cast<int>(p); ++pass) {
        int move = -1;
        double candidate_score = best_score;
        for (Index j = 0; j < p; ++j) {
            std::set<int> trial = best;
            if (!trial.insert(static_cast<int>(j)).second)
                trial.erase(static_cast<int>(j));
            const double s = score(trial);
            if (s < candidate_score) {
                candidate_score = s;
                move = static_cast<int>(j);
            }
        }
        if (move < 0) break;
        if (!best.insert(move).second) best.erase(move);
        best_score = candidate_score;
    }

    IndexList mb;
    for (int j : best) mb.push_back(design.cols[static_cast<std::size_t>(j)]);
    return mb;
}

// Inverse covariance implied by (B, noise variances). Off-diagonal support
// is the moral graph: entry (j,i) couples direct edges and shared children.
inline Matrix theta_from_model(const Matrix& b, const Vector& omega) {
    const Index d = b.rows();
    if (omega.size() != d) throw Error("theta_from_model: size mismatch");
    if (omega.minCoeff() <= 0.0)
        throw Error("theta_from_model: variances must be positive");
    const Matrix imb = Matrix::Identity(d, d) - b;
    return imb.transpose() * omega.cwiseInverse().asDiagonal() * imb;
}

// Support of the inverse empirical correlation matrix above a threshold.
inline Adjacency inv_cov_moral_support(const Dataset& data,
                                       double threshold = 0.1) {
    const Index d = data.d();
    Matrix cov = covariance(data.values);
    Vector sd = cov.diagonal().cwiseSqrt();
    if (sd.minCoeff() <= 0.0)
        throw SingularMatrix("inv_cov_moral_support: constant column");
    Matrix corr = sd.cwiseInverse().asDiagonal() * cov *
                  sd.cwiseInverse().asDiagonal();
    const Matrix theta = invert(corr);
    Adjacency out = Adjacency::Constant(d, d, false);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j)
            if (i != j && std::abs(theta(i, j)) > threshold)
                out(i, j) = true;
    return out;
}

}  // namespace lingd
