#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "lingd/errors.hpp"
#include "lingd/linalg.hpp"
#include "lingd/rng.hpp"

namespace lingd {

enum class BandwidthRule { median_heuristic };
enum class Independence { independent, dependent };

struct HsicOptions {
    int n_max = 2000;             // subsample cap for the O(n^2) kernels
    int max_blocks = 1;           // pool up to this many disjoint subsamples
    bool use_permutation = false; // permutation null instead of the gamma fit
    int permutations = 500;
    std::uint64_t seed = 0;       // permutation draws only
};

namespace detail {

// Evenly strided row subsample; rows are exchangeable so no draw is needed.
inline Matrix subsample_rows(const Matrix& x, Index m) {
    const Index n = x.rows();
    if (n <= m) return x;
    Matrix out(m, x.cols());
    for (Index k = 0; k < m; ++k) out.row(k) = x.row((k * n) / m);
    return out;
}

inline Matrix pairwise_sqdist(const Matrix& x) {
    const Vector sq = x.rowwise().squaredNorm();
    Matrix d = (-2.0 * x * x.transpose()).colwise() + sq;
    d.rowwise() += sq.transpose();
    return d.cwiseMax(0.0);
}

// Gaussian kernel with sigma = median pairwise distance of the block.
inline Matrix gaussian_kernel(const Matrix& x) {
    Matrix d2 = pairwise_sqdist(x);
    const Index n = d2.rows();
    std::vector<double> offdiag;
    offdiag.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) offdiag.push_back(d2(i, j));
    auto mid = offdiag.begin() + offdiag.size() / 2;
    std::nth_element(offdiag.begin(), mid, offdiag.end());
    const double median_sq = *mid;
    if (median_sq <= 0.0)
        throw DegenerateInput("hsic: zero median pairwise distance");
    return (-d2 / (2.0 * median_sq)).array().exp();
}

inline void center_kernel(Matrix& k) {
    const Vector row_mean = k.rowwise().mean();
    const double total = row_mean.mean();
    k.colwise() -= row_mean;
    k.rowwise() -= row_mean.transpose();
    k.array() += total;
}

inline void check_block(const Matrix& x) {
    if (x.rows() < 10) throw Error("hsic: need at least 10 samples");
    if (!x.allFinite()) throw Error("hsic: non-finite entry");
    const Matrix c = x.rowwise() - x.colwise().mean();
    if (c.cwiseAbs().maxCoeff() == 0.0)
        throw DegenerateInput("hsic: zero-variance block");
}

// Regularised lower incomplete gamma P(a, x), series + continued fraction.
inline double gamma_p(double a, double x) {
    if (x <= 0.0) return 0.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        double term = 1.0 / a, sum = term, ap = a;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-15) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lg);
    }
    // Lentz continued fraction for Q(a, x)
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-15) break;
    }
    return 1.0 - std::exp(-x + a * std::log(x) - lg) * h;
}

// Quantile of Gamma(shape, scale) by bracketed bisection.
inline double gamma_quantile(double p, double shape, double scale) {
    double hi = shape * scale;
    while (gamma_p(shape, hi / scale) < p) hi *= 2.0;
    double lo = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (gamma_p(shape, mid / scale) < p ? lo : hi) = mid;
        if (hi - lo < 1e-12 * (1.0 + hi)) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

// Centered kernel matrix of one block plus the moments the gamma null needs.
// Computing this once per block lets many pairwise tests share the work.
struct KernelSummary {
    Matrix centered;  // H K H
    double mu = 0.0;  // off-diagonal mean of the uncentered kernel
};

inline KernelSummary kernel_summary(const Matrix& block,
                                    const HsicOptions& opts = {}) {
    detail::check_block(block);
    const Matrix sub = detail::subsample_rows(block, opts.n_max);
    KernelSummary out;
    out.centered = detail::gaussian_kernel(sub);
    const double n = static_cast<double>(sub.rows());
    out.mu = (out.centered.sum() - n) / (n * (n - 1.0));
    detail::center_kernel(out.centered);
    return out;
}

inline double hsic_statistic_kernels(const KernelSummary& a,
                                     const KernelSummary& b) {
    const double n = static_cast<double>(a.centered.rows());
    return a.centered.cwiseProduct(b.centered).sum() / (n * n);
}

// Statistic plus fitted gamma null; decisions at any level come from it.
struct HsicAnalysis {
    double stat = 0.0;   // n * HSIC_b
    double shape = 0.0;  // gamma parameters of the null; shape <= 0 marks a
    double scale = 0.0;  // degenerate fit (stat > 0 is then the decision)

    double threshold(double alpha) const {
        if (!(alpha > 0.0 && alpha < 1.0)) throw Error("hsic: alpha in (0,1)");
        if (shape <= 0.0) return 0.0;
        return detail::gamma_quantile(1.0 - alpha, shape, scale);
    }

    Independence decide(double alpha) const {
        return stat > threshold(alpha) ? Independence::dependent
                                       : Independence::independent;
    }
};

inline HsicAnalysis hsic_analyze_kernels(const KernelSummary& a,
                                         const KernelSummary& b) {
    if (a.centered.rows() != b.centered.rows())
        throw Error("hsic: kernel size mismatch");
    const double nd = static_cast<double>(a.centered.rows());
    HsicAnalysis out;
    double var_sum = 0.0;  // for the second gamma moment
    double var_diag = 0.0;
    for (Index j = 0; j < a.centered.cols(); ++j)
        for (Index i = 0; i < a.centered.rows(); ++i) {
            const double kl = a.centered(i, j) * b.centered(i, j);
            out.stat += kl;
            const double v = kl / 6.0;
            var_sum += v * v;
            if (i == j) var_diag += v * v;
        }
    out.stat /= nd;
    const double mean_h = (1.0 + a.mu * b.mu - a.mu - b.mu) / nd;
    double var_h = (var_sum - var_diag) / (nd * (nd - 1.0));
    var_h *= 72.0 * (nd - 4.0) * (nd - 5.0) /
             (nd * (nd - 1.0) * (nd - 2.0) * (nd - 3.0));
    if (mean_h > 0.0 && var_h > 0.0) {
        out.shape = mean_h * mean_h / var_h;
        out.scale = nd * var_h / mean_h;
    }
    return out;
}

// Analysis over up to max_blocks disjoint row subsamples: statistics add,
// and the summed null is moment-matched to a single gamma. Pooling blocks
// recovers test power that a lone subsample cap gives away.
inline HsicAnalysis hsic_analyze(const Matrix& x, const Matrix& y,
                                 const HsicOptions& opts = {}) {
    if (x.rows() != y.rows()) throw Error("hsic: sample count mismatch");
    const Index n = x.rows();
    const int blocks = std::max(
        1, std::min<int>(opts.max_blocks, static_cast<int>(n / opts.n_max)));
    if (blocks == 1)
        return hsic_analyze_kernels(kernel_summary(x, opts),
                                    kernel_summary(y, opts));
    HsicAnalysis total;
    double mean_sum = 0.0, var_sum = 0.0;
    bool degenerate = false;
    for (int b = 0; b < blocks; ++b) {
        const Index rows = n / blocks + (b < n % blocks ? 1 : 0);
        Matrix xb(rows, x.cols()), yb(rows, y.cols());
        for (Index i = 0; i < rows; ++i) {
            xb.row(i) = x.row(i * blocks + b);
            yb.row(i) = y.row(i * blocks + b);
        }
        const HsicAnalysis a = hsic_analyze_kernels(kernel_summary(xb, opts),
                                                    kernel_summary(yb, opts));
        total.stat += a.stat;
        if (a.shape <= 0.0) degenerate = true;
        mean_sum += a.shape * a.scale;
        var_sum += a.shape * a.scale * a.scale;
    }
    if (!degenerate && mean_sum > 0.0 && var_sum > 0.0) {
        total.shape = mean_sum * mean_sum / var_sum;
        total.scale = var_sum / mean_sum;
    }
    return total;
}

// Gamma-approximate level-alpha decision from precomputed kernel summaries.
inline Independence hsic_test_kernels(const KernelSummary& a,
                                      const KernelSummary& b, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("hsic: alpha in (0,1)");
    return hsic_analyze_kernels(a, b).decide(alpha);
}

// Biased V-statistic (1/n^2) tr(K H L H) with Gaussian kernels and median
// bandwidths per block. Throws DegenerateInput on a zero-variance block.
inline double hsic_statistic(const Matrix& x, const Matrix& y,
                             BandwidthRule = BandwidthRule::median_heuristic,
                             const HsicOptions& opts = {}) {
    if (x.rows() != y.rows()) throw Error("hsic: sample count mismatch");
    return hsic_statistic_kernels(kernel_summary(x, opts),
                                  kernel_summary(y, opts));
}

// Level-alpha test of independence. Default null: gamma fit to the first two
// moments of n*HSIC; a seeded permutation null behind the flag.
inline Independence hsic_test(const Matrix& x, const Matrix& y, double alpha,
                              const HsicOptions& opts = {}) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("hsic: alpha in (0,1)");
    if (x.rows() != y.rows()) throw Error("hsic: sample count mismatch");

    if (opts.use_permutation) {
        detail::check_block(x);
        detail::check_block(y);
        const Matrix xs = detail::subsample_rows(x, opts.n_max);
        const Matrix ys = detail::subsample_rows(y, opts.n_max);
        const Index n = xs.rows();
        const double nd = static_cast<double>(n);
        Matrix k = detail::gaussian_kernel(xs);
        Matrix l = detail::gaussian_kernel(ys);
        detail::center_kernel(k);
        detail::center_kernel(l);
        const double stat = k.cwiseProduct(l).sum() / nd;

        Rng rng(opts.seed);
        std::vector<Index> perm(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) perm[i] = i;
        std::vector<double> null_stats;
        null_stats.reserve(static_cast<std::size_t>(opts.permutations));
        for (int r = 0; r < opts.permutations; ++r) {
            rng.shuffle(perm);
            double s = 0.0;
            for (Index i = 0; i < n; ++i)
                for (Index j = 0; j < n; ++j) s += k(i, j) * l(perm[i], perm[j]);
            null_stats.push_back(s / nd);
        }
        std::sort(null_stats.begin(), null_stats.end());
        const auto idx = static_cast<std::size_t>(
            std::min<double>(null_stats.size() - 1.0,
                             std::floor((1.0 - alpha) * null_stats.size())));
        return stat > null_stats[idx] ? Independence::dependent
                                      : Independence::independent;
    }

    return hsic_test_kernels(kernel_summary(x, opts), kernel_summary(y, opts),
                             alpha);
}

}  // namespace lingd
