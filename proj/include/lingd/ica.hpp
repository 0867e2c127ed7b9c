#pragma once

#include <cmath>
#include <cstdint>

#include "lingd/errors.hpp"
#include "lingd/linalg.hpp"
#include "lingd/rng.hpp"

namespace lingd {

struct IcaOptions {
    int max_iter = 500;
    double tol = 1e-6;
    int restarts = 5;
    double whiten_rank_tol = 1e-10;
};

struct Whitened {
    Matrix z;           // n x m, identity covariance
    Matrix whitener;    // m x m: z = (x - mean) * whitener^T
    Matrix dewhitener;  // inverse transform
    Vector mean;
};

// PCA whitening. Throws SingularMatrix on a rank-deficient covariance.
inline Whitened whiten(const Matrix& x, double rank_tol = 1e-10) {
    const Index m = x.cols();
    Whitened out;
    out.mean = x.colwise().mean();
    const Matrix cov = covariance(x);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    if (eig.info() != Eigen::Success)
        throw NoConvergence("whiten: eigendecomposition failed");
    const Vector& values = eig.eigenvalues();  // ascending
    if (values(m - 1) <= 0.0 || values(0) <= rank_tol * values(m - 1))
        throw SingularMatrix("whiten: rank-deficient covariance");
    const Vector inv_sqrt = values.cwiseSqrt().cwiseInverse();
    out.whitener = inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
    out.dewhitener = eig.eigenvectors() * values.cwiseSqrt().asDiagonal();
    out.z = (x.rowwise() - out.mean.transpose()) * out.whitener.transpose();
    return out;
}

namespace detail {

inline Matrix random_orthogonal(Index m, Rng& rng) {
    Matrix g(m, m);
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < m; ++j) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < m; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

// W <- (W W^T)^{-1/2} W
inline Matrix symmetric_decorrelate(const Matrix& w) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(w * w.transpose());
    const Vector values = eig.eigenvalues().cwiseMax(1e-300);
    return eig.eigenvectors() *
           values.cwiseSqrt().cwiseInverse().asDiagonal() *
           eig.eigenvectors().transpose() * w;
}

}  // namespace detail

// Square FastICA with the log-cosh contrast and symmetric decorrelation.
// Returns the m x m demixing matrix in the original (unwhitened) coordinates;
// rows of W * (x - mean)^T are the estimated independent components.
// Restarts from fresh seeds before giving up with NoConvergence.
inline Matrix fastica(const Matrix& x, std::uint64_t seed,
                      const IcaOptions& opts = {}) {
    const Index n = x.rows();
    const Index m = x.cols();
    if (m < 2) throw Error("fastica: need at least two variables");
    if (n < 10 * m) throw Error("fastica: need at least 10*m samples");
    const Whitened wh = whiten(x, opts.whiten_rank_tol);
    const double inv_n = 1.0 / static_cast<double>(n);
    const Rng base(seed);

    for (int restart = 0; restart < opts.restarts; ++restart) {
        Rng rng = base.child(static_cast<std::uint64_t>(restart));
        Matrix w = detail::random_orthogonal(m, rng);
        bool converged = false;
        for (int iter = 0; iter < opts.max_iter && !converged; ++iter) {
            const Matrix y = wh.z * w.transpose();       // n x m components
            const Matrix g = y.array().tanh();
            const Vector g_prime_mean =
                (1.0 - g.array().square()).colwise().mean();
            Matrix w_new = (g.transpose() * wh.z) * inv_n -
                           g_prime_mean.asDiagonal() * w;
            w_new = detail::symmetric_decorrelate(w_new);
            double delta = 0.0;
            for (Index i = 0; i < m; ++i)
                delta = std::max(delta,
                                 1.0 - std::abs(w_new.row(i).dot(w.row(i))));
            w = w_new;
            converged = delta < opts.tol;
        }
        if (!converged) continue;
        // canonical row signs: largest-magnitude entry positive
        Matrix w_orig = w * wh.whitener;
        for (Index i = 0; i < m; ++i) {
            Index arg = 0;
            w_orig.row(i).cwiseAbs().maxCoeff(&arg);
            if (w_orig(i, arg) < 0.0) w_orig.row(i) = -w_orig.row(i);
        }
        return w_orig;
    }
    throw NoConvergence("fastica: no restart converged");
}

}  // namespace lingd
