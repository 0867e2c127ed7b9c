#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <vector>

#include "lingd/errors.hpp"

namespace lingd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using IndexList = std::vector<int>;

// Undirected adjacency (moral graphs, inverse-covariance supports).
using Adjacency = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double kPivotTol = 1e-12;
inline constexpr double kConditionBound = 1e12;
inline constexpr double kDefaultRankTol = 1e-7;

// Inverse via partial-pivot LU. Throws SingularMatrix when a pivot falls
// below kPivotTol or the reciprocal condition estimate is past kConditionBound.
inline Matrix invert(const Matrix& m) {
    if (m.rows() != m.cols())
        throw SingularMatrix("invert: matrix is not square");
    Eigen::PartialPivLU<Matrix> lu(m);
    const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(min_pivot >= kPivotTol))
        throw SingularMatrix("invert: pivot below tolerance");
    if (lu.rcond() < 1.0 / kConditionBound)
        throw SingularMatrix("invert: condition estimate exceeds bound");
    return lu.inverse();
}

// Number of singular values above tol * (largest singular value).
inline Index numerical_rank(const Matrix& m, double tol = kDefaultRankTol) {
    if (tol <= 0.0) throw Error("numerical_rank: tol must be positive");
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return 0;
    const double cutoff = tol * sv(0);
    Index r = 0;
    while (r < sv.size() && sv(r) > cutoff) ++r;
    return r;
}

// Largest eigenvalue magnitude over the full (possibly complex) spectrum.
inline double spectral_radius(const Matrix& m) {
    if (m.rows() != m.cols())
        throw Error("spectral_radius: matrix is not square");
    if (m.rows() == 0) return 0.0;
    Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw NoConvergence("spectral_radius: eigenvalue iteration failed");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Empirical covariance of row-wise samples, denominator n - 1.
inline Matrix covariance(const Matrix& samples) {
    const Index n = samples.rows();
    if (n < 2) throw Error("covariance: need at least two samples");
    const Matrix centered = samples.rowwise() - samples.colwise().mean();
    return (centered.transpose() * centered) / static_cast<double>(n - 1);
}

inline Matrix submatrix(const Matrix& m, const IndexList& rows,
                        const IndexList& cols) {
    Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            out(static_cast<Index>(i), static_cast<Index>(j)) =
                m(rows[i], cols[j]);
    return out;
}

// (A_{S,S})^{-1}: the demixer of the subset S implied by a mixing matrix A.
// Equals the Schur complement of the complement block of I - B in A = (I-B)^{-1}.
inline Matrix local_demixer(const Matrix& A, const IndexList& S) {
    if (S.empty()) throw Error("local_demixer: empty index set");
    for (int i : S)
        if (i < 0 || i >= A.rows())
            throw Error("local_demixer: index out of range");
    return invert(submatrix(A, S, S));
}

}  // namespace lingd
