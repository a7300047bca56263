#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <vector>

#include "plurispec/errors.hpp"
#include "plurispec/numeric.hpp"

namespace plurispec {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Largest singular value.
inline double spectral_norm(const CMatrix& m) {
    if (m.size() == 0) return 0.0;
    if (!m.allFinite()) throw numeric_error("spectral_norm: matrix has non-finite entries");
    Eigen::JacobiSVD<CMatrix> svd(m);
    return svd.singularValues()(0);
}

// All singular values, descending.
inline std::vector<double> singular_values(const CMatrix& m) {
    if (m.size() == 0) return {};
    if (!m.allFinite()) throw numeric_error("singular_values: matrix has non-finite entries");
    Eigen::JacobiSVD<CMatrix> svd(m);
    const auto& s = svd.singularValues();
    return std::vector<double>(s.data(), s.data() + s.size());
}

inline bool is_hermitian(const CMatrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

namespace detail {

// Strict triangularity up to rounding noise in the assembled entries. QR
// iterations scatter the eigenvalues of near-nilpotent truncations onto a
// circle of radius eps^{1/n}, so triangular spectra must be read off the
// diagonal instead.
inline bool is_triangular(const CMatrix& m, bool upper, double tol) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const bool off = upper ? (i > j) : (i < j);
            if (off && std::abs(m(i, j)) > tol) return false;
        }
    return true;
}

} // namespace detail

// Eigenvalues of a dense square matrix. Hermitian input (to 1e-12) goes through
// the self-adjoint solver so real spectra come out exactly real; triangular
// input (to rounding) is read off the diagonal; otherwise the general complex
// Schur path is used. Sorted by real part, then imaginary.
inline std::vector<cplx> eigenvalues(const CMatrix& m) {
    if (m.rows() != m.cols()) throw config_error("eigenvalues: matrix must be square");
    if (m.size() == 0) return {};
    if (!m.allFinite()) throw numeric_error("eigenvalues: matrix has non-finite entries");
    std::vector<cplx> out;
    const double tri_tol = 1e-14 * std::max(1.0, m.cwiseAbs().maxCoeff());
    if (detail::is_triangular(m, true, tri_tol) || detail::is_triangular(m, false, tri_tol)) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(m(i, i));
        std::sort(out.begin(), out.end(), [](cplx a, cplx b) {
            if (a.real() != b.real()) return a.real() < b.real();
            return a.imag() < b.imag();
        });
        return out;
    }
    if (is_hermitian(m, 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))) {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
        if (es.info() != Eigen::Success)
            throw numeric_error("eigenvalues: self-adjoint eigensolver did not converge");
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
            out.emplace_back(es.eigenvalues()(i), 0.0);
    } else {
        Eigen::ComplexEigenSolver<CMatrix> es(m, /*computeEigenvectors=*/false);
        if (es.info() != Eigen::Success)
            throw numeric_error("eigenvalues: eigensolver did not converge");
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
            out.push_back(es.eigenvalues()(i));
    }
    std::sort(out.begin(), out.end(), [](cplx a, cplx b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return out;
}

// Eigen-decomposition of a symmetric tridiagonal matrix, returning eigenvalues
// (ascending) and the first component of each normalized eigenvector. This is
// the Golub–Welsch ingredient: nodes are the eigenvalues and weights are
// mu0 * first_component^2.
inline void symmetric_tridiagonal_eigen(const std::vector<double>& diag,
                                        const std::vector<double>& subdiag,
                                        std::vector<double>& values,
                                        std::vector<double>& first_components) {
    const Eigen::Index n = static_cast<Eigen::Index>(diag.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        t(i, i) = diag[static_cast<std::size_t>(i)];
        if (i + 1 < n) {
            const double b = subdiag[static_cast<std::size_t>(i)];
            t(i, i + 1) = b;
            t(i + 1, i) = b;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    if (es.info() != Eigen::Success)
        throw numeric_error("symmetric_tridiagonal_eigen: eigensolver did not converge");
    values.resize(static_cast<std::size_t>(n));
    first_components.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        values[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
        first_components[static_cast<std::size_t>(i)] = es.eigenvectors()(0, i);
    }
}

} // namespace plurispec
