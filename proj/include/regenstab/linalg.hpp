#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "regenstab/errors.hpp"

namespace regenstab {

namespace detail {

template <typename Derived>
void require_square_finite(const Eigen::MatrixBase<Derived>& A, const char* who) {
    if (A.rows() != A.cols()) throw ValidationError(std::string(who) + ": matrix must be square");
    if (!A.allFinite()) throw ValidationError(std::string(who) + ": matrix has non-finite entries");
}

}  // namespace detail

/**
 * Matrix exponential by scaling-and-squaring with a degree-13 Pade
 * approximant. The scaling power is chosen so the scaled 1-norm stays below
 * the standard degree-13 threshold 5.372, then the approximant is squared
 * back up.
 */
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> expm(
    const Eigen::MatrixBase<Derived>& A_in) {
    using Scalar = typename Derived::Scalar;
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    detail::require_square_finite(A_in, "expm");

    const Eigen::Index n = A_in.rows();
    Mat A = A_in;
    const double theta13 = 5.371920351148152;
    const double norm1 = static_cast<double>(A.cwiseAbs().colwise().sum().maxCoeff());

    int squarings = 0;
    if (norm1 > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
        A /= Scalar(std::pow(2.0, squarings));
    }

    static const double b[14] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};

    const Mat I = Mat::Identity(n, n);
    const Mat A2 = A * A;
    const Mat A4 = A2 * A2;
    const Mat A6 = A2 * A4;

    const Mat U = A * (A6 * (Scalar(b[13]) * A6 + Scalar(b[11]) * A4 + Scalar(b[9]) * A2) +
                       Scalar(b[7]) * A6 + Scalar(b[5]) * A4 + Scalar(b[3]) * A2 + Scalar(b[1]) * I);
    const Mat V = A6 * (Scalar(b[12]) * A6 + Scalar(b[10]) * A4 + Scalar(b[8]) * A2) +
                  Scalar(b[6]) * A6 + Scalar(b[4]) * A4 + Scalar(b[2]) * A2 + Scalar(b[0]) * I;

    Mat F = (V - U).partialPivLu().solve(V + U);
    for (int k = 0; k < squarings; ++k) F = F * F;
    return F;
}

/// e^{A t} for t >= 0.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> expm(
    const Eigen::MatrixBase<Derived>& A, double t) {
    if (t < 0) throw ValidationError("expm: time must be nonnegative");
    return expm((A * typename Derived::Scalar(t)).eval());
}

/**
 * Integral of the matrix exponential, int_a^b e^{F t} dt, computed without
 * quadrature from the augmented exponential
 *
 *   exp([[F, I], [0, 0]] t) = [[e^{Ft}, int_0^t e^{F tau} dtau], [0, I]]
 *
 * evaluated at b and a.
 */
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> expm_integral(
    const Eigen::MatrixBase<Derived>& F, double a, double b) {
    using Scalar = typename Derived::Scalar;
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    detail::require_square_finite(F, "expm_integral");
    if (a > b) throw ValidationError("expm_integral: interval endpoints out of order");

    const Eigen::Index n = F.rows();
    Mat M = Mat::Zero(2 * n, 2 * n);
    M.topLeftCorner(n, n) = F;
    M.topRightCorner(n, n) = Mat::Identity(n, n);

    const Mat psi_b = expm((M * Scalar(b)).eval()).topRightCorner(n, n);
    if (a == 0.0) return psi_b;
    const Mat psi_a = expm((M * Scalar(a)).eval()).topRightCorner(n, n);
    return psi_b - psi_a;
}

/**
 * Exponential convolution int_0^t e^{(t - tau) F1} e^{tau F2} dtau, read off
 * as the top-right block of the block-triangular exponential
 * exp([[F1, I], [0, F2]] t).
 */
template <typename Derived1, typename Derived2>
Eigen::Matrix<typename Derived1::Scalar, Eigen::Dynamic, Eigen::Dynamic> expm_convolution(
    const Eigen::MatrixBase<Derived1>& F1, const Eigen::MatrixBase<Derived2>& F2, double t) {
    using Scalar = typename Derived1::Scalar;
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    detail::require_square_finite(F1, "expm_convolution");
    detail::require_square_finite(F2, "expm_convolution");
    if (F1.rows() != F2.rows())
        throw ValidationError("expm_convolution: blocks must have equal dimensions");
    if (t < 0) throw ValidationError("expm_convolution: time must be nonnegative");

    const Eigen::Index n = F1.rows();
    Mat M = Mat::Zero(2 * n, 2 * n);
    M.topLeftCorner(n, n) = F1;
    M.topRightCorner(n, n) = Mat::Identity(n, n);
    M.bottomRightCorner(n, n) = F2;
    return expm((M * Scalar(t)).eval()).topRightCorner(n, n);
}

struct SpectralResult {
    double radius = 0.0;
    std::complex<double> dominant_eigenvalue{0.0, 0.0};
    long iterations = 0;
    bool converged = false;
};

namespace detail {

/**
 * Eigenvalues of an upper Hessenberg matrix by Francis double-shift QR with
 * deflation (classic EISPACK hqr, eigenvalues only). Returns false when the
 * sweep cap is hit; whatever diagonal information is left becomes the best
 * estimate.
 */
template <typename Scalar>
bool hessenberg_eigenvalues(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& H,
                            std::vector<std::complex<double>>& eigs, double tol, long max_sweeps,
                            long& sweeps) {
    const long nn = H.rows();
    const long low = 0;
    long n = nn - 1;
    double exshift = 0.0;
    double p = 0, q = 0, r = 0, s = 0, z = 0, t, w, x, y;
    sweeps = 0;
    eigs.clear();
    eigs.reserve(static_cast<std::size_t>(nn));

    double hnorm = 0.0;
    for (long i = 0; i < nn; ++i)
        for (long j = std::max(i - 1, 0l); j < nn; ++j) hnorm += std::abs(static_cast<double>(H(i, j)));
    if (hnorm == 0.0) {
        eigs.assign(static_cast<std::size_t>(nn), {0.0, 0.0});
        return true;
    }

    long iter = 0;
    while (n >= low) {
        // Look for a single negligible subdiagonal element.
        long l = n;
        while (l > low) {
            s = std::abs(static_cast<double>(H(l - 1, l - 1))) + std::abs(static_cast<double>(H(l, l)));
            if (s == 0.0) s = hnorm;
            if (std::abs(static_cast<double>(H(l, l - 1))) < tol * s) break;
            --l;
        }

        if (l == n) {
            eigs.emplace_back(static_cast<double>(H(n, n)) + exshift, 0.0);
            --n;
            iter = 0;
        } else if (l == n - 1) {
            w = static_cast<double>(H(n, n - 1)) * static_cast<double>(H(n - 1, n));
            p = (static_cast<double>(H(n - 1, n - 1)) - static_cast<double>(H(n, n))) / 2.0;
            q = p * p + w;
            z = std::sqrt(std::abs(q));
            x = static_cast<double>(H(n, n)) + exshift;
            if (q >= 0.0) {
                z = (p >= 0.0) ? p + z : p - z;
                eigs.emplace_back(x + z, 0.0);
                eigs.emplace_back(z != 0.0 ? x - w / z : x + z, 0.0);
            } else {
                eigs.emplace_back(x + p, z);
                eigs.emplace_back(x + p, -z);
            }
            n -= 2;
            iter = 0;
        } else {
            if (sweeps >= max_sweeps) {
                // Best effort: report the remaining diagonal as estimates.
                for (long i = low; i <= n; ++i)
                    eigs.emplace_back(static_cast<double>(H(i, i)) + exshift, 0.0);
                return false;
            }

            x = static_cast<double>(H(n, n));
            y = static_cast<double>(H(n - 1, n - 1));
            w = static_cast<double>(H(n, n - 1)) * static_cast<double>(H(n - 1, n));
            if (iter == 10 || iter == 20) {
                // Exceptional shift.
                exshift += x;
                for (long i = low; i <= n; ++i) H(i, i) -= Scalar(x);
                s = std::abs(static_cast<double>(H(n, n - 1))) +
                    std::abs(static_cast<double>(H(n - 1, n - 2)));
                x = y = 0.75 * s;
                w = -0.4375 * s * s;
            }
            ++iter;
            ++sweeps;

            // Two consecutive small subdiagonals locate the start of the bulge.
            long m = n - 2;
            while (m >= l) {
                z = static_cast<double>(H(m, m));
                r = x - z;
                s = y - z;
                p = (r * s - w) / static_cast<double>(H(m + 1, m)) + static_cast<double>(H(m, m + 1));
                q = static_cast<double>(H(m + 1, m + 1)) - z - r - s;
                r = static_cast<double>(H(m + 2, m + 1));
                s = std::abs(p) + std::abs(q) + std::abs(r);
                p /= s;
                q /= s;
                r /= s;
                if (m == l) break;
                if (std::abs(static_cast<double>(H(m, m - 1))) * (std::abs(q) + std::abs(r)) <
                    tol * (std::abs(p) * (std::abs(static_cast<double>(H(m - 1, m - 1))) + std::abs(z) +
                                          std::abs(static_cast<double>(H(m + 1, m + 1))))))
                    break;
                --m;
            }
            for (long i = m + 2; i <= n; ++i) {
                H(i, i - 2) = Scalar(0);
                if (i > m + 2) H(i, i - 3) = Scalar(0);
            }

            // Double QR step chasing the bulge down rows l..n.
            for (long k = m; k <= n - 1; ++k) {
                const bool notlast = (k != n - 1);
                if (k != m) {
                    p = static_cast<double>(H(k, k - 1));
                    q = static_cast<double>(H(k + 1, k - 1));
                    r = notlast ? static_cast<double>(H(k + 2, k - 1)) : 0.0;
                    x = std::abs(p) + std::abs(q) + std::abs(r);
                    if (x == 0.0) continue;
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = std::sqrt(p * p + q * q + r * r);
                if (p < 0.0) s = -s;
                if (s != 0.0) {
                    if (k != m)
                        H(k, k - 1) = Scalar(-s * x);
                    else if (l != m)
                        H(k, k - 1) = -H(k, k - 1);
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;

                    for (long j = k; j <= n; ++j) {
                        t = static_cast<double>(H(k, j)) + q * static_cast<double>(H(k + 1, j));
                        if (notlast) {
                            t += r * static_cast<double>(H(k + 2, j));
                            H(k + 2, j) -= Scalar(t * z);
                        }
                        H(k, j) -= Scalar(t * x);
                        H(k + 1, j) -= Scalar(t * y);
                    }
                    for (long i = l; i <= std::min(n, k + 3); ++i) {
                        t = x * static_cast<double>(H(i, k)) + y * static_cast<double>(H(i, k + 1));
                        if (notlast) {
                            t += z * static_cast<double>(H(i, k + 2));
                            H(i, k + 2) -= Scalar(t * r);
                        }
                        H(i, k) -= Scalar(t);
                        H(i, k + 1) -= Scalar(t * q);
                    }
                }
            }
        }
    }
    return true;
}

}  // namespace detail

/**
 * Spectral radius via Hessenberg reduction followed by shifted QR iteration.
 * Deflation tolerance 1e-12 on subdiagonal entries, sweep cap 100 * dim;
 * when the cap is hit the result carries converged = false and the best
 * available estimate.
 */
template <typename Derived>
SpectralResult spectral_radius(const Eigen::MatrixBase<Derived>& A) {
    using Scalar = typename Derived::Scalar;
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    detail::require_square_finite(A, "spectral_radius");

    SpectralResult result;
    if (A.rows() == 0) {
        result.converged = true;
        return result;
    }
    if (A.rows() == 1) {
        result.radius = std::abs(static_cast<double>(A(0, 0)));
        result.dominant_eigenvalue = {static_cast<double>(A(0, 0)), 0.0};
        result.converged = true;
        return result;
    }

    Eigen::HessenbergDecomposition<Mat> hess(A.derived());
    Mat H = hess.matrixH();
    // The Hessenberg form has one explicit zero band below the subdiagonal
    // pattern already; clear rounding noise so the QR bookkeeping holds.
    for (Eigen::Index i = 2; i < H.rows(); ++i)
        for (Eigen::Index j = 0; j + 1 < i; ++j) H(i, j) = Scalar(0);

    std::vector<std::complex<double>> eigs;
    long sweeps = 0;
    const long cap = 100 * static_cast<long>(A.rows());
    result.converged = detail::hessenberg_eigenvalues(H, eigs, 1e-12, cap, sweeps);
    result.iterations = sweeps;
    for (const auto& lambda : eigs) {
        if (std::abs(lambda) >= result.radius) {
            result.radius = std::abs(lambda);
            result.dominant_eigenvalue = lambda;
        }
    }
    return result;
}

}  // namespace regenstab
