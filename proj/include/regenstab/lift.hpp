#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "regenstab/errors.hpp"

namespace regenstab {

/// Exponent tuple (alpha_1, ..., alpha_n) with sum equal to the lift degree.
using MultiIndex = std::vector<int>;

/// Largest supported lift degree. Dimensions grow like C(n+m-1, m); callers
/// that need more should not be using dense lifts.
inline constexpr int kMaxLiftDegree = 8;

/// Number of degree-m monomials in n variables, C(n+m-1, m).
/// Throws DimensionError on overflow or degree outside [1, kMaxLiftDegree].
inline Eigen::Index lift_dimension(int n, int m) {
    if (n < 1) throw ValidationError("lift_dimension: state dimension must be >= 1");
    if (m < 1 || m > kMaxLiftDegree)
        throw DimensionError("lift_dimension: degree " + std::to_string(m) +
                             " outside supported range [1, " + std::to_string(kMaxLiftDegree) + "]");
    // C(n+m-1, m) incrementally; guard each multiply.
    std::uint64_t value = 1;
    for (int k = 1; k <= m; ++k) {
        const std::uint64_t factor = static_cast<std::uint64_t>(n - 1 + k);
        if (value > (UINT64_MAX / factor))
            throw DimensionError("lift_dimension: binomial overflow for n=" + std::to_string(n) +
                                 ", m=" + std::to_string(m));
        value = value * factor / static_cast<std::uint64_t>(k);
    }
    constexpr std::uint64_t kMaxDim = std::uint64_t{1} << 30;
    if (value > kMaxDim)
        throw DimensionError("lift_dimension: lifted dimension " + std::to_string(value) +
                             " too large for dense storage");
    return static_cast<Eigen::Index>(value);
}

/**
 * Weighted monomial basis of the degree-m lift of R^n.
 *
 * Entry i corresponds to the monomial sqrt(w(alpha)) * x^alpha where
 * w(alpha) = m!/(alpha_1! ... alpha_n!) and the exponent tuples alpha are
 * ordered lexicographically descending, e.g. for n=2, m=2:
 * (2,0), (1,1), (0,2) giving the basis (x1^2, sqrt(2) x1 x2, x2^2).
 * With these weights the lift of a vector satisfies |x^(m)| = |x|^m.
 */
class LiftBasis {
  public:
    LiftBasis(int n, int m) : n_(n), m_(m), size_(lift_dimension(n, m)) {
        indices_.reserve(static_cast<std::size_t>(size_));
        MultiIndex scratch(static_cast<std::size_t>(n), 0);
        enumerate(0, m, scratch);
        coeffs_.resize(size_);
        for (Eigen::Index i = 0; i < size_; ++i) {
            coeffs_[i] = std::sqrt(static_cast<double>(multinomial(indices_[static_cast<std::size_t>(i)])));
            positions_.emplace(indices_[static_cast<std::size_t>(i)], i);
        }
    }

    int state_dim() const { return n_; }
    int degree() const { return m_; }
    Eigen::Index size() const { return size_; }

    const std::vector<MultiIndex>& indices() const { return indices_; }
    const MultiIndex& index(Eigen::Index i) const { return indices_[static_cast<std::size_t>(i)]; }

    /// sqrt of the multinomial weight of basis entry i.
    double coeff(Eigen::Index i) const { return coeffs_[static_cast<std::size_t>(i)]; }

    Eigen::Index position(const MultiIndex& alpha) const {
        auto it = positions_.find(alpha);
        if (it == positions_.end()) throw ValidationError("LiftBasis: exponent tuple not in basis");
        return it->second;
    }

    /// Stable textual label for entry i, e.g. "x1^2*x2" ("1" for the empty product).
    std::string label(Eigen::Index i) const {
        const MultiIndex& alpha = indices_[static_cast<std::size_t>(i)];
        std::string out;
        for (int j = 0; j < n_; ++j) {
            if (alpha[static_cast<std::size_t>(j)] == 0) continue;
            if (!out.empty()) out += "*";
            out += "x" + std::to_string(j + 1);
            if (alpha[static_cast<std::size_t>(j)] > 1)
                out += "^" + std::to_string(alpha[static_cast<std::size_t>(j)]);
        }
        return out.empty() ? "1" : out;
    }

    static std::uint64_t multinomial(const MultiIndex& alpha) {
        // m!/(alpha_1!...alpha_n!) built as a product of binomials; exact for m <= kMaxLiftDegree.
        std::uint64_t value = 1;
        int seen = 0;
        for (int a : alpha) {
            for (int k = 1; k <= a; ++k) value = value * static_cast<std::uint64_t>(seen + k) / static_cast<std::uint64_t>(k);
            seen += a;
        }
        return value;
    }

  private:
    void enumerate(int coord, int remaining, MultiIndex& scratch) {
        if (coord == n_ - 1) {
            scratch[static_cast<std::size_t>(coord)] = remaining;
            indices_.push_back(scratch);
            return;
        }
        for (int k = remaining; k >= 0; --k) {
            scratch[static_cast<std::size_t>(coord)] = k;
            enumerate(coord + 1, remaining - k, scratch);
        }
        scratch[static_cast<std::size_t>(coord)] = 0;
    }

    int n_;
    int m_;
    Eigen::Index size_;
    std::vector<MultiIndex> indices_;
    std::vector<double> coeffs_;
    std::map<MultiIndex, Eigen::Index> positions_;
};

enum class LiftKind { PowerLift, InfinitesimalLift };

/// Dense lifted matrix together with its provenance.
template <typename Scalar>
struct LiftedMatrix {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    int degree = 1;
    LiftKind kind = LiftKind::PowerLift;
    Mat mat;

    Eigen::Index dimension() const { return mat.rows(); }
};

/**
 * Degree-m lift of a vector: entry alpha is sqrt(w(alpha)) * prod_i x_i^alpha_i.
 * Satisfies |lift_vector(x, m)| = |x|^m.
 */
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> lift_vector(const Eigen::MatrixBase<Derived>& x,
                                                                       const LiftBasis& basis) {
    using Scalar = typename Derived::Scalar;
    if (x.size() != basis.state_dim())
        throw ValidationError("lift_vector: vector dimension does not match basis");
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(basis.size());
    for (Eigen::Index i = 0; i < basis.size(); ++i) {
        const MultiIndex& alpha = basis.index(i);
        Scalar mono = Scalar(1);
        for (int j = 0; j < basis.state_dim(); ++j)
            for (int k = 0; k < alpha[static_cast<std::size_t>(j)]; ++k) mono *= x(j);
        out(i) = Scalar(basis.coeff(i)) * mono;
    }
    return out;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> lift_vector(const Eigen::MatrixBase<Derived>& x,
                                                                       int degree) {
    return lift_vector(x, LiftBasis(static_cast<int>(x.size()), degree));
}

/**
 * Power lift A -> A^(m): the unique matrix with lift(A x) = A^(m) lift(x).
 *
 * Built by exact multinomial expansion: for each output index alpha the
 * degree-m polynomial prod_i (sum_j A_ij x_j)^alpha_i is expanded monomial by
 * monomial and its coefficients are rescaled into the weighted basis.
 */
template <typename Derived>
LiftedMatrix<typename Derived::Scalar> lift_matrix(const Eigen::MatrixBase<Derived>& A, const LiftBasis& basis) {
    using Scalar = typename Derived::Scalar;
    using Poly = std::map<MultiIndex, Scalar>;
    const int n = basis.state_dim();
    if (A.rows() != A.cols() || A.rows() != n)
        throw ValidationError("lift_matrix: matrix must be square with dimension matching basis");

    LiftedMatrix<Scalar> lifted;
    lifted.degree = basis.degree();
    lifted.kind = LiftKind::PowerLift;
    lifted.mat.setZero(basis.size(), basis.size());

    for (Eigen::Index row = 0; row < basis.size(); ++row) {
        const MultiIndex& alpha = basis.index(row);
        Poly poly;
        poly.emplace(MultiIndex(static_cast<std::size_t>(n), 0), Scalar(1));
        for (int i = 0; i < n; ++i) {
            for (int rep = 0; rep < alpha[static_cast<std::size_t>(i)]; ++rep) {
                Poly next;
                for (const auto& [mono, c] : poly) {
                    for (int j = 0; j < n; ++j) {
                        if (A(i, j) == Scalar(0)) continue;
                        MultiIndex bumped = mono;
                        ++bumped[static_cast<std::size_t>(j)];
                        next[bumped] += c * A(i, j);
                    }
                }
                poly = std::move(next);
            }
        }
        for (const auto& [mono, c] : poly) {
            const Eigen::Index col = basis.position(mono);
            lifted.mat(row, col) = Scalar(basis.coeff(row)) * c / Scalar(basis.coeff(col));
        }
    }
    return lifted;
}

template <typename Derived>
LiftedMatrix<typename Derived::Scalar> lift_matrix(const Eigen::MatrixBase<Derived>& A, int degree) {
    return lift_matrix(A, LiftBasis(static_cast<int>(A.rows()), degree));
}

/**
 * Infinitesimal lift A -> A_(m): the generator of the lifted flow, i.e.
 * d lift(x)/dt = A_(m) lift(x) along dx/dt = A x, equivalently
 * exp(A_(m) t) = lift_matrix(exp(A t), m) for all t.
 *
 * Built exactly by the product rule: differentiating the weighted monomial of
 * alpha moves one exponent from coordinate i to coordinate j with coefficient
 * alpha_i * A_ij, rescaled between the two basis weights.
 */
template <typename Derived>
LiftedMatrix<typename Derived::Scalar> infinitesimal_lift(const Eigen::MatrixBase<Derived>& A,
                                                          const LiftBasis& basis) {
    using Scalar = typename Derived::Scalar;
    const int n = basis.state_dim();
    if (A.rows() != A.cols() || A.rows() != n)
        throw ValidationError("infinitesimal_lift: matrix must be square with dimension matching basis");

    LiftedMatrix<Scalar> lifted;
    lifted.degree = basis.degree();
    lifted.kind = LiftKind::InfinitesimalLift;
    lifted.mat.setZero(basis.size(), basis.size());

    for (Eigen::Index row = 0; row < basis.size(); ++row) {
        const MultiIndex& alpha = basis.index(row);
        for (int i = 0; i < n; ++i) {
            const int ai = alpha[static_cast<std::size_t>(i)];
            if (ai == 0) continue;
            for (int j = 0; j < n; ++j) {
                if (A(i, j) == Scalar(0)) continue;
                MultiIndex gamma = alpha;
                --gamma[static_cast<std::size_t>(i)];
                ++gamma[static_cast<std::size_t>(j)];
                const Eigen::Index col = basis.position(gamma);
                lifted.mat(row, col) +=
                    Scalar(ai) * A(i, j) * Scalar(basis.coeff(row)) / Scalar(basis.coeff(col));
            }
        }
    }
    return lifted;
}

template <typename Derived>
LiftedMatrix<typename Derived::Scalar> infinitesimal_lift(const Eigen::MatrixBase<Derived>& A, int degree) {
    return infinitesimal_lift(A, LiftBasis(static_cast<int>(A.rows()), degree));
}

}  // namespace regenstab
