#pragma once

#include "tensorank/tensor3.hpp"

namespace tensorank {

/// Rank-R canonical polyadic form of an I x J x K tensor:
///
///   sum_r alpha[r] * X.col(r) (outer) Y.col(r) (outer) Z.col(r)
///
/// The solver keeps every factor column at Euclidean norm 1 and carries the
/// component scale entirely in alpha, so that the l1 penalty on alpha is
/// meaningful. The struct itself does not enforce the normalization (some
/// callers, e.g. finite-difference checks, need perturbed columns); use
/// is_normalized() where the invariant matters.
struct CpFactors {
    Vector alpha; ///< component coefficients, length R
    Matrix X;     ///< I x R
    Matrix Y;     ///< J x R
    Matrix Z;     ///< K x R

    Index rank() const { return alpha.size(); }
    std::array<Index, 3> dims() const { return {X.rows(), Y.rows(), Z.rows()}; }

    /// True when every column of X, Y, Z has unit norm within tol.
    bool is_normalized(double tol = 1e-10) const;

    /// Throws std::invalid_argument when shapes are inconsistent
    /// (mismatched column counts or alpha length).
    void require_consistent() const;
};

/// Linear maps that carry a factor block to the corresponding unfolding of
/// the model tensor: with D = diag(alpha),
///   U = D (Z kr Y)^T   (R x JK),   so  matricize(model,1) = X U
///   V = D (Z kr X)^T   (R x IK),   so  matricize(model,2) = Y V
///   W = D (Y kr X)^T   (R x IJ),   so  matricize(model,3) = Z W
struct UpdateMatrices {
    Matrix U, V, W;
};

/// Objective split for 1/2 |A - model|_F^2 + lambda * |alpha|_1.
struct ObjectiveValue {
    double residual_half; ///< 1/2 squared Frobenius misfit
    double l1_penalty;    ///< lambda * |alpha|_1
    double total;         ///< residual_half + l1_penalty
};

/// Partial gradients of the smooth part f = 1/2 |A - model|_F^2.
struct Gradients {
    Matrix X;     ///< I x R, (X U - A1) U^T
    Matrix Y;     ///< J x R, (Y V - A2) V^T
    Matrix Z;     ///< K x R, (Z W - A3) W^T
    Vector alpha; ///< length R, Q (Q^T alpha - vectorize(A))
};

/// Dense evaluation of the CP form as a tensor. O(I*J*K*R).
Tensor3 reconstruct(const CpFactors& f);

UpdateMatrices update_matrices(const CpFactors& f);

/// Rows are the vectorized unit rank-one components: row r equals
/// kronecker(X.col(r), kronecker(Y.col(r), Z.col(r))), shape R x IJK.
/// vectorize(model) = Q^T alpha.
Matrix q_matrix(const CpFactors& f);

/// Evaluates 1/2 |A - reconstruct(f)|_F^2 + lambda * |alpha|_1.
/// Throws std::invalid_argument when dims of A and f disagree.
ObjectiveValue objective(const Tensor3& A, const CpFactors& f, double lambda);

/// All four partial gradients of the smooth misfit at f, computed from the
/// matricized normal forms above. Throws on dimension mismatch.
Gradients gradients(const Tensor3& A, const CpFactors& f);

/// Number of coefficients with |alpha[r]| > tol (strict). tol = 0 counts
/// exact nonzeros, which is the estimated rank after sparse solves.
Index count_nonzero(const Vector& alpha, double tol = 0.0);

} // namespace tensorank
