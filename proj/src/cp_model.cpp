#include "tensorank/cp_model.hpp"

#include <stdexcept>
#include <string>

namespace tensorank {

namespace {

void require_same_dims(const Tensor3& A, const CpFactors& f) {
    f.require_consistent();
    const auto d = f.dims();
    if (A.extent0() != d[0] || A.extent1() != d[1] || A.extent2() != d[2])
        throw std::invalid_argument("tensor extents do not match factor dimensions");
}

} // namespace

bool CpFactors::is_normalized(double tol) const {
    for (const Matrix* m : {&X, &Y, &Z})
        for (Index r = 0; r < m->cols(); ++r)
            if (std::abs(m->col(r).norm() - 1.0) > tol)
                return false;
    return true;
}

void CpFactors::require_consistent() const {
    const Index R = alpha.size();
    if (X.cols() != R || Y.cols() != R || Z.cols() != R)
        throw std::invalid_argument("CpFactors: factor column counts must equal alpha length " +
                                    std::to_string(R));
    if (X.rows() < 1 || Y.rows() < 1 || Z.rows() < 1 || R < 1)
        throw std::invalid_argument("CpFactors: empty factor block");
}

Tensor3 reconstruct(const CpFactors& f) {
    f.require_consistent();
    const Index I = f.X.rows(), J = f.Y.rows(), K = f.Z.rows();
    Vector acc = Vector::Zero(I * J * K);
    for (Index r = 0; r < f.rank(); ++r) {
        const Vector yz = kronecker(f.Y.col(r), f.Z.col(r));
        for (Index i = 0; i < I; ++i)
            acc.segment(i * J * K, J * K) += (f.alpha[r] * f.X(i, r)) * yz;
    }
    return Tensor3::from_data(I, J, K, std::move(acc));
}

UpdateMatrices update_matrices(const CpFactors& f) {
    f.require_consistent();
    UpdateMatrices m;
    m.U = f.alpha.asDiagonal() * khatri_rao(f.Z, f.Y).transpose();
    m.V = f.alpha.asDiagonal() * khatri_rao(f.Z, f.X).transpose();
    m.W = f.alpha.asDiagonal() * khatri_rao(f.Y, f.X).transpose();
    return m;
}

Matrix q_matrix(const CpFactors& f) {
    f.require_consistent();
    const Index I = f.X.rows(), J = f.Y.rows(), K = f.Z.rows();
    Matrix Q(f.rank(), I * J * K);
    for (Index r = 0; r < f.rank(); ++r) {
        const Vector yz = kronecker(f.Y.col(r), f.Z.col(r));
        for (Index i = 0; i < I; ++i)
            Q.row(r).segment(i * J * K, J * K) = f.X(i, r) * yz.transpose();
    }
    return Q;
}

ObjectiveValue objective(const Tensor3& A, const CpFactors& f, double lambda) {
    require_same_dims(A, f);
    const Tensor3 model = reconstruct(f);
    ObjectiveValue v;
    v.residual_half = 0.5 * (vectorize(A) - vectorize(model)).squaredNorm();
    v.l1_penalty = lambda * f.alpha.lpNorm<1>();
    v.total = v.residual_half + v.l1_penalty;
    return v;
}

Gradients gradients(const Tensor3& A, const CpFactors& f) {
    require_same_dims(A, f);
    const UpdateMatrices m = update_matrices(f);
    Gradients g;
    g.X = (f.X * m.U - matricize(A, 1)) * m.U.transpose();
    g.Y = (f.Y * m.V - matricize(A, 2)) * m.V.transpose();
    g.Z = (f.Z * m.W - matricize(A, 3)) * m.W.transpose();
    const Matrix Q = q_matrix(f);
    g.alpha = Q * (Q.transpose() * f.alpha - vectorize(A));
    return g;
}

Index count_nonzero(const Vector& alpha, double tol) {
    Index n = 0;
    for (Index r = 0; r < alpha.size(); ++r)
        if (std::abs(alpha[r]) > tol)
            ++n;
    return n;
}

} // namespace tensorank
