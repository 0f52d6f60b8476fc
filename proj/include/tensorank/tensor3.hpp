#pragma once

#include "tensorank/types.hpp"

#include <array>

namespace tensorank {

/// Dense third-order tensor with real entries.
///
/// Entries are held in a flat buffer in a fixed linear order: entry (i,j,k)
/// lives at position i*J*K + j*K + k, so the last index varies fastest.
/// Every identity in this library (vectorization, matricization, the
/// Khatri-Rao factorizations of the unfoldings) is stated relative to this
/// order, so it is part of the type's contract, not an implementation detail.
class Tensor3 {
public:
    /// Zero tensor of the given extents. Extents must be positive.
    Tensor3(Index i, Index j, Index k);

    /// Wraps an existing flat buffer (length i*j*k, linear order as above).
    /// Throws std::invalid_argument on length mismatch or non-finite entries.
    static Tensor3 from_data(Index i, Index j, Index k, Vector data);

    Index extent0() const { return dims_[0]; }
    Index extent1() const { return dims_[1]; }
    Index extent2() const { return dims_[2]; }
    std::array<Index, 3> dims() const { return dims_; }
    Index size() const { return data_.size(); }

    double operator()(Index i, Index j, Index k) const {
        return data_[(i * dims_[1] + j) * dims_[2] + k];
    }
    double& operator()(Index i, Index j, Index k) {
        return data_[(i * dims_[1] + j) * dims_[2] + k];
    }

    const Vector& data() const { return data_; }
    Vector& data() { return data_; }

    double frobenius_norm() const { return data_.norm(); }

    /// Throws std::invalid_argument if any entry is NaN or infinite.
    void require_finite() const;

private:
    std::array<Index, 3> dims_;
    Vector data_;
};

/// Flat view of the tensor entries, (i,j,k) at position i*J*K + j*K + k.
/// Returns a reference to the internal buffer; no copy is made.
inline const Vector& vectorize(const Tensor3& t) { return t.data(); }

/// Inverse of vectorize: rebuilds the tensor from a flat buffer of length
/// i*j*k. Exact (bit-level) round trip with vectorize.
Tensor3 devectorize(const Vector& v, Index i, Index j, Index k);

/// Mode-m unfolding, m in {1,2,3}. Row index is the mode-m tensor index; the
/// column order is the one under which the unfoldings of a CP-form tensor
/// factor through Khatri-Rao products:
///   mode 1:  I  x JK,  column k*J + j      (A1 = X D (Z kr Y)^T)
///   mode 2:  J  x IK,  column k*I + i      (A2 = Y D (Z kr X)^T)
///   mode 3:  K  x IJ,  column j*I + i      (A3 = Z D (Y kr X)^T)
/// Throws std::invalid_argument for any other mode.
Matrix matricize(const Tensor3& t, int mode);

/// Kronecker product of two vectors: result[(i)*n + j] = x[i]*y[j] where
/// n = y.size(). Output length is x.size()*y.size().
Vector kronecker(const Vector& x, const Vector& y);

/// Column-wise Khatri-Rao product: column r of the result is
/// kronecker(X.col(r), Y.col(r)). X and Y must have the same column count.
Matrix khatri_rao(const Matrix& X, const Matrix& Y);

} // namespace tensorank
