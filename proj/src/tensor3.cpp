#include "tensorank/tensor3.hpp"

#include <stdexcept>
#include <string>

namespace tensorank {

Tensor3::Tensor3(Index i, Index j, Index k) : dims_{i, j, k} {
    if (i < 1 || j < 1 || k < 1)
        throw std::invalid_argument("Tensor3: extents must be positive, got " +
                                    std::to_string(i) + "x" + std::to_string(j) + "x" +
                                    std::to_string(k));
    data_ = Vector::Zero(i * j * k);
}

Tensor3 Tensor3::from_data(Index i, Index j, Index k, Vector data) {
    Tensor3 t(i, j, k);
    if (data.size() != t.size())
        throw std::invalid_argument("Tensor3::from_data: buffer length " +
                                    std::to_string(data.size()) + " does not match extents " +
                                    std::to_string(i) + "x" + std::to_string(j) + "x" +
                                    std::to_string(k));
    t.data_ = std::move(data);
    t.require_finite();
    return t;
}

void Tensor3::require_finite() const {
    if (!data_.allFinite())
        throw std::invalid_argument("Tensor3: entries must be finite");
}

Tensor3 devectorize(const Vector& v, Index i, Index j, Index k) {
    return Tensor3::from_data(i, j, k, v);
}

Matrix matricize(const Tensor3& t, int mode) {
    const Index I = t.extent0(), J = t.extent1(), K = t.extent2();
    switch (mode) {
    case 1: {
        Matrix m(I, J * K);
        for (Index i = 0; i < I; ++i)
            for (Index k = 0; k < K; ++k)
                for (Index j = 0; j < J; ++j)
                    m(i, k * J + j) = t(i, j, k);
        return m;
    }
    case 2: {
        Matrix m(J, I * K);
        for (Index j = 0; j < J; ++j)
            for (Index k = 0; k < K; ++k)
                for (Index i = 0; i < I; ++i)
                    m(j, k * I + i) = t(i, j, k);
        return m;
    }
    case 3: {
        Matrix m(K, I * J);
        for (Index k = 0; k < K; ++k)
            for (Index j = 0; j < J; ++j)
                for (Index i = 0; i < I; ++i)
                    m(k, j * I + i) = t(i, j, k);
        return m;
    }
    default:
        throw std::invalid_argument("matricize: mode must be 1, 2 or 3, got " +
                                    std::to_string(mode));
    }
}

Vector kronecker(const Vector& x, const Vector& y) {
    const Index m = x.size(), n = y.size();
    Vector out(m * n);
    for (Index i = 0; i < m; ++i)
        out.segment(i * n, n) = x[i] * y;
    return out;
}

Matrix khatri_rao(const Matrix& X, const Matrix& Y) {
    if (X.cols() != Y.cols())
        throw std::invalid_argument("khatri_rao: column counts differ (" +
                                    std::to_string(X.cols()) + " vs " +
                                    std::to_string(Y.cols()) + ")");
    Matrix out(X.rows() * Y.rows(), X.cols());
    for (Index r = 0; r < X.cols(); ++r)
        out.col(r) = kronecker(X.col(r), Y.col(r));
    return out;
}

} // namespace tensorank
