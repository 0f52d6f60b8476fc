#pragma once

// Reference implementations used only as test oracles. Everything here is
// written straight from the definitions with element loops; none of it shares
// code or algebraic shortcuts with the library, so a bug there cannot cancel
// out here.

#include "tensorank/cp_model.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using tensorank::CpFactors;
using tensorank::Index;
using tensorank::Matrix;
using tensorank::Tensor3;
using tensorank::Vector;

inline double cp_entry(const CpFactors& f, Index i, Index j, Index k) {
    double acc = 0.0;
    for (Index r = 0; r < f.rank(); ++r)
        acc += f.alpha[r] * f.X(i, r) * f.Y(j, r) * f.Z(k, r);
    return acc;
}

inline Tensor3 reconstruct_loops(const CpFactors& f) {
    Tensor3 t(f.X.rows(), f.Y.rows(), f.Z.rows());
    for (Index i = 0; i < t.extent0(); ++i)
        for (Index j = 0; j < t.extent1(); ++j)
            for (Index k = 0; k < t.extent2(); ++k)
                t(i, j, k) = cp_entry(f, i, j, k);
    return t;
}

// The index formula itself: entry (i,j,k) at flat position i*J*K + j*K + k.
inline Vector vectorize_loops(const Tensor3& t) {
    Vector v(t.size());
    for (Index i = 0; i < t.extent0(); ++i)
        for (Index j = 0; j < t.extent1(); ++j)
            for (Index k = 0; k < t.extent2(); ++k)
                v[i * t.extent1() * t.extent2() + j * t.extent2() + k] = t(i, j, k);
    return v;
}

inline double misfit_half(const Tensor3& a, const CpFactors& f) {
    double acc = 0.0;
    for (Index i = 0; i < a.extent0(); ++i)
        for (Index j = 0; j < a.extent1(); ++j)
            for (Index k = 0; k < a.extent2(); ++k) {
                const double d = a(i, j, k) - cp_entry(f, i, j, k);
                acc += d * d;
            }
    return 0.5 * acc;
}

// Central finite differences of the smooth misfit in a single entry of one
// factor block (0 = X, 1 = Y, 2 = Z).
inline double fd_factor_entry(const Tensor3& a, CpFactors f, int block, Index row, Index col,
                              double h) {
    Matrix& m = block == 0 ? f.X : block == 1 ? f.Y : f.Z;
    m(row, col) += h;
    const double up = misfit_half(a, f);
    m(row, col) -= 2.0 * h;
    const double dn = misfit_half(a, f);
    return (up - dn) / (2.0 * h);
}

inline double fd_alpha_entry(const Tensor3& a, CpFactors f, Index r, double h) {
    f.alpha[r] += h;
    const double up = misfit_half(a, f);
    f.alpha[r] -= 2.0 * h;
    const double dn = misfit_half(a, f);
    return (up - dn) / (2.0 * h);
}

// Spearman rank correlation with average ranks on ties.
inline double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    auto ranks = [](const std::vector<double>& v) {
        const size_t n = v.size();
        std::vector<size_t> order(n);
        std::iota(order.begin(), order.end(), size_t(0));
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
        std::vector<double> rank(n);
        size_t i = 0;
        while (i < n) {
            size_t j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]])
                ++j;
            const double avg = (double(i) + double(j)) / 2.0 + 1.0;
            for (size_t t = i; t <= j; ++t)
                rank[order[t]] = avg;
            i = j + 1;
        }
        return rank;
    };
    const std::vector<double> rx = ranks(xs), ry = ranks(ys);
    const size_t n = xs.size();
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix m(rows, cols);
    for (Index c = 0; c < cols; ++c)
        for (Index r = 0; r < rows; ++r)
            m(r, c) = gauss(rng);
    return m;
}

inline Vector random_vector(Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector v(n);
    for (Index i = 0; i < n; ++i)
        v[i] = gauss(rng);
    return v;
}

inline Matrix normalized_columns(Matrix m) {
    for (Index c = 0; c < m.cols(); ++c)
        m.col(c) /= m.col(c).norm();
    return m;
}

// Arbitrary factors: columns are random directions (unit norm), alpha is a
// spread of positive and negative scales.
inline CpFactors random_factors(Index i, Index j, Index k, Index r, std::mt19937_64& rng,
                                bool normalized = true) {
    CpFactors f;
    f.X = random_matrix(i, r, rng);
    f.Y = random_matrix(j, r, rng);
    f.Z = random_matrix(k, r, rng);
    if (normalized) {
        f.X = normalized_columns(f.X);
        f.Y = normalized_columns(f.Y);
        f.Z = normalized_columns(f.Z);
    }
    f.alpha = random_vector(r, rng);
    return f;
}

inline Tensor3 random_tensor(Index i, Index j, Index k, std::mt19937_64& rng) {
    Tensor3 t(i, j, k);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (Index n = 0; n < t.size(); ++n)
        t.data()[n] = gauss(rng);
    return t;
}

} // namespace oracle
