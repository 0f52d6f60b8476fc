#include "tensorank/tensor3.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

using namespace tensorank;

TEST_CASE("vectorize uses the fixed linear order, last index fastest") {
    // 2x2x2 with digits encoding the index: entry (i,j,k) = 100(i+1)+10(j+1)+(k+1)
    Tensor3 t(2, 2, 2);
    for (Index i = 0; i < 2; ++i)
        for (Index j = 0; j < 2; ++j)
            for (Index k = 0; k < 2; ++k)
                t(i, j, k) = 100.0 * double(i + 1) + 10.0 * double(j + 1) + double(k + 1);

    const Vector v = vectorize(t);
    const double expected[] = {111, 112, 121, 122, 211, 212, 221, 222};
    REQUIRE(v.size() == 8);
    for (Index n = 0; n < 8; ++n)
        CHECK(v[n] == expected[n]);
}

TEST_CASE("vectorize of a 1x1x1 tensor is the single entry") {
    Tensor3 t(1, 1, 1);
    t(0, 0, 0) = 42.5;
    CHECK(vectorize(t)[0] == 42.5);
}

TEST_CASE("vectorize matches the index-formula oracle on random shapes") {
    std::mt19937_64 rng(11);
    for (Index i = 1; i <= 4; ++i)
        for (Index j = 1; j <= 3; ++j)
            for (Index k = 1; k <= 5; k += 2) {
                const Tensor3 t = oracle::random_tensor(i, j, k, rng);
                CHECK(vectorize(t) == oracle::vectorize_loops(t));
            }
}

TEST_CASE("devectorize inverts vectorize bit for bit") {
    std::mt19937_64 rng(12);
    const Tensor3 t = oracle::random_tensor(3, 4, 5, rng);
    const Tensor3 back = devectorize(vectorize(t), 3, 4, 5);
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 4; ++j)
            for (Index k = 0; k < 5; ++k)
                CHECK(back(i, j, k) == t(i, j, k));
}

TEST_CASE("devectorize rejects length mismatches and non-finite entries") {
    CHECK_THROWS_AS(devectorize(Vector::Zero(7), 2, 2, 2), std::invalid_argument);
    Vector bad = Vector::Zero(8);
    bad[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(devectorize(bad, 2, 2, 2), std::invalid_argument);
}

TEST_CASE("tensor extents must be positive") {
    CHECK_THROWS_AS(Tensor3(0, 2, 2), std::invalid_argument);
    CHECK_THROWS_AS(Tensor3(2, -1, 2), std::invalid_argument);
}

TEST_CASE("kronecker of basic vectors") {
    Vector one(1), y(3);
    one << 2.0;
    y << 1.0, -2.0, 3.0;
    CHECK(kronecker(one, y) == Vector(2.0 * y));

    Vector x(2), z(2);
    x << 1.0, 2.0;
    z << 3.0, 4.0;
    const Vector k = kronecker(x, z);
    REQUIRE(k.size() == 4);
    CHECK(k[0] == 3.0);
    CHECK(k[1] == 4.0);
    CHECK(k[2] == 6.0);
    CHECK(k[3] == 8.0);
}

TEST_CASE("kronecker norm is multiplicative") {
    std::mt19937_64 rng(13);
    const Vector x = oracle::random_vector(5, rng), y = oracle::random_vector(7, rng);
    CHECK(kronecker(x, y).norm() == doctest::Approx(x.norm() * y.norm()).epsilon(1e-12));
}

TEST_CASE("rank-one vectorization equals the nested kronecker product") {
    std::mt19937_64 rng(14);
    const Vector x = oracle::random_vector(3, rng), y = oracle::random_vector(4, rng),
                 z = oracle::random_vector(2, rng);
    CpFactors f;
    f.alpha = Vector::Ones(1);
    f.X = x;
    f.Y = y;
    f.Z = z;
    const Vector direct = kronecker(x, kronecker(y, z));
    const Vector nested = kronecker(kronecker(x, y), z);
    const Vector vec = vectorize(reconstruct(f));
    CHECK((direct - vec).lpNorm<Eigen::Infinity>() < 1e-14);
    CHECK((nested - vec).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("khatri_rao with one column is the kronecker product") {
    std::mt19937_64 rng(15);
    const Vector x = oracle::random_vector(4, rng), y = oracle::random_vector(3, rng);
    const Matrix kr = khatri_rao(Matrix(x), Matrix(y));
    REQUIRE(kr.cols() == 1);
    CHECK(Vector(kr.col(0)) == kronecker(x, y));
}

TEST_CASE("khatri_rao of identities picks out aligned basis vectors") {
    const Matrix id = Matrix::Identity(2, 2);
    const Matrix kr = khatri_rao(id, id);
    REQUIRE(kr.rows() == 4);
    // column r is e_r kron e_r: the (r * 2 + r)-th basis vector of R^4
    CHECK(kr(0, 0) == 1.0);
    CHECK(kr.col(0).sum() == 1.0);
    CHECK(kr(3, 1) == 1.0);
    CHECK(kr.col(1).sum() == 1.0);
}

TEST_CASE("khatri_rao matches the per-column oracle") {
    std::mt19937_64 rng(16);
    const Matrix x = oracle::random_matrix(3, 4, rng), y = oracle::random_matrix(2, 4, rng);
    const Matrix kr = khatri_rao(x, y);
    REQUIRE(kr.rows() == 6);
    REQUIRE(kr.cols() == 4);
    for (Index r = 0; r < 4; ++r)
        for (Index i = 0; i < 3; ++i)
            for (Index j = 0; j < 2; ++j)
                CHECK(kr(i * 2 + j, r) == x(i, r) * y(j, r));
}

TEST_CASE("khatri_rao rejects mismatched column counts") {
    CHECK_THROWS_AS(khatri_rao(Matrix::Ones(2, 3), Matrix::Ones(2, 2)),
                    std::invalid_argument);
}

TEST_CASE("matricize of a rank-one tensor factors into its vectors") {
    std::mt19937_64 rng(17);
    const Vector x = oracle::random_vector(2, rng), y = oracle::random_vector(2, rng),
                 z = oracle::random_vector(2, rng);
    // brute-force outer product, no library calls
    Tensor3 t(2, 2, 2);
    for (Index i = 0; i < 2; ++i)
        for (Index j = 0; j < 2; ++j)
            for (Index k = 0; k < 2; ++k)
                t(i, j, k) = x[i] * y[j] * z[k];

    const Matrix a1 = matricize(t, 1);
    const Matrix expected1 = x * kronecker(z, y).transpose();
    CHECK((a1 - expected1).norm() < 1e-14);

    const Matrix a2 = matricize(t, 2);
    CHECK((a2 - y * kronecker(z, x).transpose()).norm() < 1e-14);

    const Matrix a3 = matricize(t, 3);
    CHECK((a3 - z * kronecker(y, x).transpose()).norm() < 1e-14);
}

TEST_CASE("every unfolding preserves the Frobenius norm") {
    std::mt19937_64 rng(18);
    const Tensor3 t = oracle::random_tensor(4, 3, 5, rng);
    const double ref = t.frobenius_norm();
    for (int mode : {1, 2, 3})
        CHECK(matricize(t, mode).norm() == doctest::Approx(ref).epsilon(1e-12));
    CHECK(vectorize(t).norm() == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("unfoldings have the documented shapes and entries") {
    std::mt19937_64 rng(19);
    const Tensor3 t = oracle::random_tensor(3, 4, 2, rng);
    const Matrix a1 = matricize(t, 1), a2 = matricize(t, 2), a3 = matricize(t, 3);
    REQUIRE(a1.rows() == 3);
    REQUIRE(a1.cols() == 8);
    REQUIRE(a2.rows() == 4);
    REQUIRE(a2.cols() == 6);
    REQUIRE(a3.rows() == 2);
    REQUIRE(a3.cols() == 12);
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 4; ++j)
            for (Index k = 0; k < 2; ++k) {
                CHECK(a1(i, k * 4 + j) == t(i, j, k));
                CHECK(a2(j, k * 3 + i) == t(i, j, k));
                CHECK(a3(k, j * 3 + i) == t(i, j, k));
            }
}

TEST_CASE("degenerate extents collapse matricization onto vectorization") {
    std::mt19937_64 rng(20);
    // With two trailing singleton-free extents the mode-1 row ordering and
    // the flat order coincide exactly when J = 1 or K = 1.
    {
        const Tensor3 t = oracle::random_tensor(1, 4, 1, rng);
        const Matrix a1 = matricize(t, 1);
        REQUIRE(a1.rows() == 1);
        CHECK(Vector(a1.row(0).transpose()) == vectorize(t));
    }
    {
        const Tensor3 t = oracle::random_tensor(1, 1, 5, rng);
        const Matrix a1 = matricize(t, 1);
        REQUIRE(a1.rows() == 1);
        CHECK(Vector(a1.row(0).transpose()) == vectorize(t));
    }
    // For a general 1 x J x K slice the single mode-1 row carries the same
    // multiset of entries in the column order fixed by the Khatri-Rao
    // identity, so norms agree even though the layouts differ.
    {
        const Tensor3 t = oracle::random_tensor(1, 3, 4, rng);
        const Matrix a1 = matricize(t, 1);
        REQUIRE(a1.rows() == 1);
        CHECK(a1.norm() == doctest::Approx(vectorize(t).norm()).epsilon(1e-15));
        Vector sorted_row = a1.row(0).transpose(), sorted_vec = vectorize(t);
        std::sort(sorted_row.begin(), sorted_row.end());
        std::sort(sorted_vec.begin(), sorted_vec.end());
        CHECK(sorted_row == sorted_vec);
    }
}

TEST_CASE("matricize rejects invalid modes") {
    const Tensor3 t(2, 2, 2);
    CHECK_THROWS_AS(matricize(t, 0), std::invalid_argument);
    CHECK_THROWS_AS(matricize(t, 4), std::invalid_argument);
}
