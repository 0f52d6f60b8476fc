#include "tensorank/cp_model.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

using namespace tensorank;

TEST_CASE("reconstruct matches the element-wise outer-product oracle") {
    std::mt19937_64 rng(21);
    const CpFactors f = oracle::random_factors(4, 3, 2, 3, rng);
    const Tensor3 got = reconstruct(f);
    const Tensor3 want = oracle::reconstruct_loops(f);
    CHECK((vectorize(got) - vectorize(want)).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("reconstruct with zero coefficients is the zero tensor") {
    std::mt19937_64 rng(22);
    CpFactors f = oracle::random_factors(3, 3, 3, 2, rng);
    f.alpha.setZero();
    CHECK(reconstruct(f).frobenius_norm() == 0.0);
}

TEST_CASE("a single scaled basis component fills exactly one entry") {
    CpFactors f;
    f.alpha = Vector::Constant(1, 2.0);
    f.X = Matrix::Zero(3, 1);
    f.Y = Matrix::Zero(4, 1);
    f.Z = Matrix::Zero(2, 1);
    f.X(1, 0) = 1.0;
    f.Y(2, 0) = 1.0;
    f.Z(0, 0) = 1.0;
    const Tensor3 t = reconstruct(f);
    CHECK(t(1, 2, 0) == 2.0);
    CHECK(t.frobenius_norm() == 2.0);
}

TEST_CASE("reconstruct is linear in the coefficients") {
    std::mt19937_64 rng(23);
    CpFactors f = oracle::random_factors(3, 4, 5, 3, rng);
    const Vector va = vectorize(reconstruct(f));
    f.alpha *= 2.5;
    const Vector vb = vectorize(reconstruct(f));
    CHECK((vb - 2.5 * va).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("moving scale between alpha and a factor column leaves the model unchanged") {
    std::mt19937_64 rng(24);
    CpFactors f = oracle::random_factors(3, 3, 4, 2, rng);
    const Vector before = vectorize(reconstruct(f));
    f.alpha[1] *= 0.25;
    f.X.col(1) *= 4.0;
    const Vector after = vectorize(reconstruct(f));
    CHECK((before - after).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("update matrices reproduce the unfoldings of the model") {
    std::mt19937_64 rng(25);
    const CpFactors f = oracle::random_factors(4, 5, 3, 3, rng);
    const Tensor3 model = oracle::reconstruct_loops(f);
    const UpdateMatrices m = update_matrices(f);
    CHECK((matricize(model, 1) - f.X * m.U).norm() < 1e-10);
    CHECK((matricize(model, 2) - f.Y * m.V).norm() < 1e-10);
    CHECK((matricize(model, 3) - f.Z * m.W).norm() < 1e-10);
}

TEST_CASE("update matrices have the documented shapes, single component case") {
    std::mt19937_64 rng(26);
    const CpFactors f = oracle::random_factors(2, 3, 4, 1, rng);
    const UpdateMatrices m = update_matrices(f);
    REQUIRE(m.U.rows() == 1);
    REQUIRE(m.U.cols() == 12);
    REQUIRE(m.V.cols() == 8);
    REQUIRE(m.W.cols() == 6);
    const Vector expected = f.alpha[0] * kronecker(f.Z.col(0), f.Y.col(0));
    CHECK((m.U.row(0).transpose() - expected).norm() < 1e-14);
}

TEST_CASE("update matrices vanish with the coefficients") {
    std::mt19937_64 rng(27);
    CpFactors f = oracle::random_factors(3, 3, 3, 2, rng);
    f.alpha.setZero();
    const UpdateMatrices m = update_matrices(f);
    CHECK(m.U.norm() == 0.0);
    CHECK(m.V.norm() == 0.0);
    CHECK(m.W.norm() == 0.0);
}

TEST_CASE("q_matrix rows are the vectorized components and carry the model") {
    std::mt19937_64 rng(28);
    const CpFactors f = oracle::random_factors(3, 2, 4, 3, rng);
    const Matrix q = q_matrix(f);
    REQUIRE(q.rows() == 3);
    REQUIRE(q.cols() == 24);

    for (Index r = 0; r < 3; ++r) {
        const Vector row =
            kronecker(f.X.col(r), kronecker(f.Y.col(r), f.Z.col(r)));
        CHECK((q.row(r).transpose() - row).lpNorm<Eigen::Infinity>() < 1e-14);
        // unit factor columns make each row a unit vector
        CHECK(q.row(r).norm() == doctest::Approx(1.0).epsilon(1e-12));
    }

    const Vector model = q.transpose() * f.alpha;
    CHECK((model - vectorize(oracle::reconstruct_loops(f))).lpNorm<Eigen::Infinity>() <
          1e-12);
}

TEST_CASE("objective splits into misfit and penalty") {
    std::mt19937_64 rng(29);
    const CpFactors f = oracle::random_factors(3, 4, 2, 2, rng);
    const Tensor3 a = oracle::random_tensor(3, 4, 2, rng);
    const ObjectiveValue v = objective(a, f, 0.3);
    CHECK(v.residual_half == doctest::Approx(oracle::misfit_half(a, f)).epsilon(1e-12));
    CHECK(v.l1_penalty == doctest::Approx(0.3 * f.alpha.cwiseAbs().sum()).epsilon(1e-12));
    CHECK(v.total == doctest::Approx(v.residual_half + v.l1_penalty).epsilon(1e-12));
}

TEST_CASE("objective is zero at an exact fit with no penalty") {
    std::mt19937_64 rng(30);
    const CpFactors f = oracle::random_factors(3, 3, 3, 2, rng);
    const Tensor3 a = reconstruct(f);
    const ObjectiveValue v = objective(a, f, 0.0);
    CHECK(v.total == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("objective of zero data against zero coefficients is zero even with penalty") {
    std::mt19937_64 rng(31);
    CpFactors f = oracle::random_factors(2, 2, 2, 2, rng);
    f.alpha.setZero();
    const Tensor3 a(2, 2, 2);
    CHECK(objective(a, f, 5.0).total == 0.0);
}

TEST_CASE("objective rejects mismatched extents") {
    std::mt19937_64 rng(32);
    const CpFactors f = oracle::random_factors(3, 3, 3, 2, rng);
    const Tensor3 a(3, 3, 4);
    CHECK_THROWS_AS(objective(a, f, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(gradients(a, f), std::invalid_argument);
}

TEST_CASE("the four equivalent objective evaluations agree to 1e-10 relative") {
    std::mt19937_64 rng(33);
    for (int inst = 0; inst < 25; ++inst) {
        const Index i = 2 + Index(rng() % 4), j = 2 + Index(rng() % 4),
                    k = 2 + Index(rng() % 4);
        const Index r = 1 + Index(rng() % 4);
        const CpFactors f = oracle::random_factors(i, j, k, r, rng);
        const Tensor3 a = oracle::random_tensor(i, j, k, rng);

        const UpdateMatrices m = update_matrices(f);
        const double f1 = 0.5 * (matricize(a, 1) - f.X * m.U).squaredNorm();
        const double f2 = 0.5 * (matricize(a, 2) - f.Y * m.V).squaredNorm();
        const double f3 = 0.5 * (matricize(a, 3) - f.Z * m.W).squaredNorm();
        const double f4 =
            0.5 * (vectorize(a) - q_matrix(f).transpose() * f.alpha).squaredNorm();
        const double ref = objective(a, f, 0.0).residual_half;
        CHECK(std::abs(f1 - ref) <= 1e-10 * std::max(1.0, ref));
        CHECK(std::abs(f2 - ref) <= 1e-10 * std::max(1.0, ref));
        CHECK(std::abs(f3 - ref) <= 1e-10 * std::max(1.0, ref));
        CHECK(std::abs(f4 - ref) <= 1e-10 * std::max(1.0, ref));
    }
}

TEST_CASE("gradients match central finite differences") {
    std::mt19937_64 rng(34);
    const double h = 1e-6, tol = 1e-5;
    for (int inst = 0; inst < 5; ++inst) {
        const Index i = 2 + Index(rng() % 3), j = 2 + Index(rng() % 3),
                    k = 2 + Index(rng() % 3);
        const Index r = 1 + Index(rng() % 3);
        const CpFactors f = oracle::random_factors(i, j, k, r, rng);
        const Tensor3 a = oracle::random_tensor(i, j, k, rng);
        const Gradients g = gradients(a, f);

        for (int block = 0; block < 3; ++block) {
            const Matrix& gb = block == 0 ? g.X : block == 1 ? g.Y : g.Z;
            for (Index row = 0; row < gb.rows(); ++row)
                for (Index col = 0; col < gb.cols(); ++col)
                    CHECK(std::abs(gb(row, col) -
                                   oracle::fd_factor_entry(a, f, block, row, col, h)) < tol);
        }
        for (Index rr = 0; rr < r; ++rr)
            CHECK(std::abs(g.alpha[rr] - oracle::fd_alpha_entry(a, f, rr, h)) < tol);
    }
}

TEST_CASE("gradients vanish at an exact fit") {
    std::mt19937_64 rng(35);
    const CpFactors f = oracle::random_factors(4, 3, 3, 2, rng);
    const Tensor3 a = reconstruct(f);
    const Gradients g = gradients(a, f);
    CHECK(g.X.norm() < 1e-10);
    CHECK(g.Y.norm() < 1e-10);
    CHECK(g.Z.norm() < 1e-10);
    CHECK(g.alpha.norm() < 1e-10);
}

TEST_CASE("factor gradients vanish when the coefficients are zero") {
    std::mt19937_64 rng(36);
    CpFactors f = oracle::random_factors(3, 3, 3, 2, rng);
    f.alpha.setZero();
    const Tensor3 a = oracle::random_tensor(3, 3, 3, rng);
    const Gradients g = gradients(a, f);
    // each factor gradient carries a factor of alpha through its update matrix
    CHECK(g.X.norm() == 0.0);
    CHECK(g.Y.norm() == 0.0);
    CHECK(g.Z.norm() == 0.0);
}

TEST_CASE("count_nonzero uses a strict threshold") {
    Vector v(4);
    v << 0.0, 1e-13, -0.5, 2.0;
    CHECK(count_nonzero(v) == 3);
    CHECK(count_nonzero(v, 1e-12) == 2);
    CHECK(count_nonzero(v, 2.0) == 0);
    CHECK(count_nonzero(Vector::Zero(3)) == 0);
}

TEST_CASE("factors validate their shapes") {
    CpFactors f;
    f.alpha = Vector::Ones(2);
    f.X = Matrix::Ones(3, 2);
    f.Y = Matrix::Ones(3, 1); // wrong column count
    f.Z = Matrix::Ones(3, 2);
    CHECK_THROWS_AS(f.require_consistent(), std::invalid_argument);
}

TEST_CASE("is_normalized detects unit and non-unit columns") {
    std::mt19937_64 rng(37);
    CpFactors f = oracle::random_factors(4, 4, 4, 2, rng);
    CHECK(f.is_normalized(1e-10));
    f.Y.col(1) *= 1.0 + 1e-6;
    CHECK_FALSE(f.is_normalized(1e-10));
    CHECK(f.is_normalized(1e-5));
}
