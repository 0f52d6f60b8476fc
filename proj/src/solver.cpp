#include "tensorank/solver.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace tensorank {

namespace {

void validate_config(const SolverConfig& cfg) {
    if (cfg.R < 1)
        throw std::invalid_argument("solver: R must be >= 1");
    if (!(cfg.lambda >= 0.0))
        throw std::invalid_argument("solver: lambda must be >= 0");
    if (!(cfg.s > 1.0))
        throw std::invalid_argument("solver: step control s must be > 1");
    if (cfg.iter_max < 1)
        throw std::invalid_argument("solver: iter_max must be >= 1");
    if (!(cfg.conv_tol > 0.0))
        throw std::invalid_argument("solver: conv_tol must be > 0");
}

void normalize_columns(Matrix& m) {
    for (Index r = 0; r < m.cols(); ++r) {
        const double n = m.col(r).norm();
        if (n < 1e-300)
            throw std::runtime_error("degenerate column: a factor column collapsed to zero "
                                     "length during the descent step");
        m.col(r) /= n;
    }
}

// Frobenius norm of D (P kr S)^T (P kr S) D with D = diag(alpha), computed
// through the Khatri-Rao Gram identity (P kr S)^T (P kr S) = P^T P .* S^T S.
double scaled_pair_gram_norm(const Vector& alpha, const Matrix& P, const Matrix& S) {
    Matrix g = (P.transpose() * P).cwiseProduct(S.transpose() * S);
    g = alpha.asDiagonal() * g * alpha.asDiagonal();
    return g.norm();
}

// Frobenius norm of Q Q^T for unit rank-one rows: elementwise product of the
// three factor Grams.
double triple_gram_norm(const Matrix& X, const Matrix& Y, const Matrix& Z) {
    const Matrix g = ((X.transpose() * X).cwiseProduct(Y.transpose() * Y))
                         .cwiseProduct(Z.transpose() * Z);
    return g.norm();
}

CpFactors random_normalized_factors(const std::array<Index, 3>& dims, Index r,
                                    std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto draw = [&](Index rows) {
        Matrix m(rows, r);
        for (Index c = 0; c < r; ++c) {
            double n = 0.0;
            do {
                for (Index i = 0; i < rows; ++i)
                    m(i, c) = gauss(rng);
                n = m.col(c).norm();
            } while (n < 1e-300);
            m.col(c) /= n;
        }
        return m;
    };
    CpFactors f;
    f.X = draw(dims[0]);
    f.Y = draw(dims[1]);
    f.Z = draw(dims[2]);
    f.alpha = Vector::Zero(r);
    return f;
}

// Shared state for a full solve: the three unfoldings and the flat data are
// fixed, the per-iteration work buffers (including the R x IJK component
// matrix Q) are allocated once and rewritten each iteration.
class LratEngine {
public:
    LratEngine(const Tensor3& A, Index r)
        : I_(A.extent0()), J_(A.extent1()), K_(A.extent2()), R_(r),
          A1_(matricize(A, 1)), A2_(matricize(A, 2)), A3_(matricize(A, 3)),
          a_(vectorize(A)) {
        U_.resize(R_, J_ * K_);
        V_.resize(R_, I_ * K_);
        W_.resize(R_, I_ * J_);
        Q_.resize(R_, I_ * J_ * K_);
        yz_.resize(J_ * K_);
    }

    // Ridge-regularized least squares of the data onto the current unit
    // components; leaves Q_ holding the component matrix of f. Falls back to
    // zero when the regularized normal system still fails numerically.
    Vector initial_alpha(const CpFactors& f) {
        build_q(f);
        Matrix g = ((f.X.transpose() * f.X).cwiseProduct(f.Y.transpose() * f.Y))
                       .cwiseProduct(f.Z.transpose() * f.Z);
        g.diagonal().array() += 1e-12;
        const Vector rhs = Q_ * a_;
        Eigen::LDLT<Matrix> ldlt(g);
        Vector alpha = ldlt.solve(rhs);
        if (ldlt.info() != Eigen::Success || !alpha.allFinite())
            alpha = Vector::Zero(R_);
        return alpha;
    }

    // One outer iteration in place, block order X, Y, Z, alpha. Each of the
    // three factor blocks refreshes its linear map from the newest iterates
    // of the other blocks (and the not-yet-updated alpha), steps against the
    // gradient scaled by s times the map's Gram norm, and renormalizes its
    // columns. The alpha block then rebuilds Q from the new factors, takes
    // the analogous scaled gradient step, and soft-thresholds.
    StepDiagnostics step(CpFactors& f, double lambda, double s) {
        StepDiagnostics d;
        const CpFactors prev = f;

        build_u(f);
        d.d_n = std::max(scaled_pair_gram_norm(f.alpha, f.Z, f.Y), 1.0);
        f.X -= ((f.X * U_ - A1_) * U_.transpose()) / (s * d.d_n);
        normalize_columns(f.X);

        build_v(f);
        d.e_n = std::max(scaled_pair_gram_norm(f.alpha, f.Z, f.X), 1.0);
        f.Y -= ((f.Y * V_ - A2_) * V_.transpose()) / (s * d.e_n);
        normalize_columns(f.Y);

        build_w(f);
        d.f_n = std::max(scaled_pair_gram_norm(f.alpha, f.Y, f.X), 1.0);
        f.Z -= ((f.Z * W_ - A3_) * W_.transpose()) / (s * d.f_n);
        normalize_columns(f.Z);

        build_q(f);
        d.eta_n = std::max(triple_gram_norm(f.X, f.Y, f.Z), 1.0);
        const Vector g = Q_ * (Q_.transpose() * f.alpha - a_);
        f.alpha = soft_threshold(f.alpha - g / (s * d.eta_n), lambda / (s * d.eta_n));

        d.step_gap = std::sqrt((f.X - prev.X).squaredNorm() + (f.Y - prev.Y).squaredNorm() +
                               (f.Z - prev.Z).squaredNorm() +
                               (f.alpha - prev.alpha).squaredNorm());
        return d;
    }

    // 1/2 |Q^T alpha - a|^2 with Q_ as left by the latest step (or
    // initial_alpha), i.e. the exact smooth objective at the current iterate.
    double residual_half(const Vector& alpha) const {
        return 0.5 * (Q_.transpose() * alpha - a_).squaredNorm();
    }

private:
    void build_u(const CpFactors& f) {
        for (Index r = 0; r < R_; ++r)
            for (Index k = 0; k < K_; ++k)
                U_.row(r).segment(k * J_, J_) =
                    (f.alpha[r] * f.Z(k, r)) * f.Y.col(r).transpose();
    }
    void build_v(const CpFactors& f) {
        for (Index r = 0; r < R_; ++r)
            for (Index k = 0; k < K_; ++k)
                V_.row(r).segment(k * I_, I_) =
                    (f.alpha[r] * f.Z(k, r)) * f.X.col(r).transpose();
    }
    void build_w(const CpFactors& f) {
        for (Index r = 0; r < R_; ++r)
            for (Index j = 0; j < J_; ++j)
                W_.row(r).segment(j * I_, I_) =
                    (f.alpha[r] * f.Y(j, r)) * f.X.col(r).transpose();
    }
    void build_q(const CpFactors& f) {
        for (Index r = 0; r < R_; ++r) {
            for (Index j = 0; j < J_; ++j)
                yz_.segment(j * K_, K_) = f.Y(j, r) * f.Z.col(r);
            for (Index i = 0; i < I_; ++i)
                Q_.row(r).segment(i * J_ * K_, J_ * K_) = f.X(i, r) * yz_.transpose();
        }
    }

    Index I_, J_, K_, R_;
    Matrix A1_, A2_, A3_;
    Vector a_;
    Matrix U_, V_, W_, Q_;
    Vector yz_;
};

} // namespace

Vector soft_threshold(const Vector& v, double tau) {
    if (!(tau >= 0.0))
        throw std::invalid_argument("soft_threshold: tau must be >= 0");
    Vector out(v.size());
    for (Index i = 0; i < v.size(); ++i) {
        if (v[i] > tau)
            out[i] = v[i] - tau;
        else if (v[i] < -tau)
            out[i] = v[i] + tau;
        else
            out[i] = 0.0;
    }
    return out;
}

StepResult lrat_step(const Tensor3& A, const CpFactors& f, const SolverConfig& cfg) {
    validate_config(cfg);
    f.require_consistent();
    const auto d = f.dims();
    if (A.extent0() != d[0] || A.extent1() != d[1] || A.extent2() != d[2])
        throw std::invalid_argument("lrat_step: tensor extents do not match factors");
    if (!f.is_normalized(1e-10))
        throw std::invalid_argument("lrat_step: factor columns must have unit norm");
    LratEngine engine(A, f.rank());
    StepResult out{f, {}};
    out.diag = engine.step(out.factors, cfg.lambda, cfg.s);
    return out;
}

SolveResult lrat_solve(const Tensor3& A, const SolverConfig& cfg) {
    validate_config(cfg);
    A.require_finite();

    std::mt19937_64 rng(cfg.seed);
    CpFactors f = random_normalized_factors(A.dims(), cfg.R, rng);
    LratEngine engine(A, cfg.R);
    f.alpha = engine.initial_alpha(f);

    double residual = engine.residual_half(f.alpha);
    double psi = residual + cfg.lambda * f.alpha.lpNorm<1>();
    const double stop = cfg.conv_tol * std::max(1.0, psi);

    SolveResult out;
    if (cfg.record_trace) {
        out.trace.emplace();
        out.trace->push_back(
            {0, psi, residual, 0.0, 0.0, 0.0, 0.0, 0.0, count_nonzero(f.alpha)});
    }

    Index n = 0;
    for (; n < cfg.iter_max;) {
        const StepDiagnostics diag = engine.step(f, cfg.lambda, cfg.s);
        ++n;
        residual = engine.residual_half(f.alpha);
        const double next = residual + cfg.lambda * f.alpha.lpNorm<1>();
        if (!std::isfinite(next))
            throw std::runtime_error("divergence: objective is no longer finite");
        if (cfg.record_trace)
            out.trace->push_back({n, next, residual, diag.step_gap, diag.d_n, diag.e_n,
                                  diag.f_n, diag.eta_n, count_nonzero(f.alpha)});
        const double decrease = psi - next;
        psi = next;
        if (decrease < stop) {
            out.converged = true;
            break;
        }
    }

    out.factors = std::move(f);
    out.iterations = n;
    out.estimated_rank = count_nonzero(out.factors.alpha, 0.0);
    out.kkt_residual = kkt_residual(A, out.factors, cfg.lambda);
    return out;
}

SolveResult modals_solve(const Tensor3& A, const SolverConfig& cfg) {
    SolverConfig plain = cfg;
    plain.lambda = 0.0;
    return lrat_solve(A, plain);
}

double kkt_residual(const Tensor3& A, const CpFactors& f, double lambda) {
    if (!(lambda >= 0.0))
        throw std::invalid_argument("kkt_residual: lambda must be >= 0");
    const Gradients g = gradients(A, f);
    double worst = 0.0;

    // Factor blocks: with the unit-norm constraint the multiplier is the
    // inner product of gradient and column, so the residual is the gradient
    // component orthogonal to the column.
    auto factor_block = [&](const Matrix& grad, const Matrix& fac) {
        for (Index r = 0; r < fac.cols(); ++r) {
            const double mult = grad.col(r).dot(fac.col(r));
            worst = std::max(worst, (grad.col(r) - mult * fac.col(r)).norm());
        }
    };
    factor_block(g.X, f.X);
    factor_block(g.Y, f.Y);
    factor_block(g.Z, f.Z);

    // alpha block: distance from -grad to the scaled l1 subdifferential,
    // coordinate by coordinate.
    for (Index r = 0; r < f.alpha.size(); ++r) {
        const double gr = g.alpha[r];
        if (f.alpha[r] != 0.0)
            worst = std::max(worst, std::abs(gr + (f.alpha[r] > 0 ? lambda : -lambda)));
        else
            worst = std::max(worst, std::max(std::abs(gr) - lambda, 0.0));
    }
    return worst;
}

LassoSolution lasso_solve_ista(const LassoProblem& p, Index iter_max, double conv_tol) {
    if (p.B.rows() != p.b.size())
        throw std::invalid_argument("lasso: design row count does not match response length");
    if (!(p.lambda >= 0.0))
        throw std::invalid_argument("lasso: lambda must be >= 0");
    if (iter_max < 1 || !(conv_tol > 0.0))
        throw std::invalid_argument("lasso: bad iteration cap or tolerance");
    for (Index c = 0; c < p.B.cols(); ++c)
        if (std::abs(p.B.col(c).norm() - 1.0) > 1e-10)
            throw std::invalid_argument("lasso: design columns must have unit norm");

    const Matrix gram = p.B.transpose() * p.B;
    const Vector corr = p.B.transpose() * p.b;
    const double step = 1.0 / (1.5 * std::max(gram.norm(), 1.0));

    Vector theta = Vector::Zero(p.B.cols());
    for (Index n = 0; n < iter_max; ++n) {
        const Vector g = gram * theta - corr;
        double stat = 0.0;
        for (Index i = 0; i < theta.size(); ++i) {
            if (theta[i] != 0.0)
                stat = std::max(stat,
                                std::abs(g[i] + (theta[i] > 0 ? p.lambda : -p.lambda)));
            else
                stat = std::max(stat, std::max(std::abs(g[i]) - p.lambda, 0.0));
        }
        if (stat <= conv_tol)
            break;
        theta = soft_threshold(theta - step * g, step * p.lambda);
    }

    LassoSolution sol;
    sol.theta = std::move(theta);
    for (Index i = 0; i < sol.theta.size(); ++i)
        if (sol.theta[i] != 0.0)
            sol.support.push_back(i);
    return sol;
}

} // namespace tensorank
