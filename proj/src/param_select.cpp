#include "tensorank/param_select.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tensorank {

double lambda_from_estimates(double sigma2, double gamma, Index R) {
    if (!(sigma2 >= 0.0))
        throw std::invalid_argument("lambda_from_estimates: sigma2 must be >= 0");
    if (!(gamma > 0.0) || gamma > 1.0)
        throw std::invalid_argument("lambda_from_estimates: gamma must lie in (0, 1]");
    if (R < 1)
        throw std::invalid_argument("lambda_from_estimates: R must be >= 1");
    return (2.0 / gamma) * std::sqrt(2.0 * sigma2 * std::log(200.0 * double(R)));
}

double incoherence_gap(const CpFactors& f) {
    f.require_consistent();
    if (f.rank() < 2)
        throw std::invalid_argument("incoherence_gap: need R >= 2");
    // Gram of the vectorized unit rank-one components, via the identity
    // <q_i, q_j> = <x_i, x_j><y_i, y_j><z_i, z_j>.
    const Matrix g = ((f.X.transpose() * f.X).cwiseProduct(f.Y.transpose() * f.Y))
                         .cwiseProduct(f.Z.transpose() * f.Z);
    double largest = 0.0;
    for (Index i = 0; i < g.rows(); ++i)
        for (Index j = i + 1; j < g.cols(); ++j)
            largest = std::max(largest, std::abs(g(i, j)));
    const double gap = 1.0 - largest;
    if (!(gap > 0.0))
        throw std::runtime_error("incoherence_gap: pilot factors coherent");
    return gap;
}

LambdaEstimate estimate_lambda(const Tensor3& A, Index R, const SolverConfig& cfg) {
    SolverConfig pilot_cfg = cfg;
    pilot_cfg.R = R;

    LambdaEstimate est;
    est.pilot = modals_solve(A, pilot_cfg);

    const Vector diff = vectorize(A) - vectorize(reconstruct(est.pilot.factors));
    const double mean = diff.mean();
    est.sigma2_hat = (diff.array() - mean).square().sum() / double(diff.size());
    est.gamma_hat = incoherence_gap(est.pilot.factors);
    est.lambda_hat = lambda_from_estimates(est.sigma2_hat, est.gamma_hat, R);
    return est;
}

ConsistencyDiagnostics consistency_bound(const Matrix& B, const std::vector<Index>& S,
                                         double lambda, double sigma2) {
    const Index R = B.cols();
    if (S.empty() || Index(S.size()) >= R)
        throw std::invalid_argument("consistency_bound: S must be a nonempty proper subset");
    if (!(lambda >= 0.0) || !(sigma2 >= 0.0))
        throw std::invalid_argument("consistency_bound: lambda and sigma2 must be >= 0");

    std::vector<char> in_s(R, 0);
    for (Index idx : S) {
        if (idx < 0 || idx >= R || in_s[idx])
            throw std::invalid_argument("consistency_bound: S has an invalid or repeated index");
        in_s[idx] = 1;
    }

    Matrix bs(B.rows(), Index(S.size()));
    Matrix bc(B.rows(), R - Index(S.size()));
    Index ci = 0;
    for (Index r = 0, si = 0; r < R; ++r)
        in_s[r] ? (void)(bs.col(si++) = B.col(r)) : (void)(bc.col(ci++) = B.col(r));

    const Matrix gram_s = bs.transpose() * bs;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram_s);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > hi * 1e-12))
        throw std::runtime_error("consistency_bound: restricted design rank-deficient");

    const Matrix inv = gram_s.inverse();
    ConsistencyDiagnostics d;
    d.mu = std::max(lo, 0.0);
    d.inv_inf_norm = inv.cwiseAbs().rowwise().sum().maxCoeff();
    const Matrix cross = bc.transpose() * bs * inv;
    d.gamma = 1.0 - cross.cwiseAbs().rowwise().sum().maxCoeff();
    d.incoherence_ok = d.gamma > 0.0;
    // sigma2 = 0 is the noiseless limit: the failure probability vanishes.
    const double expo = sigma2 > 0.0
                            ? std::exp(-(lambda * lambda * d.gamma * d.gamma) / (8.0 * sigma2))
                            : (lambda > 0.0 && d.gamma != 0.0 ? 0.0 : 1.0);
    d.bound = 1.0 - 2.0 * double(R) * expo;
    return d;
}

} // namespace tensorank
