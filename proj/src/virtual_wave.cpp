#include "thermores/virtual_wave.hpp"
#include "thermores/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <cmath>

namespace thermores::virtual_wave {

double kernel_value(double t, double tp, double c, double alpha) {
    if (t <= 0) throw value_error("kernel_value: t must be > 0");
    if (c <= 0 || alpha <= 0) throw value_error("kernel_value: c and alpha must be > 0");
    const double denom = 4.0 * alpha * t;
    return c / std::sqrt(M_PI * alpha * t) * std::exp(-c * c * tp * tp / denom);
}

namespace {
double uniform_step(const std::vector<double>& grid, const char* name) {
    if (grid.size() < 2) throw value_error(std::string("build_kernel: ") + name + " needs >= 2 points");
    const double step = grid[1] - grid[0];
    if (step <= 0) throw value_error(std::string("build_kernel: ") + name + " must be increasing");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (std::abs((grid[i] - grid[i - 1]) - step) > 1e-9 * step)
            throw value_error(std::string("build_kernel: ") + name + " must be uniform");
    return step;
}
}

Eigen::MatrixXd build_kernel(const std::vector<double>& t_grid,
                             const std::vector<double>& tp_grid,
                             double c, double alpha) {
    uniform_step(t_grid, "t_grid");
    const double dtp = uniform_step(tp_grid, "tp_grid");
    if (t_grid.front() <= 0) throw value_error("build_kernel: t_grid must be strictly positive");
    if (std::abs(tp_grid.front()) > 1e-12 * dtp)
        throw value_error("build_kernel: tp_grid must start at 0");

    Eigen::MatrixXd K(static_cast<long>(t_grid.size()), static_cast<long>(tp_grid.size()));
    for (std::size_t i = 0; i < t_grid.size(); ++i)
        for (std::size_t j = 0; j < tp_grid.size(); ++j)
            K(static_cast<long>(i), static_cast<long>(j)) =
                2.0 * kernel_value(t_grid[i], tp_grid[j], c, alpha) * dtp;
    K.col(0) *= 0.5; // fold point carries half weight
    return K;
}

KernelSVD decompose(const Eigen::MatrixXd& K) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(K, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return KernelSVD{svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

TsvdResult invert_tsvd(const KernelSVD& svd, const Eigen::VectorXd& y, double rel_threshold) {
    if (y.size() != svd.U.rows()) throw value_error("invert_tsvd: trace length mismatch");
    if (rel_threshold <= 0 || rel_threshold >= 1)
        throw value_error("invert_tsvd: rel_threshold must be in (0,1)");
    TsvdResult r;
    const double cut = svd.S(0) * rel_threshold;
    int rank = 0;
    while (rank < svd.S.size() && svd.S(rank) >= cut && svd.S(rank) > 0) ++rank;
    r.rank = rank;
    if (rank == 0) {
        r.x = Eigen::VectorXd::Zero(svd.V.rows());
        r.all_below_threshold = true;
        return r;
    }
    const Eigen::VectorXd coeff =
        (svd.U.leftCols(rank).transpose() * y).cwiseQuotient(svd.S.head(rank));
    r.x = svd.V.leftCols(rank) * coeff;
    return r;
}

TsvdResult invert_tsvd(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double rel_threshold) {
    return invert_tsvd(decompose(K), y, rel_threshold);
}

Eigen::MatrixXd invert_tsvd_batch(const KernelSVD& svd, const Eigen::MatrixXd& Y,
                                  double rel_threshold, int* rank_out) {
    if (Y.rows() != svd.U.rows()) throw value_error("invert_tsvd_batch: trace length mismatch");
    if (rel_threshold <= 0 || rel_threshold >= 1)
        throw value_error("invert_tsvd_batch: rel_threshold must be in (0,1)");
    const double cut = svd.S(0) * rel_threshold;
    int rank = 0;
    while (rank < svd.S.size() && svd.S(rank) >= cut && svd.S(rank) > 0) ++rank;
    if (rank_out) *rank_out = rank;
    if (rank == 0) return Eigen::MatrixXd::Zero(svd.V.rows(), Y.cols());
    Eigen::MatrixXd coeff = svd.U.leftCols(rank).transpose() * Y;
    coeff.array().colwise() /= svd.S.head(rank).array();
    return svd.V.leftCols(rank) * coeff;
}

double lambda_max(const Eigen::MatrixXd& K, const Eigen::VectorXd& y) {
    if (y.size() != K.rows()) throw value_error("lambda_max: trace length mismatch");
    return (K.transpose() * y).cwiseAbs().maxCoeff();
}

namespace {

struct AdmmCore {
    const Eigen::MatrixXd& K;
    Eigen::LLT<Eigen::MatrixXd> llt;
    double rho;

    AdmmCore(const Eigen::MatrixXd& K_, double rho_) : K(K_), rho(rho_) {
        if (rho <= 0) throw value_error("invert_admm: rho must be > 0");
        Eigen::MatrixXd G = K.transpose() * K;
        G.diagonal().array() += rho;
        llt.compute(G);
        if (llt.info() != Eigen::Success)
            throw value_error("invert_admm: normal-equation factorization failed");
    }
};

}

AdmmBatchResult invert_admm_batch(const Eigen::MatrixXd& K, const Eigen::MatrixXd& Y,
                                  const AdmmConfig& cfg) {
    if (Y.rows() != K.rows()) throw value_error("invert_admm: trace length mismatch");
    if (cfg.tol <= 0) throw value_error("invert_admm: tol must be > 0");
    if (cfg.max_iters < 1) throw value_error("invert_admm: max_iters must be >= 1");
    if (cfg.lambda_abs < 0 && (cfg.lambda_frac < 0 || cfg.lambda_frac > 1))
        throw value_error("invert_admm: lambda_frac must be in [0,1]");

    const long n = K.cols();
    const long m = Y.cols();
    AdmmCore core(K, cfg.rho);
    const Eigen::MatrixXd KtY = K.transpose() * Y;

    // per-trace soft threshold lambda/rho
    Eigen::ArrayXd thresh(m);
    for (long j = 0; j < m; ++j) {
        const double lam = cfg.lambda_abs >= 0 ? cfg.lambda_abs
                                               : cfg.lambda_frac * KtY.col(j).cwiseAbs().maxCoeff();
        thresh(j) = lam / cfg.rho;
    }

    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, m);
    Eigen::MatrixXd Z = X, U = X, Zprev = X, V = X;
    Eigen::ArrayXd primal(m), dual(m);
    double primal_ref = -1.0, dual_ref = -1.0;

    AdmmBatchResult out;
    out.diverged = false;
    int it = 0;
    const int check_every = 10;
    bool all_done = false;
    for (; it < cfg.max_iters && !all_done; ++it) {
        X = core.llt.solve(KtY + cfg.rho * (Z - U));
        Zprev.swap(Z);
        V = X + U;
        if (cfg.nonneg) {
            Z = (V.array().rowwise() - thresh.transpose()).cwiseMax(0.0).matrix();
        } else {
            Z = ((V.array().rowwise() - thresh.transpose()).cwiseMax(0.0) +
                 (V.array().rowwise() + thresh.transpose()).cwiseMin(0.0)).matrix();
        }
        U += X - Z;

        if ((it + 1) % check_every == 0 || it + 1 == cfg.max_iters) {
            primal = (X - Z).colwise().norm();
            dual = cfg.rho * (Z - Zprev).colwise().norm();
            Eigen::ArrayXd scale =
                X.colwise().norm().array().max(Z.colwise().norm().array()).max(1e-30);
            Eigen::ArrayXd dscale = (cfg.rho * U.colwise().norm()).array().max(1e-30);
            all_done = ((primal <= cfg.tol * scale) && (dual <= cfg.tol * dscale)).all();

            // divergence: residual norms blowing up, or growing 10x over a
            // 50-iteration window while still far from tolerance
            if (!primal.allFinite() || !dual.allFinite()) {
                out.diverged = true;
                break;
            }
            if ((it + 1) % 50 == 0) {
                const double pnow = primal.maxCoeff(), dnow = dual.maxCoeff();
                if (primal_ref >= 0 && pnow > 10.0 * std::max(primal_ref, 1e-300) &&
                    dnow > 10.0 * std::max(dual_ref, 1e-300) &&
                    !(primal <= cfg.tol * scale).all()) {
                    out.diverged = true;
                    break;
                }
                primal_ref = pnow;
                dual_ref = dnow;
            }
        }
    }
    out.X = Z; // feasible iterate (exactly nonneg / sparse)
    out.iterations = it;
    primal = (X - Z).colwise().norm();
    dual = cfg.rho * (Z - Zprev).colwise().norm();
    Eigen::ArrayXd scale = X.colwise().norm().array().max(Z.colwise().norm().array()).max(1e-30);
    Eigen::ArrayXd dscale = (cfg.rho * U.colwise().norm()).array().max(1e-30);
    out.converged = !out.diverged &&
                    ((primal <= cfg.tol * scale) && (dual <= cfg.tol * dscale)).all();
    out.primal_residuals = primal;
    out.dual_residuals = dual;
    return out;
}

AdmmResult invert_admm(const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                       const AdmmConfig& cfg) {
    AdmmBatchResult b = invert_admm_batch(K, y, cfg);
    AdmmResult r;
    r.x = b.X.col(0);
    r.iterations = b.iterations;
    r.converged = b.converged;
    r.diverged = b.diverged;
    const double lam = cfg.lambda_abs >= 0
                           ? cfg.lambda_abs
                           : cfg.lambda_frac * (K.transpose() * y).cwiseAbs().maxCoeff();
    r.primal_residual = b.primal_residuals(0);
    r.dual_residual = b.dual_residuals(0);
    r.objective = 0.5 * (K * r.x - y).squaredNorm() + lam * r.x.cwiseAbs().sum();
    return r;
}

double discrepancy_lambda(const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                          double target_residual, AdmmConfig config,
                          double rel_tol, int max_bisections) {
    if (target_residual <= 0) throw value_error("discrepancy_lambda: target residual must be > 0");
    double lo = 1e-6, hi = 1.0; // fractions of lambda_max; residual grows with lambda
    auto residual_at = [&](double frac) {
        config.lambda_frac = frac;
        config.lambda_abs = -1.0;
        return (K * invert_admm(K, y, config).x - y).norm();
    };
    double frac = std::sqrt(lo * hi);
    for (int b = 0; b < max_bisections; ++b) {
        frac = std::sqrt(lo * hi); // geometric bisection
        const double res = residual_at(frac);
        if (std::abs(res - target_residual) <= rel_tol * target_residual) return frac;
        if (res > target_residual) hi = frac; else lo = frac;
    }
    return frac;
}

}
