#pragma once
#include <Eigen/Dense>
#include <vector>

// The virtual-wave transform and its regularized inversion.
//
// A diffused surface record T(t) relates to the fictitious wave-equation
// solution T_virt(t') sharing its initial condition through a local
// first-kind integral equation with the Gaussian kernel
//   M(t, t') = c/sqrt(pi*alpha*t) * exp(-c^2 t'^2 / (4 alpha t)),
// whose rows integrate to 2 over t' in (-inf, inf). The kernel is even in
// t', so the discretization folds to t' >= 0 with doubled quadrature weight
// (half weight on the t'=0 sample). Inverting the resulting matrix is
// severely ill-posed -- singular values collapse by many decades -- which is
// exactly the information loss this toolkit quantifies; T-SVD and
// ADMM(L1 + positivity) are the two regularizers offered.
namespace thermores::virtual_wave {

double kernel_value(double t, double tp, double c, double alpha);

// K(i,j) = 2 * kernel_value(t_i, tp_j) * dtp, with the j=0 column halved.
// Both grids must be uniform; tp_grid must start at 0; t_grid must be
// strictly positive.
Eigen::MatrixXd build_kernel(const std::vector<double>& t_grid,
                             const std::vector<double>& tp_grid,
                             double c, double alpha);

struct KernelSVD {
    Eigen::MatrixXd U;
    Eigen::VectorXd S;
    Eigen::MatrixXd V;
};

KernelSVD decompose(const Eigen::MatrixXd& K);

struct TsvdResult {
    Eigen::VectorXd x;
    int rank = 0;                  // singular components retained
    bool all_below_threshold = false; // solution forced to zero
};

// Truncated-SVD pseudo-inverse applied to one trace: keep components with
// sigma_i >= rel_threshold * sigma_max.
TsvdResult invert_tsvd(const KernelSVD& svd, const Eigen::VectorXd& y, double rel_threshold);
TsvdResult invert_tsvd(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double rel_threshold);

// All detector traces at once (columns of Y).
Eigen::MatrixXd invert_tsvd_batch(const KernelSVD& svd, const Eigen::MatrixXd& Y,
                                  double rel_threshold, int* rank_out = nullptr);

double lambda_max(const Eigen::MatrixXd& K, const Eigen::VectorXd& y);

struct AdmmConfig {
    double lambda_frac = 0.01; // lambda = lambda_frac * ||K^T y||_inf per trace
    double lambda_abs = -1.0;  // >= 0 overrides lambda_frac
    double rho = 1.0;
    double tol = 1e-6;         // relative primal/dual tolerance
    int max_iters = 500;
    bool nonneg = true;
};

struct AdmmResult {
    Eigen::VectorXd x;
    int iterations = 0;
    bool converged = false;
    bool diverged = false; // primal residual grew 10x over 50 iterations
    double primal_residual = 0;
    double dual_residual = 0;
    double objective = 0;  // 0.5||Kx-y||^2 + lambda   *||x||_1 at the returned x
};

// Scaled-form ADMM for  min 0.5||Kx - y||^2 + lambda||x||_1 (+ x >= 0).
// The z-prox is soft-threshold-then-project, which is exact for the
// combined L1 + nonnegativity penalty, so returned solutions satisfy the
// constraint to machine precision.
AdmmResult invert_admm(const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                       const AdmmConfig& config);

struct AdmmBatchResult {
    Eigen::MatrixXd X;
    int iterations = 0;  // iterations actually run
    bool converged = false; // every column met tolerance
    bool diverged = false;  // any column flagged divergent
    Eigen::ArrayXd primal_residuals; // final ||x - z|| per trace
    Eigen::ArrayXd dual_residuals;   // final rho*||z - z_prev|| per trace
};

// Shared-factorization batch solve over detector traces (columns of Y);
// the (K^T K + rho I) factorization is computed once.
AdmmBatchResult invert_admm_batch(const Eigen::MatrixXd& K, const Eigen::MatrixXd& Y,
                                  const AdmmConfig& config);

// Discrepancy-principle lambda search: bisect lambda_frac until
// ||Kx - y|| matches target_residual within rel_tol (best effort, bounded
// iterations). Returns the chosen fraction.
double discrepancy_lambda(const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                          double target_residual, AdmmConfig config,
                          double rel_tol = 0.05, int max_bisections = 12);

struct VirtualField {
    std::vector<double> tps;
    std::vector<double> detector_xs;
    Eigen::MatrixXd values; // (n_tp, n_detectors)
    double dtp = 0;
};

}
