#include <doctest.h>

#include "thermores/errors.hpp"
#include "thermores/rng.hpp"
#include "thermores/virtual_wave.hpp"

#include <cmath>
#include <vector>

using namespace thermores;
namespace vw = thermores::virtual_wave;

namespace {

std::vector<double> uniform_grid(double step, int n, bool from_zero) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = step * (from_zero ? i : i + 1);
    return g;
}

// moderately conditioned dense test matrix, deterministic
Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t stream) {
    const auto key = rng::stream_key(314, stream);
    Eigen::MatrixXd K(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            K(i, j) = rng::normal(key, static_cast<std::uint64_t>(i) * cols + j);
    for (int j = 0; j < std::min(rows, cols); ++j) K(j, j) += 3.0;
    return K;
}

Eigen::VectorXd least_squares(const Eigen::MatrixXd& K, const Eigen::VectorXd& y) {
    return (K.transpose() * K).llt().solve(K.transpose() * y);
}

// the 200x200 kernel at default geometry (dt = 2, dtp = 0.3)
Eigen::MatrixXd default_kernel() {
    return vw::build_kernel(uniform_grid(2.0, 200, false), uniform_grid(0.3, 200, true), 1.0, 0.5);
}

} // namespace

TEST_CASE("kernel_value: peak, evenness, and validation") {
    const double c = 1.3, alpha = 0.4, t = 7.0;
    CHECK(vw::kernel_value(t, 0.0, c, alpha) ==
          doctest::Approx(c / std::sqrt(M_PI * alpha * t)).epsilon(1e-12));
    CHECK(vw::kernel_value(t, 2.5, c, alpha) == vw::kernel_value(t, -2.5, c, alpha));
    CHECK(vw::kernel_value(t, 1.0, c, alpha) > vw::kernel_value(t, 2.0, c, alpha));
    // explicit Gaussian form
    CHECK(vw::kernel_value(t, 2.0, c, alpha) ==
          doctest::Approx(c / std::sqrt(M_PI * alpha * t) *
                          std::exp(-c * c * 4.0 / (4.0 * alpha * t))).epsilon(1e-12));
    CHECK_THROWS_AS(vw::kernel_value(0.0, 0.0, c, alpha), value_error);
    CHECK_THROWS_AS(vw::kernel_value(t, 0.0, -1.0, alpha), value_error);
}

TEST_CASE("build_kernel: quadrature layout and row normalization") {
    const double dtp = 0.25;
    const auto ts = uniform_grid(1.0, 50, false);   // 1..50
    const auto tps = uniform_grid(dtp, 161, true);  // 0..40
    const Eigen::MatrixXd K = vw::build_kernel(ts, tps, 1.0, 0.5);
    CHECK(K.rows() == 50);
    CHECK(K.cols() == 161);

    // fold point carries half weight, everything else the full 2*dtp
    CHECK(K(4, 0) == doctest::Approx(vw::kernel_value(ts[4], 0.0, 1.0, 0.5) * dtp).epsilon(1e-12));
    CHECK(K(4, 7) ==
          doctest::Approx(2.0 * vw::kernel_value(ts[4], tps[7], 1.0, 0.5) * dtp).epsilon(1e-12));

    // with the tail fully inside the tp window every row integrates to 2
    for (int i = 0; i < K.rows(); ++i)
        CHECK(K.row(i).sum() == doctest::Approx(2.0).epsilon(1e-6));

    auto bad_t = ts;
    bad_t[10] += 0.01;
    CHECK_THROWS_AS(vw::build_kernel(bad_t, tps, 1.0, 0.5), value_error);
    auto bad_tp = tps;
    for (auto& v : bad_tp) v += dtp; // no longer starts at 0
    CHECK_THROWS_AS(vw::build_kernel(ts, bad_tp, 1.0, 0.5), value_error);
    CHECK_THROWS_AS(vw::build_kernel(uniform_grid(1.0, 3, true), tps, 1.0, 0.5), value_error);
}

TEST_CASE("decompose: exact factorization with ordered spectrum") {
    const Eigen::MatrixXd K = vw::build_kernel(uniform_grid(1.0, 30, false),
                                               uniform_grid(0.5, 24, true), 1.0, 0.5);
    const auto svd = vw::decompose(K);
    CHECK(svd.U.rows() == 30);
    CHECK(svd.V.rows() == 24);
    const Eigen::MatrixXd back = svd.U * svd.S.asDiagonal() * svd.V.transpose();
    CHECK((back - K).cwiseAbs().maxCoeff() < 1e-12);
    for (int i = 1; i < svd.S.size(); ++i) CHECK(svd.S(i) <= svd.S(i - 1));
}

TEST_CASE("invert_tsvd: least-squares limit, round trip, rank monotonicity") {
    const Eigen::MatrixXd K = random_matrix(20, 10, 0);
    Eigen::VectorXd x_true(10);
    const auto key = rng::stream_key(314, 50);
    for (int i = 0; i < 10; ++i) x_true(i) = rng::uniform01(key, i);
    const Eigen::VectorXd y = K * x_true;

    // keep-everything threshold reproduces plain least squares
    const auto full = vw::invert_tsvd(K, y, 1e-12);
    CHECK(full.rank == 10);
    CHECK_FALSE(full.all_below_threshold);
    CHECK((full.x - least_squares(K, y)).norm() < 1e-8);
    CHECK((full.x - x_true).norm() < 1e-8); // consistent noiseless system

    // ill-posed kernel: reconstruction equals the projection of the truth
    // onto the retained right singular subspace
    const Eigen::MatrixXd D = vw::build_kernel(uniform_grid(1.0, 60, false),
                                               uniform_grid(0.5, 40, true), 1.0, 0.5);
    const auto dsvd = vw::decompose(D);
    Eigen::VectorXd xs(40);
    for (int i = 0; i < 40; ++i) xs(i) = std::exp(-0.1 * (i - 12) * (i - 12));
    const double thr = 1e-6;
    const auto rec = vw::invert_tsvd(dsvd, D * xs, thr);
    CHECK(rec.rank > 0);
    CHECK(rec.rank < 40);
    const Eigen::MatrixXd Vm = dsvd.V.leftCols(rec.rank);
    const Eigen::VectorXd projected = Vm * (Vm.transpose() * xs);
    CHECK((rec.x - projected).norm() < 1e-6 * projected.norm());

    // rank is nonincreasing in the threshold
    int prev = 41;
    for (double t : {1e-10, 1e-6, 1e-3, 1e-1}) {
        const auto r = vw::invert_tsvd(dsvd, D * xs, t);
        CHECK(r.rank <= prev);
        prev = r.rank;
    }
    CHECK(vw::invert_tsvd(dsvd, D * xs, 1e-10).rank > vw::invert_tsvd(dsvd, D * xs, 1e-1).rank);

    CHECK_THROWS_AS(vw::invert_tsvd(K, y, 0.0), value_error);
    CHECK_THROWS_AS(vw::invert_tsvd(K, y, 1.0), value_error);
    CHECK_THROWS_AS(vw::invert_tsvd(K, Eigen::VectorXd::Zero(7), 1e-6), value_error);

    // an all-zero operator carries no components at all
    const auto none = vw::invert_tsvd(Eigen::MatrixXd::Zero(20, 10), y, 1e-6);
    CHECK(none.all_below_threshold);
    CHECK(none.rank == 0);
    CHECK(none.x.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("invert_tsvd_batch: matches the single-trace path") {
    const Eigen::MatrixXd D = vw::build_kernel(uniform_grid(1.0, 30, false),
                                               uniform_grid(0.5, 24, true), 1.0, 0.5);
    const auto svd = vw::decompose(D);
    Eigen::MatrixXd Y(30, 3);
    const auto key = rng::stream_key(314, 60);
    for (int i = 0; i < Y.size(); ++i) Y(i % 30, i / 30) = rng::normal(key, i);
    int rank = -1;
    const Eigen::MatrixXd X = vw::invert_tsvd_batch(svd, Y, 1e-4, &rank);
    CHECK(X.rows() == 24);
    CHECK(X.cols() == 3);
    for (int j = 0; j < 3; ++j) {
        const auto single = vw::invert_tsvd(svd, Y.col(j), 1e-4);
        CHECK(single.rank == rank);
        CHECK((X.col(j) - single.x).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("default kernel: spectrum collapses within the first quarter") {
    const auto svd = vw::decompose(default_kernel());
    CHECK(svd.S.size() == 200);
    CHECK(svd.S(50) / svd.S(0) < 1e-3);
}

TEST_CASE("invert_admm: shutdown at lambda_max and the least-squares limit") {
    const Eigen::MatrixXd K = random_matrix(20, 10, 1);
    Eigen::VectorXd x_true = Eigen::VectorXd::Zero(10);
    x_true(2) = 1.0;
    x_true(7) = 0.4;
    const Eigen::VectorXd y = K * x_true;

    CHECK(vw::lambda_max(K, y) ==
          doctest::Approx((K.transpose() * y).cwiseAbs().maxCoeff()).epsilon(1e-15));

    vw::AdmmConfig kill;
    kill.lambda_abs = vw::lambda_max(K, y) * 1.001;
    kill.tol = 1e-10;
    kill.max_iters = 3000;
    const auto dead = vw::invert_admm(K, y, kill);
    CHECK(dead.x.cwiseAbs().maxCoeff() < 1e-8);
    CHECK_FALSE(dead.diverged);

    vw::AdmmConfig ls;
    ls.lambda_abs = 0.0;
    ls.nonneg = false;
    ls.tol = 1e-12;
    ls.max_iters = 4000;
    const auto sol = vw::invert_admm(K, y, ls);
    CHECK(sol.converged);
    CHECK((sol.x - least_squares(K, y)).norm() < 1e-6);
    // objective here is 0.5||Kx-y||^2: optimal beats any feasible candidate
    CHECK(sol.objective <= 0.5 * y.squaredNorm() + 1e-12);
}

TEST_CASE("invert_admm: sparse nonnegative recovery on the diffusion kernel") {
    const Eigen::MatrixXd D = vw::build_kernel(uniform_grid(1.0, 80, false),
                                               uniform_grid(0.4, 50, true), 1.0, 0.5);
    Eigen::VectorXd x_true = Eigen::VectorXd::Zero(50);
    x_true(10) = 1.0;
    x_true(20) = 0.6;
    const Eigen::VectorXd y = D * x_true;

    vw::AdmmConfig cfg;
    cfg.lambda_frac = 0.001;
    cfg.tol = 1e-8;
    cfg.max_iters = 5000;
    // the ill-conditioned kernel keeps ADMM short of tight tolerances for
    // thousands of iterations; what must hold is feasibility + localization
    const auto r = vw::invert_admm(D, y, cfg);
    CHECK_FALSE(r.diverged);

    // feasibility is exact (the prox output is returned)
    CHECK(r.x.minCoeff() >= 0.0);

    // peaks localize to within a cell; the deeper spike survives with
    // L1-shrunk amplitude
    int p0 = 0;
    r.x.head(16).maxCoeff(&p0);
    int p1 = 0;
    r.x.tail(34).maxCoeff(&p1);
    CHECK(std::abs(p0 - 10) <= 1);
    CHECK(std::abs(p1 + 16 - 20) <= 1);
    CHECK(r.x.segment(7, 7).sum() == doctest::Approx(1.0).epsilon(0.15));
    const double deep_mass = r.x.segment(17, 7).sum();
    CHECK(deep_mass > 0.3);
    CHECK(deep_mass < 0.72);

    // objective no worse than the trivial and the clipped-LS candidates
    const double lam = cfg.lambda_frac * vw::lambda_max(D, y);
    auto objective = [&](const Eigen::VectorXd& x) {
        return 0.5 * (D * x - y).squaredNorm() + lam * x.cwiseAbs().sum();
    };
    CHECK(r.objective <= objective(Eigen::VectorXd::Zero(50)) + 1e-9);
    const Eigen::VectorXd clipped = least_squares(D, y).cwiseMax(0.0);
    CHECK(r.objective <= objective(clipped) + 1e-9);
    CHECK(r.objective == doctest::Approx(objective(r.x)).epsilon(1e-12));

    CHECK_THROWS_AS(vw::invert_admm(D, y, [] {
                        vw::AdmmConfig c;
                        c.rho = 0.0;
                        return c;
                    }()),
                    value_error);
    CHECK_THROWS_AS(vw::invert_admm(D, y, [] {
                        vw::AdmmConfig c;
                        c.lambda_frac = 1.5;
                        return c;
                    }()),
                    value_error);
}

TEST_CASE("invert_admm_batch: per-column agreement and flags") {
    const Eigen::MatrixXd D = vw::build_kernel(uniform_grid(1.0, 40, false),
                                               uniform_grid(0.5, 30, true), 1.0, 0.5);
    Eigen::MatrixXd X_true = Eigen::MatrixXd::Zero(30, 3);
    X_true(5, 0) = 1.0;
    X_true(15, 1) = 0.8;
    X_true(22, 2) = 0.5;
    const Eigen::MatrixXd Y = D * X_true;

    // tolerance no column reaches within the budget: batch and single runs
    // then take the same number of iterations, so columns must agree
    vw::AdmmConfig cfg;
    cfg.lambda_frac = 0.001;
    cfg.tol = 1e-9;
    cfg.max_iters = 800;
    const auto batch = vw::invert_admm_batch(D, Y, cfg);
    CHECK_FALSE(batch.diverged);
    CHECK(batch.iterations == 800);
    CHECK(batch.X.cols() == 3);
    CHECK(batch.primal_residuals.size() == 3);
    CHECK(batch.X.minCoeff() >= 0.0);
    for (int j = 0; j < 3; ++j) {
        const auto single = vw::invert_admm(D, Y.col(j), cfg);
        CHECK((batch.X.col(j) - single.x).cwiseAbs().maxCoeff() <
              1e-6 * (1.0 + single.x.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("discrepancy_lambda: residual matches the noise level") {
    const Eigen::MatrixXd K = random_matrix(30, 12, 2);
    Eigen::VectorXd x_true = Eigen::VectorXd::Zero(12);
    x_true(3) = 2.0;
    x_true(9) = 1.0;
    const auto key = rng::stream_key(314, 70);
    Eigen::VectorXd noise(30);
    for (int i = 0; i < 30; ++i) noise(i) = 0.02 * rng::normal(key, i);
    const Eigen::VectorXd y = K * x_true + noise;

    vw::AdmmConfig cfg;
    cfg.tol = 1e-9;
    cfg.max_iters = 4000;
    const double target = noise.norm();
    const double frac = vw::discrepancy_lambda(K, y, target, cfg);
    CHECK(frac > 0.0);
    CHECK(frac <= 1.0);
    cfg.lambda_frac = frac;
    cfg.lambda_abs = -1.0;
    const double res = (K * vw::invert_admm(K, y, cfg).x - y).norm();
    CHECK(res == doctest::Approx(target).epsilon(0.10));

    // more regularization leaves a larger residual
    cfg.lambda_frac = 0.5;
    const double res_hi = (K * vw::invert_admm(K, y, cfg).x - y).norm();
    cfg.lambda_frac = 0.001;
    const double res_lo = (K * vw::invert_admm(K, y, cfg).x - y).norm();
    CHECK(res_hi > res_lo);

    CHECK_THROWS_AS(vw::discrepancy_lambda(K, y, 0.0, cfg), value_error);
}
