#pragma once
#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

// Drift-matrix / mode-space machinery for diffusion on n reflecting cells.
//
// M is the (negative) generator of cell-to-cell hopping at rate 1/2 per
// neighbour: interior diagonal 1, wall diagonal 1/2, off-diagonal -1/2.
// The orthonormal DCT-II diagonalizes it exactly:
//   F M F^T = diag(gamma_k),  gamma_k = 2 sin^2(k/2),  k = pi*m/n,
// with the small-k approximation k^2/2 (free diffusion at alpha = 1/2).
// I - M is the one-step transition matrix of the reflecting random walk, so
// (I - M)^t propagates the walk's exact master-equation expectation.
namespace thermores::spectral {

Eigen::MatrixXd build_drift_matrix(int n);

struct SpectralSystem {
    int n = 0;
    Eigen::VectorXd k;            // pi*m/n
    Eigen::VectorXd gamma;        // 2 sin^2(k/2)
    Eigen::VectorXd gamma_approx; // k^2/2
};

SpectralSystem singular_values(int n);

// Euler-Maruyama integration of  dN = -M N dt + sqrt(noise_var*dt) eps  in
// cell space with flat (uncorrelated per-cell) noise. Returns the
// trajectory, rows t = 0..n_steps. Stability requires dt <= 1/(2*gamma_max)
// = 1/4 for the drift matrix; larger dt is rejected.
//
// Note the flat noise forces every mode equally, so the stationary modal
// variance is noise_var / (2*gamma_k * (1 - gamma_k*dt/2)) -- mode
// dependent -- and the conserved k=0 mode performs a free random walk.
// Mode-equipartitioned (fluctuation-dissipation) noise lives in
// evolve_kspace instead.
Eigen::MatrixXd integrate_langevin(const Eigen::VectorXd& initial,
                                   const Eigen::MatrixXd& M, double noise_var,
                                   double dt, int n_steps, std::uint64_t seed = 0);

// Exact mode-space Ornstein-Uhlenbeck update over a finite time t:
//   a_k(t) = e^{-gamma_k t} a_k(0) + N(0, noise_var * (1 - e^{-2 gamma_k t}))
// with the noise amplitude chosen by the fluctuation-dissipation relation
// sigma_k^2 = 2*gamma_k*noise_var, so every damped mode relaxes to
// stationary variance noise_var and the k=0 mode stays noiseless
// (conservation). Pass nullopt for a noiseless (deterministic) propagation.
Eigen::VectorXd evolve_kspace(const Eigen::VectorXd& initial_hat, double t,
                              const SpectralSystem& system,
                              std::optional<double> noise_var,
                              std::uint64_t seed = 0, std::uint64_t draw_base = 0);

// Deterministic master-equation expectation of the reflecting walk:
// p(t) = F^T diag((1-gamma_k)^t) F p0, i.e. (I-M)^t applied spectrally.
Eigen::VectorXd drift_power_profile(const Eigen::VectorXd& p0, long long t);

}
