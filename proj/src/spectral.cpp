#include "thermores/spectral.hpp"
#include "thermores/dct.hpp"
#include "thermores/errors.hpp"
#include "thermores/rng.hpp"

#include <cmath>

namespace thermores::spectral {

Eigen::MatrixXd build_drift_matrix(int n) {
    if (n < 2) throw value_error("build_drift_matrix: n must be >= 2");
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const bool wall = (i == 0 || i == n - 1);
        M(i, i) = wall ? 0.5 : 1.0;
        if (i > 0) M(i, i - 1) = -0.5;
        if (i < n - 1) M(i, i + 1) = -0.5;
    }
    return M;
}

SpectralSystem singular_values(int n) {
    if (n < 2) throw value_error("singular_values: n must be >= 2");
    SpectralSystem s;
    s.n = n;
    s.k.resize(n);
    s.gamma.resize(n);
    s.gamma_approx.resize(n);
    for (int m = 0; m < n; ++m) {
        const double k = M_PI * m / n;
        const double sk = std::sin(k / 2.0);
        s.k(m) = k;
        s.gamma(m) = 2.0 * sk * sk;
        s.gamma_approx(m) = k * k / 2.0;
    }
    return s;
}

Eigen::MatrixXd integrate_langevin(const Eigen::VectorXd& initial,
                                   const Eigen::MatrixXd& M, double noise_var,
                                   double dt, int n_steps, std::uint64_t seed) {
    const long n = initial.size();
    if (M.rows() != n || M.cols() != n)
        throw value_error("integrate_langevin: M shape must match initial");
    if (dt <= 0) throw value_error("integrate_langevin: dt must be > 0");
    if (noise_var < 0) throw value_error("integrate_langevin: noise variance must be >= 0");
    // gamma_max < 2 for the drift matrix; Euler is stable for dt*gamma <= 2,
    // enforce the conservative dt <= 1/(2*gamma_max) = 1/4 margin
    if (dt > 0.25 + 1e-12)
        throw value_error("integrate_langevin: dt exceeds stability bound 1/4");

    Eigen::MatrixXd traj(n_steps + 1, n);
    Eigen::VectorXd x = initial;
    traj.row(0) = x.transpose();
    const double amp = std::sqrt(noise_var * dt);
    const std::uint64_t key = rng::stream_key(seed, 0x4c414e47ull); // 'LANG'
    std::uint64_t draw = 0;
    Eigen::VectorXd noise(n);
    for (int s = 0; s < n_steps; ++s) {
        if (amp > 0.0) {
            for (long i = 0; i < n; ++i) noise(i) = rng::normal(key, draw++);
            x += -dt * (M * x) + amp * noise;
        } else {
            x += -dt * (M * x);
        }
        traj.row(s + 1) = x.transpose();
    }
    return traj;
}

Eigen::VectorXd evolve_kspace(const Eigen::VectorXd& initial_hat, double t,
                              const SpectralSystem& system,
                              std::optional<double> noise_var,
                              std::uint64_t seed, std::uint64_t draw_base) {
    if (initial_hat.size() != system.n)
        throw value_error("evolve_kspace: initial_hat length must equal system.n");
    if (t < 0) throw value_error("evolve_kspace: t must be >= 0");
    if (noise_var && *noise_var < 0)
        throw value_error("evolve_kspace: noise variance must be >= 0");

    Eigen::VectorXd out(system.n);
    const std::uint64_t key = rng::stream_key(seed, 0x4b535043ull); // 'KSPC'
    for (int m = 0; m < system.n; ++m) {
        const double decay = std::exp(-system.gamma(m) * t);
        double v = decay * initial_hat(m);
        if (noise_var && system.gamma(m) > 0.0) {
            const double var = *noise_var * (1.0 - decay * decay);
            v += std::sqrt(var) * rng::normal(key, draw_base + static_cast<std::uint64_t>(m));
        }
        out(m) = v;
    }
    return out;
}

Eigen::VectorXd drift_power_profile(const Eigen::VectorXd& p0, long long t) {
    if (t < 0) throw value_error("drift_power_profile: t must be >= 0");
    const int n = static_cast<int>(p0.size());
    const SpectralSystem sys = singular_values(n);
    Eigen::VectorXd hat = dct::forward(p0);
    for (int m = 0; m < n; ++m)
        hat(m) *= std::pow(1.0 - sys.gamma(m), static_cast<double>(t));
    return dct::inverse(hat);
}

}
