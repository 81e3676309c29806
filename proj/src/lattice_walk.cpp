#include "thermores/lattice_walk.hpp"
#include "thermores/errors.hpp"

#include <algorithm>
#include <cmath>

namespace thermores::lattice_walk {

std::vector<int> step_ensemble(const std::vector<int>& positions, int n_cells,
                               std::uint64_t seed, long long time,
                               std::uint64_t stream_base) {
    if (n_cells < 1) throw value_error("step_ensemble: n_cells must be >= 1");
    if (time < 0) throw value_error("step_ensemble: time must be >= 0");
    std::vector<int> out(positions.size());
    for (std::size_t w = 0; w < positions.size(); ++w) {
        if (positions[w] < 0 || positions[w] >= n_cells)
            throw value_error("step_ensemble: walker position outside lattice");
        const std::uint64_t key = rng::stream_key(seed, stream_base + w);
        out[w] = reflect_step(positions[w], step_of(key, time), n_cells);
    }
    return out;
}

void walk_inplace(std::vector<int>& positions, int n_cells, std::uint64_t seed,
                  std::uint64_t stream_base, long long t_begin, long long t_end) {
    if (n_cells < 1) throw value_error("walk_inplace: n_cells must be >= 1");
    if (t_begin < 0 || t_end < t_begin) throw value_error("walk_inplace: bad time range");
    for (std::size_t w = 0; w < positions.size(); ++w) {
        const std::uint64_t key = rng::stream_key(seed, stream_base + w);
        int pos = positions[w];
        long long t = t_begin;
        std::uint64_t block = static_cast<std::uint64_t>(t) >> 6;
        std::uint64_t bits = rng::at(key, block);
        for (; t < t_end; ++t) {
            const std::uint64_t b = static_cast<std::uint64_t>(t) >> 6;
            if (b != block) { block = b; bits = rng::at(key, block); }
            const int step = ((bits >> (t & 63)) & 1u) ? 1 : -1;
            const int np = pos + step;
            pos = (static_cast<unsigned>(np) < static_cast<unsigned>(n_cells)) ? np : pos;
        }
        positions[w] = pos;
    }
}

std::vector<int> initial_center(int n_walkers, int cell) {
    return std::vector<int>(static_cast<std::size_t>(n_walkers), cell);
}

std::vector<int> initial_uniform(int n_walkers, int n_cells, std::uint64_t seed,
                                 std::uint64_t stream_base) {
    std::vector<int> pos(static_cast<std::size_t>(n_walkers));
    // placement draws live on a dedicated key so they never collide with
    // step draws
    const std::uint64_t key = rng::stream_key(seed, 0xffffffff00000000ull ^ stream_base);
    for (std::size_t w = 0; w < pos.size(); ++w)
        pos[w] = static_cast<int>(rng::below(key, w, static_cast<std::uint64_t>(n_cells)));
    return pos;
}

Eigen::VectorXd occupation_counts(const std::vector<int>& positions, int n_cells) {
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(n_cells);
    for (int p : positions) {
        if (p < 0 || p >= n_cells) throw value_error("occupation_counts: position outside lattice");
        counts(p) += 1.0;
    }
    return counts;
}

Eigen::MatrixXd counts_at_times(const std::vector<int>& initial, int n_cells,
                                std::uint64_t seed, std::uint64_t stream_base,
                                const std::vector<long long>& record_times) {
    for (std::size_t k = 1; k < record_times.size(); ++k)
        if (record_times[k] < record_times[k - 1])
            throw value_error("counts_at_times: record_times must be nondecreasing");
    if (!record_times.empty() && record_times.front() < 0)
        throw value_error("counts_at_times: record_times must be >= 0");

    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(static_cast<long>(record_times.size()), n_cells);
    // outer loop over walkers keeps the RNG block cached through time
    for (std::size_t w = 0; w < initial.size(); ++w) {
        const std::uint64_t key = rng::stream_key(seed, stream_base + w);
        int pos = initial[w];
        long long t = 0;
        std::uint64_t block = 0;
        std::uint64_t bits = rng::at(key, 0);
        for (std::size_t k = 0; k < record_times.size(); ++k) {
            for (; t < record_times[k]; ++t) {
                const std::uint64_t b = static_cast<std::uint64_t>(t) >> 6;
                if (b != block) { block = b; bits = rng::at(key, block); }
                const int step = ((bits >> (t & 63)) & 1u) ? 1 : -1;
                const int np = pos + step;
                pos = (static_cast<unsigned>(np) < static_cast<unsigned>(n_cells)) ? np : pos;
            }
            counts(static_cast<long>(k), pos) += 1.0;
        }
    }
    return counts;
}

Eigen::MatrixXi trajectories(int n_walkers, int n_cells, int start_cell,
                             long long n_steps, std::uint64_t seed,
                             std::uint64_t stream_base) {
    if (start_cell < 0 || start_cell >= n_cells)
        throw value_error("trajectories: start_cell outside lattice");
    Eigen::MatrixXi traj(n_steps + 1, n_walkers);
    for (int w = 0; w < n_walkers; ++w) {
        const std::uint64_t key = rng::stream_key(seed, stream_base + static_cast<std::uint64_t>(w));
        int pos = start_cell;
        traj(0, w) = pos;
        for (long long t = 0; t < n_steps; ++t) {
            pos = reflect_step(pos, step_of(key, t), n_cells);
            traj(t + 1, w) = pos;
        }
    }
    return traj;
}

Eigen::VectorXd gaussian_profile(int n_cells, int origin, double t, double alpha) {
    if (t <= 0) throw value_error("gaussian_profile: t must be > 0");
    if (alpha <= 0) throw value_error("gaussian_profile: alpha must be > 0");
    Eigen::VectorXd p(n_cells);
    const double denom = 4.0 * alpha * t;
    const double norm = 1.0 / std::sqrt(M_PI * denom);
    for (int i = 0; i < n_cells; ++i) {
        const double d = i - origin;
        p(i) = norm * std::exp(-d * d / denom);
    }
    return p;
}

OccupationStats occupation_stats(double n_walkers, double p) {
    if (p < 0.0 || p > 1.0) throw value_error("occupation_stats: p must be in [0,1]");
    if (n_walkers < 0.0) throw value_error("occupation_stats: n_walkers must be >= 0");
    OccupationStats s;
    s.mean = n_walkers * p;
    s.variance = n_walkers * p * (1.0 - p);
    s.poisson_like = (p < 0.01);
    return s;
}

EquilibriumStats equilibrium_stats(double n_equi, int n_cells, double n_0,
                                   const Eigen::VectorXd& p_gauss) {
    if (n_cells < 1) throw value_error("equilibrium_stats: n_cells must be >= 1");
    if (p_gauss.size() != n_cells)
        throw value_error("equilibrium_stats: p_gauss length must equal n_cells");
    EquilibriumStats s;
    const double total = n_equi + n_0;
    s.mean = Eigen::VectorXd::Constant(n_cells, n_equi / n_cells) + n_0 * p_gauss;
    s.variance = (s.mean.array() * (1.0 - s.mean.array() / total)).matrix();
    s.variance_uniform = n_equi / n_cells;
    return s;
}

double covariance_analytic(int i, int j, double t, double tau, double n_walkers,
                           double alpha) {
    if (t <= 0 || tau < 0) throw value_error("covariance_analytic: need t > 0 and tau >= 0");
    auto p_free = [alpha](int off, double time) {
        const double denom = 4.0 * alpha * time;
        return std::exp(-off * off / denom) / std::sqrt(M_PI * denom);
    };
    // propagator from i to j over lag tau; delta at zero lag
    const double prop = (tau == 0.0) ? (i == j ? 1.0 : 0.0) : p_free(i - j, tau);
    return n_walkers * p_free(i, t) * (prop - p_free(j, t + tau));
}

EmpiricalMoments empirical_moments(const Eigen::MatrixXd& samples) {
    const long R = samples.rows();
    if (R < 2) throw value_error("empirical_moments: need at least 2 realizations");
    EmpiricalMoments m;
    m.mean = samples.colwise().mean();
    Eigen::MatrixXd centered = samples.rowwise() - m.mean.transpose();
    m.variance = centered.array().square().colwise().sum() / static_cast<double>(R - 1);
    m.se_mean = (m.variance / static_cast<double>(R)).array().sqrt();
    return m;
}

}
