#pragma once
#include "thermores/rng.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

// Unbiased +-1 random walk on a row of cells with reflecting (adiabatic)
// walls: a step that would leave [0, n_cells) is rejected and the walker
// stays put. One walker-step costs one cached hash draw per 64 steps, so
// 1e10-step ensembles fit in the acceptance-test budget on one core.
//
// Determinism contract: the step taken by walker `stream` at time `t` is a
// pure function of (seed, stream, t) -- see step_of(). Ensembles therefore
// reproduce exactly for any thread count or chunking.
namespace thermores::lattice_walk {

inline int step_of(std::uint64_t walker_key, long long t) {
    const std::uint64_t bits = rng::at(walker_key, static_cast<std::uint64_t>(t) >> 6);
    return ((bits >> (t & 63)) & 1u) ? 1 : -1;
}

inline int reflect_step(int pos, int step, int n_cells) {
    const int np = pos + step;
    return (static_cast<unsigned>(np) < static_cast<unsigned>(n_cells)) ? np : pos;
}

// Advance every walker one step at time `time`. Walker i uses stream
// stream_base + i; pass distinct bases for independent realizations.
std::vector<int> step_ensemble(const std::vector<int>& positions, int n_cells,
                               std::uint64_t seed, long long time,
                               std::uint64_t stream_base = 0);

// In-place multi-step driver (the fast path; identical trajectories to
// repeated step_ensemble calls).
void walk_inplace(std::vector<int>& positions, int n_cells, std::uint64_t seed,
                  std::uint64_t stream_base, long long t_begin, long long t_end);

std::vector<int> initial_center(int n_walkers, int cell);
std::vector<int> initial_uniform(int n_walkers, int n_cells, std::uint64_t seed,
                                 std::uint64_t stream_base);

Eigen::VectorXd occupation_counts(const std::vector<int>& positions, int n_cells);

// Occupation counts of one realization at each requested time (rows follow
// record_times, which must be nondecreasing and start at >= 0).
Eigen::MatrixXd counts_at_times(const std::vector<int>& initial, int n_cells,
                                std::uint64_t seed, std::uint64_t stream_base,
                                const std::vector<long long>& record_times);

// Full per-walker trajectories (t = 0..n_steps rows); for fan plots and
// spreading fits on small ensembles only.
Eigen::MatrixXi trajectories(int n_walkers, int n_cells, int start_cell,
                             long long n_steps, std::uint64_t seed,
                             std::uint64_t stream_base = 0);

// Free-diffusion profile exp(-(i-origin)^2/(4*alpha*t)) / sqrt(4*pi*alpha*t)
// sampled at integer cells; the literal continuum density, no renormalization.
Eigen::VectorXd gaussian_profile(int n_cells, int origin, double t, double alpha);

struct OccupationStats {
    double mean = 0;
    double variance = 0;
    bool poisson_like = false; // var/mean within 1% of 1, i.e. p < 0.01
};

// Binomial occupation moments for n walkers each in this cell with
// probability p: mean np, variance np(1-p).
OccupationStats occupation_stats(double n_walkers, double p);

struct EquilibriumStats {
    Eigen::VectorXd mean;         // n_equi/n_cells + n_0 * p_i
    Eigen::VectorXd variance;     // exact: mean*(1 - mean/(n_equi+n_0))
    double variance_uniform = 0;  // the flat n_equi/n_cells approximation
};

EquilibriumStats equilibrium_stats(double n_equi, int n_cells, double n_0,
                                   const Eigen::VectorXd& p_gauss);

// Two-time occupation covariance of a freely spreading pulse of n walkers:
// cov(N_i(t), N_j... offsets taken relative to the source cell; tau >= 0.
// At tau = 0 the propagator factor collapses to a Kronecker delta.
double covariance_analytic(int i, int j, double t, double tau, double n_walkers,
                           double alpha);

struct EmpiricalMoments {
    Eigen::VectorXd mean;
    Eigen::VectorXd variance; // unbiased, /(R-1)
    Eigen::VectorXd se_mean;  // sqrt(variance/R)
};

// Column-wise moments over realizations (rows of `samples`).
EmpiricalMoments empirical_moments(const Eigen::MatrixXd& samples);

struct OccupationSeries {
    std::vector<double> times;
    Eigen::MatrixXd counts; // row per time, column per cell
};

}
