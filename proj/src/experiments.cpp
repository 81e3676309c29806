#include "thermores/experiments.hpp"
#include "thermores/dct.hpp"
#include "thermores/errors.hpp"
#include "thermores/io.hpp"
#include "thermores/lattice_walk.hpp"
#include "thermores/rng.hpp"
#include "thermores/spectral.hpp"
#include "thermores/version.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace thermores::experiments {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// ---- config plumbing ---------------------------------------------------

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* a : allowed)
            if (it.key() == a) { known = true; break; }
        if (!known) throw config_error(path + "." + it.key(), "unknown field");
    }
}

json block_at(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) return json::object();
    const json& b = obj.at(key);
    if (!b.is_object()) throw config_error(path + "." + key, "expected an object");
    return b;
}

double dbl_at(const json& obj, const std::string& path, const char* key, double dflt) {
    if (!obj.contains(key)) return dflt;
    const json& v = obj.at(key);
    if (!v.is_number()) throw config_error(path + "." + key, "expected a number");
    return v.get<double>();
}

long long ll_at(const json& obj, const std::string& path, const char* key, long long dflt) {
    if (!obj.contains(key)) return dflt;
    const json& v = obj.at(key);
    if (!v.is_number_integer())
        throw config_error(path + "." + key, "expected an integer");
    return v.get<long long>();
}

int int_at(const json& obj, const std::string& path, const char* key, int dflt) {
    return static_cast<int>(ll_at(obj, path, key, dflt));
}

bool bool_at(const json& obj, const std::string& path, const char* key, bool dflt) {
    if (!obj.contains(key)) return dflt;
    const json& v = obj.at(key);
    if (!v.is_boolean()) throw config_error(path + "." + key, "expected a boolean");
    return v.get<bool>();
}

std::string str_at(const json& obj, const std::string& path, const char* key,
                   const std::string& dflt) {
    if (!obj.contains(key)) return dflt;
    const json& v = obj.at(key);
    if (!v.is_string()) throw config_error(path + "." + key, "expected a string");
    return v.get<std::string>();
}

std::vector<double> dlist_at(const json& obj, const std::string& path, const char* key,
                             std::vector<double> dflt) {
    if (!obj.contains(key)) return dflt;
    const json& v = obj.at(key);
    if (!v.is_array() || v.empty())
        throw config_error(path + "." + key, "expected a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw config_error(path + "." + key, "expected numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

std::vector<long long> lllist_at(const json& obj, const std::string& path, const char* key,
                                 std::vector<long long> dflt) {
    if (!obj.contains(key)) return dflt;
    const json& v = obj.at(key);
    if (!v.is_array() || v.empty())
        throw config_error(path + "." + key, "expected a non-empty array of integers");
    std::vector<long long> out;
    for (const auto& e : v) {
        if (!e.is_number_integer()) throw config_error(path + "." + key, "expected integers");
        out.push_back(e.get<long long>());
    }
    return out;
}

std::vector<int> ilist_at(const json& obj, const std::string& path, const char* key,
                          const std::vector<int>& dflt) {
    std::vector<long long> wide(dflt.begin(), dflt.end());
    std::vector<int> out;
    for (long long v : lllist_at(obj, path, key, wide)) out.push_back(static_cast<int>(v));
    return out;
}

void require_positive(long long v, const std::string& field) {
    if (v <= 0) throw config_error(field, "must be > 0");
}

void require_positive(double v, const std::string& field) {
    if (!(v > 0)) throw config_error(field, "must be > 0");
}

// ---- output plumbing ---------------------------------------------------

struct Emitter {
    fs::path dir;
    std::map<std::string, std::string> checksums; // name -> fnv64, sorted

    fs::path path(const std::string& name) const { return dir / name; }

    void took(const std::string& name) { checksums[name] = io::file_checksum(dir / name); }

    void csv(const std::string& name, const std::vector<std::string>& columns,
             const Eigen::MatrixXd& values) {
        io::write_csv(path(name), columns, values);
        took(name);
    }

    void indexed_csv(const std::string& name, const std::string& index_name,
                     const std::string& prefix, const std::vector<double>& index,
                     const Eigen::MatrixXd& values) {
        io::write_indexed_csv(path(name), index_name, prefix, index, values);
        took(name);
    }

    void field(const std::string& bin_name, const heat::Field& f) {
        io::write_field(path(bin_name), f);
        took(bin_name);
        took(fs::path(bin_name).replace_extension(".json").string());
    }

    void grid(const std::string& bin_name, const saft::ReconstructionGrid& g) {
        io::write_grid(path(bin_name), g);
        took(bin_name);
        took(fs::path(bin_name).replace_extension(".json").string());
    }

    void json_file(const std::string& name, const ordered_json& j) {
        std::ofstream f(path(name));
        if (!f) throw std::runtime_error("cannot open for writing: " + path(name).string());
        f << j.dump(2) << '\n';
        f.close();
        took(name);
    }
};

void parallel_for(long long n, int jobs, const std::function<void(long long)>& body) {
    const int workers = static_cast<int>(std::min<long long>(std::max(jobs, 1), n));
    if (workers <= 1) {
        for (long long i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<long long> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const long long i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::string num_tag(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string brief(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

ordered_json finite_or_null(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

// ---- experiment runners ------------------------------------------------

ordered_json run_walk(const WalkParams& p, std::uint64_t seed, Emitter& out, int jobs) {
    namespace lw = lattice_walk;

    const Eigen::MatrixXi traj =
        lw::trajectories(p.fan_walkers, p.fan_cells, p.fan_cells / 2, p.fan_steps, seed, 0);
    std::vector<double> fan_ts(static_cast<std::size_t>(traj.rows()));
    for (long i = 0; i < traj.rows(); ++i) fan_ts[static_cast<std::size_t>(i)] = i;
    out.indexed_csv("trajectories.csv", "t", "walker_", fan_ts, traj.cast<double>());

    // Monte Carlo vs the deterministic master-equation expectation; fan
    // streams occupy [0, fan_walkers), so realizations start at 2^32.
    const std::uint64_t base = 1ull << 32;
    const std::vector<int> initial = lw::initial_center(p.cmp_walkers, p.cmp_start);
    std::vector<Eigen::MatrixXd> samples(
        p.cmp_times.size(), Eigen::MatrixXd(p.cmp_realizations, p.cmp_cells));
    parallel_for(p.cmp_realizations, jobs, [&](long long r) {
        const std::uint64_t stream =
            base + static_cast<std::uint64_t>(r) * static_cast<std::uint64_t>(p.cmp_walkers);
        const Eigen::MatrixXd counts =
            lw::counts_at_times(initial, p.cmp_cells, seed, stream, p.cmp_times);
        for (std::size_t ti = 0; ti < p.cmp_times.size(); ++ti)
            samples[ti].row(r) = counts.row(static_cast<long>(ti));
    });

    Eigen::VectorXd p0 = Eigen::VectorXd::Zero(p.cmp_cells);
    p0(p.cmp_start) = static_cast<double>(p.cmp_walkers);

    Eigen::MatrixXd table(p.cmp_cells, 1 + 4 * p.cmp_times.size());
    for (int c = 0; c < p.cmp_cells; ++c) table(c, 0) = c;
    std::vector<std::string> headers{"cell"};
    ordered_json per_time = ordered_json::array();
    bool within = true;
    for (std::size_t ti = 0; ti < p.cmp_times.size(); ++ti) {
        const auto mom = lw::empirical_moments(samples[ti]);
        const Eigen::VectorXd ref = spectral::drift_power_profile(p0, p.cmp_times[ti]);
        double max_z = 0;
        int compared = 0;
        for (int c = 0; c < p.cmp_cells; ++c) {
            const double se = mom.se_mean(c);
            const double dev = std::abs(mom.mean(c) - ref(c));
            const double z =
                se > 0 ? dev / se : (dev == 0 ? 0.0 : std::numeric_limits<double>::infinity());
            const long col = 1 + 4 * static_cast<long>(ti);
            table(c, col) = mom.mean(c);
            table(c, col + 1) = se;
            table(c, col + 2) = ref(c);
            table(c, col + 3) = z;
            if (ref(c) >= p.cmp_min_expected) {
                max_z = std::max(max_z, z);
                ++compared;
            }
        }
        const std::string tag = "t" + std::to_string(p.cmp_times[ti]);
        headers.insert(headers.end(),
                       {tag + "_mean", tag + "_se", tag + "_ref", tag + "_z"});
        within = within && (max_z < 3.0);
        per_time.push_back({{"t", p.cmp_times[ti]},
                            {"cells_compared", compared},
                            {"max_abs_z", finite_or_null(max_z)}});
    }
    out.csv("cross_model.csv", headers, table);

    ordered_json report;
    report["fan"] = {{"n_cells", p.fan_cells},
                     {"n_walkers", p.fan_walkers},
                     {"n_steps", p.fan_steps}};
    report["cross_model"] = {{"walkers", p.cmp_walkers},
                             {"realizations", p.cmp_realizations},
                             {"min_expected", p.cmp_min_expected},
                             {"z_bound", 3.0},
                             {"times", per_time},
                             {"within_bound", within}};
    out.json_file("report.json", report);
    return report;
}

ordered_json run_occupation(const OccupationParams& p, std::uint64_t seed, Emitter& out,
                            int jobs) {
    namespace lw = lattice_walk;

    // uniform placement: streams [0, R*W)
    Eigen::MatrixXd uni(p.uni_realizations, p.uni_cells);
    parallel_for(p.uni_realizations, jobs, [&](long long r) {
        const std::uint64_t b =
            static_cast<std::uint64_t>(r) * static_cast<std::uint64_t>(p.uni_walkers);
        const auto init = lw::initial_uniform(p.uni_walkers, p.uni_cells, seed, b);
        uni.row(r) = lw::counts_at_times(init, p.uni_cells, seed, b, {p.uni_t}).row(0);
    });
    const auto umom = lw::empirical_moments(uni);
    const auto uexp = lw::occupation_stats(p.uni_walkers, 1.0 / p.uni_cells);
    double uni_max_z = 0;
    for (int c = 0; c < p.uni_cells; ++c)
        uni_max_z = std::max(uni_max_z, std::abs(umom.mean(c) - uexp.mean) / umom.se_mean(c));
    const double pooled_ratio = umom.variance.mean() / uexp.mean;
    const double expected_ratio = 1.0 - 1.0 / p.uni_cells;

    {
        Eigen::MatrixXd t(p.uni_cells, 4);
        for (int c = 0; c < p.uni_cells; ++c) {
            t(c, 0) = c;
            t(c, 1) = umom.mean(c);
            t(c, 2) = umom.se_mean(c);
            t(c, 3) = umom.variance(c);
        }
        out.csv("uniform_stats.csv", {"cell", "mean", "se_mean", "variance"}, t);
    }

    // equilibrium + injected pulse: streams from 2^32
    const std::uint64_t eq_base = 1ull << 32;
    const int eq_total = p.eq_background + p.eq_injected;
    Eigen::MatrixXd eq(p.eq_realizations, p.eq_cells);
    parallel_for(p.eq_realizations, jobs, [&](long long r) {
        const std::uint64_t b =
            eq_base + static_cast<std::uint64_t>(r) * static_cast<std::uint64_t>(eq_total);
        std::vector<int> init = lw::initial_uniform(p.eq_background, p.eq_cells, seed, b);
        init.insert(init.end(), static_cast<std::size_t>(p.eq_injected), p.eq_cell);
        eq.row(r) = lw::counts_at_times(init, p.eq_cells, seed, b, {p.eq_t}).row(0);
    });
    const auto emom = lw::empirical_moments(eq);
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(p.eq_cells);
    delta(p.eq_cell) = 1.0;
    const Eigen::VectorXd p_inj = spectral::drift_power_profile(delta, p.eq_t);
    const auto eexp = lw::equilibrium_stats(p.eq_background, p.eq_cells, p.eq_injected, p_inj);
    const double spatial_mean_var = emom.variance.mean();
    double max_rel_dev = 0;
    for (int c = 0; c < p.eq_cells; ++c)
        max_rel_dev = std::max(max_rel_dev, std::abs(emom.variance(c) / spatial_mean_var - 1.0));
    const double level = eexp.variance_uniform; // background/cells

    {
        Eigen::MatrixXd t(p.eq_cells, 5);
        for (int c = 0; c < p.eq_cells; ++c) {
            t(c, 0) = c;
            t(c, 1) = emom.mean(c);
            t(c, 2) = emom.variance(c);
            t(c, 3) = eexp.mean(c);
            t(c, 4) = eexp.variance(c);
        }
        out.csv("equilibrium_stats.csv",
                {"cell", "mean", "variance", "expected_mean", "expected_variance"}, t);
    }

    // one-realization time series: streams from 2^33
    {
        const std::uint64_t sb = 1ull << 33;
        std::vector<long long> times;
        for (long long t = 0; t <= p.series_steps; t += p.series_every) times.push_back(t);
        const auto init = lw::initial_uniform(p.series_walkers, p.series_cells, seed, sb);
        const Eigen::MatrixXd counts =
            lw::counts_at_times(init, p.series_cells, seed, sb, times);
        std::vector<double> ts(times.begin(), times.end());
        out.indexed_csv("series.csv", "t", "cell_", ts, counts);
    }

    ordered_json report;
    report["uniform"] = {{"walkers", p.uni_walkers},
                         {"n_cells", p.uni_cells},
                         {"t", p.uni_t},
                         {"realizations", p.uni_realizations},
                         {"expected_mean", uexp.mean},
                         {"max_abs_z", finite_or_null(uni_max_z)},
                         {"z_bound", 3.0},
                         {"variance_to_mean", pooled_ratio},
                         {"expected_variance_to_mean", expected_ratio},
                         {"rel_error", std::abs(pooled_ratio / expected_ratio - 1.0)},
                         {"tolerance", 0.10}};
    report["equilibrium"] = {
        {"background_walkers", p.eq_background},
        {"injected_walkers", p.eq_injected},
        {"injection_cell", p.eq_cell},
        {"n_cells", p.eq_cells},
        {"t", p.eq_t},
        {"realizations", p.eq_realizations},
        {"uniform_level_variance", level},
        {"spatial_mean_variance", spatial_mean_var},
        {"band", {0.9 * level, 1.1 * level}},
        {"within_band",
         spatial_mean_var >= 0.9 * level && spatial_mean_var <= 1.1 * level},
        {"max_rel_deviation_from_spatial_mean", max_rel_dev},
        {"constancy_bound", 0.25}};
    out.json_file("report.json", report);
    return report;
}

ordered_json run_langevin(const LangevinParams& p, std::uint64_t seed, Emitter& out,
                          int jobs) {
    (void)jobs; // every block is a single short serial computation

    Eigen::MatrixXd diag_table(static_cast<long>(p.diag_sizes.size()), 2);
    ordered_json diag_rows = ordered_json::array();
    for (std::size_t i = 0; i < p.diag_sizes.size(); ++i) {
        const int n = p.diag_sizes[i];
        const Eigen::MatrixXd M = spectral::build_drift_matrix(n);
        const auto sys = spectral::singular_values(n);
        const Eigen::MatrixXd& B = dct::basis(n);
        const double residual =
            (B * M * B.transpose() - Eigen::MatrixXd(sys.gamma.asDiagonal()))
                .cwiseAbs()
                .maxCoeff();
        diag_table(static_cast<long>(i), 0) = n;
        diag_table(static_cast<long>(i), 1) = residual;
        diag_rows.push_back({{"n", n}, {"max_abs_residual", residual}});
    }
    out.csv("diag_residuals.csv", {"n", "max_abs_residual"}, diag_table);

    {
        const auto sys = spectral::singular_values(p.spectrum_n);
        Eigen::MatrixXd t(p.spectrum_n, 4);
        for (int m = 0; m < p.spectrum_n; ++m) {
            t(m, 0) = m;
            t(m, 1) = sys.k(m);
            t(m, 2) = sys.gamma(m);
            t(m, 3) = sys.gamma_approx(m);
        }
        out.csv("spectrum.csv", {"mode", "k", "gamma", "gamma_approx"}, t);
    }

    // noiseless Euler vs the exact spectral propagator over dt halvings
    const Eigen::MatrixXd Mc = spectral::build_drift_matrix(p.conv_n);
    const auto csys = spectral::singular_values(p.conv_n);
    const std::uint64_t key = rng::stream_key(seed, 0x434f4e56ull);
    Eigen::VectorXd init(p.conv_n);
    for (int i = 0; i < p.conv_n; ++i)
        init(i) = 1.0 + 0.5 * rng::normal(key, static_cast<std::uint64_t>(i));
    const Eigen::VectorXd exact = dct::inverse(
        spectral::evolve_kspace(dct::forward(init), p.conv_t, csys, std::nullopt));
    std::vector<double> dts, errors;
    for (int j = 0; j <= p.conv_halvings; ++j) {
        const double dt = p.conv_dt0 / static_cast<double>(1 << j);
        const long long steps = std::llround(p.conv_t / dt);
        const Eigen::MatrixXd traj =
            spectral::integrate_langevin(init, Mc, 0.0, dt, static_cast<int>(steps), seed);
        dts.push_back(dt);
        errors.push_back((traj.row(traj.rows() - 1).transpose() - exact)
                             .cwiseAbs()
                             .maxCoeff());
    }
    std::vector<double> orders;
    for (std::size_t j = 1; j < errors.size(); ++j)
        orders.push_back(std::log2(errors[j - 1] / errors[j]));
    const double observed =
        orders.empty() ? 0.0
                       : std::accumulate(orders.begin(), orders.end(), 0.0) /
                             static_cast<double>(orders.size());
    {
        Eigen::MatrixXd t(static_cast<long>(dts.size()), 3);
        for (std::size_t j = 0; j < dts.size(); ++j) {
            t(static_cast<long>(j), 0) = dts[j];
            t(static_cast<long>(j), 1) = errors[j];
            t(static_cast<long>(j), 2) =
                j == 0 ? std::numeric_limits<double>::quiet_NaN() : orders[j - 1];
        }
        out.csv("convergence.csv", {"dt", "max_abs_error", "order"}, t);
    }

    // noisy sample trajectory around a flat level, for fluctuation plots
    {
        const Eigen::MatrixXd Ms = spectral::build_drift_matrix(p.sample_n);
        const Eigen::VectorXd flat =
            Eigen::VectorXd::Constant(p.sample_n, p.sample_level);
        const Eigen::MatrixXd traj = spectral::integrate_langevin(
            flat, Ms, p.sample_noise, p.sample_dt, p.sample_steps, seed);
        const long rows = traj.rows();
        std::vector<double> ts;
        std::vector<long> keep;
        for (long i = 0; i < rows; i += p.sample_every) {
            keep.push_back(i);
            ts.push_back(static_cast<double>(i) * p.sample_dt);
        }
        Eigen::MatrixXd thin(static_cast<long>(keep.size()), traj.cols());
        for (std::size_t i = 0; i < keep.size(); ++i)
            thin.row(static_cast<long>(i)) = traj.row(keep[i]);
        out.indexed_csv("langevin_series.csv", "t", "cell_", ts, thin);
    }

    ordered_json report;
    report["diagonalization"] = {{"residual_bound", 1e-10}, {"sizes", diag_rows}};
    ordered_json conv;
    conv["n_cells"] = p.conv_n;
    conv["t_final"] = p.conv_t;
    conv["dts"] = dts;
    conv["errors"] = errors;
    conv["orders"] = orders;
    conv["observed_order"] = observed;
    conv["expected_order"] = 1.0;
    conv["tolerance"] = 0.2;
    report["convergence"] = conv;
    report["sample"] = {{"n_cells", p.sample_n},
                        {"level", p.sample_level},
                        {"noise_var", p.sample_noise},
                        {"dt", p.sample_dt},
                        {"n_steps", p.sample_steps}};
    out.json_file("report.json", report);
    return report;
}

ordered_json run_entropy(const EntropyParams& p, std::uint64_t seed, Emitter& out,
                         int jobs) {
    (void)jobs;
    const auto sys = spectral::singular_values(p.n_cells);
    Eigen::MatrixXd S(p.t_max + 1, p.n_profiles);
    ordered_json per_profile = ordered_json::array();
    double global_min_delta = std::numeric_limits<double>::infinity();
    for (int j = 0; j < p.n_profiles; ++j) {
        const std::uint64_t key =
            rng::stream_key(seed, (1ull << 40) + static_cast<std::uint64_t>(j));
        Eigen::VectorXd prof(p.n_cells);
        for (int i = 0; i < p.n_cells; ++i)
            prof(i) = 0.05 + rng::uniform01(key, static_cast<std::uint64_t>(i));
        prof /= prof.sum();
        const Eigen::VectorXd hat = dct::forward(prof);
        for (int t = 0; t <= p.t_max; ++t) {
            const Eigen::VectorXd pt = dct::inverse(
                spectral::evolve_kspace(hat, static_cast<double>(t), sys, std::nullopt));
            S(t, j) = resolution::shannon_entropy(pt);
        }
        double min_delta = std::numeric_limits<double>::infinity();
        for (int t = 1; t <= p.t_max; ++t) min_delta = std::min(min_delta, S(t, j) - S(t - 1, j));
        global_min_delta = std::min(global_min_delta, min_delta);
        per_profile.push_back({{"profile", j},
                               {"min_step_delta", min_delta},
                               {"nondecreasing", min_delta >= -1e-12}});
    }
    std::vector<double> ts(static_cast<std::size_t>(p.t_max + 1));
    for (int t = 0; t <= p.t_max; ++t) ts[static_cast<std::size_t>(t)] = t;
    out.indexed_csv("entropy.csv", "t", "profile_", ts, S);

    ordered_json report;
    report["n_cells"] = p.n_cells;
    report["uniform_entropy"] = std::log(static_cast<double>(p.n_cells));
    report["min_step_delta"] = global_min_delta;
    report["all_nondecreasing"] = global_min_delta >= -1e-12;
    report["profiles"] = per_profile;
    out.json_file("report.json", report);
    return report;
}

ordered_json run_psf1d(const Psf1dParams& p, std::uint64_t seed, Emitter& out, int jobs) {
    (void)seed;
    (void)jobs;
    const double pi = M_PI;

    const long n_rows = static_cast<long>(p.alphas.size() * p.times.size() * p.snr_ks.size());
    Eigen::MatrixXd cut(n_rows, 6);
    long row = 0;
    double max_pi_dev = 0;
    for (double a : p.alphas)
        for (double t : p.times)
            for (double s : p.snr_ks) {
                const double k = resolution::k_cut(s, a, t);
                const double dr = resolution::delta_r_time(a, t, s);
                cut(row, 0) = a;
                cut(row, 1) = t;
                cut(row, 2) = s;
                cut(row, 3) = k;
                cut(row, 4) = dr;
                cut(row, 5) = dr * k;
                max_pi_dev = std::max(max_pi_dev, std::abs(dr * k - pi));
                ++row;
            }
    out.csv("cutoffs.csv", {"alpha", "t", "snr_k", "k_cut", "delta_r", "product"}, cut);

    Eigen::MatrixXd depth(static_cast<long>(p.alphas.size()), 4);
    double dr_min = std::numeric_limits<double>::infinity(), dr_max = 0;
    for (std::size_t i = 0; i < p.alphas.size(); ++i) {
        const auto fc = resolution::omega_cut(p.alphas[i], p.depth_snr, p.depth_x);
        const double dr = pi * fc.mu_cut;
        depth(static_cast<long>(i), 0) = p.alphas[i];
        depth(static_cast<long>(i), 1) = fc.omega_cut;
        depth(static_cast<long>(i), 2) = fc.mu_cut;
        depth(static_cast<long>(i), 3) = dr;
        dr_min = std::min(dr_min, dr);
        dr_max = std::max(dr_max, dr);
    }
    out.csv("depth_resolution.csv", {"alpha", "omega_cut", "mu_cut", "delta_r"}, depth);

    const double kcut = resolution::k_cut(p.sinc_snr_k, p.sinc_alpha, p.sinc_t);
    const double half = p.sinc_half_width * pi / kcut;
    Eigen::VectorXd xs(p.sinc_samples);
    const double dx = 2.0 * half / (p.sinc_samples - 1);
    for (int i = 0; i < p.sinc_samples; ++i) xs(i) = -half + dx * i;
    const Eigen::VectorXd prof = resolution::sinc_reconstruction(1.0, kcut, xs);
    const auto lobe = resolution::measure_mainlobe(prof, dx, -half);
    {
        Eigen::MatrixXd t(p.sinc_samples, 2);
        t.col(0) = xs;
        t.col(1) = prof;
        out.csv("sinc_profile.csv", {"x", "value"}, t);
    }

    ordered_json report;
    report["cutoff_identity"] = {{"rows", n_rows},
                                 {"max_abs_deviation_from_pi", max_pi_dev}};
    report["alpha_independence"] = {{"x", p.depth_x},
                                    {"snr", p.depth_snr},
                                    {"delta_r", pi * p.depth_x / std::log(p.depth_snr)},
                                    {"spread", dr_max - dr_min},
                                    {"bound", 1e-12}};
    report["sinc"] = {{"k_cut", kcut},
                      {"zero_to_zero", lobe.zero_to_zero},
                      {"expected_zero_to_zero", 2.0 * pi / kcut},
                      {"rel_error", std::abs(lobe.zero_to_zero * kcut / (2.0 * pi) - 1.0)},
                      {"fwhm", finite_or_null(lobe.fwhm)},
                      {"measurement_ok", lobe.ok}};
    out.json_file("report.json", report);
    return report;
}

ordered_json run_psf2d(const Psf2dParams& p, std::uint64_t seed, Emitter& out, int jobs) {
    (void)seed;
    (void)jobs;

    ordered_json images = ordered_json::array();
    for (double snr : p.snrs) {
        const auto img = resolution::psf_2d(snr, p.d, p.grid);
        const std::string tag = num_tag(snr);

        heat::Field f;
        f.values = img.values;
        f.spacing = img.spacing * img.d;
        f.alpha = 0.0;
        out.field("psf_snr" + tag + ".bin", f);

        const Eigen::VectorXd axial = img.values.col(img.center);
        const Eigen::VectorXd lateral = img.values.row(img.center).transpose();
        const double origin = -img.center * img.spacing;
        {
            Eigen::MatrixXd t(axial.size(), 2);
            for (long i = 0; i < axial.size(); ++i) {
                t(i, 0) = 1.0 + origin + img.spacing * i; // z/d
                t(i, 1) = axial(i);
            }
            out.csv("axial_snr" + tag + ".csv", {"z_over_d", "value"}, t);
        }
        {
            Eigen::MatrixXd t(lateral.size(), 2);
            for (long i = 0; i < lateral.size(); ++i) {
                t(i, 0) = origin + img.spacing * i; // x/d
                t(i, 1) = lateral(i);
            }
            out.csv("lateral_snr" + tag + ".csv", {"x_over_d", "value"}, t);
        }

        const auto ma = resolution::measure_mainlobe(axial, img.spacing, origin);
        // the lateral lobe's first zeros fall outside the grid; only its
        // half-max points are needed
        const double lat_fwhm = resolution::fwhm_around(lateral, img.center, img.spacing);
        const double quarter = ma.zero_to_zero / 4.0;
        images.push_back(
            {{"snr", snr},
             {"axial_window_z_over_d",
              {1.0 + ma.peak_position - quarter, 1.0 + ma.peak_position + quarter}},
             {"axial_zero_to_zero", ma.zero_to_zero},
             {"axial_fwhm", finite_or_null(ma.fwhm)},
             {"lateral_fwhm", finite_or_null(lat_fwhm)},
             {"lateral_to_axial_fwhm", finite_or_null(lat_fwhm / ma.fwhm)},
             {"measurement_ok", ma.ok && std::isfinite(lat_fwhm)}});
    }

    // width scan over SNR on dense 1D profiles; ranges scale as 1/ln(snr)
    // so every lobe is sampled identically
    std::vector<double> scan = p.monotonicity_snrs;
    std::sort(scan.begin(), scan.end());
    Eigen::MatrixXd mono(static_cast<long>(scan.size()), 3);
    bool strict = true;
    for (std::size_t i = 0; i < scan.size(); ++i) {
        const double snr = scan[i];
        const double scale = std::log(1000.0) / std::log(snr);
        const int n = p.profile_samples;
        const int center = n / 2;
        const double wa = 0.9 * scale, wl = 1.8 * scale;
        Eigen::VectorXd axial(n), lateral(n);
        const double da = 2.0 * wa / (n - 1), dl = 2.0 * wl / (n - 1);
        for (int s = 0; s < n; ++s) {
            axial(s) = resolution::psf_2d_value(snr, 0.0, -wa + da * s);
            lateral(s) = resolution::psf_2d_value(snr, -wl + dl * s, 0.0);
        }
        const double fa = resolution::fwhm_around(axial, center, da) * p.d;
        const double fl = resolution::fwhm_around(lateral, center, dl) * p.d;
        mono(static_cast<long>(i), 0) = snr;
        mono(static_cast<long>(i), 1) = fa;
        mono(static_cast<long>(i), 2) = fl;
        if (i > 0)
            strict = strict && fa < mono(static_cast<long>(i) - 1, 1) &&
                     fl < mono(static_cast<long>(i) - 1, 2);
    }
    out.csv("monotonicity.csv", {"snr", "fwhm_axial", "fwhm_lateral"}, mono);

    ordered_json report;
    report["d"] = p.d;
    report["grid"] = {{"n", p.grid.n}, {"half_width", p.grid.half_width}};
    report["images"] = images;
    ordered_json ms;
    ms["snrs"] = scan;
    ms["strictly_shrinking"] = strict;
    report["monotonicity"] = ms;
    out.json_file("report.json", report);
    return report;
}

ordered_json run_phantom(const pipeline::PipelineParams& pp, std::uint64_t seed,
                         Emitter& out, int jobs) {
    (void)jobs; // the decomposition/solve stages are single dense problems
    const auto result = pipeline::run_pipeline(pp, seed);

    out.field("phantom.bin", result.phantom_visible);
    io::write_record_csv(out.path("record.csv"), result.record);
    out.took("record.csv");
    io::write_virtual_csv(out.path("virtual.csv"), result.vwave);
    out.took("virtual.csv");
    out.grid("reconstruction.bin", result.recon);
    {
        const auto& S = result.kernel_singular_values;
        Eigen::MatrixXd t(S.size(), 2);
        for (long i = 0; i < S.size(); ++i) {
            t(i, 0) = i;
            t(i, 1) = S(i);
        }
        out.csv("kernel_singular_values.csv", {"index", "sigma"}, t);
    }

    // kernel quadrature diagnostics (rebuilt; the kernel is cheap)
    const double dt = pp.record.t_max / pp.record.n_t;
    const double dtp = pp.kernel.tp_max / pp.kernel.n_tp;
    std::vector<double> ts(static_cast<std::size_t>(pp.record.n_t));
    for (int i = 0; i < pp.record.n_t; ++i) ts[static_cast<std::size_t>(i)] = dt * (i + 1);
    std::vector<double> tp(static_cast<std::size_t>(pp.kernel.n_tp));
    for (int i = 0; i < pp.kernel.n_tp; ++i) tp[static_cast<std::size_t>(i)] = dtp * i;
    const Eigen::MatrixXd K = virtual_wave::build_kernel(ts, tp, pp.scene.c, pp.scene.alpha);
    double max_row_dev = 0;
    for (long i = 0; i < K.rows(); ++i)
        if (ts[static_cast<std::size_t>(i)] >= 10.0 * dt - 1e-12)
            max_row_dev = std::max(max_row_dev, std::abs(K.row(i).sum() - 2.0) / 2.0);
    const auto& S = result.kernel_singular_values;
    double smallest = 0;
    for (long i = S.size() - 1; i >= 0; --i)
        if (S(i) > 0) { smallest = S(i); break; }
    const double decades = smallest > 0
                               ? std::log10(S(0) / smallest)
                               : std::numeric_limits<double>::infinity();

    ordered_json report;
    report["regularizer"] = pp.regularizer == pipeline::Regularizer::tsvd ? "tsvd" : "admm";
    report["grid"] = {{"nx", pp.grid.nx}, {"nz", pp.grid.nz}, {"spacing", pp.grid.spacing}};
    report["kernel"] = {{"n_t", pp.record.n_t},
                        {"n_tp", pp.kernel.n_tp},
                        {"dt", dt},
                        {"dtp", dtp},
                        {"max_row_sum_rel_error", max_row_dev},
                        {"singular_value_decades", finite_or_null(decades)}};
    if (pp.regularizer == pipeline::Regularizer::tsvd) {
        report["tsvd"] = {{"rel_threshold", pp.tsvd_rel_threshold},
                          {"rank", result.tsvd_rank},
                          {"zeroed", result.tsvd_zeroed}};
    } else {
        report["admm"] = {{"lambda_frac", pp.admm.lambda_frac},
                          {"rho", pp.admm.rho},
                          {"max_iters", pp.admm.max_iters},
                          {"iterations", result.admm_iterations},
                          {"converged", result.admm_converged},
                          {"diverged", result.admm_diverged}};
    }
    ordered_json sources = ordered_json::array();
    for (const auto& s : result.sources)
        sources.push_back({{"x", s.x},
                           {"z", s.z},
                           {"truth_ix", s.truth_ix},
                           {"truth_iz", s.truth_iz},
                           {"peak_ix", s.peak_ix},
                           {"peak_iz", s.peak_iz},
                           {"err_ix", s.err_ix},
                           {"err_iz", s.err_iz},
                           {"peak_value", s.peak_value},
                           {"fwhm_z", finite_or_null(s.fwhm_z)}});
    report["sources"] = sources;
    report["background_rms"] = pipeline::background_rms(result.recon, result.sources);
    report["reconstruction_min"] = result.reconstruction_min;
    report["contrast"] = {{"record", result.contrast.record},
                          {"reconstruction", result.contrast.reconstruction},
                          {"ratio", finite_or_null(result.contrast.ratio)}};
    out.json_file("report.json", report);
    return report;
}

ordered_json run_gain_table(const GainTableParams& p, std::uint64_t seed, Emitter& out,
                            int jobs) {
    (void)seed;
    (void)jobs;
    Eigen::MatrixXd t(static_cast<long>(p.detector_counts.size()), 3);
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < p.detector_counts.size(); ++i) {
        const int n = p.detector_counts[i];
        const auto [snr_gain, res_gain] = saft::averaging_gain(n);
        t(static_cast<long>(i), 0) = n;
        t(static_cast<long>(i), 1) = snr_gain;
        t(static_cast<long>(i), 2) = res_gain;
        rows.push_back(
            {{"n_detectors", n}, {"snr_gain", snr_gain}, {"resolution_gain", res_gain}});
    }
    out.csv("gain_table.csv", {"n_detectors", "snr_gain", "resolution_gain"}, t);
    ordered_json report;
    report["entries"] = rows;
    out.json_file("report.json", report);
    return report;
}

} // namespace

// ---- parsing -----------------------------------------------------------

WalkParams default_walk_params() { return {}; }
OccupationParams default_occupation_params() { return {}; }
LangevinParams default_langevin_params() { return {}; }
EntropyParams default_entropy_params() { return {}; }
Psf1dParams default_psf1d_params() { return {}; }
Psf2dParams default_psf2d_params() { return {}; }
GainTableParams default_gain_table_params() { return {}; }

WalkParams parse_walk_params(const json& params) {
    WalkParams p;
    check_keys(params, "params", {"fan", "cross_model"});
    const json fan = block_at(params, "params", "fan");
    check_keys(fan, "params.fan", {"n_cells", "n_walkers", "n_steps"});
    p.fan_cells = int_at(fan, "params.fan", "n_cells", p.fan_cells);
    p.fan_walkers = int_at(fan, "params.fan", "n_walkers", p.fan_walkers);
    p.fan_steps = ll_at(fan, "params.fan", "n_steps", p.fan_steps);
    require_positive(static_cast<long long>(p.fan_cells), "params.fan.n_cells");
    require_positive(static_cast<long long>(p.fan_walkers), "params.fan.n_walkers");
    require_positive(p.fan_steps, "params.fan.n_steps");

    const json cm = block_at(params, "params", "cross_model");
    check_keys(cm, "params.cross_model",
               {"n_cells", "start_cell", "walkers", "realizations", "times", "min_expected"});
    p.cmp_cells = int_at(cm, "params.cross_model", "n_cells", p.cmp_cells);
    p.cmp_start = int_at(cm, "params.cross_model", "start_cell", p.cmp_start);
    p.cmp_walkers = int_at(cm, "params.cross_model", "walkers", p.cmp_walkers);
    p.cmp_realizations = int_at(cm, "params.cross_model", "realizations", p.cmp_realizations);
    p.cmp_times = lllist_at(cm, "params.cross_model", "times", p.cmp_times);
    p.cmp_min_expected = dbl_at(cm, "params.cross_model", "min_expected", p.cmp_min_expected);
    if (p.cmp_cells < 2) throw config_error("params.cross_model.n_cells", "must be >= 2");
    if (p.cmp_start < 0 || p.cmp_start >= p.cmp_cells)
        throw config_error("params.cross_model.start_cell", "outside [0, n_cells)");
    require_positive(static_cast<long long>(p.cmp_walkers), "params.cross_model.walkers");
    if (p.cmp_realizations < 2)
        throw config_error("params.cross_model.realizations", "must be >= 2");
    for (std::size_t i = 0; i < p.cmp_times.size(); ++i)
        if (p.cmp_times[i] < 0 || (i > 0 && p.cmp_times[i] < p.cmp_times[i - 1]))
            throw config_error("params.cross_model.times", "must be nondecreasing and >= 0");
    require_positive(p.cmp_min_expected, "params.cross_model.min_expected");
    return p;
}

OccupationParams parse_occupation_params(const json& params) {
    OccupationParams p;
    check_keys(params, "params", {"uniform", "equilibrium", "series"});
    const json u = block_at(params, "params", "uniform");
    check_keys(u, "params.uniform", {"walkers", "n_cells", "t", "realizations"});
    p.uni_walkers = int_at(u, "params.uniform", "walkers", p.uni_walkers);
    p.uni_cells = int_at(u, "params.uniform", "n_cells", p.uni_cells);
    p.uni_t = ll_at(u, "params.uniform", "t", p.uni_t);
    p.uni_realizations = int_at(u, "params.uniform", "realizations", p.uni_realizations);
    require_positive(static_cast<long long>(p.uni_walkers), "params.uniform.walkers");
    if (p.uni_cells < 2) throw config_error("params.uniform.n_cells", "must be >= 2");
    require_positive(p.uni_t, "params.uniform.t");
    if (p.uni_realizations < 2)
        throw config_error("params.uniform.realizations", "must be >= 2");

    const json e = block_at(params, "params", "equilibrium");
    check_keys(e, "params.equilibrium",
               {"background_walkers", "injected_walkers", "injection_cell", "n_cells", "t",
                "realizations"});
    p.eq_background = int_at(e, "params.equilibrium", "background_walkers", p.eq_background);
    p.eq_injected = int_at(e, "params.equilibrium", "injected_walkers", p.eq_injected);
    p.eq_cell = int_at(e, "params.equilibrium", "injection_cell", p.eq_cell);
    p.eq_cells = int_at(e, "params.equilibrium", "n_cells", p.eq_cells);
    p.eq_t = ll_at(e, "params.equilibrium", "t", p.eq_t);
    p.eq_realizations = int_at(e, "params.equilibrium", "realizations", p.eq_realizations);
    require_positive(static_cast<long long>(p.eq_background),
                     "params.equilibrium.background_walkers");
    require_positive(static_cast<long long>(p.eq_injected),
                     "params.equilibrium.injected_walkers");
    if (p.eq_cells < 2) throw config_error("params.equilibrium.n_cells", "must be >= 2");
    if (p.eq_cell < 0 || p.eq_cell >= p.eq_cells)
        throw config_error("params.equilibrium.injection_cell", "outside [0, n_cells)");
    require_positive(p.eq_t, "params.equilibrium.t");
    if (p.eq_realizations < 2)
        throw config_error("params.equilibrium.realizations", "must be >= 2");

    const json s = block_at(params, "params", "series");
    check_keys(s, "params.series", {"walkers", "n_cells", "n_steps", "record_every"});
    p.series_walkers = int_at(s, "params.series", "walkers", p.series_walkers);
    p.series_cells = int_at(s, "params.series", "n_cells", p.series_cells);
    p.series_steps = ll_at(s, "params.series", "n_steps", p.series_steps);
    p.series_every = ll_at(s, "params.series", "record_every", p.series_every);
    require_positive(static_cast<long long>(p.series_walkers), "params.series.walkers");
    if (p.series_cells < 2) throw config_error("params.series.n_cells", "must be >= 2");
    require_positive(p.series_steps, "params.series.n_steps");
    require_positive(p.series_every, "params.series.record_every");
    return p;
}

LangevinParams parse_langevin_params(const json& params) {
    LangevinParams p;
    check_keys(params, "params", {"diagonalization", "convergence", "spectrum", "sample"});
    const json d = block_at(params, "params", "diagonalization");
    check_keys(d, "params.diagonalization", {"sizes"});
    p.diag_sizes = ilist_at(d, "params.diagonalization", "sizes", p.diag_sizes);
    for (int n : p.diag_sizes)
        if (n < 2) throw config_error("params.diagonalization.sizes", "entries must be >= 2");

    const json c = block_at(params, "params", "convergence");
    check_keys(c, "params.convergence", {"n_cells", "t_final", "dt_start", "halvings"});
    p.conv_n = int_at(c, "params.convergence", "n_cells", p.conv_n);
    p.conv_t = dbl_at(c, "params.convergence", "t_final", p.conv_t);
    p.conv_dt0 = dbl_at(c, "params.convergence", "dt_start", p.conv_dt0);
    p.conv_halvings = int_at(c, "params.convergence", "halvings", p.conv_halvings);
    if (p.conv_n < 2) throw config_error("params.convergence.n_cells", "must be >= 2");
    require_positive(p.conv_t, "params.convergence.t_final");
    if (!(p.conv_dt0 > 0) || p.conv_dt0 > 0.25)
        throw config_error("params.convergence.dt_start", "must be in (0, 0.25]");
    if (p.conv_halvings < 1)
        throw config_error("params.convergence.halvings", "must be >= 1");

    const json sp = block_at(params, "params", "spectrum");
    check_keys(sp, "params.spectrum", {"n_cells"});
    p.spectrum_n = int_at(sp, "params.spectrum", "n_cells", p.spectrum_n);
    if (p.spectrum_n < 2) throw config_error("params.spectrum.n_cells", "must be >= 2");

    const json sm = block_at(params, "params", "sample");
    check_keys(sm, "params.sample",
               {"n_cells", "level", "noise_var", "dt", "n_steps", "record_every"});
    p.sample_n = int_at(sm, "params.sample", "n_cells", p.sample_n);
    p.sample_level = dbl_at(sm, "params.sample", "level", p.sample_level);
    p.sample_noise = dbl_at(sm, "params.sample", "noise_var", p.sample_noise);
    p.sample_dt = dbl_at(sm, "params.sample", "dt", p.sample_dt);
    p.sample_steps = int_at(sm, "params.sample", "n_steps", p.sample_steps);
    p.sample_every = int_at(sm, "params.sample", "record_every", p.sample_every);
    if (p.sample_n < 2) throw config_error("params.sample.n_cells", "must be >= 2");
    if (p.sample_noise < 0) throw config_error("params.sample.noise_var", "must be >= 0");
    if (!(p.sample_dt > 0) || p.sample_dt > 0.25)
        throw config_error("params.sample.dt", "must be in (0, 0.25]");
    require_positive(static_cast<long long>(p.sample_steps), "params.sample.n_steps");
    require_positive(static_cast<long long>(p.sample_every), "params.sample.record_every");
    return p;
}

EntropyParams parse_entropy_params(const json& params) {
    EntropyParams p;
    check_keys(params, "params", {"n_cells", "n_profiles", "t_max"});
    p.n_cells = int_at(params, "params", "n_cells", p.n_cells);
    p.n_profiles = int_at(params, "params", "n_profiles", p.n_profiles);
    p.t_max = int_at(params, "params", "t_max", p.t_max);
    if (p.n_cells < 2) throw config_error("params.n_cells", "must be >= 2");
    require_positive(static_cast<long long>(p.n_profiles), "params.n_profiles");
    require_positive(static_cast<long long>(p.t_max), "params.t_max");
    return p;
}

Psf1dParams parse_psf1d_params(const json& params) {
    Psf1dParams p;
    check_keys(params, "params", {"cutoff_grid", "depth", "sinc"});
    const json cg = block_at(params, "params", "cutoff_grid");
    check_keys(cg, "params.cutoff_grid", {"alphas", "times", "snr_ks"});
    p.alphas = dlist_at(cg, "params.cutoff_grid", "alphas", p.alphas);
    p.times = dlist_at(cg, "params.cutoff_grid", "times", p.times);
    p.snr_ks = dlist_at(cg, "params.cutoff_grid", "snr_ks", p.snr_ks);
    for (double a : p.alphas)
        if (!(a > 0)) throw config_error("params.cutoff_grid.alphas", "must be > 0");
    for (double t : p.times)
        if (!(t > 0)) throw config_error("params.cutoff_grid.times", "must be > 0");
    for (double s : p.snr_ks)
        if (!(s > 1)) throw config_error("params.cutoff_grid.snr_ks", "must be > 1");

    const json de = block_at(params, "params", "depth");
    check_keys(de, "params.depth", {"x", "snr"});
    p.depth_x = dbl_at(de, "params.depth", "x", p.depth_x);
    p.depth_snr = dbl_at(de, "params.depth", "snr", p.depth_snr);
    require_positive(p.depth_x, "params.depth.x");
    if (!(p.depth_snr > 1)) throw config_error("params.depth.snr", "must be > 1");

    const json si = block_at(params, "params", "sinc");
    check_keys(si, "params.sinc", {"alpha", "t", "snr_k", "n_samples", "half_width"});
    p.sinc_alpha = dbl_at(si, "params.sinc", "alpha", p.sinc_alpha);
    p.sinc_t = dbl_at(si, "params.sinc", "t", p.sinc_t);
    p.sinc_snr_k = dbl_at(si, "params.sinc", "snr_k", p.sinc_snr_k);
    p.sinc_samples = int_at(si, "params.sinc", "n_samples", p.sinc_samples);
    p.sinc_half_width = dbl_at(si, "params.sinc", "half_width", p.sinc_half_width);
    require_positive(p.sinc_alpha, "params.sinc.alpha");
    require_positive(p.sinc_t, "params.sinc.t");
    if (!(p.sinc_snr_k > 1)) throw config_error("params.sinc.snr_k", "must be > 1");
    if (p.sinc_samples < 33) throw config_error("params.sinc.n_samples", "must be >= 33");
    if (!(p.sinc_half_width > 1))
        throw config_error("params.sinc.half_width", "must be > 1 zero spacing");
    return p;
}

Psf2dParams parse_psf2d_params(const json& params) {
    Psf2dParams p;
    check_keys(params, "params", {"snrs", "d", "grid", "monotonicity_snrs", "profile_samples"});
    p.snrs = dlist_at(params, "params", "snrs", p.snrs);
    p.d = dbl_at(params, "params", "d", p.d);
    const json g = block_at(params, "params", "grid");
    check_keys(g, "params.grid", {"n", "half_width"});
    p.grid.n = int_at(g, "params.grid", "n", p.grid.n);
    p.grid.half_width = dbl_at(g, "params.grid", "half_width", p.grid.half_width);
    p.monotonicity_snrs =
        dlist_at(params, "params", "monotonicity_snrs", p.monotonicity_snrs);
    p.profile_samples = int_at(params, "params", "profile_samples", p.profile_samples);
    require_positive(p.d, "params.d");
    if (p.grid.n < 16) throw config_error("params.grid.n", "must be >= 16");
    require_positive(p.grid.half_width, "params.grid.half_width");
    for (double s : p.snrs) {
        if (!(s > 1)) throw config_error("params.snrs", "must be > 1");
        const double spacing = 2.0 * p.grid.half_width / p.grid.n;
        if (2.0 * M_PI / std::log(s) / spacing < 16.0)
            throw config_error("params.grid",
                               "fewer than 16 samples across the axial main lobe");
    }
    for (double s : p.monotonicity_snrs)
        if (!(s > 1)) throw config_error("params.monotonicity_snrs", "must be > 1");
    if (p.monotonicity_snrs.size() < 2)
        throw config_error("params.monotonicity_snrs", "need at least 2 entries");
    if (p.profile_samples < 33 || p.profile_samples % 2 == 0)
        throw config_error("params.profile_samples", "must be odd and >= 33");
    return p;
}

GainTableParams parse_gain_table_params(const json& params) {
    GainTableParams p;
    check_keys(params, "params", {"detector_counts"});
    p.detector_counts = ilist_at(params, "params", "detector_counts", p.detector_counts);
    for (int n : p.detector_counts)
        if (n < 1) throw config_error("params.detector_counts", "entries must be >= 1");
    return p;
}

pipeline::PipelineParams parse_pipeline_params(const json& params) {
    pipeline::PipelineParams p = pipeline::reference_gaussian_params();
    check_keys(params, "params",
               {"source_kind", "regularizer", "sources", "scene", "record", "kernel", "grid",
                "tsvd_rel_threshold", "admm"});
    const std::string kind = str_at(params, "params", "source_kind", "gaussian");
    if (kind == "gaussian")
        p.kind = pipeline::SourceKind::gaussian;
    else if (kind == "spike")
        p.kind = pipeline::SourceKind::spike;
    else
        throw config_error("params.source_kind", "expected \"gaussian\" or \"spike\"");
    const std::string reg = str_at(params, "params", "regularizer", "tsvd");
    if (reg == "tsvd")
        p.regularizer = pipeline::Regularizer::tsvd;
    else if (reg == "admm")
        p.regularizer = pipeline::Regularizer::admm;
    else
        throw config_error("params.regularizer", "expected \"tsvd\" or \"admm\"");

    if (params.contains("sources")) {
        const json& src = params.at("sources");
        if (!src.is_array() || src.empty())
            throw config_error("params.sources", "expected a non-empty array");
        p.sources.clear();
        for (const auto& s : src) {
            if (!s.is_object()) throw config_error("params.sources", "entries must be objects");
            check_keys(s, "params.sources[]", {"x", "z", "amplitude", "width"});
            heat::GaussianSource g;
            if (!s.contains("x") || !s.contains("z"))
                throw config_error("params.sources[]", "x and z are required");
            g.x = dbl_at(s, "params.sources[]", "x", 0.0);
            g.z = dbl_at(s, "params.sources[]", "z", 0.0);
            g.amplitude = dbl_at(s, "params.sources[]", "amplitude", 1.0);
            g.width = dbl_at(s, "params.sources[]", "width", 0.0);
            p.sources.push_back(g);
        }
    }

    const json sc = block_at(params, "params", "scene");
    check_keys(sc, "params.scene", {"nx", "nz", "pad", "alpha", "c"});
    p.scene.nx = int_at(sc, "params.scene", "nx", p.scene.nx);
    p.scene.nz = int_at(sc, "params.scene", "nz", p.scene.nz);
    p.scene.pad = int_at(sc, "params.scene", "pad", p.scene.pad);
    p.scene.alpha = dbl_at(sc, "params.scene", "alpha", p.scene.alpha);
    p.scene.c = dbl_at(sc, "params.scene", "c", p.scene.c);

    const json rc = block_at(params, "params", "record");
    check_keys(rc, "params.record", {"n_t", "t_max", "snr"});
    p.record.n_t = int_at(rc, "params.record", "n_t", p.record.n_t);
    p.record.t_max = dbl_at(rc, "params.record", "t_max", p.record.t_max);
    p.record.snr = dbl_at(rc, "params.record", "snr", p.record.snr);

    const json kn = block_at(params, "params", "kernel");
    check_keys(kn, "params.kernel", {"n_tp", "tp_max"});
    p.kernel.n_tp = int_at(kn, "params.kernel", "n_tp", p.kernel.n_tp);
    p.kernel.tp_max = dbl_at(kn, "params.kernel", "tp_max", p.kernel.tp_max);

    const json gr = block_at(params, "params", "grid");
    check_keys(gr, "params.grid", {"nx", "nz", "spacing"});
    p.grid.nx = int_at(gr, "params.grid", "nx", p.grid.nx);
    p.grid.nz = int_at(gr, "params.grid", "nz", p.grid.nz);
    p.grid.spacing = dbl_at(gr, "params.grid", "spacing", p.grid.spacing);

    p.tsvd_rel_threshold =
        dbl_at(params, "params", "tsvd_rel_threshold", p.tsvd_rel_threshold);

    const json ad = block_at(params, "params", "admm");
    check_keys(ad, "params.admm",
               {"lambda_frac", "lambda_abs", "rho", "tol", "max_iters", "nonneg"});
    p.admm.lambda_frac = dbl_at(ad, "params.admm", "lambda_frac", p.admm.lambda_frac);
    p.admm.lambda_abs = dbl_at(ad, "params.admm", "lambda_abs", p.admm.lambda_abs);
    p.admm.rho = dbl_at(ad, "params.admm", "rho", p.admm.rho);
    p.admm.tol = dbl_at(ad, "params.admm", "tol", p.admm.tol);
    p.admm.max_iters = int_at(ad, "params.admm", "max_iters", p.admm.max_iters);
    p.admm.nonneg = bool_at(ad, "params.admm", "nonneg", p.admm.nonneg);

    try {
        pipeline::validate_params(p);
    } catch (const value_error& e) {
        throw config_error("params", e.what());
    }
    return p;
}

// ---- describe ------------------------------------------------------------

ordered_json describe(const WalkParams& p) {
    ordered_json j;
    j["fan"] = {{"n_cells", p.fan_cells},
                {"n_walkers", p.fan_walkers},
                {"n_steps", p.fan_steps}};
    j["cross_model"] = {{"n_cells", p.cmp_cells},
                        {"start_cell", p.cmp_start},
                        {"walkers", p.cmp_walkers},
                        {"realizations", p.cmp_realizations},
                        {"times", p.cmp_times},
                        {"min_expected", p.cmp_min_expected}};
    return j;
}

ordered_json describe(const OccupationParams& p) {
    ordered_json j;
    j["uniform"] = {{"walkers", p.uni_walkers},
                    {"n_cells", p.uni_cells},
                    {"t", p.uni_t},
                    {"realizations", p.uni_realizations}};
    j["equilibrium"] = {{"background_walkers", p.eq_background},
                        {"injected_walkers", p.eq_injected},
                        {"injection_cell", p.eq_cell},
                        {"n_cells", p.eq_cells},
                        {"t", p.eq_t},
                        {"realizations", p.eq_realizations}};
    j["series"] = {{"walkers", p.series_walkers},
                   {"n_cells", p.series_cells},
                   {"n_steps", p.series_steps},
                   {"record_every", p.series_every}};
    return j;
}

ordered_json describe(const LangevinParams& p) {
    ordered_json j;
    j["diagonalization"] = {{"sizes", p.diag_sizes}};
    j["convergence"] = {{"n_cells", p.conv_n},
                        {"t_final", p.conv_t},
                        {"dt_start", p.conv_dt0},
                        {"halvings", p.conv_halvings}};
    j["spectrum"] = {{"n_cells", p.spectrum_n}};
    j["sample"] = {{"n_cells", p.sample_n},
                   {"level", p.sample_level},
                   {"noise_var", p.sample_noise},
                   {"dt", p.sample_dt},
                   {"n_steps", p.sample_steps},
                   {"record_every", p.sample_every}};
    return j;
}

ordered_json describe(const EntropyParams& p) {
    return {{"n_cells", p.n_cells}, {"n_profiles", p.n_profiles}, {"t_max", p.t_max}};
}

ordered_json describe(const Psf1dParams& p) {
    ordered_json j;
    j["cutoff_grid"] = {{"alphas", p.alphas}, {"times", p.times}, {"snr_ks", p.snr_ks}};
    j["depth"] = {{"x", p.depth_x}, {"snr", p.depth_snr}};
    j["sinc"] = {{"alpha", p.sinc_alpha},
                 {"t", p.sinc_t},
                 {"snr_k", p.sinc_snr_k},
                 {"n_samples", p.sinc_samples},
                 {"half_width", p.sinc_half_width}};
    return j;
}

ordered_json describe(const Psf2dParams& p) {
    ordered_json j;
    j["snrs"] = p.snrs;
    j["d"] = p.d;
    j["grid"] = {{"n", p.grid.n}, {"half_width", p.grid.half_width}};
    j["monotonicity_snrs"] = p.monotonicity_snrs;
    j["profile_samples"] = p.profile_samples;
    return j;
}

ordered_json describe(const GainTableParams& p) {
    return {{"detector_counts", p.detector_counts}};
}

ordered_json describe(const pipeline::PipelineParams& p) {
    ordered_json j;
    j["source_kind"] = p.kind == pipeline::SourceKind::gaussian ? "gaussian" : "spike";
    j["regularizer"] = p.regularizer == pipeline::Regularizer::tsvd ? "tsvd" : "admm";
    ordered_json sources = ordered_json::array();
    for (const auto& s : p.sources)
        sources.push_back(
            {{"x", s.x}, {"z", s.z}, {"amplitude", s.amplitude}, {"width", s.width}});
    j["sources"] = sources;
    j["scene"] = {{"nx", p.scene.nx},
                  {"nz", p.scene.nz},
                  {"pad", p.scene.pad},
                  {"alpha", p.scene.alpha},
                  {"c", p.scene.c}};
    j["record"] = {{"n_t", p.record.n_t}, {"t_max", p.record.t_max}, {"snr", p.record.snr}};
    j["kernel"] = {{"n_tp", p.kernel.n_tp}, {"tp_max", p.kernel.tp_max}};
    j["grid"] = {{"nx", p.grid.nx}, {"nz", p.grid.nz}, {"spacing", p.grid.spacing}};
    j["tsvd_rel_threshold"] = p.tsvd_rel_threshold;
    j["admm"] = {{"lambda_frac", p.admm.lambda_frac},
                 {"lambda_abs", p.admm.lambda_abs},
                 {"rho", p.admm.rho},
                 {"tol", p.admm.tol},
                 {"max_iters", p.admm.max_iters},
                 {"nonneg", p.admm.nonneg}};
    return j;
}

// ---- top level -----------------------------------------------------------

const std::vector<std::string>& experiment_ids() {
    static const std::vector<std::string> ids = {
        "walk",  "occupation", "langevin",         "entropy",
        "psf1d", "psf2d",      "phantom-pipeline", "gain-table"};
    return ids;
}

ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) throw config_error("config", "expected a JSON object");
    check_keys(j, "config", {"experiment", "seed", "params"});
    ExperimentConfig cfg;
    if (!j.contains("experiment") || !j.at("experiment").is_string())
        throw config_error("experiment", "required string field");
    cfg.experiment = j.at("experiment").get<std::string>();
    const auto& ids = experiment_ids();
    if (std::find(ids.begin(), ids.end(), cfg.experiment) == ids.end())
        throw config_error("experiment", "unknown experiment id '" + cfg.experiment + "'");
    if (j.contains("seed")) {
        const json& s = j.at("seed");
        if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() &&
                                       s.get<long long>() < 0))
            throw config_error("seed", "expected a nonnegative integer");
        cfg.seed = s.get<std::uint64_t>();
    }
    if (j.contains("params")) {
        if (!j.at("params").is_object()) throw config_error("params", "expected an object");
        cfg.params = j.at("params");
    }
    return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw config_error("config", "cannot open " + path.string());
    json j;
    try {
        j = json::parse(f);
    } catch (const json::parse_error& e) {
        throw config_error("config", e.what());
    }
    return parse_config(j);
}

ordered_json run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir, int jobs) {
    // parse and validate everything before touching the filesystem
    ordered_json inputs;
    std::function<ordered_json(Emitter&)> runner;
    const std::uint64_t seed = cfg.seed;
    if (cfg.experiment == "walk") {
        const auto p = parse_walk_params(cfg.params);
        inputs = describe(p);
        runner = [p, seed, jobs](Emitter& out) { return run_walk(p, seed, out, jobs); };
    } else if (cfg.experiment == "occupation") {
        const auto p = parse_occupation_params(cfg.params);
        inputs = describe(p);
        runner = [p, seed, jobs](Emitter& out) { return run_occupation(p, seed, out, jobs); };
    } else if (cfg.experiment == "langevin") {
        const auto p = parse_langevin_params(cfg.params);
        inputs = describe(p);
        runner = [p, seed, jobs](Emitter& out) { return run_langevin(p, seed, out, jobs); };
    } else if (cfg.experiment == "entropy") {
        const auto p = parse_entropy_params(cfg.params);
        inputs = describe(p);
        runner = [p, seed, jobs](Emitter& out) { return run_entropy(p, seed, out, jobs); };
    } else if (cfg.experiment == "psf1d") {
        const auto p = parse_psf1d_params(cfg.params);
        inputs = describe(p);
        runner = [p, seed, jobs](Emitter& out) { return run_psf1d(p, seed, out, jobs); };
    } else if (cfg.experiment == "psf2d") {
        const auto p = parse_psf2d_params(cfg.params);
        inputs = describe(p);
        runner = [p, seed, jobs](Emitter& out) { return run_psf2d(p, seed, out, jobs); };
    } else if (cfg.experiment == "phantom-pipeline") {
        const auto p = parse_pipeline_params(cfg.params);
        inputs = describe(p);
        runner = [p, seed, jobs](Emitter& out) { return run_phantom(p, seed, out, jobs); };
    } else if (cfg.experiment == "gain-table") {
        const auto p = parse_gain_table_params(cfg.params);
        inputs = describe(p);
        runner = [p, seed, jobs](Emitter& out) { return run_gain_table(p, seed, out, jobs); };
    } else {
        throw config_error("experiment", "unknown experiment id '" + cfg.experiment + "'");
    }

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory " + out_dir.string() + ": " +
                                 ec.message());
    Emitter out{out_dir, {}};
    runner(out);

    ordered_json manifest;
    manifest["experiment"] = cfg.experiment;
    manifest["seed"] = cfg.seed;
    manifest["version"] = version;
    manifest["inputs"] = inputs;
    ordered_json files;
    for (const auto& [name, sum] : out.checksums) files[name] = sum;
    manifest["files"] = files;
    {
        std::ofstream f(out_dir / "manifest.json");
        if (!f)
            throw std::runtime_error("cannot open for writing: " +
                                     (out_dir / "manifest.json").string());
        f << manifest.dump(2) << '\n';
    }
    return manifest;
}

// ---- compare -------------------------------------------------------------

namespace {

fs::path need_file(const fs::path& dir, const char* name) {
    const fs::path p = dir / name;
    if (!fs::exists(p))
        throw config_error(dir.string(), std::string("missing ") + name);
    return p;
}

json read_json_file(const fs::path& p) {
    std::ifstream f(p);
    if (!f) throw config_error(p.string(), "cannot open");
    return json::parse(f);
}

} // namespace

CompareReport compare_reconstructions(const fs::path& dir_a, const fs::path& dir_b) {
    const json ra = read_json_file(need_file(dir_a, "report.json"));
    const json rb = read_json_file(need_file(dir_b, "report.json"));
    const auto A = io::read_grid(need_file(dir_a, "reconstruction.bin"));
    const auto B = io::read_grid(need_file(dir_b, "reconstruction.bin"));
    if (A.nx != B.nx || A.nz != B.nz || A.spacing != B.spacing)
        throw value_error("compare: reconstruction grids differ");

    const json& sa = ra.at("sources");
    const json& sb = rb.at("sources");
    if (sa.size() != sb.size()) throw value_error("compare: source lists differ");
    for (std::size_t i = 0; i < sa.size(); ++i)
        if (std::abs(sa[i].at("x").get<double>() - sb[i].at("x").get<double>()) > 1e-9 ||
            std::abs(sa[i].at("z").get<double>() - sb[i].at("z").get<double>()) > 1e-9)
            throw value_error("compare: source lists differ");

    CompareReport rep;
    rep.regularizer_a = ra.value("regularizer", "");
    rep.regularizer_b = rb.value("regularizer", "");
    rep.same_record = io::file_checksum(need_file(dir_a, "record.csv")) ==
                      io::file_checksum(need_file(dir_b, "record.csv"));
    rep.max_abs_difference = (A.values - B.values).cwiseAbs().maxCoeff();

    std::vector<pipeline::SourceAnalysis> an_a, an_b;
    bool all_sharper = !sa.empty();
    for (std::size_t i = 0; i < sa.size(); ++i) {
        const double x = sa[i].at("x").get<double>();
        const double z = sa[i].at("z").get<double>();
        const auto aa = pipeline::analyze_source(A, x, z);
        const auto ab = pipeline::analyze_source(B, x, z);
        an_a.push_back(aa);
        an_b.push_back(ab);
        SourceComparison c;
        c.x = x;
        c.z = z;
        c.a_err_ix = aa.err_ix;
        c.a_err_iz = aa.err_iz;
        c.b_err_ix = ab.err_ix;
        c.b_err_iz = ab.err_iz;
        c.a_fwhm = aa.fwhm_z;
        c.b_fwhm = ab.fwhm_z;
        c.b_sharper =
            std::isfinite(aa.fwhm_z) && std::isfinite(ab.fwhm_z) && ab.fwhm_z < aa.fwhm_z;
        all_sharper = all_sharper && c.b_sharper;
        rep.sources.push_back(c);
    }
    rep.background_rms_a = pipeline::background_rms(A, an_a);
    rep.background_rms_b = pipeline::background_rms(B, an_b);
    rep.all_b_sharper = all_sharper;
    return rep;
}

std::string format_report(const CompareReport& r) {
    std::ostringstream os;
    os << "regularizers: a=" << r.regularizer_a << " b=" << r.regularizer_b << "\n";
    os << "same record: " << (r.same_record ? "yes" : "NO") << "\n";
    os << "max |a-b|: " << brief(r.max_abs_difference) << "\n";
    os << "background rms: a=" << brief(r.background_rms_a)
       << " b=" << brief(r.background_rms_b) << "\n";
    for (const auto& s : r.sources)
        os << "source x=" << brief(s.x) << " z=" << brief(s.z) << ": peak err a=("
           << s.a_err_ix << "," << s.a_err_iz << ") b=(" << s.b_err_ix << "," << s.b_err_iz
           << "); fwhm a=" << brief(s.a_fwhm) << " b=" << brief(s.b_fwhm)
           << (s.b_sharper ? " [b sharper]" : "") << "\n";
    os << "all sources sharper in b: " << (r.all_b_sharper ? "yes" : "no") << "\n";
    return os.str();
}

}
