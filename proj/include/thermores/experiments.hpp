#pragma once
#include "thermores/pipeline.hpp"
#include "thermores/resolution.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

// Batch experiment runner. One experiment = one output directory holding
// CSV/binary data files plus a manifest.json (inputs, seed, library
// version, file checksums). Everything is deterministic in (config, seed):
// rerunning reproduces byte-identical files for any --jobs value.
namespace thermores::experiments {

struct ExperimentConfig {
    std::string experiment;
    std::uint64_t seed = 1;
    nlohmann::json params = nlohmann::json::object();
};

// Parse/validate a config file. Unknown fields anywhere are rejected with
// a field-level config_error, as are parameter values that violate the
// owning module's preconditions -- all before anything is written.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const nlohmann::json& j);

const std::vector<std::string>& experiment_ids();

// Run and write data files + manifest.json into out_dir (created if
// needed). `jobs` parallelizes independent realizations; results are
// identical for any value. Returns the manifest.
nlohmann::ordered_json run_experiment(const ExperimentConfig& config,
                                      const std::filesystem::path& out_dir,
                                      int jobs = 1);

// ---- typed parameter blocks ------------------------------------------
// Each experiment's params are parsed into one of these structs; the
// default_* builders are the reference values the acceptance suite runs,
// and the shipped configs/*.json parse to exactly these (asserted by a
// unit test). describe() renders the resolved values for the manifest.

struct WalkParams {
    int fan_cells = 41; // trajectory fan: walkers start at the center cell
    int fan_walkers = 500;
    long long fan_steps = 200;
    int cmp_cells = 81; // Monte Carlo vs deterministic-solution comparison
    int cmp_start = 40;
    int cmp_walkers = 500;
    int cmp_realizations = 500;
    std::vector<long long> cmp_times = {20, 100};
    double cmp_min_expected = 0.5; // cells below this expected count are excluded
};

struct OccupationParams {
    int uni_walkers = 5000; // uniform-placement block
    int uni_cells = 40;
    long long uni_t = 1000;
    int uni_realizations = 200;
    int eq_background = 10000; // equilibrium + injection block
    int eq_injected = 1000;
    int eq_cell = 20;
    int eq_cells = 40;
    long long eq_t = 1000;
    int eq_realizations = 800;
    int series_walkers = 5000; // single-realization time series
    int series_cells = 40;
    long long series_steps = 1000;
    long long series_every = 10;
};

struct LangevinParams {
    std::vector<int> diag_sizes = {2, 8, 40, 128};
    int conv_n = 8; // noiseless Euler vs exact spectral propagation
    double conv_t = 4.0;
    double conv_dt0 = 0.25;
    int conv_halvings = 4;
    int spectrum_n = 128;
    int sample_n = 40; // noisy sample trajectory for fluctuation plots
    double sample_level = 125.0;
    double sample_noise = 125.0;
    double sample_dt = 0.25;
    int sample_steps = 4000;
    int sample_every = 4;
};

struct EntropyParams {
    int n_cells = 64;
    int n_profiles = 10;
    int t_max = 50;
};

struct Psf1dParams {
    std::vector<double> alphas = {0.1, 0.5, 2.0};
    std::vector<double> times = {5.0, 20.0, 80.0};
    std::vector<double> snr_ks = {10.0, 100.0, 1000.0};
    double depth_x = 10.0;
    double depth_snr = 1000.0;
    double sinc_alpha = 0.5;
    double sinc_t = 10.0;
    double sinc_snr_k = 100.0;
    int sinc_samples = 2001;
    double sinc_half_width = 6.0; // in units of the sinc zero spacing pi/k_cut
};

struct Psf2dParams {
    std::vector<double> snrs = {1000.0, 100.0}; // full 2D images
    double d = 1.0;
    resolution::PsfGridSpec grid;
    std::vector<double> monotonicity_snrs = {100.0, 300.0, 1000.0};
    int profile_samples = 4097; // 1D profile sampling for the width scan
};

struct GainTableParams {
    std::vector<int> detector_counts = {1, 4, 16, 64, 200, 256};
};

WalkParams default_walk_params();
OccupationParams default_occupation_params();
LangevinParams default_langevin_params();
EntropyParams default_entropy_params();
Psf1dParams default_psf1d_params();
Psf2dParams default_psf2d_params();
GainTableParams default_gain_table_params();

WalkParams parse_walk_params(const nlohmann::json& params);
OccupationParams parse_occupation_params(const nlohmann::json& params);
LangevinParams parse_langevin_params(const nlohmann::json& params);
EntropyParams parse_entropy_params(const nlohmann::json& params);
Psf1dParams parse_psf1d_params(const nlohmann::json& params);
Psf2dParams parse_psf2d_params(const nlohmann::json& params);
GainTableParams parse_gain_table_params(const nlohmann::json& params);
pipeline::PipelineParams parse_pipeline_params(const nlohmann::json& params);

nlohmann::ordered_json describe(const WalkParams& p);
nlohmann::ordered_json describe(const OccupationParams& p);
nlohmann::ordered_json describe(const LangevinParams& p);
nlohmann::ordered_json describe(const EntropyParams& p);
nlohmann::ordered_json describe(const Psf1dParams& p);
nlohmann::ordered_json describe(const Psf2dParams& p);
nlohmann::ordered_json describe(const GainTableParams& p);
nlohmann::ordered_json describe(const pipeline::PipelineParams& p);

// ---- reconstruction comparison ---------------------------------------

struct SourceComparison {
    double x = 0, z = 0; // truth position
    int a_err_ix = 0, a_err_iz = 0;
    int b_err_ix = 0, b_err_iz = 0;
    double a_fwhm = 0, b_fwhm = 0; // NaN when unmeasurable
    bool b_sharper = false;        // b_fwhm < a_fwhm (false if either NaN)
};

struct CompareReport {
    std::string regularizer_a, regularizer_b;
    bool same_record = false;      // record.csv checksums match
    double max_abs_difference = 0; // over the two reconstruction grids
    double background_rms_a = 0, background_rms_b = 0;
    std::vector<SourceComparison> sources;
    bool all_b_sharper = false;
};

// Compare two phantom-pipeline output directories (same grid and record
// required; grid mismatch throws value_error, missing files config_error).
CompareReport compare_reconstructions(const std::filesystem::path& dir_a,
                                      const std::filesystem::path& dir_b);

std::string format_report(const CompareReport& report);

}
