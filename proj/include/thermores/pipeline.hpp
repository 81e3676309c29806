#pragma once
#include "thermores/heat.hpp"
#include "thermores/saft.hpp"
#include "thermores/virtual_wave.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

// End-to-end synthetic pipeline: buried sources -> adiabatic-box heat
// solve -> noisy surface record -> virtual-wave inversion (T-SVD or ADMM)
// -> SAFT back-projection, plus the localization/contrast analysis used by
// the acceptance suite.
//
// Geometry: the visible slab is scene.nx x scene.nz unit cells with the
// detector line along z=0; the forward solve runs on the slab padded by
// scene.pad cells left/right/below so the adiabatic box behaves like a
// half-space over the recorded window. All detector and source x positions
// are in visible-slab coordinates.
namespace thermores::pipeline {

struct SceneParams {
    int nx = 200;
    int nz = 32;
    int pad = 280;
    double alpha = 0.5;
    double c = 1.0;
};

enum class SourceKind { gaussian, spike };

struct RecordParams {
    int n_t = 1024;
    double t_max = 3200.0;
    double snr = 1000.0;
};

struct KernelParams {
    int n_tp = 240;
    double tp_max = 96.0;
};

struct GridParams {
    int nx = 100;
    int nz = 24;
    double spacing = 2.0;
};

enum class Regularizer { tsvd, admm };

struct PipelineParams {
    SceneParams scene;
    SourceKind kind = SourceKind::gaussian;
    std::vector<heat::GaussianSource> sources; // width ignored for spikes
    RecordParams record;
    KernelParams kernel;
    GridParams grid;
    Regularizer regularizer = Regularizer::tsvd;
    double tsvd_rel_threshold = 1e-3;
    virtual_wave::AdmmConfig admm;
};

// The reference scene: three equal Gaussians (sigma = 2 cells) at depths
// 8/16/24 = 1/4, 1/2, 3/4 of the 32-cell slab, inverted by T-SVD with the
// detector-averaging-aware threshold 1/(snr*sqrt(n_det)).
PipelineParams reference_gaussian_params();

// Sparse variant: unit single-cell spikes at depths 10/18/24, for the
// T-SVD vs ADMM sharpness comparison.
PipelineParams reference_spike_params(Regularizer reg);

struct SourceAnalysis {
    double x = 0, z = 0;      // truth, visible coordinates
    int truth_ix = 0, truth_iz = 0;
    int peak_ix = 0, peak_iz = 0;
    int err_ix = 0, err_iz = 0;
    double peak_value = 0;
    double fwhm_z = std::numeric_limits<double>::quiet_NaN(); // physical units
};

struct ContrastAnalysis {
    double record = 0;         // deepest source, windowed peak / off-window RMS
    double reconstruction = 0;
    double ratio = 0;
};

struct PipelineResult {
    heat::Field phantom_visible;          // the scene slab (unpadded)
    heat::SurfaceRecord record;           // noisy record, visible detector xs
    virtual_wave::VirtualField vwave;
    saft::ReconstructionGrid recon;
    Eigen::VectorXd kernel_singular_values;
    int tsvd_rank = 0;
    bool tsvd_zeroed = false;
    int admm_iterations = 0;
    bool admm_converged = false;
    bool admm_diverged = false;
    double reconstruction_min = 0;
    std::vector<SourceAnalysis> sources;
    ContrastAnalysis contrast;
};

// Precondition checks shared by run_pipeline and config loading (throws
// value_error; called before any computation or file output).
void validate_params(const PipelineParams& params);

PipelineResult run_pipeline(const PipelineParams& params, std::uint64_t seed);

// Per-source localization/width analysis on an existing reconstruction
// (used by compare and by run_pipeline itself). Peaks are searched in a
// +-4-cell window around the truth cell; FWHM is measured on the column
// through the local peak.
SourceAnalysis analyze_source(const saft::ReconstructionGrid& recon, double x, double z);

// RMS of the map outside +-5-cell windows around the given truth cells.
double background_rms(const saft::ReconstructionGrid& recon,
                      const std::vector<SourceAnalysis>& sources);

}
