#pragma once
#include <Eigen/Dense>
#include <cstdint>
#include <vector>

// Spectral heat solver on a rectangular grid with adiabatic (Neumann)
// boundaries on all sides, via the DCT-II diagonalization per axis:
//   T_hat(k, t) = T_hat(k, 0) * exp(-alpha |k|^2 t).
// Cell (iz, ix) carries the temperature at its center
// ((ix+0.5)*spacing, (iz+0.5)*spacing); z = 0 is the detection surface.
namespace thermores::heat {

struct Field {
    Eigen::MatrixXd values; // (nz, nx)
    double spacing = 1.0;
    double alpha = 1.0;
};

struct FieldSeries {
    std::vector<double> ts;
    std::vector<Field> fields;
};

// Exact spectral solution at each requested time (t = 0 reproduces the
// initial field bit-for-bit up to transform round-trip).
FieldSeries solve_heat(const Field& initial, const std::vector<double>& ts);

// 1D thermal wave T0 * exp(-x/mu) * cos(x/mu - omega t), mu = sqrt(2 alpha/omega):
// the strongly damped single-frequency solution of the heat equation.
double thermal_wave(double x, double t, double alpha, double omega, double T0 = 1.0);

struct GaussianSource {
    double x = 0;      // physical units (cell centers at (i+0.5)*spacing)
    double z = 0;      // depth below the surface
    double amplitude = 1.0;
    double width = 1.0; // Gaussian sigma, cells * spacing
};

struct PhantomSpec {
    int nx = 0;
    int nz = 0;
    double spacing = 1.0;
    double alpha = 1.0;
    std::vector<GaussianSource> sources;
};

Field make_phantom(const PhantomSpec& spec);

struct SurfaceRecord {
    std::vector<double> ts;
    std::vector<double> detector_xs;
    Eigen::MatrixXd values; // (n_t, n_detectors)
    double dt = 0;          // uniform sample step (ts[i] = dt*(i+1) in pipelines)
};

// Extract the z=0 cell row of each field at the given detector positions
// (which must be cell centers of the field's x axis).
SurfaceRecord sample_surface(const FieldSeries& series, const std::vector<double>& detector_xs);

// Fused forward solve + surface sampling: one initial transform, then a
// boundary-row contraction per time sample. With wall_sampled=true the
// record is the Neumann interpolant evaluated AT z=0 (every DCT basis
// function reduces to its normalization constant at the wall); otherwise the
// z=0 cell-center row, matching sample_surface(solve_heat(...)).
// Wall sampling is the convention the inversion pipeline assumes: a source
// at depth d and its Neumann image at -d are then equidistant from the
// detector plane and their back-projection arcs coincide.
SurfaceRecord record_surface(const Field& initial, const std::vector<double>& ts,
                             const std::vector<double>& detector_xs,
                             bool wall_sampled = true);

// Additive white Gaussian noise with std = max|record| / snr (peak-signal
// SNR convention, one global noise level per record).
SurfaceRecord add_noise(const SurfaceRecord& record, double snr, std::uint64_t seed);

}
