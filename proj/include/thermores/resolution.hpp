#pragma once
#include <Eigen/Dense>
#include <string>

// Information-theoretic resolution limits of diffused signals.
//
// Diffusion damps mode k by exp(-alpha k^2 t); once that factor drops below
// 1/SNR the mode is lost in the noise floor. Keeping only surviving modes
// band-limits any reconstruction, so resolution follows directly from the
// cutoff: delta_r = pi/k_cut. For depth profiling the same argument applied
// to thermal-wave damping gives delta_r(x) = pi*x/ln(SNR): the smallest
// resolvable detail grows linearly with depth, independent of alpha and of
// grid refinement -- only ln(SNR) helps.
namespace thermores::resolution {

// Largest wavenumber whose amplitude survives diffusion for time t above
// the 1/snr_k noise floor: exp(-alpha k^2 t) = 1/snr_k.
double k_cut(double snr_k, double alpha, double t);

// Band-limited image of n0 units at the origin: (n0/pi) sin(k_cut x)/x.
Eigen::VectorXd sinc_reconstruction(double n0, double kcut, const Eigen::VectorXd& xs);

// delta_r = pi / k_cut after diffusion time t.
double delta_r_time(double alpha, double t, double snr_k);

struct FrequencyCutoff {
    double omega_cut = 0; // 2*alpha*(ln(snr)/x)^2
    double mu_cut = 0;    // thermal diffusion length at omega_cut: x/ln(snr)
};

// Highest thermal-wave frequency still detectable at depth x, from
// exp(-x/mu) = 1/snr.
FrequencyCutoff omega_cut(double alpha, double snr, double x);

// Depth-domain resolution delta_r(x) = pi*x/ln(snr).
double delta_r_depth(double x, double snr);

struct PsfGridSpec {
    int n = 512;             // samples per axis
    double half_width = 1.0; // half extent in units of d
};

struct PsfImage {
    Eigen::MatrixXd values;  // (z index, x index), peak-normalized to 1
    double spacing = 0;      // sample step in units of d
    double d = 0;
    double snr = 0;
    int center = 0;          // index of the (x=0, z=d) sample on each axis
};

// 2D point-spread function of depth reconstruction at depth d: the
// (Hermitian-mirrored) inverse Fourier integral of the indicator of the
// surviving k-space region {(k, theta): 0 <= k <= ln(snr)*cos(theta)/d},
// theta measured from the depth axis. Reduced to a single theta quadrature:
//   PSF(x,w) ~ Int_0^{pi/2} [ G(w cos + x sin) + G(w cos - x sin) ] dtheta,
//   G(s) = kappa^2 f(kappa*s), kappa = ln(snr) cos(theta),
//   f(u) = (u sin u + cos u - 1)/u^2,
// with (x, w=z-d) in units of d. Axial first zero sits exactly at
// |w| = pi/ln(snr).
// Grids that put fewer than 16 samples across the predicted axial
// zero-to-zero width 2*pi/ln(snr) are rejected.
PsfImage psf_2d(double snr, double d, const PsfGridSpec& grid);

// Pointwise PSF evaluation (units of d), peak-unnormalized.
double psf_2d_value(double snr, double x, double w, int n_theta = 512);

struct MainlobeMeasurement {
    bool ok = false;
    std::string issue;      // "plateau", "no zero crossing", "no half crossing"
    int peak_index = -1;
    double peak_position = 0;
    double peak_value = 0;
    double zero_left = 0;   // first sign-change positions around the peak
    double zero_right = 0;
    double zero_to_zero = 0;
    double fwhm = 0;
};

// Main-lobe metrics of a sampled profile: peak, first zero crossings on
// both sides (linear interpolation), zero-to-zero width and FWHM. Profiles
// whose maximum is a flat plateau, or that never cross zero / half maximum,
// come back flagged instead of inventing widths.
MainlobeMeasurement measure_mainlobe(const Eigen::VectorXd& profile, double spacing,
                                     double origin = 0.0);

// FWHM of the lobe around a given local peak; NaN when a half-max crossing
// is missing on either side.
double fwhm_around(const Eigen::VectorXd& profile, int peak_index, double spacing);

// -sum p ln p; p must be entrywise >= 0 and sum to 1 within 1e-9.
double shannon_entropy(const Eigen::VectorXd& p);

}
