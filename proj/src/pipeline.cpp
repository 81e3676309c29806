#include "thermores/pipeline.hpp"
#include "thermores/errors.hpp"
#include "thermores/resolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace thermores::pipeline {

PipelineParams reference_gaussian_params() {
    PipelineParams p;
    p.kind = SourceKind::gaussian;
    p.sources = {{61.0, 8.0, 1.0, 2.0}, {101.0, 16.0, 1.0, 2.0}, {141.0, 24.0, 1.0, 2.0}};
    p.regularizer = Regularizer::tsvd;
    // detector averaging across 200 traces lifts the usable band by
    // sqrt(n_det): threshold 1/(snr*sqrt(200))
    p.tsvd_rel_threshold = 1.0 / (p.record.snr * std::sqrt(200.0));
    return p;
}

PipelineParams reference_spike_params(Regularizer reg) {
    PipelineParams p;
    p.kind = SourceKind::spike;
    p.sources = {{61.0, 10.0, 1.0, 0.0}, {101.0, 18.0, 1.0, 0.0}, {141.0, 24.0, 1.0, 0.0}};
    p.regularizer = reg;
    p.tsvd_rel_threshold = 1.0 / (p.record.snr * std::sqrt(200.0));
    p.admm.lambda_frac = 3e-3;
    p.admm.rho = 1.0;
    p.admm.max_iters = 1500;
    p.admm.tol = 1e-6;
    p.admm.nonneg = true;
    return p;
}

void validate_params(const PipelineParams& p) {
    if (p.scene.nx < 1 || p.scene.nz < 1 || p.scene.pad < 0)
        throw value_error("pipeline: bad scene dimensions");
    if (p.scene.alpha <= 0 || p.scene.c <= 0)
        throw value_error("pipeline: alpha and c must be > 0");
    if (p.record.n_t < 2 || p.record.t_max <= 0)
        throw value_error("pipeline: bad record sampling");
    if (p.record.snr <= 1) throw value_error("pipeline: snr must be > 1");
    if (p.kernel.n_tp < 2 || p.kernel.tp_max <= 0)
        throw value_error("pipeline: bad kernel sampling");
    if (p.grid.nx < 1 || p.grid.nz < 1 || p.grid.spacing <= 0)
        throw value_error("pipeline: bad reconstruction grid");
    if (p.sources.empty()) throw value_error("pipeline: no sources");
    for (const auto& s : p.sources) {
        if (s.x < 0 || s.x > p.scene.nx || s.z < 0 || s.z > p.scene.nz)
            throw value_error("pipeline: source outside the visible slab");
        if (p.kind == SourceKind::gaussian && s.width <= 0)
            throw value_error("pipeline: gaussian source width must be > 0");
    }
    if (p.tsvd_rel_threshold <= 0 || p.tsvd_rel_threshold >= 1)
        throw value_error("pipeline: tsvd threshold must be in (0,1)");
}

namespace {

heat::Field build_padded_phantom(const PipelineParams& p) {
    const int nx = p.scene.nx + 2 * p.scene.pad;
    const int nz = p.scene.nz + p.scene.pad;
    if (p.kind == SourceKind::gaussian) {
        heat::PhantomSpec spec;
        spec.nx = nx;
        spec.nz = nz;
        spec.spacing = 1.0;
        spec.alpha = p.scene.alpha;
        for (const auto& s : p.sources)
            spec.sources.push_back({s.x + p.scene.pad, s.z, s.amplitude, s.width});
        return heat::make_phantom(spec);
    }
    heat::Field f;
    f.spacing = 1.0;
    f.alpha = p.scene.alpha;
    f.values = Eigen::MatrixXd::Zero(nz, nx);
    for (const auto& s : p.sources) {
        const int iz = static_cast<int>(std::floor(s.z - 0.5));
        const int ix = static_cast<int>(std::floor(s.x + p.scene.pad - 0.5));
        f.values(iz, ix) += s.amplitude;
    }
    return f;
}

}

SourceAnalysis analyze_source(const saft::ReconstructionGrid& recon, double x, double z) {
    SourceAnalysis a;
    a.x = x;
    a.z = z;
    const double h = recon.spacing;
    a.truth_ix = static_cast<int>(std::floor(x / h - 0.5));
    a.truth_iz = static_cast<int>(std::floor(z / h - 0.5));

    const int w = 4;
    const int z_lo = std::max(0, a.truth_iz - w), z_hi = std::min(recon.nz - 1, a.truth_iz + w);
    const int x_lo = std::max(0, a.truth_ix - w), x_hi = std::min(recon.nx - 1, a.truth_ix + w);
    a.peak_iz = z_lo;
    a.peak_ix = x_lo;
    for (int iz = z_lo; iz <= z_hi; ++iz)
        for (int ix = x_lo; ix <= x_hi; ++ix)
            if (recon.values(iz, ix) > recon.values(a.peak_iz, a.peak_ix)) {
                a.peak_iz = iz;
                a.peak_ix = ix;
            }
    a.err_ix = a.peak_ix - a.truth_ix;
    a.err_iz = a.peak_iz - a.truth_iz;
    a.peak_value = recon.values(a.peak_iz, a.peak_ix);

    // width measured on the column through a slightly wider local peak
    const int w2 = 5;
    int pz = std::max(0, a.truth_iz - w2), px = std::max(0, a.truth_ix - w2);
    for (int iz = std::max(0, a.truth_iz - w2); iz <= std::min(recon.nz - 1, a.truth_iz + w2); ++iz)
        for (int ix = std::max(0, a.truth_ix - w2); ix <= std::min(recon.nx - 1, a.truth_ix + w2); ++ix)
            if (recon.values(iz, ix) > recon.values(pz, px)) { pz = iz; px = ix; }
    a.fwhm_z = resolution::fwhm_around(recon.values.col(px), pz, h);
    return a;
}

double background_rms(const saft::ReconstructionGrid& recon,
                      const std::vector<SourceAnalysis>& sources) {
    Eigen::ArrayXXd mask = Eigen::ArrayXXd::Ones(recon.nz, recon.nx);
    const int w = 5;
    for (const auto& s : sources)
        for (int iz = std::max(0, s.truth_iz - w); iz <= std::min(recon.nz - 1, s.truth_iz + w); ++iz)
            for (int ix = std::max(0, s.truth_ix - w); ix <= std::min(recon.nx - 1, s.truth_ix + w); ++ix)
                mask(iz, ix) = 0.0;
    const double n_bg = mask.sum();
    if (n_bg <= 0) return 0.0;
    return std::sqrt((recon.values.array().square() * mask).sum() / n_bg);
}

PipelineResult run_pipeline(const PipelineParams& p, std::uint64_t seed) {
    validate_params(p);
    PipelineResult out;

    // forward: padded adiabatic box, record sampled at the z=0 wall
    const heat::Field padded = build_padded_phantom(p);
    out.phantom_visible.spacing = 1.0;
    out.phantom_visible.alpha = p.scene.alpha;
    out.phantom_visible.values =
        padded.values.block(0, p.scene.pad, p.scene.nz, p.scene.nx);

    const double dt = p.record.t_max / p.record.n_t;
    std::vector<double> ts(static_cast<std::size_t>(p.record.n_t));
    for (int i = 0; i < p.record.n_t; ++i) ts[static_cast<std::size_t>(i)] = dt * (i + 1);

    std::vector<double> det_padded(static_cast<std::size_t>(p.scene.nx));
    std::vector<double> det_visible(static_cast<std::size_t>(p.scene.nx));
    for (int i = 0; i < p.scene.nx; ++i) {
        det_visible[static_cast<std::size_t>(i)] = i + 0.5;
        det_padded[static_cast<std::size_t>(i)] = p.scene.pad + i + 0.5;
    }

    heat::SurfaceRecord clean = heat::record_surface(padded, ts, det_padded, true);
    clean.detector_xs = det_visible;
    out.record = heat::add_noise(clean, p.record.snr, seed);

    // virtual-wave inversion, shared kernel across detectors
    const double dtp = p.kernel.tp_max / p.kernel.n_tp;
    std::vector<double> tp(static_cast<std::size_t>(p.kernel.n_tp));
    for (int i = 0; i < p.kernel.n_tp; ++i) tp[static_cast<std::size_t>(i)] = dtp * i;
    const Eigen::MatrixXd K = virtual_wave::build_kernel(ts, tp, p.scene.c, p.scene.alpha);

    out.vwave.tps = tp;
    out.vwave.dtp = dtp;
    out.vwave.detector_xs = det_visible;
    if (p.regularizer == Regularizer::tsvd) {
        const virtual_wave::KernelSVD svd = virtual_wave::decompose(K);
        out.kernel_singular_values = svd.S;
        out.vwave.values =
            virtual_wave::invert_tsvd_batch(svd, out.record.values, p.tsvd_rel_threshold,
                                            &out.tsvd_rank);
        out.tsvd_zeroed = (out.tsvd_rank == 0);
    } else {
        const virtual_wave::KernelSVD svd = virtual_wave::decompose(K);
        out.kernel_singular_values = svd.S;
        virtual_wave::AdmmBatchResult admm =
            virtual_wave::invert_admm_batch(K, out.record.values, p.admm);
        out.vwave.values = std::move(admm.X);
        out.admm_iterations = admm.iterations;
        out.admm_converged = admm.converged;
        out.admm_diverged = admm.diverged;
    }

    out.recon = saft::saft_backproject(out.vwave, det_visible, p.grid.nx, p.grid.nz,
                                       p.grid.spacing, p.scene.c);
    out.reconstruction_min = out.recon.values.minCoeff();

    for (const auto& s : p.sources)
        out.sources.push_back(analyze_source(out.recon, s.x, s.z));

    // contrast of the deepest source: windowed peak over off-window RMS,
    // in its own reconstruction column and its own raw detector trace
    std::size_t deep = 0;
    for (std::size_t i = 1; i < p.sources.size(); ++i)
        if (p.sources[i].z > p.sources[deep].z) deep = i;
    const auto& ds = p.sources[deep];
    const auto& da = out.sources[deep];

    {
        const double h = p.grid.spacing;
        const Eigen::VectorXd col = out.recon.values.col(da.truth_ix);
        const double dr = std::max(M_PI * ds.z / std::log(p.record.snr) / h, 2.0);
        double peak_in = 0.0, sum_out = 0.0;
        long n_out = 0;
        for (long iz = 0; iz < col.size(); ++iz) {
            if (std::abs(static_cast<double>(iz) - da.truth_iz) <= dr)
                peak_in = std::max(peak_in, std::abs(col(iz)));
            else { sum_out += col(iz) * col(iz); ++n_out; }
        }
        out.contrast.reconstruction = n_out ? peak_in / std::sqrt(sum_out / n_out) : 0.0;
    }
    {
        const int det = static_cast<int>(std::floor(ds.x - 0.5));
        const Eigen::VectorXd trace = out.record.values.col(det);
        const double t_star = ds.z * ds.z / (2.0 * p.scene.alpha);
        double peak_in = 0.0, sum_out = 0.0;
        long n_out = 0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const double t = ts[i];
            if (t >= t_star / 4.0 && t <= 4.0 * t_star)
                peak_in = std::max(peak_in, std::abs(trace(static_cast<long>(i))));
            else { sum_out += trace(static_cast<long>(i)) * trace(static_cast<long>(i)); ++n_out; }
        }
        out.contrast.record = n_out ? peak_in / std::sqrt(sum_out / n_out) : 0.0;
    }
    out.contrast.ratio = out.contrast.record > 0
                             ? out.contrast.reconstruction / out.contrast.record
                             : std::numeric_limits<double>::infinity();
    return out;
}

}
