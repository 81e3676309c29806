#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "thermores/dct.hpp"
#include "thermores/errors.hpp"
#include "thermores/experiments.hpp"
#include "thermores/heat.hpp"
#include "thermores/lattice_walk.hpp"
#include "thermores/resolution.hpp"
#include "thermores/saft.hpp"
#include "thermores/spectral.hpp"
#include "thermores/version.hpp"
#include "thermores/virtual_wave.hpp"

namespace py = pybind11;
using namespace thermores;

PYBIND11_MODULE(_core, m) {
    m.doc() = "heat diffusion information loss: walks, spectra, PSFs, virtual-wave inversion";
    m.attr("__version__") = std::string(version);

    // config problems are bad input, not runtime failures
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const config_error& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    // random walks
    m.def("trajectories", &lattice_walk::trajectories, py::arg("n_walkers"),
          py::arg("n_cells"), py::arg("start_cell"), py::arg("n_steps"), py::arg("seed"),
          py::arg("stream_base") = 0);
    m.def("counts_at_times", &lattice_walk::counts_at_times, py::arg("initial"),
          py::arg("n_cells"), py::arg("seed"), py::arg("stream_base"), py::arg("times"));
    m.def("gaussian_profile", &lattice_walk::gaussian_profile, py::arg("n_cells"),
          py::arg("origin"), py::arg("t"), py::arg("alpha"));

    // spectral / Langevin
    m.def("drift_matrix", &spectral::build_drift_matrix, py::arg("n"));
    m.def("mode_spectrum", [](int n) {
        const auto s = spectral::singular_values(n);
        return py::make_tuple(s.k, s.gamma, s.gamma_approx);
    }, py::arg("n"));
    m.def("integrate_langevin", &spectral::integrate_langevin, py::arg("initial"),
          py::arg("drift"), py::arg("noise_var"), py::arg("dt"), py::arg("n_steps"),
          py::arg("seed") = 0);
    m.def("drift_power_profile", &spectral::drift_power_profile, py::arg("p0"), py::arg("t"));
    m.def("dct_forward", &dct::forward, py::arg("x"));
    m.def("dct_inverse", &dct::inverse, py::arg("xhat"));
    m.def("shannon_entropy", &resolution::shannon_entropy, py::arg("p"));

    // heat forward model
    m.def("make_phantom",
          [](int nx, int nz, double spacing, double alpha,
             const std::vector<std::tuple<double, double, double, double>>& sources) {
              heat::PhantomSpec spec{nx, nz, spacing, alpha, {}};
              for (const auto& [x, z, amp, w] : sources)
                  spec.sources.push_back({x, z, amp, w});
              return heat::make_phantom(spec).values;
          },
          py::arg("nx"), py::arg("nz"), py::arg("spacing"), py::arg("alpha"),
          py::arg("sources"));
    m.def("record_surface",
          [](const Eigen::MatrixXd& initial, double spacing, double alpha,
             const std::vector<double>& ts, const std::vector<double>& detector_xs,
             bool wall_sampled) {
              heat::Field f;
              f.values = initial;
              f.spacing = spacing;
              f.alpha = alpha;
              return heat::record_surface(f, ts, detector_xs, wall_sampled).values;
          },
          py::arg("initial"), py::arg("spacing"), py::arg("alpha"), py::arg("ts"),
          py::arg("detector_xs"), py::arg("wall_sampled") = true);
    m.def("add_noise",
          [](const Eigen::MatrixXd& values, double snr, std::uint64_t seed) {
              heat::SurfaceRecord rec;
              rec.values = values;
              return heat::add_noise(rec, snr, seed).values;
          },
          py::arg("values"), py::arg("snr"), py::arg("seed"));

    // resolution limits / PSF
    m.def("k_cut", &resolution::k_cut, py::arg("snr_k"), py::arg("alpha"), py::arg("t"));
    m.def("delta_r_time", &resolution::delta_r_time, py::arg("alpha"), py::arg("t"),
          py::arg("snr_k"));
    m.def("delta_r_depth", &resolution::delta_r_depth, py::arg("x"), py::arg("snr"));
    m.def("psf_2d",
          [](double snr, double d, int n, double half_width) {
              const auto img = resolution::psf_2d(snr, d, {n, half_width});
              return py::make_tuple(img.values, img.spacing, img.center);
          },
          py::arg("snr"), py::arg("d"), py::arg("n") = 512, py::arg("half_width") = 1.0);
    m.def("psf_2d_value", &resolution::psf_2d_value, py::arg("snr"), py::arg("x"),
          py::arg("w"), py::arg("n_theta") = 512);

    // virtual wave inversion
    m.def("kernel_value", &virtual_wave::kernel_value, py::arg("t"), py::arg("tp"),
          py::arg("c"), py::arg("alpha"));
    m.def("build_kernel", &virtual_wave::build_kernel, py::arg("t_grid"), py::arg("tp_grid"),
          py::arg("c"), py::arg("alpha"));
    m.def("invert_tsvd",
          [](const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double rel_threshold) {
              const auto r = virtual_wave::invert_tsvd(K, y, rel_threshold);
              return py::make_tuple(r.x, r.rank);
          },
          py::arg("kernel"), py::arg("y"), py::arg("rel_threshold"));
    m.def("invert_tsvd_batch",
          [](const Eigen::MatrixXd& K, const Eigen::MatrixXd& Y, double rel_threshold) {
              const auto svd = virtual_wave::decompose(K);
              int rank = 0;
              Eigen::MatrixXd X = virtual_wave::invert_tsvd_batch(svd, Y, rel_threshold, &rank);
              return py::make_tuple(X, rank);
          },
          py::arg("kernel"), py::arg("Y"), py::arg("rel_threshold"));
    m.def("invert_admm",
          [](const Eigen::MatrixXd& K, const Eigen::MatrixXd& Y, double lambda_frac,
             double rho, double tol, int max_iters, bool nonneg) {
              virtual_wave::AdmmConfig cfg;
              cfg.lambda_frac = lambda_frac;
              cfg.rho = rho;
              cfg.tol = tol;
              cfg.max_iters = max_iters;
              cfg.nonneg = nonneg;
              const auto r = virtual_wave::invert_admm_batch(K, Y, cfg);
              return py::make_tuple(r.X, r.iterations, r.converged);
          },
          py::arg("kernel"), py::arg("Y"), py::arg("lambda_frac") = 0.01,
          py::arg("rho") = 1.0, py::arg("tol") = 1e-6, py::arg("max_iters") = 500,
          py::arg("nonneg") = true);

    // SAFT
    m.def("saft_backproject",
          [](const Eigen::MatrixXd& vwave, const std::vector<double>& tps,
             const std::vector<double>& detector_xs, int nx, int nz, double spacing,
             double c) {
              virtual_wave::VirtualField vf;
              vf.tps = tps;
              vf.detector_xs = detector_xs;
              vf.values = vwave;
              vf.dtp = tps.size() > 1 ? tps[1] - tps[0] : 0.0;
              return saft::saft_backproject(vf, detector_xs, nx, nz, spacing, c).values;
          },
          py::arg("vwave"), py::arg("tps"), py::arg("detector_xs"), py::arg("nx"),
          py::arg("nz"), py::arg("spacing"), py::arg("c") = 1.0);
    m.def("averaging_gain", &saft::averaging_gain, py::arg("n_detectors"));

    // experiment driver (same engine as the CLI)
    m.def("run_experiment",
          [](const std::string& config_json, const std::string& out_dir, int jobs) {
              const auto cfg = experiments::parse_config(nlohmann::json::parse(config_json));
              return experiments::run_experiment(cfg, out_dir, jobs).dump(2);
          },
          py::arg("config_json"), py::arg("out_dir"), py::arg("jobs") = 1);
    m.def("experiment_ids", [] { return experiments::experiment_ids(); });
}
