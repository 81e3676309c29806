#include <doctest.h>

#include "thermores/errors.hpp"
#include "thermores/heat.hpp"
#include "thermores/resolution.hpp"
#include "thermores/rng.hpp"

#include <cmath>

using namespace thermores;

namespace {
heat::Field random_field(int nz, int nx, std::uint64_t stream) {
    heat::Field f;
    f.values.resize(nz, nx);
    const auto key = rng::stream_key(5150, stream);
    for (int i = 0; i < f.values.size(); ++i)
        f.values(i / nx, i % nx) = rng::uniform01(key, static_cast<std::uint64_t>(i));
    return f;
}
} // namespace

TEST_CASE("solve_heat: conservation, fixed points, maximum principle") {
    const heat::Field f = random_field(12, 17, 0);
    const auto series = heat::solve_heat(f, {0.0, 2.0, 10.0});
    CHECK((series.fields[0].values - f.values).cwiseAbs().maxCoeff() < 1e-12);
    for (const auto& g : series.fields) {
        CHECK(g.values.sum() == doctest::Approx(f.values.sum()).epsilon(1e-12));
        CHECK(g.values.maxCoeff() <= f.values.maxCoeff() + 1e-12);
        CHECK(g.values.minCoeff() >= f.values.minCoeff() - 1e-12);
    }

    heat::Field flat;
    flat.values = Eigen::MatrixXd::Constant(5, 5, 2.0);
    const auto still = heat::solve_heat(flat, {100.0});
    CHECK((still.fields[0].values.array() - 2.0).abs().maxCoeff() < 1e-12);

    CHECK_THROWS_AS(heat::solve_heat(f, {-1.0}), value_error);
    heat::Field bad = f;
    bad.alpha = 0;
    CHECK_THROWS_AS(heat::solve_heat(bad, {1.0}), value_error);
}

TEST_CASE("solve_heat: far from walls the free-space Gaussian spreading law holds") {
    // spreading Gaussian: sigma(t)^2 = sigma0^2 + 2 alpha t, amplitude drops
    // by sigma0^2/sigma(t)^2 in 2d
    const int n = 64;
    const double sigma0 = 3.0, alpha = 1.0, t = 10.0;
    heat::PhantomSpec spec;
    spec.nx = n;
    spec.nz = n;
    spec.alpha = alpha;
    spec.sources.push_back({32.0, 32.0, 1.0, sigma0});
    const heat::Field init = heat::make_phantom(spec);
    const auto series = heat::solve_heat(init, {t});

    const double s2 = sigma0 * sigma0 + 2.0 * alpha * t;
    const double amp = sigma0 * sigma0 / s2;
    double worst = 0;
    for (int iz = 0; iz < n; ++iz)
        for (int ix = 0; ix < n; ++ix) {
            const double dz = (iz + 0.5) - 32.0, dx = (ix + 0.5) - 32.0;
            const double ref = amp * std::exp(-(dx * dx + dz * dz) / (2.0 * s2));
            worst = std::max(worst, std::abs(series.fields[0].values(iz, ix) - ref));
        }
    CHECK(worst < 1e-8);
}

TEST_CASE("thermal_wave: satisfies the heat equation and the surface phase") {
    const double alpha = 0.7, omega = 2.3, T0 = 1.4;
    const double mu = std::sqrt(2.0 * alpha / omega);
    CHECK(heat::thermal_wave(0.0, 1.1, alpha, omega, T0) ==
          doctest::Approx(T0 * std::cos(omega * 1.1)).epsilon(1e-12));
    // e-fold per depth mu (amplitude envelope)
    CHECK(heat::thermal_wave(mu, 0.0, alpha, omega) / heat::thermal_wave(0.0, 0.0, alpha, omega) ==
          doctest::Approx(std::exp(-1.0) * std::cos(1.0)).epsilon(1e-12));
    // dT/dt = alpha d2T/dx2 by central differences
    const double x = 0.8, t = 0.5, h = 1e-4;
    const double dt = (heat::thermal_wave(x, t + h, alpha, omega) -
                       heat::thermal_wave(x, t - h, alpha, omega)) /
                      (2 * h);
    const double dxx = (heat::thermal_wave(x + h, t, alpha, omega) -
                        2 * heat::thermal_wave(x, t, alpha, omega) +
                        heat::thermal_wave(x - h, t, alpha, omega)) /
                       (h * h);
    CHECK(dt == doctest::Approx(alpha * dxx).epsilon(1e-5));
    CHECK_THROWS_AS(heat::thermal_wave(0, 0, -1.0, 1.0), value_error);
}

TEST_CASE("make_phantom: peak location, amplitude, and Gaussian width") {
    heat::PhantomSpec spec;
    spec.nx = 48;
    spec.nz = 48;
    spec.sources.push_back({20.5, 12.5, 2.0, 2.0}); // centered on cell (12, 20)
    const heat::Field f = heat::make_phantom(spec);
    int iz = 0, ix = 0;
    f.values.maxCoeff(&iz, &ix);
    CHECK(iz == 12);
    CHECK(ix == 20);
    CHECK(f.values(12, 20) == doctest::Approx(2.0).epsilon(1e-12));

    const Eigen::VectorXd cut = f.values.row(12).transpose();
    const double fwhm = resolution::fwhm_around(cut, 20, f.spacing);
    CHECK(fwhm == doctest::Approx(2.0 * std::sqrt(2.0 * std::log(2.0)) * 2.0).epsilon(0.01));

    heat::PhantomSpec bad = spec;
    bad.sources[0].width = 0.0;
    CHECK_THROWS_AS(heat::make_phantom(bad), value_error);
}

TEST_CASE("record_surface: wall sampling doubles the image source as expected") {
    // x-uniform slab varying only in z: effectively the 1d half-line problem.
    // Free solution reflected at the adiabatic wall gives, at z = 0,
    //   T(0, t) = 2 A (sigma0/sigma_t) exp(-z0^2 / (2 sigma_t^2)).
    const int nz = 256, nx = 4;
    const double sigma0 = 3.0, z0 = 16.5, t = 20.0;
    heat::Field init;
    init.values.resize(nz, nx);
    for (int iz = 0; iz < nz; ++iz) {
        const double dz = (iz + 0.5) - z0;
        init.values.row(iz).setConstant(std::exp(-dz * dz / (2 * sigma0 * sigma0)));
    }
    const std::vector<double> det = {1.5};
    const auto wall = heat::record_surface(init, {t}, det, true);
    const auto row0 = heat::record_surface(init, {t}, det, false);

    const double st = std::sqrt(sigma0 * sigma0 + 2.0 * t);
    const double ref_wall = 2.0 * (sigma0 / st) * std::exp(-z0 * z0 / (2 * st * st));
    const double ref_row0 = (sigma0 / st) * (std::exp(-std::pow(0.5 - z0, 2) / (2 * st * st)) +
                                             std::exp(-std::pow(0.5 + z0, 2) / (2 * st * st)));
    CHECK(wall.values(0, 0) == doctest::Approx(ref_wall).epsilon(1e-6));
    CHECK(row0.values(0, 0) == doctest::Approx(ref_row0).epsilon(1e-6));
    CHECK(wall.values(0, 0) != row0.values(0, 0));

    // cell-row mode must agree with the two-step solve + sample path
    const auto series = heat::solve_heat(init, {t});
    const auto sampled = heat::sample_surface(series, det);
    CHECK(row0.values(0, 0) == doctest::Approx(sampled.values(0, 0)).epsilon(1e-12));

    CHECK_THROWS_AS(heat::record_surface(init, {t}, {1.7}), value_error); // off-grid detector
    CHECK_THROWS_AS(heat::record_surface(init, {t}, {}), value_error);
}

TEST_CASE("add_noise: level, determinism, zero mean") {
    heat::SurfaceRecord rec;
    rec.ts.resize(400);
    rec.detector_xs.resize(50);
    rec.values = Eigen::MatrixXd::Zero(400, 50);
    rec.values(0, 0) = 8.0; // peak sets the noise scale
    const double snr = 100.0;

    const auto a = heat::add_noise(rec, snr, 42);
    const auto b = heat::add_noise(rec, snr, 42);
    const auto c = heat::add_noise(rec, snr, 43);
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.values - c.values).cwiseAbs().maxCoeff() > 0.0);

    Eigen::MatrixXd noise = a.values - rec.values;
    const double mean = noise.mean();
    const double var = (noise.array() - mean).square().sum() / (noise.size() - 1);
    const double expected_std = 8.0 / snr;
    CHECK(std::abs(mean) < 5.0 * expected_std / std::sqrt(double(noise.size())));
    CHECK(std::sqrt(var) == doctest::Approx(expected_std).epsilon(0.02));
}
