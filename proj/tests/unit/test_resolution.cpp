#include <doctest.h>

#include "thermores/errors.hpp"
#include "thermores/resolution.hpp"

#include <cmath>

using namespace thermores;

TEST_CASE("cutoff identities: k_cut, delta_r, omega_cut") {
    const double alpha = 0.7, t = 13.0, snr = 250.0;
    const double kc = resolution::k_cut(snr, alpha, t);
    // defining equation: exp(-alpha k^2 t) = 1/snr
    CHECK(std::exp(-alpha * kc * kc * t) == doctest::Approx(1.0 / snr).epsilon(1e-12));
    CHECK(resolution::delta_r_time(alpha, t, snr) * kc == doctest::Approx(M_PI).epsilon(1e-12));

    const double x = 7.0;
    const auto fc = resolution::omega_cut(alpha, snr, x);
    // mu(omega_cut) carries exactly ln(snr) e-folds over depth x
    CHECK(std::sqrt(2.0 * alpha / fc.omega_cut) == doctest::Approx(fc.mu_cut).epsilon(1e-12));
    CHECK(x / fc.mu_cut == doctest::Approx(std::log(snr)).epsilon(1e-12));
    CHECK(resolution::delta_r_depth(x, snr) ==
          doctest::Approx(M_PI * x / std::log(snr)).epsilon(1e-12));

    // the depth-domain limit never involves alpha
    const auto fc2 = resolution::omega_cut(alpha * 10, snr, x);
    CHECK(fc2.mu_cut == doctest::Approx(fc.mu_cut).epsilon(1e-15));

    CHECK_THROWS_AS(resolution::k_cut(0.5, alpha, t), value_error); // snr <= 1 is no signal
    CHECK_THROWS_AS(resolution::omega_cut(alpha, snr, 0.0), value_error);
}

TEST_CASE("sinc_reconstruction: peak value, zeros, area") {
    const double n0 = 5.0, kc = 2.0;
    const int n = 4001;
    const double half = 40.0;
    Eigen::VectorXd xs(n);
    for (int i = 0; i < n; ++i) xs(i) = -half + 2 * half * i / (n - 1);
    const Eigen::VectorXd y = resolution::sinc_reconstruction(n0, kc, xs);

    const int mid = n / 2;                             // x = 0
    CHECK(y(mid) == doctest::Approx(n0 * kc / M_PI).epsilon(1e-12)); // limit value
    // zeros at multiples of pi/kc
    const auto ml = resolution::measure_mainlobe(y, xs(1) - xs(0), xs(0));
    CHECK(ml.ok);
    CHECK(ml.peak_position == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(ml.zero_to_zero == doctest::Approx(2.0 * M_PI / kc).epsilon(1e-3));
    // the band-limited image still integrates to the source strength
    const double area = y.sum() * (xs(1) - xs(0));
    CHECK(area == doctest::Approx(n0).epsilon(1e-3));
}

TEST_CASE("psf_2d: normalization, symmetry, axial zero, grid rejection") {
    resolution::PsfGridSpec grid;
    grid.n = 128;
    const double snr = 1000.0, d = 2.0;
    const auto img = resolution::psf_2d(snr, d, grid);
    CHECK(img.values.rows() == grid.n);
    CHECK(img.values(img.center, img.center) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(img.values.maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(img.d == d);

    // lateral mirror symmetry about x = 0 (column 0 has no on-grid partner)
    double asym = 0;
    for (int iz = 0; iz < grid.n; ++iz)
        for (int dx = 1; dx < img.center; ++dx)
            asym = std::max(asym, std::abs(img.values(iz, img.center - dx) -
                                           img.values(iz, img.center + dx)));
    CHECK(asym < 1e-9);

    // axial first zeros at w = +-pi/ln(snr) (units of d)
    const Eigen::VectorXd axial = img.values.col(img.center);
    const double origin = -img.center * img.spacing; // w of row 0
    const auto ml = resolution::measure_mainlobe(axial, img.spacing, origin);
    CHECK(ml.ok);
    CHECK(ml.zero_right == doctest::Approx(M_PI / std::log(snr)).epsilon(5e-3));
    CHECK(ml.zero_left == doctest::Approx(-M_PI / std::log(snr)).epsilon(5e-3));

    // pointwise evaluator agrees with the sampled image after normalization
    // (probe at exact grid nodes: 16 and 8 steps off center)
    const double peak = resolution::psf_2d_value(snr, 0.0, 0.0);
    const double probe = resolution::psf_2d_value(snr, 16 * img.spacing, 8 * img.spacing);
    CHECK(img.values(img.center + 8, img.center + 16) ==
          doctest::Approx(probe / peak).epsilon(1e-6));

    // a grid too coarse to resolve the axial main lobe is rejected
    resolution::PsfGridSpec coarse;
    coarse.n = 16;
    CHECK_THROWS_AS(resolution::psf_2d(1e6, d, coarse), value_error);
}

TEST_CASE("measure_mainlobe: honest failure flags") {
    const double h = 0.1;

    Eigen::VectorXd plateau = Eigen::VectorXd::Zero(21);
    plateau.segment(9, 3).setConstant(1.0);
    auto m = resolution::measure_mainlobe(plateau, h);
    CHECK_FALSE(m.ok);
    CHECK(m.issue == "plateau");

    Eigen::VectorXd positive(21); // never crosses zero
    for (int i = 0; i < 21; ++i) positive(i) = 1.0 + std::exp(-0.5 * (i - 10) * (i - 10));
    m = resolution::measure_mainlobe(positive, h);
    CHECK_FALSE(m.ok);
    CHECK(m.issue == "no zero crossing");

    // well-formed lobe measures cleanly and fwhm_around agrees
    Eigen::VectorXd lobe(201);
    for (int i = 0; i < 201; ++i) {
        const double x = (i - 100) * h;
        lobe(i) = std::cos(x) * std::exp(-x * x / 8.0);
    }
    m = resolution::measure_mainlobe(lobe, h, -100 * h);
    CHECK(m.ok);
    CHECK(m.peak_index == 100);
    CHECK(m.zero_right > 0);
    CHECK(m.zero_left < 0);
    CHECK(m.fwhm == doctest::Approx(resolution::fwhm_around(lobe, 100, h)).epsilon(1e-12));

    // fwhm_around: NaN when a half-max crossing is out of range
    Eigen::VectorXd ramp(5);
    ramp << 0.9, 0.95, 1.0, 0.95, 0.9;
    CHECK(std::isnan(resolution::fwhm_around(ramp, 2, h)));
}

TEST_CASE("shannon_entropy: bounds and validation") {
    const int n = 32;
    const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(n, 1.0 / n);
    CHECK(resolution::shannon_entropy(uniform) == doctest::Approx(std::log(double(n))).epsilon(1e-12));

    Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
    delta(4) = 1.0;
    CHECK(resolution::shannon_entropy(delta) == doctest::Approx(0.0).epsilon(1e-15));

    Eigen::VectorXd skew(2);
    skew << 0.25, 0.75;
    CHECK(resolution::shannon_entropy(skew) ==
          doctest::Approx(-0.25 * std::log(0.25) - 0.75 * std::log(0.75)).epsilon(1e-12));

    Eigen::VectorXd unnormalized = Eigen::VectorXd::Constant(n, 1.0);
    CHECK_THROWS_AS(resolution::shannon_entropy(unnormalized), value_error);
    Eigen::VectorXd negative(2);
    negative << 1.5, -0.5;
    CHECK_THROWS_AS(resolution::shannon_entropy(negative), value_error);
}
