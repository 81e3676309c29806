#include <doctest.h>

#include "thermores/errors.hpp"
#include "thermores/saft.hpp"

#include <cmath>
#include <vector>

using namespace thermores;

namespace {

virtual_wave::VirtualField make_field(int n_tp, double dtp, const std::vector<double>& xs) {
    virtual_wave::VirtualField vf;
    vf.dtp = dtp;
    vf.tps.resize(n_tp);
    for (int i = 0; i < n_tp; ++i) vf.tps[i] = dtp * i;
    vf.detector_xs = xs;
    vf.values = Eigen::MatrixXd::Zero(n_tp, static_cast<long>(xs.size()));
    return vf;
}

// narrow Gaussian pulse centered on the exact detector->source delay
void add_pulse(virtual_wave::VirtualField& vf, double sx, double sz, double c, double sigma) {
    for (std::size_t d = 0; d < vf.detector_xs.size(); ++d) {
        const double dx = sx - vf.detector_xs[d];
        const double delay = std::sqrt(dx * dx + sz * sz) / c;
        for (std::size_t i = 0; i < vf.tps.size(); ++i) {
            const double u = (vf.tps[i] - delay) / sigma;
            vf.values(static_cast<long>(i), static_cast<long>(d)) += std::exp(-0.5 * u * u);
        }
    }
}

} // namespace

TEST_CASE("saft_backproject: point source focuses at its true cell") {
    std::vector<double> xs;
    for (int d = 0; d < 32; ++d) xs.push_back(d + 0.5);
    auto vf = make_field(400, 0.25, xs);
    const double sx = 16.5, sz = 12.5, c = 1.0;
    add_pulse(vf, sx, sz, c, 0.6);

    const auto grid = saft::saft_backproject(vf, xs, 32, 32, 1.0, c);
    int iz = 0, ix = 0;
    grid.values.maxCoeff(&iz, &ix);
    CHECK(std::abs(ix - 16) <= 1);
    CHECK(std::abs(iz - 12) <= 1);
    // full coherent stack: every detector contributes ~1 at the focus
    CHECK(grid.values(iz, ix) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("saft_backproject: linear in the traces, translation covariant") {
    std::vector<double> xs;
    for (int d = 0; d < 24; ++d) xs.push_back(d + 0.5);
    auto a = make_field(300, 0.25, xs);
    auto b = make_field(300, 0.25, xs);
    add_pulse(a, 8.5, 6.5, 1.0, 0.6);
    add_pulse(b, 15.5, 10.5, 1.0, 0.6);

    auto both = make_field(300, 0.25, xs);
    both.values = 2.0 * a.values + 0.5 * b.values;

    const auto ga = saft::saft_backproject(a, xs, 24, 16, 1.0, 1.0);
    const auto gb = saft::saft_backproject(b, xs, 24, 16, 1.0, 1.0);
    const auto gboth = saft::saft_backproject(both, xs, 24, 16, 1.0, 1.0);
    CHECK((gboth.values - 2.0 * ga.values - 0.5 * gb.values).cwiseAbs().maxCoeff() < 1e-12);

    // shifting the source along x shifts the focus cell by the same amount
    auto shifted = make_field(300, 0.25, xs);
    add_pulse(shifted, 10.5, 6.5, 1.0, 0.6);
    const auto gs = saft::saft_backproject(shifted, xs, 24, 16, 1.0, 1.0);
    int iza = 0, ixa = 0, izs = 0, ixs = 0;
    ga.values.maxCoeff(&iza, &ixa);
    gs.values.maxCoeff(&izs, &ixs);
    CHECK(ixs - ixa == 2);
    CHECK(izs == iza);
}

TEST_CASE("saft_backproject: delays beyond the trace contribute nothing") {
    std::vector<double> xs = {0.5, 1.5};
    auto vf = make_field(8, 0.25, xs); // trace covers delays < 1.75 only
    vf.values.setConstant(1.0);
    const auto grid = saft::saft_backproject(vf, xs, 2, 40, 1.0, 1.0);
    // deep cells are out of reach of every detector's trace
    CHECK(grid.values.row(39).cwiseAbs().maxCoeff() == 0.0);
    CHECK(grid.values.row(0).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("saft_backproject: validation") {
    std::vector<double> xs = {0.5, 1.5};
    auto vf = make_field(16, 0.25, xs);
    CHECK_THROWS_AS(saft::saft_backproject(vf, {}, 2, 2, 1.0, 1.0), value_error);
    CHECK_THROWS_AS(saft::saft_backproject(vf, {0.5}, 2, 2, 1.0, 1.0), value_error);
    CHECK_THROWS_AS(saft::saft_backproject(vf, xs, 0, 2, 1.0, 1.0), value_error);
    CHECK_THROWS_AS(saft::saft_backproject(vf, xs, 2, 2, 1.0, 0.0), value_error);
    auto tiny = make_field(1, 0.25, xs);
    CHECK_THROWS_AS(saft::saft_backproject(tiny, xs, 2, 2, 1.0, 1.0), value_error);
}

TEST_CASE("averaging_gain: closed form") {
    const auto [snr1, res1] = saft::averaging_gain(1);
    CHECK(snr1 == 1.0);
    CHECK(res1 == 0.0);
    const auto [snr, res] = saft::averaging_gain(200);
    CHECK(snr == doctest::Approx(std::sqrt(200.0)).epsilon(1e-15));
    CHECK(res == doctest::Approx(0.5 * std::log(200.0)).epsilon(1e-15));
    CHECK_THROWS_AS(saft::averaging_gain(0), value_error);
}
