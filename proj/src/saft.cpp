#include "thermores/saft.hpp"
#include "thermores/errors.hpp"

#include <cmath>

namespace thermores::saft {

ReconstructionGrid saft_backproject(const virtual_wave::VirtualField& vf,
                                    const std::vector<double>& detector_xs,
                                    int nx, int nz, double spacing, double c) {
    if (detector_xs.empty()) throw value_error("saft_backproject: empty detector set");
    if (static_cast<long>(detector_xs.size()) != vf.values.cols())
        throw value_error("saft_backproject: detector count does not match virtual field");
    if (nx < 1 || nz < 1 || spacing <= 0)
        throw value_error("saft_backproject: bad grid");
    if (c <= 0) throw value_error("saft_backproject: c must be > 0");
    if (vf.tps.size() < 2 || static_cast<long>(vf.tps.size()) != vf.values.rows())
        throw value_error("saft_backproject: bad virtual field sampling");
    const double dtp = vf.tps[1] - vf.tps[0];
    if (dtp <= 0) throw value_error("saft_backproject: tp grid must be increasing");

    ReconstructionGrid grid;
    grid.nx = nx;
    grid.nz = nz;
    grid.spacing = spacing;
    grid.values = Eigen::MatrixXd::Zero(nz, nx);

    const long n_tp = vf.values.rows();
    const double inv_n = 1.0 / static_cast<double>(detector_xs.size());
    const double tp0 = vf.tps[0];

    for (int iz = 0; iz < nz; ++iz) {
        const double zc = (iz + 0.5) * spacing;
        for (int ix = 0; ix < nx; ++ix) {
            const double xc = (ix + 0.5) * spacing;
            double acc = 0.0;
            for (std::size_t d = 0; d < detector_xs.size(); ++d) {
                const double dx = xc - detector_xs[d];
                const double delay = std::sqrt(dx * dx + zc * zc) / c;
                const double idx = (delay - tp0) / dtp;
                if (idx < 0.0 || idx >= static_cast<double>(n_tp - 1)) continue;
                const long i0 = static_cast<long>(idx);
                const double frac = idx - static_cast<double>(i0);
                acc += (1.0 - frac) * vf.values(i0, static_cast<long>(d)) +
                       frac * vf.values(i0 + 1, static_cast<long>(d));
            }
            grid.values(iz, ix) = acc * inv_n;
        }
    }
    return grid;
}

std::pair<double, double> averaging_gain(int n_detectors) {
    if (n_detectors < 1) throw value_error("averaging_gain: n must be >= 1");
    const double s = std::sqrt(static_cast<double>(n_detectors));
    return {s, std::log(s)};
}

}
