#pragma once
#include "thermores/virtual_wave.hpp"

#include <Eigen/Dense>
#include <utility>
#include <vector>

// Delay-and-sum (synthetic aperture) back-projection of virtual waves into
// an initial-temperature map, with uniform detector weights and linear
// interpolation in delay. Plain SAFT on purpose: no apodization, no
// derivative filtering, so every artifact in the output traces back to the
// physics of the inversion, not to beamforming tweaks.
namespace thermores::saft {

struct ReconstructionGrid {
    int nx = 0;
    int nz = 0;
    double spacing = 1.0;  // square cells; value point of cell (iz, ix) is
                           // ((ix+0.5)*spacing, (iz+0.5)*spacing)
    Eigen::MatrixXd values; // (nz, nx)
};

// value(r) = (1/n_det) * sum_d virtual[d](t' = |r - r_d|/c), detectors at
// (detector_xs[d], z=0); delays beyond the trace contribute zero.
ReconstructionGrid saft_backproject(const virtual_wave::VirtualField& vf,
                                    const std::vector<double>& detector_xs,
                                    int nx, int nz, double spacing, double c);

// SNR and resolution gain from averaging n detector traces:
// (sqrt(n), ln(sqrt(n))) -- the resolution factor enters through the
// ln(SNR) in delta_r.
std::pair<double, double> averaging_gain(int n_detectors);

}
