#include "thermores/heat.hpp"
#include "thermores/dct.hpp"
#include "thermores/errors.hpp"
#include "thermores/rng.hpp"

#include <cmath>

namespace thermores::heat {

namespace {

void check_field(const Field& f, const char* who) {
    if (f.values.rows() < 1 || f.values.cols() < 1)
        throw value_error(std::string(who) + ": empty field");
    if (f.spacing <= 0) throw value_error(std::string(who) + ": spacing must be > 0");
    if (f.alpha <= 0) throw value_error(std::string(who) + ": alpha must be > 0");
    if (!f.values.allFinite()) throw value_error(std::string(who) + ": non-finite values");
}

// squared spatial frequencies per axis, k_m = pi*m/(n*spacing)
Eigen::VectorXd k2_axis(int n, double spacing) {
    Eigen::VectorXd k2(n);
    for (int m = 0; m < n; ++m) {
        const double k = M_PI * m / (n * spacing);
        k2(m) = k * k;
    }
    return k2;
}

// detector x -> column index; positions must hit cell centers
std::vector<int> detector_columns(const std::vector<double>& detector_xs, int nx,
                                  double spacing) {
    if (detector_xs.empty()) throw value_error("surface sampling: empty detector set");
    std::vector<int> cols(detector_xs.size());
    for (std::size_t i = 0; i < detector_xs.size(); ++i) {
        const double idx = detector_xs[i] / spacing - 0.5;
        const int c = static_cast<int>(std::lround(idx));
        if (std::abs(idx - c) > 1e-9 || c < 0 || c >= nx)
            throw value_error("surface sampling: detector position off the cell-center grid");
        cols[i] = c;
    }
    return cols;
}

}

FieldSeries solve_heat(const Field& initial, const std::vector<double>& ts) {
    check_field(initial, "solve_heat");
    for (double t : ts)
        if (t < 0) throw value_error("solve_heat: times must be >= 0");

    const int nz = static_cast<int>(initial.values.rows());
    const int nx = static_cast<int>(initial.values.cols());
    const Eigen::VectorXd k2z = k2_axis(nz, initial.spacing);
    const Eigen::VectorXd k2x = k2_axis(nx, initial.spacing);
    const Eigen::MatrixXd hat0 = dct::forward2d(initial.values);

    FieldSeries out;
    out.ts = ts;
    out.fields.reserve(ts.size());
    Eigen::MatrixXd hat(nz, nx);
    for (double t : ts) {
        for (int mz = 0; mz < nz; ++mz)
            for (int mx = 0; mx < nx; ++mx)
                hat(mz, mx) = hat0(mz, mx) * std::exp(-initial.alpha * (k2z(mz) + k2x(mx)) * t);
        Field f;
        f.spacing = initial.spacing;
        f.alpha = initial.alpha;
        f.values = dct::inverse2d(hat);
        out.fields.push_back(std::move(f));
    }
    return out;
}

double thermal_wave(double x, double t, double alpha, double omega, double T0) {
    if (alpha <= 0 || omega <= 0) throw value_error("thermal_wave: alpha and omega must be > 0");
    const double mu = std::sqrt(2.0 * alpha / omega);
    return T0 * std::exp(-x / mu) * std::cos(x / mu - omega * t);
}

Field make_phantom(const PhantomSpec& spec) {
    if (spec.nx < 1 || spec.nz < 1) throw value_error("make_phantom: grid must be at least 1x1");
    if (spec.spacing <= 0) throw value_error("make_phantom: spacing must be > 0");
    if (spec.alpha <= 0) throw value_error("make_phantom: alpha must be > 0");
    for (const auto& s : spec.sources)
        if (s.width <= 0) throw value_error("make_phantom: source width must be > 0");

    Field f;
    f.spacing = spec.spacing;
    f.alpha = spec.alpha;
    f.values = Eigen::MatrixXd::Zero(spec.nz, spec.nx);
    for (const auto& s : spec.sources) {
        const double inv2w2 = 1.0 / (2.0 * s.width * s.width);
        for (int iz = 0; iz < spec.nz; ++iz) {
            const double dz = (iz + 0.5) * spec.spacing - s.z;
            for (int ix = 0; ix < spec.nx; ++ix) {
                const double dx = (ix + 0.5) * spec.spacing - s.x;
                f.values(iz, ix) += s.amplitude * std::exp(-(dx * dx + dz * dz) * inv2w2);
            }
        }
    }
    return f;
}

SurfaceRecord sample_surface(const FieldSeries& series, const std::vector<double>& detector_xs) {
    if (series.fields.empty()) throw value_error("sample_surface: empty field series");
    if (series.ts.size() != series.fields.size())
        throw value_error("sample_surface: ts/fields length mismatch");
    const Field& f0 = series.fields.front();
    const int nx = static_cast<int>(f0.values.cols());
    const auto cols = detector_columns(detector_xs, nx, f0.spacing);

    SurfaceRecord rec;
    rec.ts = series.ts;
    rec.detector_xs = detector_xs;
    rec.values.resize(static_cast<long>(series.ts.size()), static_cast<long>(cols.size()));
    for (std::size_t it = 0; it < series.fields.size(); ++it) {
        const auto& v = series.fields[it].values;
        if (v.cols() != nx) throw value_error("sample_surface: inconsistent field widths");
        for (std::size_t d = 0; d < cols.size(); ++d)
            rec.values(static_cast<long>(it), static_cast<long>(d)) = v(0, cols[d]);
    }
    rec.dt = rec.ts.size() > 1 ? rec.ts[1] - rec.ts[0] : 0.0;
    return rec;
}

SurfaceRecord record_surface(const Field& initial, const std::vector<double>& ts,
                             const std::vector<double>& detector_xs, bool wall_sampled) {
    check_field(initial, "record_surface");
    for (double t : ts)
        if (t < 0) throw value_error("record_surface: times must be >= 0");
    const int nz = static_cast<int>(initial.values.rows());
    const int nx = static_cast<int>(initial.values.cols());
    const auto cols = detector_columns(detector_xs, nx, initial.spacing);

    const Eigen::VectorXd k2z = k2_axis(nz, initial.spacing);
    const Eigen::VectorXd k2x = k2_axis(nx, initial.spacing);
    const Eigen::MatrixXd hat0 = dct::forward2d(initial.values);

    // z-contraction weights: DCT basis at the wall (z=0) or at the first
    // cell center (z = spacing/2)
    Eigen::VectorXd wz(nz);
    if (wall_sampled) {
        wz = dct::wall_weights(nz);
    } else {
        const auto& Bz = dct::basis(nz);
        wz = Bz.col(0); // basis functions evaluated at cell 0
    }

    // detector-column slice of the x basis: Bsub(kx, d) = F_x(kx, col_d)
    const auto& Bx = dct::basis(nx);
    Eigen::MatrixXd Bsub(nx, static_cast<long>(cols.size()));
    for (std::size_t d = 0; d < cols.size(); ++d)
        Bsub.col(static_cast<long>(d)) = Bx.col(cols[d]);

    SurfaceRecord rec;
    rec.ts = ts;
    rec.detector_xs = detector_xs;
    rec.values.resize(static_cast<long>(ts.size()), static_cast<long>(cols.size()));

    Eigen::VectorXd decay_z(nz), decay_x(nx), row_hat(nx);
    for (std::size_t it = 0; it < ts.size(); ++it) {
        const double t = ts[it];
        for (int m = 0; m < nz; ++m) decay_z(m) = std::exp(-initial.alpha * k2z(m) * t);
        for (int m = 0; m < nx; ++m) decay_x(m) = std::exp(-initial.alpha * k2x(m) * t);
        row_hat.noalias() = hat0.transpose() * (wz.cwiseProduct(decay_z));
        row_hat.array() *= decay_x.array();
        rec.values.row(static_cast<long>(it)).noalias() = (Bsub.transpose() * row_hat).transpose();
    }
    rec.dt = ts.size() > 1 ? ts[1] - ts[0] : 0.0;
    return rec;
}

SurfaceRecord add_noise(const SurfaceRecord& record, double snr, std::uint64_t seed) {
    if (snr <= 0) throw value_error("add_noise: snr must be > 0");
    const double peak = record.values.cwiseAbs().maxCoeff();
    const double std_dev = peak / snr;
    SurfaceRecord out = record;
    const std::uint64_t key = rng::stream_key(seed, 0x4e4f4953ull); // 'NOIS'
    std::uint64_t c = 0;
    for (long i = 0; i < out.values.rows(); ++i)
        for (long j = 0; j < out.values.cols(); ++j)
            out.values(i, j) += std_dev * rng::normal(key, c++);
    return out;
}

}
