#include "thermores/resolution.hpp"
#include "thermores/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace thermores::resolution {

double k_cut(double snr_k, double alpha, double t) {
    if (snr_k <= 1.0) throw value_error("k_cut: snr_k must be > 1");
    if (alpha <= 0 || t <= 0) throw value_error("k_cut: alpha and t must be > 0");
    return std::sqrt(std::log(snr_k) / (alpha * t));
}

Eigen::VectorXd sinc_reconstruction(double n0, double kcut, const Eigen::VectorXd& xs) {
    if (kcut <= 0) throw value_error("sinc_reconstruction: kcut must be > 0");
    Eigen::VectorXd out(xs.size());
    for (long i = 0; i < xs.size(); ++i) {
        const double x = xs(i);
        out(i) = (std::abs(x) < 1e-300) ? n0 * kcut / M_PI
                                        : n0 / M_PI * std::sin(kcut * x) / x;
    }
    return out;
}

double delta_r_time(double alpha, double t, double snr_k) {
    return M_PI / k_cut(snr_k, alpha, t);
}

FrequencyCutoff omega_cut(double alpha, double snr, double x) {
    if (snr <= 1.0) throw value_error("omega_cut: snr must be > 1");
    if (alpha <= 0 || x <= 0) throw value_error("omega_cut: alpha and x must be > 0");
    FrequencyCutoff c;
    const double l = std::log(snr);
    c.omega_cut = 2.0 * alpha * (l / x) * (l / x);
    c.mu_cut = x / l;
    return c;
}

double delta_r_depth(double x, double snr) {
    if (snr <= 1.0) throw value_error("delta_r_depth: snr must be > 1");
    if (x <= 0) throw value_error("delta_r_depth: x must be > 0");
    return M_PI * x / std::log(snr);
}

namespace {
// f(u) = (u sin u + cos u - 1)/u^2 with the cancellation-safe small-u branch
inline double radial_f(double u) {
    if (std::abs(u) < 1e-4) return 0.5 - u * u / 8.0;
    return (u * std::sin(u) + std::cos(u) - 1.0) / (u * u);
}
}

double psf_2d_value(double snr, double x, double w, int n_theta) {
    const double K = std::log(snr);
    double acc = 0.0;
    for (int q = 0; q < n_theta; ++q) {
        const double theta = (q + 0.5) * (M_PI / 2.0) / n_theta;
        const double ct = std::cos(theta), st = std::sin(theta);
        const double kappa = K * ct;
        const double k2 = kappa * kappa;
        acc += k2 * (radial_f(kappa * (w * ct + x * st)) +
                     radial_f(kappa * (w * ct - x * st)));
    }
    return acc * (M_PI / 2.0) / n_theta;
}

PsfImage psf_2d(double snr, double d, const PsfGridSpec& grid) {
    if (snr <= 1.0) throw value_error("psf_2d: snr must be > 1");
    if (d <= 0) throw value_error("psf_2d: d must be > 0");
    if (grid.n < 2 || grid.half_width <= 0) throw value_error("psf_2d: bad grid spec");

    const double spacing = 2.0 * grid.half_width / grid.n;
    const double axial_width = 2.0 * M_PI / std::log(snr); // zero-to-zero, units of d
    if (axial_width / spacing < 16.0)
        throw value_error("psf_2d: grid too coarse to resolve the axial main lobe");

    const int n = grid.n;
    const int center = n / 2;
    const int n_theta = 512;

    // theta tables shared across all samples
    std::vector<double> ct(n_theta), st(n_theta), k2(n_theta);
    const double K = std::log(snr);
    for (int q = 0; q < n_theta; ++q) {
        const double theta = (q + 0.5) * (M_PI / 2.0) / n_theta;
        ct[q] = std::cos(theta);
        st[q] = std::sin(theta);
        k2[q] = K * ct[q] * K * ct[q];
    }

    PsfImage img;
    img.spacing = spacing;
    img.d = d;
    img.snr = snr;
    img.center = center;
    img.values.resize(n, n);
    // symmetric in x: evaluate x >= 0 columns, mirror where the partner
    // exists on the grid (ix = 0 has none for even n: its mirror index is n)
    const auto eval = [&](double x, double w) {
        double acc = 0.0;
        for (int q = 0; q < n_theta; ++q) {
            const double kappa = K * ct[q];
            acc += k2[q] * (radial_f(kappa * (w * ct[q] + x * st[q])) +
                            radial_f(kappa * (w * ct[q] - x * st[q])));
        }
        return acc;
    };
    for (int iz = 0; iz < n; ++iz) {
        const double w = (iz - center) * spacing;
        for (int ix = center; ix < n; ++ix)
            img.values(iz, ix) = eval((ix - center) * spacing, w);
        for (int ix = 1; ix < center; ++ix)
            img.values(iz, ix) = img.values(iz, 2 * center - ix);
        img.values(iz, 0) = eval(center * spacing, w);
    }
    img.values /= img.values(center, center);
    return img;
}

MainlobeMeasurement measure_mainlobe(const Eigen::VectorXd& profile, double spacing,
                                     double origin) {
    MainlobeMeasurement m;
    if (profile.size() < 3) { m.issue = "profile too short"; return m; }
    if (spacing <= 0) throw value_error("measure_mainlobe: spacing must be > 0");

    int peak = 0;
    profile.maxCoeff(&peak);
    m.peak_index = peak;
    m.peak_value = profile(peak);
    m.peak_position = origin + peak * spacing;
    if (m.peak_value <= 0) { m.issue = "nonpositive peak"; return m; }
    const double eps = 1e-12 * std::abs(m.peak_value);
    if ((peak > 0 && std::abs(profile(peak - 1) - m.peak_value) <= eps) ||
        (peak + 1 < profile.size() && std::abs(profile(peak + 1) - m.peak_value) <= eps)) {
        m.issue = "plateau";
        return m;
    }

    auto crossing = [&](double level, int dir) -> double {
        // first index pair, walking from the peak, where the profile drops
        // through `level`; returns interpolated position or NaN
        for (int i = peak; ; i += dir) {
            const int j = i + dir;
            if (j < 0 || j >= profile.size()) return std::nan("");
            if (profile(j) <= level && profile(i) > level) {
                const double frac = (profile(i) - level) / (profile(i) - profile(j));
                return origin + (i + dir * frac) * spacing;
            }
        }
    };

    m.zero_left = crossing(0.0, -1);
    m.zero_right = crossing(0.0, +1);
    if (std::isnan(m.zero_left) || std::isnan(m.zero_right)) {
        m.issue = "no zero crossing";
        return m;
    }
    m.zero_to_zero = m.zero_right - m.zero_left;

    const double half = m.peak_value / 2.0;
    const double hl = crossing(half, -1);
    const double hr = crossing(half, +1);
    if (std::isnan(hl) || std::isnan(hr)) {
        m.issue = "no half crossing";
        return m;
    }
    m.fwhm = hr - hl;
    m.ok = true;
    return m;
}

double fwhm_around(const Eigen::VectorXd& profile, int peak_index, double spacing) {
    if (peak_index < 0 || peak_index >= profile.size())
        throw value_error("fwhm_around: peak index out of range");
    const double half = profile(peak_index) / 2.0;
    if (profile(peak_index) <= 0) return std::nan("");
    double left = std::nan(""), right = std::nan("");
    for (int i = peak_index; i > 0; --i)
        if (profile(i - 1) <= half && profile(i) > half) {
            const double frac = (profile(i) - half) / (profile(i) - profile(i - 1));
            left = (i - frac) * spacing;
            break;
        }
    for (int i = peak_index; i + 1 < profile.size(); ++i)
        if (profile(i + 1) <= half && profile(i) > half) {
            const double frac = (profile(i) - half) / (profile(i) - profile(i + 1));
            right = (i + frac) * spacing;
            break;
        }
    return right - left; // NaN propagates if either side is missing
}

double shannon_entropy(const Eigen::VectorXd& p) {
    double sum = 0.0;
    for (long i = 0; i < p.size(); ++i) {
        if (p(i) < 0) throw value_error("shannon_entropy: probabilities must be >= 0");
        sum += p(i);
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw value_error("shannon_entropy: probabilities must sum to 1 within 1e-9");
    double h = 0.0;
    for (long i = 0; i < p.size(); ++i)
        if (p(i) > 0) h -= p(i) * std::log(p(i));
    return h;
}

}
