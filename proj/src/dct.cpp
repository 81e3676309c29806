#include "thermores/dct.hpp"
#include "thermores/errors.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace thermores::dct {

namespace {
std::mutex cache_mutex;
std::map<int, Eigen::MatrixXd> basis_cache;
std::map<int, Eigen::VectorXd> wall_cache;

Eigen::MatrixXd build_basis(int n) {
    Eigen::MatrixXd F(n, n);
    const double c0 = std::sqrt(1.0 / n);
    const double cm = std::sqrt(2.0 / n);
    for (int m = 0; m < n; ++m) {
        const double norm = (m == 0) ? c0 : cm;
        for (int i = 0; i < n; ++i)
            F(m, i) = norm * std::cos(M_PI * m * (2 * i + 1) / (2.0 * n));
    }
    return F;
}
}

const Eigen::MatrixXd& basis(int n) {
    if (n < 1) throw value_error("dct basis size must be >= 1");
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = basis_cache.find(n);
    if (it == basis_cache.end()) it = basis_cache.emplace(n, build_basis(n)).first;
    return it->second;
}

const Eigen::VectorXd& wall_weights(int n) {
    if (n < 1) throw value_error("dct basis size must be >= 1");
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = wall_cache.find(n);
    if (it == wall_cache.end()) {
        Eigen::VectorXd c = Eigen::VectorXd::Constant(n, std::sqrt(2.0 / n));
        c(0) = std::sqrt(1.0 / n);
        it = wall_cache.emplace(n, std::move(c)).first;
    }
    return it->second;
}

}
