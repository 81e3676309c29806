#pragma once
#include <Eigen/Dense>

// Orthonormal DCT-II (forward) / DCT-III (inverse) pair, as dense cached
// basis matrices. Grid sizes in this project stay <= ~1024, where the O(n^2)
// matrix transform is fast enough and keeps results bit-reproducible across
// runs (no FFT plan heuristics).
//
// Basis row m, column i:  F(m,i) = c_m * cos(pi*m*(2i+1)/(2n)),
// c_0 = sqrt(1/n), c_m = sqrt(2/n) otherwise.  F is orthogonal: F^T F = I.
// These are exactly the eigenvectors of the Neumann (reflecting) diffusion
// operator on n cells.
namespace thermores::dct {

const Eigen::MatrixXd& basis(int n);

// Normalization constants c_m as a vector; also the value every basis
// function takes at the wall position (cos(0) = 1), which is what boundary
// sampling of a Neumann interpolant contracts against.
const Eigen::VectorXd& wall_weights(int n);

inline Eigen::VectorXd forward(const Eigen::VectorXd& x) {
    return basis(static_cast<int>(x.size())) * x;
}

inline Eigen::VectorXd inverse(const Eigen::VectorXd& xhat) {
    return basis(static_cast<int>(xhat.size())).transpose() * xhat;
}

// 2D transforms over (rows, cols) = (z, x) layouts.
inline Eigen::MatrixXd forward2d(const Eigen::MatrixXd& v) {
    const auto& Bz = basis(static_cast<int>(v.rows()));
    const auto& Bx = basis(static_cast<int>(v.cols()));
    return Bz * v * Bx.transpose();
}

inline Eigen::MatrixXd inverse2d(const Eigen::MatrixXd& vhat) {
    const auto& Bz = basis(static_cast<int>(vhat.rows()));
    const auto& Bx = basis(static_cast<int>(vhat.cols()));
    return Bz.transpose() * vhat * Bx;
}

}
