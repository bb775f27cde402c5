#pragma once

#include <complex>
#include <cstddef>
#include <string>

#include <Eigen/Dense>

namespace kerrcqa {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double sqrt2 = 1.41421356237309504880;
inline constexpr cplx I{0.0, 1.0};

}  // namespace kerrcqa
