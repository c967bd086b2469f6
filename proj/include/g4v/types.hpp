#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace g4v {

using cplx = std::complex<double>;

using Mat8 = Eigen::Matrix<cplx, 8, 8>;
using Vec8 = Eigen::Matrix<cplx, 8, 1>;
using RVec8 = Eigen::Matrix<double, 8, 1>;
using Mat4 = Eigen::Matrix<cplx, 4, 4>;
using CVec3 = Eigen::Matrix<cplx, 3, 1>;
using RVec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2cd;

// 8 rows, any number of columns: stacked kets or density-matrix blocks.
using Block8 = Eigen::Matrix<cplx, 8, Eigen::Dynamic>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

// Raised when an integration or eigen decomposition cannot be completed.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised for inconsistent physical input (forbidden transitions, no solution).
class PhysicsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace g4v
