#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>

namespace rfiforge {

template <typename Scalar>
using ComplexMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using ComplexVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

template <typename Scalar>
using RealMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using RealVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Column n holds the array output vector x(n).
template <typename Scalar>
using SnapshotMatrix = ComplexMatrix<Scalar>;

template <typename Scalar>
constexpr Scalar pi_v = static_cast<Scalar>(3.14159265358979323846L);

/// Power ratio in dB to linear power.
template <typename Scalar>
Scalar db_to_power(Scalar db) {
  return std::pow(Scalar(10), db / Scalar(10));
}

/// Linear power ratio to dB.
template <typename Scalar>
Scalar power_to_db(Scalar power) {
  return Scalar(10) * std::log10(power);
}

/// Hermitian part (A + A^H)/2 of a square matrix.
template <typename Derived>
ComplexMatrix<typename Derived::RealScalar> hermitian_part(const Eigen::MatrixBase<Derived>& a) {
  return (a.derived() + a.derived().adjoint()) / typename Derived::RealScalar(2);
}

}  // namespace rfiforge
