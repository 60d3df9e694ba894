#pragma once

#include <complex>
#include <optional>

#include "rfiforge/covariance.hpp"
#include "rfiforge/errors.hpp"
#include "rfiforge/subspace.hpp"
#include "rfiforge/types.hpp"

namespace rfiforge {

enum class MitigationMethod { projection, subtraction };

inline const char* to_string(MitigationMethod method) {
  return method == MitigationMethod::projection ? "projection" : "subtraction";
}

/// Corrected covariance with method diagnostics. The corrected matrix is
/// Hermitian-symmetrized so downstream imaging sees a valid covariance.
template <typename Scalar>
struct MitigationResult {
  ComplexMatrix<Scalar> corrected;
  MitigationMethod method = MitigationMethod::projection;
  std::complex<Scalar> xi0{0, 0};        // subtraction only
  Eigen::Index rank_removed = 0;         // projection only
  std::optional<Scalar> mse_vs_reference;
};

/// P R P^H.
template <typename DerivedR, typename DerivedP>
ComplexMatrix<typename DerivedR::RealScalar> project_covariance(
    const Eigen::MatrixBase<DerivedR>& r, const Eigen::MatrixBase<DerivedP>& projector) {
  if (r.rows() != r.cols() || projector.rows() != projector.cols() || r.rows() != projector.rows())
    throw dimension_error("project_covariance: dimension mismatch");
  return projector.derived() * r.derived() * projector.derived().adjoint();
}

/// Columnwise P x(n).
template <typename DerivedX, typename DerivedP>
SnapshotMatrix<typename DerivedX::RealScalar> project_snapshots(
    const Eigen::MatrixBase<DerivedX>& snapshots, const Eigen::MatrixBase<DerivedP>& projector) {
  if (projector.cols() != snapshots.rows())
    throw dimension_error("project_snapshots: dimension mismatch");
  return projector.derived() * snapshots.derived();
}

/// Frobenius-optimal complex gain for subtracting the lagged SCM:
/// xi0 = tr(Rtau^H R0) / tr(Rtau^H Rtau), the minimizer of
/// ||R0 - xi * Rtau||_F^2 over complex xi. A complex gain absorbs the
/// waveform phase the lagged estimate carries; for zero phase it reduces
/// to the real case.
template <typename Scalar>
std::complex<Scalar> subtraction_gain(const LaggedSCM<Scalar>& r0, const LaggedSCM<Scalar>& rtau) {
  if (r0.matrix.rows() != rtau.matrix.rows() || r0.matrix.cols() != rtau.matrix.cols())
    throw dimension_error("subtraction_gain: dimension mismatch");
  const Scalar denominator = rtau.matrix.squaredNorm();  // tr(Rtau^H Rtau)
  if (denominator < Scalar(1e-30))
    throw degenerate_lag_error("subtraction_gain: lagged SCM carries no structure to subtract");
  const std::complex<Scalar> numerator = rtau.matrix.conjugate().cwiseProduct(r0.matrix).sum();
  return numerator / denominator;
}

/// Hermitian part of R0 - xi * Rtau.
template <typename Scalar>
MitigationResult<Scalar> subtract_rfi(const LaggedSCM<Scalar>& r0, const LaggedSCM<Scalar>& rtau,
                                      std::complex<Scalar> xi) {
  if (r0.matrix.rows() != rtau.matrix.rows() || r0.matrix.cols() != rtau.matrix.cols())
    throw dimension_error("subtract_rfi: dimension mismatch");
  MitigationResult<Scalar> result;
  result.method = MitigationMethod::subtraction;
  result.xi0 = xi;
  result.corrected = hermitian_part(r0.matrix - xi * rtau.matrix);
  return result;
}

/// Projects the span of `basis` out of the zero-lag SCM.
template <typename Scalar>
MitigationResult<Scalar> mitigate_by_projection(const LaggedSCM<Scalar>& r0,
                                                const ComplexMatrix<Scalar>& basis) {
  MitigationResult<Scalar> result;
  result.method = MitigationMethod::projection;
  result.rank_removed = basis.cols();
  if (basis.cols() == 0) {
    result.corrected = hermitian_part(r0.matrix);
    return result;
  }
  const ComplexMatrix<Scalar> projector = orthogonal_projector(basis);
  result.corrected = hermitian_part(project_covariance(r0.matrix, projector));
  return result;
}

/// Subtraction with the closed-form optimal gain.
template <typename Scalar>
MitigationResult<Scalar> mitigate_by_subtraction(const LaggedSCM<Scalar>& r0,
                                                 const LaggedSCM<Scalar>& rtau) {
  return subtract_rfi(r0, rtau, subtraction_gain(r0, rtau));
}

/// ||A - B||_F^2 / M^2.
template <typename DerivedA, typename DerivedB>
typename DerivedA::RealScalar covariance_mse(const Eigen::MatrixBase<DerivedA>& a,
                                             const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::RealScalar;
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw dimension_error("covariance_mse: dimension mismatch");
  const Scalar m = static_cast<Scalar>(a.rows());
  return (a.derived() - b.derived()).squaredNorm() / (m * m);
}

}  // namespace rfiforge
