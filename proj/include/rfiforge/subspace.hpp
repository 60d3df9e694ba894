#pragma once

#include <algorithm>
#include <vector>

#include "rfiforge/covariance.hpp"
#include "rfiforge/errors.hpp"
#include "rfiforge/types.hpp"

namespace rfiforge {

/// Estimated interference subspace: orthonormal basis columns with their
/// eigen- or singular values (descending) and the lag of the source SCM.
template <typename Scalar>
struct SubspaceEstimate {
  ComplexMatrix<Scalar> basis;       // M x d, orthonormal columns
  RealVector<Scalar> values;         // d nonnegative reals, descending
  Eigen::Index source_lag = 0;
};

/// Rotates v so its first significant component is real positive. Makes
/// eigen/singular vectors reproducible across runs.
template <typename Scalar>
void fix_vector_phase(Eigen::Ref<ComplexVector<Scalar>> v) {
  const Scalar floor = v.cwiseAbs().maxCoeff() * Scalar(1e-12);
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const Scalar mag = std::abs(v(k));
    if (mag > floor) {
      v *= std::conj(v(k)) / mag;
      return;
    }
  }
}

/// Full spectrum of the SCM, descending: eigenvalues of the Hermitian part
/// at lag 0, singular values otherwise. Values are clamped at zero.
template <typename Scalar>
RealVector<Scalar> covariance_spectrum(const LaggedSCM<Scalar>& scm) {
  if (!scm.matrix.allFinite()) throw numeric_error("covariance_spectrum: non-finite matrix entries");
  RealVector<Scalar> values;
  if (scm.lag == 0) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix<Scalar>> eig(hermitian_part(scm.matrix),
                                                             Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw numeric_error("covariance_spectrum: eigensolver failed");
    values = eig.eigenvalues().reverse();
  } else {
    Eigen::JacobiSVD<ComplexMatrix<Scalar>> svd(scm.matrix);
    values = svd.singularValues();
  }
  return values.cwiseMax(Scalar(0));
}

/// Dominant-d subspace of the SCM: top eigenvectors of the Hermitian part at
/// lag 0, top left singular vectors otherwise (a nonzero-lag SCM is not
/// Hermitian, but for the rank-one model both notions coincide).
template <typename Scalar>
SubspaceEstimate<Scalar> estimate_rfi_subspace(const LaggedSCM<Scalar>& scm, Eigen::Index dim) {
  const Eigen::Index m = scm.matrix.rows();
  if (dim < 1 || dim > m) throw domain_error("estimate_rfi_subspace: dimension out of range");
  if (!scm.matrix.allFinite())
    throw numeric_error("estimate_rfi_subspace: non-finite matrix entries");

  SubspaceEstimate<Scalar> estimate;
  estimate.source_lag = scm.lag;
  if (scm.lag == 0) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix<Scalar>> eig(hermitian_part(scm.matrix));
    if (eig.info() != Eigen::Success)
      throw numeric_error("estimate_rfi_subspace: eigensolver failed");
    estimate.basis = eig.eigenvectors().rightCols(dim).rowwise().reverse();
    estimate.values = eig.eigenvalues().tail(dim).reverse().cwiseMax(Scalar(0));
  } else {
    Eigen::JacobiSVD<ComplexMatrix<Scalar>> svd(scm.matrix, Eigen::ComputeThinU);
    estimate.basis = svd.matrixU().leftCols(dim);
    estimate.values = svd.singularValues().head(dim);
  }
  for (Eigen::Index j = 0; j < estimate.basis.cols(); ++j)
    fix_vector_phase<Scalar>(estimate.basis.col(j));
  return estimate;
}

/// Dominant signature-vector estimate (one-dimensional subspace).
template <typename Scalar>
SubspaceEstimate<Scalar> estimate_rfi_ssv(const LaggedSCM<Scalar>& scm) {
  return estimate_rfi_subspace(scm, 1);
}

/// Alignment gamma = |a^H b| / (||a|| ||b||), in [0, 1]. Invariant under
/// global phase and positive scaling of either argument.
template <typename DerivedA, typename DerivedB>
typename DerivedA::RealScalar alignment_gamma(const Eigen::MatrixBase<DerivedA>& a_true,
                                              const Eigen::MatrixBase<DerivedB>& a_est) {
  using Real = typename DerivedA::RealScalar;
  if (a_true.size() != a_est.size()) throw dimension_error("alignment_gamma: length mismatch");
  const Real na = a_true.norm();
  const Real nb = a_est.norm();
  if (na == Real(0) || nb == Real(0)) throw domain_error("alignment_gamma: zero vector");
  const Real gamma = std::abs(a_true.dot(a_est)) / (na * nb);
  return std::min(gamma, Real(1));
}

/// Robust noise-floor estimate from a descending SCM spectrum: the median
/// eigenvalue read as noise power, returned as an amplitude.
template <typename Scalar>
Scalar estimate_noise_sigma(const RealVector<Scalar>& values_descending) {
  if (values_descending.size() == 0) throw domain_error("estimate_noise_sigma: empty spectrum");
  const Eigen::Index n = values_descending.size();
  const Scalar median = (n % 2 == 1)
                            ? values_descending(n / 2)
                            : (values_descending(n / 2 - 1) + values_descending(n / 2)) / Scalar(2);
  return std::sqrt(std::max(median, Scalar(0)));
}

/// Number of spectrum values exceeding kappa * sigma_n_est^2, capped at M-1.
/// Zero signals "no detectable interference".
template <typename Scalar>
Eigen::Index rfi_subspace_rank(const RealVector<Scalar>& values_descending, Scalar sigma_n_est,
                               Scalar kappa = Scalar(3)) {
  if (!(kappa > 1)) throw domain_error("rfi_subspace_rank: kappa must be > 1");
  const Scalar threshold = kappa * sigma_n_est * sigma_n_est;
  Eigen::Index count = 0;
  while (count < values_descending.size() && values_descending(count) > threshold) ++count;
  return std::min(count, values_descending.size() - 1);
}

/// Orthogonal projector onto the complement of span(V):
/// P = I - V (V^H V)^{-1} V^H. Hermitian, idempotent, P V = 0,
/// trace(P) = M - d.
template <typename Derived>
ComplexMatrix<typename Derived::RealScalar> orthogonal_projector(const Eigen::MatrixBase<Derived>& basis) {
  using Scalar = typename Derived::RealScalar;
  const Eigen::Index m = basis.rows();
  const Eigen::Index d = basis.cols();
  if (d < 1 || d > m) throw domain_error("orthogonal_projector: basis shape out of range");
  if (!basis.allFinite()) throw numeric_error("orthogonal_projector: non-finite basis entries");

  const ComplexMatrix<Scalar> gram = basis.adjoint() * basis;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix<Scalar>> eig(gram);
  if (eig.info() != Eigen::Success) throw numeric_error("orthogonal_projector: Gram eigensolver failed");
  const Scalar lambda_min = eig.eigenvalues()(0);
  const Scalar lambda_max = eig.eigenvalues()(d - 1);
  if (!(lambda_min > 0) || lambda_max / lambda_min >= Scalar(1e8))
    throw ill_conditioned_basis_error("orthogonal_projector: basis is numerically rank deficient");

  const ComplexMatrix<Scalar> gram_inv =
      eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
      eig.eigenvectors().adjoint();
  ComplexMatrix<Scalar> p = -basis.derived() * gram_inv * basis.derived().adjoint();
  p += ComplexMatrix<Scalar>::Identity(m, m);
  return p;
}

}  // namespace rfiforge
