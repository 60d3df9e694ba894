#pragma once

#include <cstdint>
#include <vector>

#include "rfiforge/parallel.hpp"
#include "rfiforge/rng.hpp"
#include "rfiforge/scenario.hpp"
#include "rfiforge/types.hpp"

namespace rfiforge {

/// Sample covariance estimate tagged with its lag and the number of
/// averaged outer products.
template <typename Scalar>
struct LaggedSCM {
  ComplexMatrix<Scalar> matrix;
  Eigen::Index lag = 0;
  Eigen::Index n_used = 0;
};

/// R_hat(tau) = (1/(N-tau)) * sum_{n=tau}^{N-1} x(n) x(n-tau)^H.
///
/// The sum is edge-truncated: products needing samples before n=0 are
/// dropped and the normalizer shrinks to N-tau, which keeps the estimator
/// unbiased without circular wrap-around.
template <typename Scalar>
LaggedSCM<Scalar> sample_covariance(const SnapshotMatrix<Scalar>& snapshots, Eigen::Index tau) {
  const Eigen::Index n_samples = snapshots.cols();
  if (tau < 0) throw domain_error("sample_covariance: lag must be >= 0");
  if (tau >= n_samples)
    throw insufficient_samples_error("sample_covariance: lag must be smaller than the sample count");
  const Eigen::Index n_used = n_samples - tau;
  LaggedSCM<Scalar> scm;
  scm.lag = tau;
  scm.n_used = n_used;
  scm.matrix.noalias() = snapshots.rightCols(n_used) * snapshots.leftCols(n_used).adjoint() /
                         static_cast<Scalar>(n_used);
  return scm;
}

/// Model covariance sigma_r^2 e^{i omega tau} a a^H + delta(tau) sigma_n^2 I
/// for a spatially stationary interferer. A common nonzero drift rate is the
/// same signature up to a waveform frequency shift, so it folds into omega.
template <typename Scalar>
ComplexMatrix<Scalar> model_covariance(const RfiModel<Scalar>& rfi, Scalar sigma_n, Eigen::Index tau) {
  if (!rfi.spatially_stationary())
    throw domain_error("model_covariance: defined only for a spatially stationary interferer");
  const Eigen::Index m = rfi.size();
  const ComplexVector<Scalar> a = rfi_ssv(rfi, 0, m);
  const Scalar omega_eff = rfi.omega + (m > 0 ? rfi.alphas(0) : Scalar(0));
  const std::complex<Scalar> phase = std::polar(rfi.sigma_r * rfi.sigma_r,
                                                omega_eff * static_cast<Scalar>(tau));
  ComplexMatrix<Scalar> r = phase * (a * a.adjoint());
  if (tau == 0) r += (sigma_n * sigma_n) * ComplexMatrix<Scalar>::Identity(m, m);
  return r;
}

/// Closed-form interferer SCM under the linear phase-drift model and the
/// short-lag approximation a_r(n-tau) ~ a_r(n). Entry (k,l) is
///
///   sigma_r^2 * e^{i omega tau} e^{i(phi_k - phi_l)} / (M N)
///            * (1 - e^{i(alpha_k - alpha_l) N}) / (1 - e^{i(alpha_k - alpha_l)})
///
/// with the coincident-rate limit (geometric sum of N ones) taken explicitly.
template <typename Scalar>
ComplexMatrix<Scalar> rfi_scm_closed_form(const RfiModel<Scalar>& rfi, Eigen::Index tau,
                                          Eigen::Index num_samples) {
  if (num_samples < 1) throw domain_error("rfi_scm_closed_form: need at least one sample");
  const Eigen::Index m = rfi.size();
  ComplexMatrix<Scalar> r(m, m);
  const Scalar power = rfi.sigma_r * rfi.sigma_r;
  const Scalar n = static_cast<Scalar>(num_samples);
  const std::complex<Scalar> carrier = std::polar(Scalar(1), rfi.omega * static_cast<Scalar>(tau));
  for (Eigen::Index k = 0; k < m; ++k) {
    for (Eigen::Index l = 0; l < m; ++l) {
      const Scalar drift = rfi.alphas(k) - rfi.alphas(l);
      std::complex<Scalar> geometric;
      if (std::abs(drift) < Scalar(1e-12)) {
        geometric = n;  // removable singularity: N identical unit terms
      } else {
        geometric = (Scalar(1) - std::polar(Scalar(1), drift * n)) /
                    (Scalar(1) - std::polar(Scalar(1), drift));
      }
      r(k, l) = power * carrier * std::polar(Scalar(1), rfi.phis(k) - rfi.phis(l)) * geometric /
                (static_cast<Scalar>(m) * n);
    }
  }
  return r;
}

/// Monte-Carlo mean and entrywise variance of the SCM across independent
/// realizations of one scenario.
template <typename Scalar>
struct ScmStatistics {
  ComplexMatrix<Scalar> mean;
  RealMatrix<Scalar> variance;  // per-entry E|R_t - mean|^2, sample-normalized
  int trials = 0;
};

/// Runs `trials` independent seeds (derived from config.seed) of the given
/// scenario, estimating the SCM at lag tau for each and aggregating with
/// pairwise sums in trial order, so the result does not depend on the
/// number of worker threads.
template <typename Scalar>
ScmStatistics<Scalar> empirical_scm_statistics(const ScenarioConfig<Scalar>& config, Eigen::Index tau,
                                               int trials, int threads = 1) {
  if (trials < 2) throw domain_error("empirical_scm_statistics: need at least 2 trials");
  validate(config);
  const Eigen::Index m = config.num_antennas();
  std::vector<ComplexMatrix<Scalar>> scms(static_cast<std::size_t>(trials));
  parallel_for_index(trials, threads, [&](int t) {
    ScenarioConfig<Scalar> trial_config = config;
    trial_config.seed = derive_seed(config.seed, "scm-trial", static_cast<std::uint64_t>(t));
    SnapshotMatrix<Scalar> x = synthesize(trial_config);
    if (trial_config.gain_delta > 0)
      x = apply_gain_errors(x, draw_configured_gains(trial_config));
    scms[static_cast<std::size_t>(t)] = sample_covariance(x, tau).matrix;
  });

  ScmStatistics<Scalar> stats;
  stats.trials = trials;
  stats.mean = pairwise_accumulate<ComplexMatrix<Scalar>>(
                   scms.size(), [&](std::size_t t) { return scms[t]; }) /
               static_cast<Scalar>(trials);
  const ComplexMatrix<Scalar>& mean = stats.mean;
  stats.variance = pairwise_accumulate<RealMatrix<Scalar>>(
                       scms.size(),
                       [&](std::size_t t) -> RealMatrix<Scalar> {
                         return (scms[t] - mean).cwiseAbs2();
                       }) /
                   static_cast<Scalar>(trials - 1);
  return stats;
}

}  // namespace rfiforge
