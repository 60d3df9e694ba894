#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <vector>

#include "rfiforge/errors.hpp"
#include "rfiforge/rng.hpp"
#include "rfiforge/types.hpp"

namespace rfiforge {

/// Antenna positions in the aperture plane, in units of wavelength.
template <typename Scalar>
struct ArrayGeometry {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 2> positions;

  Eigen::Index size() const { return positions.rows(); }

  Scalar max_baseline() const {
    Scalar best = 0;
    for (Eigen::Index i = 0; i < positions.rows(); ++i)
      for (Eigen::Index j = i + 1; j < positions.rows(); ++j)
        best = std::max(best, (positions.row(i) - positions.row(j)).norm());
    return best;
  }
};

/// Interferer: continuous waveform sigma_r * exp(i(omega*n + phi)) with a
/// per-antenna signature whose phases drift linearly at rates alphas.
/// All rates are radians per sample.
template <typename Scalar>
struct RfiModel {
  Scalar sigma_r = 0;
  Scalar omega = 0;
  Scalar phi = 0;
  RealVector<Scalar> alphas;
  RealVector<Scalar> phis;

  Eigen::Index size() const { return alphas.size(); }

  /// True when every antenna sees the same drift rate, i.e. the signature
  /// direction is constant over time.
  bool spatially_stationary(Scalar tol = Scalar(1e-12)) const {
    if (alphas.size() == 0) return true;
    return alphas.maxCoeff() - alphas.minCoeff() <= tol;
  }
};

/// Point source at direction cosines (l, m) with white waveform amplitude sigma_c.
template <typename Scalar>
struct CosmicSource {
  Scalar sigma_c = 0;
  Scalar l = 0;
  Scalar m = 0;
};

/// Complete generative description of one simulated observation.
template <typename Scalar>
struct ScenarioConfig {
  ArrayGeometry<Scalar> geometry;
  std::optional<RfiModel<Scalar>> rfi;
  std::vector<CosmicSource<Scalar>> sources;
  Scalar sigma_n = 1;
  Eigen::Index num_samples = 0;
  Scalar gain_delta = 0;
  std::uint64_t seed = 0;

  Eigen::Index num_antennas() const { return geometry.size(); }

  /// Interference-to-noise power ratio sigma_r^2 / sigma_n^2.
  Scalar inr() const {
    if (!rfi) return 0;
    return rfi->sigma_r * rfi->sigma_r / (sigma_n * sigma_n);
  }

  Scalar snr(std::size_t k) const {
    return sources[k].sigma_c * sources[k].sigma_c / (sigma_n * sigma_n);
  }
};

template <typename Scalar>
void validate(const ArrayGeometry<Scalar>& geometry) {
  if (geometry.size() < 2) throw domain_error("array geometry needs at least 2 antennas");
  if (!geometry.positions.allFinite()) throw numeric_error("array geometry has non-finite positions");
}

template <typename Scalar>
void validate(const ScenarioConfig<Scalar>& config) {
  validate(config.geometry);
  const Eigen::Index m = config.num_antennas();
  if (config.rfi) {
    if (config.rfi->sigma_r < 0) throw domain_error("rfi.sigma_r must be >= 0");
    if (config.rfi->alphas.size() != m || config.rfi->phis.size() != m)
      throw dimension_error("rfi alphas/phis must have one entry per antenna");
  }
  for (const auto& src : config.sources) {
    if (src.sigma_c < 0) throw domain_error("source sigma_c must be >= 0");
    if (src.l * src.l + src.m * src.m > Scalar(1) + Scalar(1e-12))
      throw domain_error("source direction lies outside the unit disk");
  }
  if (config.sigma_n <= 0) throw domain_error("sigma_n must be > 0");
  if (config.num_samples < 1) throw domain_error("num_samples must be >= 1");
  if (config.gain_delta < 0 || config.gain_delta >= 1)
    throw domain_error("gain_delta must lie in [0, 1)");
}

/// Antennas drawn uniformly in a disk, then rescaled so the maximum pairwise
/// distance equals max_baseline exactly.
template <typename Scalar>
ArrayGeometry<Scalar> random_geometry(Eigen::Index num_antennas, Scalar max_baseline, RngStream rng) {
  if (num_antennas < 2) throw domain_error("random_geometry needs at least 2 antennas");
  if (!(max_baseline > 0)) throw domain_error("max_baseline must be > 0");
  ArrayGeometry<Scalar> geometry;
  geometry.positions.resize(num_antennas, 2);
  const Scalar radius = max_baseline / Scalar(2);
  for (Eigen::Index k = 0; k < num_antennas; ++k) {
    const Scalar r = radius * std::sqrt(static_cast<Scalar>(rng.next_unit()));
    const Scalar theta = static_cast<Scalar>(rng.uniform(0, 2.0 * pi_v<double>));
    geometry.positions(k, 0) = r * std::cos(theta);
    geometry.positions(k, 1) = r * std::sin(theta);
  }
  const Scalar spread = geometry.max_baseline();
  if (spread > 0) geometry.positions *= max_baseline / spread;
  return geometry;
}

/// Interferer spatial signature at sample n: entry k is
/// (1/sqrt(M)) * exp(i(alphas[k]*n + phis[k])). Unit Euclidean norm.
template <typename Scalar>
ComplexVector<Scalar> rfi_ssv(const RfiModel<Scalar>& rfi, Eigen::Index n, Eigen::Index num_antennas) {
  if (rfi.alphas.size() != num_antennas || rfi.phis.size() != num_antennas)
    throw dimension_error("rfi_ssv: alphas/phis length does not match antenna count");
  ComplexVector<Scalar> a(num_antennas);
  const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(num_antennas));
  for (Eigen::Index k = 0; k < num_antennas; ++k)
    a(k) = std::polar(scale, rfi.alphas(k) * static_cast<Scalar>(n) + rfi.phis(k));
  return a;
}

/// Far-field narrowband steering vector for direction cosines (l, m):
/// entry k is (1/sqrt(M)) * exp(i*2*pi*(p_kx*l + p_ky*m)). Unit norm.
template <typename Scalar>
ComplexVector<Scalar> steering_vector(const ArrayGeometry<Scalar>& geometry, Scalar l, Scalar m) {
  if (l * l + m * m > Scalar(1) + Scalar(1e-12))
    throw domain_error("steering_vector: direction lies outside the unit disk");
  const Eigen::Index num_antennas = geometry.size();
  ComplexVector<Scalar> v(num_antennas);
  const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(num_antennas));
  const Scalar two_pi = Scalar(2) * pi_v<Scalar>;
  for (Eigen::Index k = 0; k < num_antennas; ++k)
    v(k) = std::polar(scale, two_pi * (geometry.positions(k, 0) * l + geometry.positions(k, 1) * m));
  return v;
}

/// Noise-free interferer snapshots: column n is r(n) * a_r(n) with the exact
/// drifting signature (no short-lag approximation).
template <typename Scalar>
SnapshotMatrix<Scalar> rfi_snapshots(const RfiModel<Scalar>& rfi, Eigen::Index num_antennas,
                                     Eigen::Index num_samples) {
  if (rfi.alphas.size() != num_antennas || rfi.phis.size() != num_antennas)
    throw dimension_error("rfi_snapshots: alphas/phis length does not match antenna count");
  SnapshotMatrix<Scalar> x(num_antennas, num_samples);
  if (rfi.spatially_stationary()) {
    // Common drift folds into the waveform: a_r(n) = exp(i*alpha0*n) * a_r(0).
    const Scalar omega_eff = rfi.omega + (num_antennas > 0 ? rfi.alphas(0) : Scalar(0));
    const ComplexVector<Scalar> a0 = rfi_ssv(rfi, 0, num_antennas);
    ComplexVector<Scalar> w(num_samples);
    for (Eigen::Index n = 0; n < num_samples; ++n)
      w(n) = std::polar(rfi.sigma_r, omega_eff * static_cast<Scalar>(n) + rfi.phi);
    x.noalias() = a0 * w.transpose();
  } else {
    const Scalar scale = rfi.sigma_r / std::sqrt(static_cast<Scalar>(num_antennas));
    for (Eigen::Index n = 0; n < num_samples; ++n) {
      const Scalar carrier = rfi.omega * static_cast<Scalar>(n) + rfi.phi;
      for (Eigen::Index k = 0; k < num_antennas; ++k)
        x(k, n) = std::polar(scale, carrier + rfi.alphas(k) * static_cast<Scalar>(n) + rfi.phis(k));
    }
  }
  return x;
}

/// Generates the full observation: interferer plus cosmic sources plus
/// circular white noise. Pure function of the config; the seed feeds
/// dedicated substreams per component, so zeroing one component's amplitude
/// leaves every other draw untouched (common random numbers).
template <typename Scalar>
SnapshotMatrix<Scalar> synthesize(const ScenarioConfig<Scalar>& config) {
  validate(config);
  const Eigen::Index m = config.num_antennas();
  const Eigen::Index n_samples = config.num_samples;
  RngStream root(config.seed);

  SnapshotMatrix<Scalar> x(m, n_samples);
  RngStream noise = root.fork("noise");
  for (Eigen::Index n = 0; n < n_samples; ++n)
    for (Eigen::Index k = 0; k < m; ++k)
      x(k, n) = std::complex<Scalar>(noise.circular_gaussian(static_cast<double>(config.sigma_n)));

  for (std::size_t s = 0; s < config.sources.size(); ++s) {
    const auto& src = config.sources[s];
    RngStream stream = root.fork("source").fork(static_cast<std::uint64_t>(s));
    const ComplexVector<Scalar> a = steering_vector(config.geometry, src.l, src.m);
    ComplexVector<Scalar> c(n_samples);
    for (Eigen::Index n = 0; n < n_samples; ++n)
      c(n) = std::complex<Scalar>(stream.circular_gaussian(static_cast<double>(src.sigma_c)));
    x.noalias() += a * c.transpose();
  }

  if (config.rfi && config.rfi->sigma_r > 0)
    x += rfi_snapshots(*config.rfi, m, n_samples);

  return x;
}

/// Per-antenna gain factors u_k ~ U(1-delta, 1+delta), i.i.d.
template <typename Scalar>
RealVector<Scalar> draw_gain_vector(Scalar delta, Eigen::Index num_antennas, RngStream& rng) {
  if (delta < 0 || delta >= 1) throw domain_error("gain delta must lie in [0, 1)");
  RealVector<Scalar> u(num_antennas);
  for (Eigen::Index k = 0; k < num_antennas; ++k)
    u(k) = delta == 0 ? Scalar(1)
                      : static_cast<Scalar>(rng.uniform(1.0 - static_cast<double>(delta),
                                                        1.0 + static_cast<double>(delta)));
  return u;
}

/// Gain vector drawn from the config's dedicated substream, so it is
/// reproducible and independent of the noise/source/interferer draws.
template <typename Scalar>
RealVector<Scalar> draw_configured_gains(const ScenarioConfig<Scalar>& config) {
  RngStream stream = RngStream(config.seed).fork("gains");
  return draw_gain_vector(config.gain_delta, config.num_antennas(), stream);
}

/// x_u(n) = diag(u) * x(n): row k scaled by u_k.
template <typename Scalar>
SnapshotMatrix<Scalar> apply_gain_errors(const SnapshotMatrix<Scalar>& snapshots,
                                         const RealVector<Scalar>& u) {
  if (u.size() != snapshots.rows())
    throw dimension_error("apply_gain_errors: gain vector length does not match antenna count");
  return u.template cast<std::complex<Scalar>>().asDiagonal() * snapshots;
}

}  // namespace rfiforge
