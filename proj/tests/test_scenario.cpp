#include <doctest.h>

#include <cmath>
#include <complex>

#include "rfiforge/rng.hpp"
#include "rfiforge/scenario.hpp"
#include "rfiforge/subspace.hpp"

using namespace rfiforge;

namespace {

RfiModel<double> random_rfi(Eigen::Index m, RngStream& rng) {
  RfiModel<double> rfi;
  rfi.sigma_r = rng.uniform(0.1, 3.0);
  rfi.omega = rng.uniform(0.0, 2.0 * pi_v<double>);
  rfi.phi = rng.uniform(0.0, 2.0 * pi_v<double>);
  rfi.alphas.resize(m);
  rfi.phis.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    rfi.alphas(k) = rng.gaussian(0.1);
    rfi.phis(k) = rng.uniform(0.0, 2.0 * pi_v<double>);
  }
  return rfi;
}

}  // namespace

TEST_CASE("rfi_ssv: stationary zero-phase signature is constant 1/sqrt(M)") {
  RfiModel<double> rfi;
  rfi.sigma_r = 1.0;
  rfi.alphas = RealVector<double>::Zero(5);
  rfi.phis = RealVector<double>::Zero(5);
  for (Eigen::Index n : {0, 3, 1000}) {
    const ComplexVector<double> a = rfi_ssv(rfi, n, 5);
    for (Eigen::Index k = 0; k < 5; ++k) {
      CHECK(a(k).real() == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-15));
      CHECK(a(k).imag() == doctest::Approx(0.0).epsilon(1e-15));
    }
    CHECK(a.norm() == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("rfi_ssv: single-antenna drift evaluates the exponent alpha*n + phi") {
  RfiModel<double> rfi;
  rfi.alphas = RealVector<double>::Constant(1, 0.1);
  rfi.phis = RealVector<double>::Constant(1, 0.2);
  const ComplexVector<double> a = rfi_ssv(rfi, 3, 1);
  // exp(i*0.5), hand-evaluated
  CHECK(a(0).real() == doctest::Approx(0.8775825618903728).epsilon(1e-14));
  CHECK(a(0).imag() == doctest::Approx(0.479425538604203).epsilon(1e-14));
}

TEST_CASE("rfi_ssv: any model yields a unit-norm signature") {
  RngStream rng(101);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(rng.next_u64() % 30);
    const RfiModel<double> rfi = random_rfi(m, rng);
    const Eigen::Index n = static_cast<Eigen::Index>(rng.next_u64() % 100000);
    CHECK(std::abs(rfi_ssv(rfi, n, m).norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("rfi_ssv: mismatched model length is rejected") {
  RfiModel<double> rfi;
  rfi.alphas = RealVector<double>::Zero(3);
  rfi.phis = RealVector<double>::Zero(3);
  CHECK_THROWS_AS((void)rfi_ssv(rfi, 0, 4), dimension_error);
}

TEST_CASE("steering_vector: zenith gives the flat signature") {
  ArrayGeometry<double> geometry;
  geometry.positions.resize(3, 2);
  geometry.positions << 0, 0, 1.5, -0.25, -2.0, 3.0;
  const ComplexVector<double> v = steering_vector(geometry, 0.0, 0.0);
  for (Eigen::Index k = 0; k < 3; ++k)
    CHECK(std::abs(v(k) - std::complex<double>(1.0 / std::sqrt(3.0), 0.0)) < 1e-15);
}

TEST_CASE("steering_vector: half-wavelength pair at (l,m)=(1,0) is out of phase by pi") {
  ArrayGeometry<double> geometry;
  geometry.positions.resize(2, 2);
  geometry.positions << 0, 0, 0.5, 0;
  const ComplexVector<double> v = steering_vector(geometry, 1.0, 0.0);
  CHECK(std::arg(v(0)) == doctest::Approx(0.0).epsilon(1e-14));
  // 2*pi*0.5*1 = pi
  CHECK(std::abs(std::arg(v(1)) - pi_v<double>) < 1e-12);
  CHECK(std::abs(v.norm() - 1.0) < 1e-12);
}

TEST_CASE("steering_vector: stays unit norm and rejects out-of-disk directions") {
  RngStream rng(77);
  ArrayGeometry<double> geometry = random_geometry<double>(12, 15.0, rng.fork("geom"));
  for (int rep = 0; rep < 20; ++rep) {
    const double r = std::sqrt(rng.next_unit());
    const double theta = rng.uniform(0, 2 * pi_v<double>);
    CHECK(std::abs(steering_vector(geometry, r * std::cos(theta), r * std::sin(theta)).norm() - 1.0) <
          1e-12);
  }
  CHECK_THROWS_AS((void)steering_vector(geometry, 0.9, 0.9), domain_error);
}

TEST_CASE("random_geometry: hits the requested maximum baseline") {
  RngStream rng(3);
  for (Eigen::Index m : {2, 10, 100}) {
    const ArrayGeometry<double> geometry = random_geometry<double>(m, 15.0, rng.fork(m));
    CHECK(geometry.size() == m);
    CHECK(geometry.positions.allFinite());
    CHECK(std::abs(geometry.max_baseline() - 15.0) < 0.01 * 15.0);
  }
}

TEST_CASE("synthesize: near-noiseless stationary interferer leaves collinear columns") {
  ScenarioConfig<double> config;
  config.geometry.positions.resize(4, 2);
  config.geometry.positions << 0, 0, 1, 0, 0, 1, 1, 1;
  RfiModel<double> rfi;
  rfi.sigma_r = 1.0;
  rfi.omega = 0.37;
  rfi.phi = 0.11;
  rfi.alphas = RealVector<double>::Zero(4);
  rfi.phis = RealVector<double>::LinSpaced(4, 0.0, 1.2);
  config.rfi = rfi;
  config.sigma_n = 1e-9;
  config.num_samples = 32;
  config.seed = 5;
  const SnapshotMatrix<double> x = synthesize(config);
  const ComplexVector<double> a = rfi_ssv(rfi, 0, 4);
  for (Eigen::Index n = 0; n < x.cols(); ++n)
    CHECK(alignment_gamma(a, x.col(n)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("synthesize: noise-only per-element power converges to sigma_n^2") {
  ScenarioConfig<double> config;
  config.geometry.positions.resize(2, 2);
  config.geometry.positions << 0, 0, 1, 0;
  config.sigma_n = 1.0;
  config.num_samples = 100000;
  config.seed = 99;
  const SnapshotMatrix<double> x = synthesize(config);
  for (Eigen::Index k = 0; k < 2; ++k) {
    const double power = x.row(k).squaredNorm() / static_cast<double>(config.num_samples);
    CHECK(std::abs(power - 1.0) < 3e-2);  // 3/sqrt(N) Monte-Carlo bound at N=1e5
  }
}

TEST_CASE("synthesize: circularity - mean non-conjugated square stays near zero") {
  ScenarioConfig<double> config;
  config.geometry.positions.resize(2, 2);
  config.geometry.positions << 0, 0, 1, 0;
  config.sigma_n = 2.0;
  config.num_samples = 100000;
  config.seed = 123;
  const SnapshotMatrix<double> x = synthesize(config);
  const double s2 = config.sigma_n * config.sigma_n;
  for (Eigen::Index k = 0; k < 2; ++k) {
    std::complex<double> acc{0, 0};
    for (Eigen::Index n = 0; n < x.cols(); ++n) acc += x(k, n) * x(k, n);
    CHECK(std::abs(acc) / static_cast<double>(x.cols()) <=
          4.0 * s2 / std::sqrt(static_cast<double>(x.cols())));
  }
}

TEST_CASE("synthesize: identical seeds give bit-identical output") {
  ScenarioConfig<double> config;
  config.geometry.positions.resize(3, 2);
  config.geometry.positions << 0, 0, 1, 0, 0, 2;
  RfiModel<double> rfi;
  rfi.sigma_r = 2.0;
  rfi.omega = 0.3;
  rfi.alphas = RealVector<double>::LinSpaced(3, -0.05, 0.08);
  rfi.phis = RealVector<double>::LinSpaced(3, 0.0, 2.0);
  config.rfi = rfi;
  config.sources.push_back({0.5, 0.1, -0.2});
  config.sigma_n = 1.0;
  config.num_samples = 257;
  config.seed = 4242;
  const SnapshotMatrix<double> a = synthesize(config);
  const SnapshotMatrix<double> b = synthesize(config);
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.cols() == b.cols());
  CHECK(std::memcmp(a.data(), b.data(), sizeof(std::complex<double>) * a.size()) == 0);
}

TEST_CASE("synthesize: zeroing one component leaves the other draws untouched") {
  // Common-random-numbers contract used by the mitigation comparison.
  ScenarioConfig<double> config;
  config.geometry.positions.resize(3, 2);
  config.geometry.positions << 0, 0, 1.2, 0, 0, 1.7;
  RfiModel<double> rfi;
  rfi.sigma_r = 3.0;
  rfi.omega = 0.41;
  rfi.alphas = RealVector<double>::LinSpaced(3, -0.1, 0.1);
  rfi.phis = RealVector<double>::Zero(3);
  config.rfi = rfi;
  config.sources.push_back({0.7, -0.3, -0.1});
  config.sigma_n = 1.0;
  config.num_samples = 64;
  config.seed = 31337;
  const SnapshotMatrix<double> with_rfi = synthesize(config);
  ScenarioConfig<double> muted = config;
  muted.rfi->sigma_r = 0.0;
  const SnapshotMatrix<double> without_rfi = synthesize(muted);
  const SnapshotMatrix<double> rfi_only = rfi_snapshots(rfi, 3, 64);
  CHECK((with_rfi - without_rfi - rfi_only).norm() < 1e-12);
}

TEST_CASE("synthesize: invalid configs are rejected") {
  ScenarioConfig<double> config;
  config.geometry.positions.resize(2, 2);
  config.geometry.positions << 0, 0, 1, 0;
  config.sigma_n = 0.0;  // must be > 0
  config.num_samples = 8;
  CHECK_THROWS_AS((void)synthesize(config), domain_error);
  config.sigma_n = 1.0;
  config.num_samples = 0;
  CHECK_THROWS_AS((void)synthesize(config), domain_error);
  config.num_samples = 8;
  config.gain_delta = 1.0;
  CHECK_THROWS_AS((void)synthesize(config), domain_error);
}

TEST_CASE("draw_gain_vector: delta=0 degenerates to exact ones") {
  RngStream rng(1);
  const RealVector<double> u = draw_gain_vector(0.0, 6, rng);
  for (Eigen::Index k = 0; k < 6; ++k) CHECK(u(k) == 1.0);
}

TEST_CASE("draw_gain_vector: entries live in [1-delta, 1+delta] and average to 1") {
  RngStream rng(2);
  const double delta = 0.1;
  const Eigen::Index n = 20000;
  const RealVector<double> u = draw_gain_vector(delta, n, rng);
  CHECK(u.minCoeff() >= 1.0 - delta);
  CHECK(u.maxCoeff() <= 1.0 + delta);
  CHECK(std::abs(u.mean() - 1.0) < 4.0 * delta / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("apply_gain_errors: identity and row scaling") {
  RngStream rng(8);
  SnapshotMatrix<double> x(3, 5);
  for (Eigen::Index n = 0; n < 5; ++n)
    for (Eigen::Index k = 0; k < 3; ++k) x(k, n) = rng.circular_gaussian(1.0);

  const RealVector<double> ones = RealVector<double>::Ones(3);
  CHECK((apply_gain_errors(x, ones) - x).norm() == 0.0);

  RealVector<double> u(3);
  u << 2.0, 1.0, 1.0;
  const SnapshotMatrix<double> scaled = apply_gain_errors(x, u);
  CHECK((scaled.row(0) - 2.0 * x.row(0)).norm() == 0.0);
  CHECK((scaled.row(1) - x.row(1)).norm() == 0.0);
  // power of row k scales by u_k^2
  CHECK(scaled.row(0).squaredNorm() == doctest::Approx(4.0 * x.row(0).squaredNorm()));

  RealVector<double> bad(2);
  bad << 1.0, 1.0;
  CHECK_THROWS_AS((void)apply_gain_errors(x, bad), dimension_error);
}
