#pragma once

#include <limits>
#include <string>

#include "rfiforge/errors.hpp"
#include "rfiforge/scenario.hpp"
#include "rfiforge/types.hpp"

namespace rfiforge {

/// Rectangular direction-cosine grid. Points with l^2 + m^2 > 1 are masked.
template <typename Scalar>
struct SkyGrid {
  RealVector<Scalar> l_axis;
  RealVector<Scalar> m_axis;

  /// Square grid of `size` points per axis spanning [-extent, extent].
  static SkyGrid regular(Eigen::Index size, Scalar extent) {
    if (size < 2) throw domain_error("SkyGrid: need at least 2 points per axis");
    if (!(extent > 0) || extent > 1) throw domain_error("SkyGrid: extent must lie in (0, 1]");
    SkyGrid grid;
    grid.l_axis = RealVector<Scalar>::LinSpaced(size, -extent, extent);
    grid.m_axis = grid.l_axis;
    return grid;
  }

  bool masked(Eigen::Index i, Eigen::Index j) const {
    const Scalar l = l_axis(i);
    const Scalar m = m_axis(j);
    return l * l + m * m > Scalar(1);
  }

  bool same_as(const SkyGrid& other) const {
    return l_axis.size() == other.l_axis.size() && m_axis.size() == other.m_axis.size() &&
           (l_axis.array() == other.l_axis.array()).all() &&
           (m_axis.array() == other.m_axis.array()).all();
  }
};

/// Real-valued map over a SkyGrid; values(i, j) belongs to direction
/// (l_axis(i), m_axis(j)). Masked points hold NaN.
template <typename Scalar>
struct SkyMap {
  RealMatrix<Scalar> values;
  SkyGrid<Scalar> grid;
  std::string source_description;
};

template <typename Scalar>
void validate(const SkyGrid<Scalar>& grid) {
  auto check_axis = [](const RealVector<Scalar>& axis) {
    if (axis.size() < 2) throw domain_error("SkyGrid: axis needs at least 2 points");
    for (Eigen::Index i = 0; i + 1 < axis.size(); ++i)
      if (!(axis(i) < axis(i + 1))) throw domain_error("SkyGrid: axes must be strictly increasing");
    if (axis.cwiseAbs().maxCoeff() > Scalar(1)) throw domain_error("SkyGrid: extent exceeds [-1, 1]");
  };
  check_axis(grid.l_axis);
  check_axis(grid.m_axis);
}

/// Classical beamformed power map: value(l, m) = Re(v^H R v) / M with v the
/// phase-only steering vector (unit-magnitude entries). A map of the
/// identity covariance is the constant 1.
template <typename Derived, typename Scalar = typename Derived::RealScalar>
SkyMap<Scalar> dirty_map(const Eigen::MatrixBase<Derived>& r_expr,
                         const ArrayGeometry<Scalar>& geometry, const SkyGrid<Scalar>& grid,
                         Scalar hermitian_tol = Scalar(1e-8)) {
  validate(grid);
  const ComplexMatrix<Scalar> r = r_expr;
  const Eigen::Index m = geometry.size();
  if (r.rows() != m || r.cols() != m)
    throw dimension_error("dirty_map: covariance does not match geometry");
  const Scalar scale = r.norm();
  if ((r - r.adjoint()).norm() > hermitian_tol * std::max(scale, Scalar(1)))
    throw domain_error("dirty_map: covariance is not Hermitian within tolerance");

  SkyMap<Scalar> map;
  map.grid = grid;
  const Eigen::Index nl = grid.l_axis.size();
  const Eigen::Index nm = grid.m_axis.size();
  map.values.resize(nl, nm);

  // One steering matrix per m-row keeps the working set small while still
  // hitting matrix-matrix kernels.
  ComplexMatrix<Scalar> steer(m, nl);
  ComplexMatrix<Scalar> projected(m, nl);
  const Scalar two_pi = Scalar(2) * pi_v<Scalar>;
  for (Eigen::Index j = 0; j < nm; ++j) {
    for (Eigen::Index i = 0; i < nl; ++i) {
      for (Eigen::Index k = 0; k < m; ++k)
        steer(k, i) = std::polar(Scalar(1), two_pi * (geometry.positions(k, 0) * grid.l_axis(i) +
                                                      geometry.positions(k, 1) * grid.m_axis(j)));
    }
    projected.noalias() = r * steer;
    for (Eigen::Index i = 0; i < nl; ++i) {
      if (grid.masked(i, j)) {
        map.values(i, j) = std::numeric_limits<Scalar>::quiet_NaN();
      } else {
        map.values(i, j) = steer.col(i).dot(projected.col(i)).real() / static_cast<Scalar>(m);
      }
    }
  }
  return map;
}

/// Pointwise squared difference of two maps on the same grid.
template <typename Scalar>
SkyMap<Scalar> residual_map(const SkyMap<Scalar>& map_a, const SkyMap<Scalar>& map_b) {
  if (!map_a.grid.same_as(map_b.grid)) throw dimension_error("residual_map: grid mismatch");
  SkyMap<Scalar> out;
  out.grid = map_a.grid;
  out.values = (map_a.values - map_b.values).cwiseAbs2();
  out.source_description = "squared residual";
  return out;
}

/// Mean over unmasked points.
template <typename Scalar>
Scalar map_mean(const SkyMap<Scalar>& map) {
  Scalar sum = 0;
  Eigen::Index count = 0;
  for (Eigen::Index j = 0; j < map.values.cols(); ++j)
    for (Eigen::Index i = 0; i < map.values.rows(); ++i)
      if (!map.grid.masked(i, j)) {
        sum += map.values(i, j);
        ++count;
      }
  if (count == 0) throw domain_error("map_mean: fully masked map");
  return sum / static_cast<Scalar>(count);
}

/// Direction of the unmasked maximum.
template <typename Scalar>
std::pair<Scalar, Scalar> map_peak(const SkyMap<Scalar>& map) {
  Scalar best = -std::numeric_limits<Scalar>::infinity();
  Eigen::Index bi = -1, bj = -1;
  for (Eigen::Index j = 0; j < map.values.cols(); ++j)
    for (Eigen::Index i = 0; i < map.values.rows(); ++i)
      if (!map.grid.masked(i, j) && map.values(i, j) > best) {
        best = map.values(i, j);
        bi = i;
        bj = j;
      }
  if (bi < 0) throw domain_error("map_peak: fully masked map");
  return {map.grid.l_axis(bi), map.grid.m_axis(bj)};
}

}  // namespace rfiforge
