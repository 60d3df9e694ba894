#pragma once

#include <stdexcept>
#include <string>

namespace rfiforge {

/// Base class for all rfiforge errors.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands have incompatible shapes.
class dimension_error : public error {
 public:
  using error::error;
};

/// An argument lies outside the domain an operation is defined on.
class domain_error : public error {
 public:
  using error::error;
};

/// Requested lag is not covered by the available samples.
class insufficient_samples_error : public error {
 public:
  using error::error;
};

/// Projector basis is numerically rank deficient.
class ill_conditioned_basis_error : public error {
 public:
  using error::error;
};

/// Lagged covariance carries no structure to subtract.
class degenerate_lag_error : public error {
 public:
  using error::error;
};

/// Non-finite values or a failed decomposition.
class numeric_error : public error {
 public:
  using error::error;
};

/// Malformed or inconsistent configuration input.
class config_error : public error {
 public:
  using error::error;
};

/// Filesystem read/write failure.
class io_error : public error {
 public:
  using error::error;
};

}  // namespace rfiforge
