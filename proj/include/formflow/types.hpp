#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace formflow {

using Real = double;
using Complex = std::complex<double>;
using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using RealMatrix = Matrix<Real>;
using RealVector = Vector<Real>;
using ComplexMatrix = Matrix<Complex>;
using ComplexVector = Vector<Complex>;

template <typename Scalar>
struct is_complex_scalar : std::false_type {};
template <typename T>
struct is_complex_scalar<std::complex<T>> : std::true_type {};
template <typename Scalar>
inline constexpr bool is_complex_v = is_complex_scalar<Scalar>::value;

/// Base class for all errors thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed dimensions or values that make a request meaningless.
struct InvalidInput : Error {
  using Error::Error;
};

/// The shifted form fails to be elliptic (Hermitian part not positive definite).
struct NonElliptic : Error {
  using Error::Error;
};

/// A linear system that the construction requires is singular.
struct SingularSystem : Error {
  using Error::Error;
};

/// lambda + A is not invertible at the requested shift.
struct SingularResolvent : Error {
  using Error::Error;
};

/// Columns are not orthonormal in the given inner product.
struct NotOrthonormal : Error {
  using Error::Error;
};

/// Operation requires a selfadjoint operator.
struct NotSelfadjoint : Error {
  using Error::Error;
};

/// Requested evolution parameters are incompatible with the scheme.
struct SchemeMismatch : Error {
  using Error::Error;
};

/// The V basis is not nodal with respect to the map into H.
struct NotNodal : Error {
  using Error::Error;
};

/// Triple is already over the complex field.
struct AlreadyComplex : Error {
  using Error::Error;
};

/// PDE coefficients violate the assumptions of the assembler.
struct CoefficientViolation : Error {
  using Error::Error;
};

/// Mesh is not connected (or otherwise unusable).
struct DisconnectedMesh : Error {
  using Error::Error;
};

/// Interior block of a trace problem is singular.
struct SingularInterior : Error {
  using Error::Error;
};

}  // namespace formflow
