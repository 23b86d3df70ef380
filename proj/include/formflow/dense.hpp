#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <random>

#include "formflow/types.hpp"

namespace formflow {

template <typename Scalar>
Matrix<Scalar> hermitian_part(const Matrix<Scalar>& X) {
  return ((X + X.adjoint()) / Scalar(2)).eval();
}

template <typename Scalar>
Matrix<Scalar> skew_part(const Matrix<Scalar>& X) {
  return ((X - X.adjoint()) / Scalar(2)).eval();
}

template <typename Scalar>
bool is_hermitian(const Matrix<Scalar>& X, double rel_tol = 1e-12) {
  const double scale = std::max(X.norm(), 1e-300);
  return (X - X.adjoint()).norm() <= rel_tol * scale;
}

/// Largest singular value.
template <typename Scalar>
double spectral_norm(const Matrix<Scalar>& X) {
  if (X.rows() == 0 || X.cols() == 0) return 0.0;
  Eigen::BDCSVD<Matrix<Scalar>> svd(X);
  return svd.singularValues()(0);
}

/// Smallest eigenvalue of a Hermitian matrix.
template <typename Scalar>
double min_eigenvalue(const Matrix<Scalar>& H) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Rank by column-pivoted QR, pivots kept above rel_tol times the largest.
template <typename Scalar>
Index matrix_rank(const Matrix<Scalar>& X, double rel_tol = 1e-10) {
  if (X.size() == 0) return 0;
  Eigen::ColPivHouseholderQR<Matrix<Scalar>> qr(X);
  qr.setThreshold(rel_tol);
  return qr.rank();
}

/// Dense matrix exponential (scaling and squaring with Pade approximants).
template <typename Scalar>
Matrix<Scalar> expm(const Matrix<Scalar>& X) {
  return X.exp();
}

/// Norm of x in the inner product (x|y) = y^* M x, M Hermitian positive definite.
template <typename Scalar>
double weighted_norm(const Matrix<Scalar>& M, const Vector<Scalar>& x) {
  return std::sqrt(std::abs(std::real(Complex(x.dot(M * x)))));
}

/// Operator norm of X on the space with Gram matrix M: with M = U^*U this is
/// the 2-norm of U X U^{-1}.
template <typename Scalar>
double weighted_operator_norm(const Matrix<Scalar>& M, const Matrix<Scalar>& X) {
  Eigen::LLT<Matrix<Scalar>> llt(M);
  if (llt.info() != Eigen::Success)
    throw InvalidInput("weighted_operator_norm: Gram matrix not positive definite");
  Matrix<Scalar> U = llt.matrixU();
  Matrix<Scalar> Y = U * X;
  Matrix<Scalar> Z =
      U.template triangularView<Eigen::Upper>().template solve<Eigen::OnTheRight>(Y);
  return spectral_norm(Z);
}

template <typename Scalar>
Vector<Scalar> random_gaussian_vector(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector<Scalar> v(n);
  for (Index i = 0; i < n; ++i) {
    if constexpr (is_complex_v<Scalar>)
      v(i) = Scalar(g(rng), g(rng));
    else
      v(i) = g(rng);
  }
  return v;
}

inline RealVector random_uniform_vector(Index n, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  RealVector v(n);
  for (Index i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

}  // namespace formflow
