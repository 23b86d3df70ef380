#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "formflow/dense.hpp"
#include "formflow/types.hpp"

namespace formflow {

inline constexpr double kHermitianRelTol = 1e-12;
inline constexpr double kRankRelTol = 1e-10;
inline constexpr double kOrthonormalTol = 1e-10;
inline constexpr double kEllipticityRelTol = 1e-12;
inline constexpr double kOmegaLadderCap = 1048576.0;  // 2^20

/// Finite dimensional space with a Hermitian positive definite Gram matrix.
template <typename Scalar>
struct VSpace {
  Matrix<Scalar> gram;
  Index dim() const { return gram.rows(); }
  static VSpace euclidean(Index n) { return {Matrix<Scalar>::Identity(n, n)}; }
};

template <typename Scalar>
struct HSpace {
  Matrix<Scalar> gram;
  Index dim() const { return gram.rows(); }
  static HSpace euclidean(Index m) { return {Matrix<Scalar>::Identity(m, m)}; }
};

/// A sesquilinear form a on V together with a map j into H, encoded as
///   a(u, v) = v^* F u,    j(u) = J u,
/// plus a shift omega for which F + omega J^* M_H J has positive definite
/// Hermitian part.  j must have dense image, i.e. J must have full row rank.
template <typename Scalar>
struct FormTriple {
  VSpace<Scalar> V;
  HSpace<Scalar> H;
  Matrix<Scalar> form;  // F, n x n
  Matrix<Scalar> map;   // J, m x n
  double omega = 0.0;

  Index dim_v() const { return form.rows(); }
  Index dim_h() const { return map.rows(); }
};

using RealTriple = FormTriple<Real>;
using ComplexTriple = FormTriple<Complex>;

template <typename Scalar>
void check_dimensions(const FormTriple<Scalar>& t) {
  const Index n = t.form.rows();
  const Index m = t.map.rows();
  if (n < 1 || t.form.cols() != n) throw InvalidInput("form matrix must be square and nonempty");
  if (m < 1 || t.map.cols() != n) throw InvalidInput("map must have shape m x n with m >= 1");
  if (t.V.gram.rows() != n || t.V.gram.cols() != n)
    throw InvalidInput("V Gram matrix must be n x n");
  if (t.H.gram.rows() != m || t.H.gram.cols() != m)
    throw InvalidInput("H Gram matrix must be m x m");
  if (!std::isfinite(t.omega)) throw InvalidInput("omega must be finite");
}

/// Matrix of the shifted form a + w (j.|j.):  F + w J^* M_H J.
template <typename Scalar>
Matrix<Scalar> shifted_form_matrix(const FormTriple<Scalar>& t, double w) {
  return t.form + Scalar(w) * (t.map.adjoint() * t.H.gram * t.map).eval();
}

namespace detail {

template <typename Scalar>
bool hermitian_positive_definite(const Matrix<Scalar>& X, double* margin = nullptr) {
  if (!is_hermitian(X, kHermitianRelTol)) return false;
  const double lo = min_eigenvalue(hermitian_part(X));
  if (margin) *margin = lo;
  return lo > kEllipticityRelTol * std::max(1.0, X.norm());
}

template <typename Scalar>
bool elliptic_at(const FormTriple<Scalar>& t, double w, double* margin = nullptr) {
  const Matrix<Scalar> H = hermitian_part(shifted_form_matrix(t, w));
  const double lo = min_eigenvalue(H);
  if (margin) *margin = lo;
  return lo > kEllipticityRelTol * std::max(1.0, H.norm());
}

}  // namespace detail

/// First shift from the ladder {0, 1, 2, 4, ..., 2^20} that makes the
/// Hermitian part of F + w J^* M_H J positive definite, if any.
template <typename Scalar>
std::optional<double> suggest_omega(const FormTriple<Scalar>& t) {
  check_dimensions(t);
  if (detail::elliptic_at(t, 0.0)) return 0.0;
  for (double w = 1.0; w <= kOmegaLadderCap; w *= 2.0)
    if (detail::elliptic_at(t, w)) return w;
  return std::nullopt;
}

struct ValidationReport {
  bool ok = false;
  std::string reason;  // first failed requirement, empty when ok
  Index map_rank = 0;
  bool dense_image = false;
  bool gram_v_ok = false;
  bool gram_h_ok = false;
  bool elliptic = false;
  double ellipticity_margin = 0.0;  // smallest eigenvalue of Herm(F + omega J^* M_H J)
  std::optional<double> suggested_omega;
};

template <typename Scalar>
ValidationReport validate(const FormTriple<Scalar>& t) {
  check_dimensions(t);
  ValidationReport r;
  r.gram_v_ok = detail::hermitian_positive_definite(t.V.gram);
  r.gram_h_ok = detail::hermitian_positive_definite(t.H.gram);
  r.map_rank = matrix_rank(t.map, kRankRelTol);
  r.dense_image = (r.map_rank == t.dim_h());
  r.elliptic = detail::elliptic_at(t, t.omega, &r.ellipticity_margin);
  r.suggested_omega = r.elliptic ? std::optional<double>(t.omega) : suggest_omega(t);
  r.ok = r.gram_v_ok && r.gram_h_ok && r.dense_image && r.elliptic;
  if (!r.gram_v_ok)
    r.reason = "V Gram matrix not Hermitian positive definite";
  else if (!r.gram_h_ok)
    r.reason = "H Gram matrix not Hermitian positive definite";
  else if (!r.dense_image)
    r.reason = "j lacks dense image";
  else if (!r.elliptic)
    r.reason = "shifted form not elliptic";
  return r;
}

/// Ellipticity, continuity and numerical range constants of the shifted form,
/// measured against the V norm:
///   alpha        smallest eigenvalue of Herm(F_omega) relative to G_V,
///   continuity   largest singular value of G_V^{-1/2} F_omega G_V^{-1/2},
///   theta_prime  half-angle of the sector containing the numerical range of
///                the shifted form, tan(theta_prime) = sup |Im| / Re.
struct FormConstants {
  double alpha = 0.0;
  double continuity = 0.0;
  double theta_prime = 0.0;
};

template <typename Scalar>
FormConstants form_constants(const FormTriple<Scalar>& t) {
  check_dimensions(t);
  if (!detail::hermitian_positive_definite(t.V.gram))
    throw InvalidInput("form_constants: V Gram matrix not Hermitian positive definite");
  const Matrix<Scalar> Fw = shifted_form_matrix(t, t.omega);
  const Matrix<Scalar> Hw = hermitian_part(Fw);

  FormConstants c;
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix<Scalar>> pencil(Hw, t.V.gram,
                                                                  Eigen::EigenvaluesOnly);
  c.alpha = pencil.eigenvalues().minCoeff();
  if (c.alpha <= 0.0) throw NonElliptic("form_constants: shifted form not elliptic");

  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> gram(t.V.gram);
  const Matrix<Scalar> W = gram.operatorInverseSqrt();
  c.continuity = spectral_norm(Matrix<Scalar>(W * Fw * W));

  const ComplexMatrix Fc = Fw.template cast<Complex>();
  const ComplexMatrix Nc = (Fc - Fc.adjoint()) / Complex(0.0, 2.0);
  const ComplexMatrix Hc = (Fc + Fc.adjoint()) / Complex(2.0, 0.0);
  Eigen::GeneralizedSelfAdjointEigenSolver<ComplexMatrix> rot(Nc, Hc, Eigen::EigenvaluesOnly);
  const double rho = rot.eigenvalues().cwiseAbs().maxCoeff();
  c.theta_prime = std::atan(rho);
  return c;
}

/// Triple of the shifted form a + w (j.|j.).  The certificate shift drops by
/// w (never below zero); the shifted triple certifies with it in all cases.
template <typename Scalar>
FormTriple<Scalar> shift_form(const FormTriple<Scalar>& t, double w) {
  check_dimensions(t);
  if (!std::isfinite(w)) throw InvalidInput("shift_form: shift must be finite");
  FormTriple<Scalar> r = t;
  r.form = shifted_form_matrix(t, w);
  r.omega = std::max(t.omega - w, 0.0);
  return r;
}

/// Replace H by the subspace spanned by the columns of Q (orthonormal in the
/// M_H inner product) and j by its compression onto that subspace.  The form
/// is unchanged; the new H carries the identity Gram in Q coordinates.
template <typename Scalar>
FormTriple<Scalar> compose_projection(const FormTriple<Scalar>& t, const Matrix<Scalar>& Q) {
  check_dimensions(t);
  const Index k = Q.cols();
  if (Q.rows() != t.dim_h() || k < 1)
    throw InvalidInput("compose_projection: Q must be m x k with k >= 1");
  const Matrix<Scalar> gram = Q.adjoint() * t.H.gram * Q;
  if ((gram - Matrix<Scalar>::Identity(k, k)).norm() > kOrthonormalTol * std::sqrt(double(k)))
    throw NotOrthonormal("compose_projection: columns of Q not orthonormal in M_H");

  FormTriple<Scalar> r;
  r.V = t.V;
  r.H = HSpace<Scalar>::euclidean(k);
  r.form = t.form;
  r.map = Q.adjoint() * t.H.gram * t.map;
  if (detail::elliptic_at(r, t.omega)) {
    r.omega = t.omega;
  } else {
    const auto w = suggest_omega(r);
    if (!w)
      throw NonElliptic("compose_projection: no shift certifies ellipticity on the subspace");
    r.omega = *w;
  }
  return r;
}

/// Extend a real triple to the complex field.  The complex form restricts to
/// the original on real vectors and the certificate shift carries over.
inline ComplexTriple complexify(const RealTriple& t) {
  check_dimensions(t);
  return {{t.V.gram.cast<Complex>()},
          {t.H.gram.cast<Complex>()},
          t.form.cast<Complex>(),
          t.map.cast<Complex>(),
          t.omega};
}

inline ComplexTriple complexify(const ComplexTriple&) {
  throw AlreadyComplex("complexify: triple is already complex");
}

}  // namespace formflow
