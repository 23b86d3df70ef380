#pragma once

#include <Eigen/LU>

#include <map>
#include <memory>
#include <utility>

#include "formflow/form.hpp"

namespace formflow {

/// Operator A on H associated with a form triple:  A x = y exactly when some
/// u in V satisfies J u = x and  v^* F u = (J v)^* M_H y  for all v.
///
/// With S_w = J F_w^{-1} J^* (F_w the shifted form matrix) the realization is
/// A = (S_w M_H)^{-1} - w I, and (lambda + A)^{-1} = J F_lambda^{-1} J^* M_H
/// with one factorization of F_lambda cached per shift.
template <typename Scalar>
class AssociatedOperator {
 public:
  explicit AssociatedOperator(FormTriple<Scalar> t) : t_(std::move(t)) {
    check_dimensions(t_);
    if (!detail::elliptic_at(t_, t_.omega))
      throw NonElliptic("associate: shifted form not elliptic");
    const Index m = t_.dim_h();
    fw_lu_.compute(shifted_form_matrix(t_, t_.omega));
    const Matrix<Scalar> s_omega = t_.map * fw_lu_.solve(Matrix<Scalar>(t_.map.adjoint()));
    sm_lu_.compute(Matrix<Scalar>(s_omega * t_.H.gram));
    if (!sm_lu_.isInvertible())
      throw SingularSystem("associate: realization system singular (is the image of j dense?)");
    a_ = sm_lu_.solve(Matrix<Scalar>::Identity(m, m)) -
         Scalar(t_.omega) * Matrix<Scalar>::Identity(m, m);
    selfadjoint_ = is_hermitian(t_.form, kHermitianRelTol);
  }

  const FormTriple<Scalar>& triple() const { return t_; }
  Index dim() const { return t_.dim_h(); }
  bool selfadjoint() const { return selfadjoint_; }
  const Matrix<Scalar>& matrix() const { return a_; }
  const Matrix<Scalar>& mass() const { return t_.H.gram; }

  Vector<Scalar> apply(const Vector<Scalar>& x) const {
    if (x.size() != dim()) throw InvalidInput("apply: dimension mismatch");
    return sm_lu_.solve(x) - Scalar(t_.omega) * x;
  }

  /// The element u of V that witnesses A x = y:  J u = x and F u = J^* M_H y.
  Vector<Scalar> form_witness(const Vector<Scalar>& x, const Vector<Scalar>& y) const {
    return fw_lu_.solve(Vector<Scalar>(t_.map.adjoint() * (t_.H.gram * (y + Scalar(t_.omega) * x))));
  }

  Vector<Scalar> resolvent(Scalar lambda, const Vector<Scalar>& x) const {
    if (x.size() != dim()) throw InvalidInput("resolvent: dimension mismatch");
    const auto& lu = factorization(lambda);
    return t_.map * lu.solve(Vector<Scalar>(t_.map.adjoint() * (t_.H.gram * x)));
  }

  /// Dense (lambda + A)^{-1}.
  Matrix<Scalar> resolvent_matrix(Scalar lambda) const {
    const auto& lu = factorization(lambda);
    return t_.map * lu.solve(Matrix<Scalar>(t_.map.adjoint() * t_.H.gram));
  }

 private:
  const Eigen::FullPivLU<Matrix<Scalar>>& factorization(Scalar lambda) const {
    const auto key = shift_key(lambda);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      auto lu = std::make_shared<Eigen::FullPivLU<Matrix<Scalar>>>(
          Matrix<Scalar>(t_.form + lambda * (t_.map.adjoint() * t_.H.gram * t_.map)));
      if (!lu->isInvertible())
        throw SingularResolvent("resolvent: shifted form singular at this lambda");
      it = cache_.emplace(key, std::move(lu)).first;
    }
    return *it->second;
  }

  static std::pair<double, double> shift_key(Scalar lambda) {
    if constexpr (is_complex_v<Scalar>)
      return {lambda.real(), lambda.imag()};
    else
      return {double(lambda), 0.0};
  }

  FormTriple<Scalar> t_;
  Eigen::FullPivLU<Matrix<Scalar>> fw_lu_;
  Eigen::FullPivLU<Matrix<Scalar>> sm_lu_;
  Matrix<Scalar> a_;
  bool selfadjoint_ = false;
  mutable std::map<std::pair<double, double>, std::shared_ptr<Eigen::FullPivLU<Matrix<Scalar>>>>
      cache_;
};

template <typename Scalar>
AssociatedOperator<Scalar> associate(FormTriple<Scalar> t) {
  return AssociatedOperator<Scalar>(std::move(t));
}

/// Eigenpairs of a selfadjoint associated operator in the M_H geometry:
/// A v_k = mu_k v_k with V^* M_H V = I and mu ascending.
template <typename Scalar>
struct SpectralDecomposition {
  RealVector eigenvalues;
  Matrix<Scalar> eigenvectors;
};

template <typename Scalar>
SpectralDecomposition<Scalar> spectral_decompose(const AssociatedOperator<Scalar>& op) {
  if (!op.selfadjoint()) throw NotSelfadjoint("spectral_decompose: form is not Hermitian");
  const Matrix<Scalar> ma = hermitian_part(Matrix<Scalar>(op.mass() * op.matrix()));
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix<Scalar>> es(ma, op.mass());
  if (es.info() != Eigen::Success)
    throw SingularSystem("spectral_decompose: generalized eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

}  // namespace formflow
