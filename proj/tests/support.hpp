#pragma once

#include <random>

#include "formflow/form.hpp"

namespace formflow::testing {

inline RealMatrix random_spd(Index n, std::mt19937_64& rng, double ridge = 0.5) {
  RealMatrix b(n, n);
  std::normal_distribution<double> g(0.0, 1.0);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) b(i, j) = g(rng);
  return RealMatrix(b * b.transpose() / double(n) + ridge * RealMatrix::Identity(n, n));
}

template <typename Scalar>
Matrix<Scalar> random_matrix(Index r, Index c, std::mt19937_64& rng) {
  Matrix<Scalar> x(r, c);
  std::normal_distribution<double> g(0.0, 1.0);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) {
      if constexpr (is_complex_v<Scalar>)
        x(i, j) = Scalar(g(rng), g(rng));
      else
        x(i, j) = g(rng);
    }
  return x;
}

/// Random triple with coercive form (possibly nonsymmetric), full-rank J and
/// SPD Gram matrices, omega = 0.
template <typename Scalar>
FormTriple<Scalar> random_coercive_triple(Index n, Index m, std::mt19937_64& rng,
                                          double skew_scale = 0.3) {
  const RealMatrix h = random_spd(n, rng, 1.0);
  Matrix<Scalar> f = h.cast<Scalar>();
  Matrix<Scalar> k = random_matrix<Scalar>(n, n, rng);
  f += skew_scale * (k - k.adjoint());
  Matrix<Scalar> j = random_matrix<Scalar>(m, n, rng);
  FormTriple<Scalar> t;
  t.V.gram = random_spd(n, rng, 1.0).cast<Scalar>();
  t.H.gram = random_spd(m, rng, 1.0).cast<Scalar>();
  t.form = f;
  t.map = j;
  t.omega = 0.0;
  return t;
}

/// Reference operator matrix straight from the definition: for each basis
/// vector x of H solve the block system  F u - J^* M y = 0,  J u = x.
template <typename Scalar>
Matrix<Scalar> association_oracle(const FormTriple<Scalar>& t) {
  const Index n = t.dim_v();
  const Index m = t.dim_h();
  Matrix<Scalar> big = Matrix<Scalar>::Zero(n + m, n + m);
  big.topLeftCorner(n, n) = t.form;
  big.topRightCorner(n, m) = -(t.map.adjoint() * t.H.gram).eval();
  big.bottomLeftCorner(m, n) = t.map;
  Eigen::FullPivLU<Matrix<Scalar>> lu(big);
  Matrix<Scalar> rhs = Matrix<Scalar>::Zero(n + m, m);
  rhs.bottomRows(m) = Matrix<Scalar>::Identity(m, m);
  return Matrix<Scalar>(lu.solve(rhs).bottomRows(m));
}

/// Finite difference heat operator triple on (0,1) with Dirichlet ends:
/// stiffness (1/h) tridiag(-1, 2, -1) on the interior nodes, diagonal mass
/// h I, J = I, G_V = stiffness + mass.  Oracle kept independent of the
/// mesh assemblers.
inline RealTriple fd_heat_triple(int cells) {
  const Index n = cells - 1;
  const double h = 1.0 / cells;
  RealMatrix k = RealMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    k(i, i) = 2.0 / h;
    if (i + 1 < n) {
      k(i, i + 1) = -1.0 / h;
      k(i + 1, i) = -1.0 / h;
    }
  }
  RealTriple t;
  t.form = k;
  t.map = RealMatrix::Identity(n, n);
  t.H.gram = h * RealMatrix::Identity(n, n);
  t.V.gram = k + t.H.gram;
  t.omega = 0.0;
  return t;
}

}  // namespace formflow::testing
