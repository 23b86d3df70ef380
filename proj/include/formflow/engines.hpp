#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "formflow/operator.hpp"

namespace formflow {

/// How to evaluate T(t) = exp(-tA).
///   Euler     n backward Euler steps, ((n/t) R(n/t))^n
///   Yosida    exp(t G_lambda) with G_lambda = lambda^2 R(lambda) - lambda I
///   Spectral  eigenexpansion, selfadjoint operators only
///   DenseExp  dense matrix exponential of -tA
struct SemigroupScheme {
  enum class Kind { Euler, Yosida, Spectral, DenseExp };
  Kind kind = Kind::DenseExp;
  int steps = 32;        // Euler
  double lambda = 100.0; // Yosida

  static SemigroupScheme euler(int n) { return {Kind::Euler, n, 100.0}; }
  static SemigroupScheme yosida(double l) { return {Kind::Yosida, 32, l}; }
  static SemigroupScheme spectral() { return {Kind::Spectral}; }
  static SemigroupScheme dense_exp() { return {Kind::DenseExp}; }
};

inline const char* scheme_name(SemigroupScheme::Kind k) {
  switch (k) {
    case SemigroupScheme::Kind::Euler: return "euler";
    case SemigroupScheme::Kind::Yosida: return "yosida";
    case SemigroupScheme::Kind::Spectral: return "spectral";
    case SemigroupScheme::Kind::DenseExp: return "exp";
  }
  return "?";
}

/// Spectral when the operator is selfadjoint, otherwise backward Euler with
/// enough steps that each step moves by at most half a norm unit.
template <typename Scalar>
SemigroupScheme default_scheme(const AssociatedOperator<Scalar>& op, double t) {
  if (op.selfadjoint()) return SemigroupScheme::spectral();
  const double a_norm = spectral_norm(op.matrix());
  const double n = std::clamp(std::ceil(2.0 * t * a_norm), 32.0, 65536.0);
  return SemigroupScheme::euler(int(n));
}

namespace detail {
inline void check_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidInput("evolution time must be >= 0");
}
}  // namespace detail

template <typename Scalar>
Vector<Scalar> euler_evolve(const AssociatedOperator<Scalar>& op, const Vector<Scalar>& x0,
                            double t, int steps) {
  detail::check_time(t);
  if (steps < 1) throw InvalidInput("euler_evolve: steps must be >= 1");
  if (t == 0.0) return x0;
  const double lambda = double(steps) / t;
  Vector<Scalar> x = x0;
  for (int k = 0; k < steps; ++k) x = Scalar(lambda) * op.resolvent(Scalar(lambda), x);
  return x;
}

/// G_lambda = lambda^2 (lambda + A)^{-1} - lambda I, the bounded surrogate
/// for -A that converges to it as lambda grows.
template <typename Scalar>
Matrix<Scalar> yosida_generator(const AssociatedOperator<Scalar>& op, double lambda) {
  if (!(lambda > 0.0)) throw InvalidInput("yosida_generator: lambda must be positive");
  const Index m = op.dim();
  return Scalar(lambda) * (Scalar(lambda) * op.resolvent_matrix(Scalar(lambda)) -
                           Matrix<Scalar>::Identity(m, m));
}

template <typename Scalar>
Vector<Scalar> yosida_evolve(const AssociatedOperator<Scalar>& op, const Vector<Scalar>& x0,
                             double t, double lambda) {
  detail::check_time(t);
  if (t == 0.0) return x0;
  const Matrix<Scalar> g = yosida_generator(op, lambda);
  return expm(Matrix<Scalar>((t * g).eval())) * x0;
}

/// Dense T(z) for complex time z with Re z >= 0.  Euler and Yosida are real
/// time stepping routes and reject nonreal z; a real operator cannot represent
/// a nonreal evolution at all (complexify the triple first).
template <typename Scalar>
Matrix<Scalar> evolve_matrix(const AssociatedOperator<Scalar>& op, Complex z,
                             const SemigroupScheme& scheme) {
  if (!(z.real() >= 0.0) || !std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw InvalidInput("evolve_matrix: need finite Re z >= 0");
  if constexpr (!is_complex_v<Scalar>) {
    if (z.imag() != 0.0)
      throw SchemeMismatch("evolve_matrix: nonreal time requires a complex operator");
  }
  const Index m = op.dim();
  const Matrix<Scalar> eye = Matrix<Scalar>::Identity(m, m);
  if (z == Complex(0.0, 0.0)) return eye;
  using K = SemigroupScheme::Kind;
  switch (scheme.kind) {
    case K::Euler: {
      if (z.imag() != 0.0)
        throw SchemeMismatch("evolve_matrix: Euler steps need real time");
      const double t = z.real();
      if (scheme.steps < 1) throw InvalidInput("evolve_matrix: steps must be >= 1");
      if (t == 0.0) return eye;
      const double lambda = double(scheme.steps) / t;
      const Matrix<Scalar> e = Scalar(lambda) * op.resolvent_matrix(Scalar(lambda));
      Matrix<Scalar> acc = eye;
      Matrix<Scalar> pw = e;  // binary powering
      int n = scheme.steps;
      while (n > 0) {
        if (n & 1) acc = acc * pw;
        n >>= 1;
        if (n > 0) pw = pw * pw;
      }
      return acc;
    }
    case K::Yosida: {
      if (z.imag() != 0.0)
        throw SchemeMismatch("evolve_matrix: Yosida regularization needs real time");
      const double t = z.real();
      if (t == 0.0) return eye;
      return expm(Matrix<Scalar>((t * yosida_generator(op, scheme.lambda)).eval()));
    }
    case K::Spectral: {
      const auto sd = spectral_decompose(op);
      Vector<Scalar> f(m);
      for (Index i = 0; i < m; ++i) {
        const Complex e = std::exp(-z * sd.eigenvalues(i));
        if constexpr (is_complex_v<Scalar>)
          f(i) = e;
        else
          f(i) = e.real();
      }
      return sd.eigenvectors * f.asDiagonal() * sd.eigenvectors.adjoint() * op.mass();
    }
    case K::DenseExp: {
      Scalar zz;
      if constexpr (is_complex_v<Scalar>)
        zz = z;
      else
        zz = z.real();
      return expm(Matrix<Scalar>((-zz * op.matrix()).eval()));
    }
  }
  throw InvalidInput("evolve_matrix: unknown scheme");
}

template <typename Scalar>
Vector<Scalar> evolve_state(const AssociatedOperator<Scalar>& op, const Vector<Scalar>& x0,
                            double t, const SemigroupScheme& scheme) {
  detail::check_time(t);
  if (x0.size() != op.dim()) throw InvalidInput("evolve_state: dimension mismatch");
  if (t == 0.0) return x0;
  using K = SemigroupScheme::Kind;
  switch (scheme.kind) {
    case K::Euler:
      return euler_evolve(op, x0, t, scheme.steps);
    case K::Yosida:
      return yosida_evolve(op, x0, t, scheme.lambda);
    case K::Spectral: {
      const auto sd = spectral_decompose(op);
      Vector<Scalar> c = sd.eigenvectors.adjoint() * (op.mass() * x0);
      for (Index i = 0; i < c.size(); ++i) c(i) *= Scalar(std::exp(-t * sd.eigenvalues(i)));
      return sd.eigenvectors * c;
    }
    case K::DenseExp:
      return evolve_matrix(op, Complex(t, 0.0), scheme) * x0;
  }
  throw InvalidInput("evolve_state: unknown scheme");
}

template <typename Scalar>
struct EvolutionResult {
  std::vector<double> times;
  std::vector<Vector<Scalar>> states;
  std::vector<double> norms;  // M_H norm of each state
  SemigroupScheme scheme;
};

/// Evaluate T(t) x0 on a time grid (each entry from the initial state, so the
/// grid need not be uniform).  Times must be nonnegative and increasing.
template <typename Scalar>
EvolutionResult<Scalar> evolve(const AssociatedOperator<Scalar>& op, const Vector<Scalar>& x0,
                               const std::vector<double>& times, const SemigroupScheme& scheme) {
  if (times.empty()) throw InvalidInput("evolve: empty time grid");
  for (std::size_t i = 0; i < times.size(); ++i) {
    detail::check_time(times[i]);
    if (i > 0 && !(times[i] > times[i - 1]))
      throw InvalidInput("evolve: times must be strictly increasing");
  }
  EvolutionResult<Scalar> r;
  r.times = times;
  r.scheme = scheme;
  r.states.reserve(times.size());
  for (double t : times) {
    r.states.push_back(evolve_state(op, x0, t, scheme));
    r.norms.push_back(weighted_norm(op.mass(), r.states.back()));
  }
  return r;
}

}  // namespace formflow
