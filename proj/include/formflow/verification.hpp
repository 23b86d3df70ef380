#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

#include "formflow/engines.hpp"

namespace formflow {

struct CheckResult {
  std::string name;
  bool passed = false;
  bool applicable = true;  // inapplicable checks never fail a report
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

namespace detail {

template <typename Scalar>
ComplexMatrix to_complex(const Matrix<Scalar>& x) {
  if constexpr (is_complex_v<Scalar>)
    return x;
  else
    return x.template cast<Complex>();
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace detail

/// Numerical range test: the Hermitian part of e^{+-i theta} M_H A must be
/// positive semidefinite (up to tol relative to its scale), and I + A must be
/// invertible.  theta = 0 is plain accretivity; theta > 0 needs a complex
/// operator.
template <typename Scalar>
CheckResult check_accretivity(const AssociatedOperator<Scalar>& op, double theta = 0.0,
                              double tol = 1e-10) {
  if (!(theta >= 0.0) || theta > M_PI / 2 + 1e-12)
    throw InvalidInput("check_accretivity: need 0 <= theta <= pi/2");
  if constexpr (!is_complex_v<Scalar>) {
    if (theta > 0.0)
      throw InvalidInput("check_accretivity: tilted test requires a complex operator");
  }
  CheckResult r;
  r.name = theta > 0.0 ? "accretivity(theta)" : "accretivity";
  r.threshold = -tol;

  const ComplexMatrix ma = detail::to_complex<Scalar>(op.mass() * op.matrix());
  const double scale = std::max(spectral_norm(ma), 1e-300);
  std::vector<double> angles = {0.0};
  if (theta > 0.0) angles = {theta, -theta};
  double worst = std::numeric_limits<double>::infinity();
  for (double phi : angles) {
    const ComplexMatrix rot = std::exp(Complex(0.0, phi)) * ma;
    worst = std::min(worst, min_eigenvalue(hermitian_part(rot)) / scale);
  }
  r.measured = worst;

  Eigen::FullPivLU<Matrix<Scalar>> lu(
      Matrix<Scalar>(Matrix<Scalar>::Identity(op.dim(), op.dim()) + op.matrix()));
  const bool surjective = lu.isInvertible();
  r.passed = (worst >= -tol) && surjective;
  r.detail = "min Re margin " + detail::fmt(worst) + ", rcond(I+A) " +
             detail::fmt(surjective ? lu.rcond() : 0.0);
  return r;
}

/// Default radial grid for the sector resolvent bound: 13 logarithmically
/// spaced radii between 1e-2 and 1e4.
inline std::vector<double> default_sector_radii() {
  std::vector<double> r;
  for (int k = 0; k <= 12; ++k) r.push_back(std::pow(10.0, -2.0 + 0.5 * k));
  return r;
}

/// ||lambda (lambda + A)^{-1}||_M <= 1 + tol on a grid of the closed sector
/// of half-angle theta.  Rays off the real axis need a complex operator.
template <typename Scalar>
CheckResult check_resolvent_sector(const AssociatedOperator<Scalar>& op, double theta,
                                   double tol = 1e-8,
                                   std::vector<double> radii = default_sector_radii()) {
  if (!(theta >= 0.0) || theta >= M_PI)
    throw InvalidInput("check_resolvent_sector: need 0 <= theta < pi");
  std::vector<double> angles = {0.0};
  if (theta > 0.0) angles = {0.0, 0.5 * theta, -0.5 * theta, 0.99 * theta, -0.99 * theta};
  if constexpr (!is_complex_v<Scalar>) {
    if (theta > 0.0)
      throw InvalidInput("check_resolvent_sector: nonreal rays require a complex operator");
  }
  CheckResult r;
  r.name = "resolvent_sector";
  r.threshold = 1.0 + tol;
  double worst = 0.0;
  std::string worst_at = "-";
  for (double rad : radii)
    for (double phi : angles) {
      Scalar lambda;
      if constexpr (is_complex_v<Scalar>)
        lambda = rad * std::exp(Complex(0.0, phi));
      else
        lambda = Scalar(rad);
      double nrm;
      try {
        const Matrix<Scalar> lr = lambda * op.resolvent_matrix(lambda);
        nrm = weighted_operator_norm(op.mass(), lr);
      } catch (const SingularResolvent&) {
        nrm = std::numeric_limits<double>::infinity();
      }
      if (nrm > worst) {
        worst = nrm;
        worst_at = detail::fmt(rad) + "*e^(i*" + detail::fmt(phi) + ")";
      }
    }
  r.measured = worst;
  r.passed = worst <= r.threshold;
  r.detail = "worst ||lambda R(lambda)||_M at lambda = " + worst_at;
  return r;
}

/// ||T(t)||_M <= 1 + tol for every requested time.
template <typename Scalar>
CheckResult check_contraction_semigroup(const AssociatedOperator<Scalar>& op,
                                        const std::vector<double>& times,
                                        const SemigroupScheme& scheme, double tol = 1e-10) {
  CheckResult r;
  r.name = "contraction";
  r.threshold = 1.0 + tol;
  double worst = 0.0;
  for (double t : times) {
    const Matrix<Scalar> tt = evolve_matrix(op, Complex(t, 0.0), scheme);
    worst = std::max(worst, weighted_operator_norm(op.mass(), tt));
  }
  r.measured = worst;
  r.passed = worst <= r.threshold;
  r.detail = std::string("scheme ") + scheme_name(scheme.kind);
  return r;
}

/// Tolerance for comparing two routes to T(t) under a given scheme: exact
/// routes get a fixed 1e-9 band, time stepping routes get their consistency
/// error scaled in.
template <typename Scalar>
double scheme_equality_tolerance(const AssociatedOperator<Scalar>& op,
                                 const SemigroupScheme& scheme, double horizon) {
  using K = SemigroupScheme::Kind;
  switch (scheme.kind) {
    case K::Spectral:
      return 1e-9;
    case K::DenseExp:
      return 1e-8;
    case K::Euler: {
      const double a = spectral_norm(op.matrix());
      return 1e-9 + 4.0 * (horizon * a) * (horizon * a) / std::max(1, scheme.steps);
    }
    case K::Yosida: {
      const double a = spectral_norm(op.matrix());
      return 1e-9 + 4.0 * horizon * a * std::min(1.0, (a + 1.0) / scheme.lambda);
    }
  }
  return 1e-9;
}

/// ||T(t1 + t2) - T(t1) T(t2)||_M within the scheme's consistency band.
template <typename Scalar>
CheckResult check_semigroup_law(const AssociatedOperator<Scalar>& op, double t1, double t2,
                                const SemigroupScheme& scheme, double tol = -1.0) {
  detail::check_time(t1);
  detail::check_time(t2);
  CheckResult r;
  r.name = "semigroup_law";
  r.threshold = tol > 0.0 ? tol : scheme_equality_tolerance(op, scheme, t1 + t2);
  const Matrix<Scalar> lhs = evolve_matrix(op, Complex(t1 + t2, 0.0), scheme);
  const Matrix<Scalar> rhs = evolve_matrix(op, Complex(t1, 0.0), scheme) *
                             evolve_matrix(op, Complex(t2, 0.0), scheme);
  r.measured = weighted_operator_norm(op.mass(), Matrix<Scalar>(lhs - rhs));
  r.passed = r.measured <= r.threshold;
  r.detail = std::string("scheme ") + scheme_name(scheme.kind) + ", t1 " + detail::fmt(t1) +
             ", t2 " + detail::fmt(t2);
  return r;
}

/// Closed convex sets whose metric projection acts componentwise on nodal
/// coordinates.
struct ConvexSetSpec {
  enum class Kind { HalfSpaceBelowOne, NonnegativeCone, Box };
  Kind kind = Kind::NonnegativeCone;
  double lo = 0.0, hi = 1.0;  // Box only

  static ConvexSetSpec half_space_below_one() { return {Kind::HalfSpaceBelowOne, 0.0, 1.0}; }
  static ConvexSetSpec nonnegative_cone() { return {Kind::NonnegativeCone, 0.0, 1.0}; }
  static ConvexSetSpec box(double lo, double hi) {
    if (!(lo < hi)) throw InvalidInput("ConvexSetSpec: need lo < hi");
    return {Kind::Box, lo, hi};
  }

  double clip(double v) const {
    switch (kind) {
      case Kind::HalfSpaceBelowOne: return std::min(v, 1.0);
      case Kind::NonnegativeCone: return std::max(v, 0.0);
      case Kind::Box: return std::clamp(v, lo, hi);
    }
    return v;
  }

  const char* name() const {
    switch (kind) {
      case Kind::HalfSpaceBelowOne: return "half_space_below_one";
      case Kind::NonnegativeCone: return "nonnegative_cone";
      case Kind::Box: return "box";
    }
    return "?";
  }
};

/// True when every row of J picks out exactly one V coordinate with weight
/// one and no coordinate is picked twice.
template <typename Scalar>
bool is_nodal_map(const Matrix<Scalar>& j, double tol = 1e-14) {
  Eigen::VectorXi col_used = Eigen::VectorXi::Zero(j.cols());
  for (Index r = 0; r < j.rows(); ++r) {
    int hits = 0;
    for (Index c = 0; c < j.cols(); ++c) {
      const double a = std::abs(j(r, c));
      if (a <= tol) continue;
      if (std::abs(j(r, c) - Scalar(1)) > tol) return false;
      if (++col_used(c) > 1) return false;
      ++hits;
    }
    if (hits != 1) return false;
  }
  return true;
}

/// Projection criterion for invariance of C under the semigroup: for sampled
/// u, the clipped vector w must satisfy Re a(w, u - w) >= 0 (up to tol,
/// normalized by the V norm of the sample).  Requires a nodal map so that
/// clipping V coordinates is the metric projection in H.
inline CheckResult check_invariance(const RealTriple& t, const ConvexSetSpec& c,
                                    int samples = 1000, std::uint64_t seed = 1,
                                    double tol = 1e-10) {
  check_dimensions(t);
  if (!is_nodal_map(t.map)) throw NotNodal("check_invariance: map is not nodal");
  if (samples < 1) throw InvalidInput("check_invariance: samples must be >= 1");
  CheckResult r;
  r.name = "invariance";
  r.threshold = -tol;
  std::mt19937_64 rng(seed);
  const Index n = t.dim_v();
  double worst = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const RealVector u = random_uniform_vector(n, rng, -3.0, 3.0);
    RealVector w(n);
    for (Index i = 0; i < n; ++i) w(i) = c.clip(u(i));
    const RealVector d = u - w;
    const double margin = d.dot(t.form * w);
    const double vnorm2 = u.dot(t.V.gram * u);
    worst = std::min(worst, margin / (vnorm2 + 1.0));
  }
  r.measured = worst;
  r.passed = worst >= -tol;
  r.detail = std::string("set ") + c.name() + ", " + std::to_string(samples) + " samples";
  return r;
}

/// T(t) keeps nonnegative data nonnegative and never pushes the constant one
/// above itself.  Needs a nodal H basis with diagonal mass, otherwise the
/// entrywise reading is meaningless and the check reports inapplicable.
template <typename Scalar>
CheckResult check_submarkovian(const AssociatedOperator<Scalar>& op,
                               const std::vector<double>& times, const SemigroupScheme& scheme,
                               double tol = 1e-12) {
  CheckResult r;
  r.name = "submarkovian";
  r.threshold = tol;
  const Matrix<Scalar>& m = op.mass();
  const double offdiag = (m - Matrix<Scalar>(m.diagonal().asDiagonal())).norm();
  if (offdiag > 1e-14 * std::max(1.0, m.norm())) {
    r.applicable = false;
    r.passed = true;
    r.detail = "inapplicable: mass matrix not diagonal";
    return r;
  }
  if constexpr (is_complex_v<Scalar>) {
    if (detail::to_complex<Scalar>(op.matrix()).imag().norm() >
        1e-12 * std::max(1.0, op.matrix().norm())) {
      r.applicable = false;
      r.passed = true;
      r.detail = "inapplicable: operator not real";
      return r;
    }
  }
  double worst = 0.0;
  for (double t : times) {
    const ComplexMatrix tt = detail::to_complex<Scalar>(evolve_matrix(op, Complex(t, 0.0), scheme));
    const RealMatrix tr = tt.real();
    const double neg = -tr.minCoeff();
    const double over = (tr * RealVector::Ones(tr.cols())).maxCoeff() - 1.0;
    worst = std::max({worst, neg, over});
  }
  r.measured = worst;
  r.passed = worst <= tol;
  r.detail = std::string("scheme ") + scheme_name(scheme.kind);
  return r;
}

/// Sampled certificate for the real sector inequality
///   |a(u,v) - a(v,u)| <= c (a(u) + a(v)) + omega (||ju||^2 + ||jv||^2)
/// on unit V-norm samples.
struct RealSectorCertificate {
  double c = 0.0;
  double omega = 0.0;
  bool verified = false;
  double worst_slack = 0.0;
};

inline RealSectorCertificate real_sector_constants(const RealTriple& t, double c, double omega,
                                                   int samples = 200, std::uint64_t seed = 1,
                                                   double tol = 1e-10) {
  check_dimensions(t);
  if (samples < 1) throw InvalidInput("real_sector_constants: samples must be >= 1");
  std::mt19937_64 rng(seed);
  const Index n = t.dim_v();
  double worst = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    RealVector u = random_gaussian_vector<Real>(n, rng);
    RealVector v = random_gaussian_vector<Real>(n, rng);
    u /= weighted_norm(t.V.gram, u);
    v /= weighted_norm(t.V.gram, v);
    const double skew = std::abs(v.dot(t.form * u) - u.dot(t.form * v));
    const double diag = u.dot(t.form * u) + v.dot(t.form * v);
    const RealVector ju = t.map * u, jv = t.map * v;
    const double mass = ju.dot(t.H.gram * ju) + jv.dot(t.H.gram * jv);
    worst = std::min(worst, c * diag + omega * mass - skew);
  }
  return {c, omega, worst >= -tol, worst};
}

/// Resolvents of a + (1/n) b converge to the resolvent of a as the singular
/// perturbation is switched off.  b must share V, H and j with a and have a
/// positive semidefinite Hermitian part.
template <typename Scalar>
CheckResult viscosity_convergence(const FormTriple<Scalar>& a, const FormTriple<Scalar>& b,
                                  double lambda, const Vector<Scalar>& f,
                                  const std::vector<int>& ns = {1, 2, 4, 8, 16, 32, 64, 128, 256},
                                  double ratio_bound = 0.05) {
  check_dimensions(a);
  check_dimensions(b);
  if (a.dim_v() != b.dim_v() || a.dim_h() != b.dim_h())
    throw InvalidInput("viscosity_convergence: forms live on different spaces");
  if ((a.map - b.map).norm() > 1e-12 * std::max(1.0, a.map.norm()) ||
      (a.H.gram - b.H.gram).norm() > 1e-12 * std::max(1.0, a.H.gram.norm()))
    throw InvalidInput("viscosity_convergence: forms must share j and M_H");
  const Matrix<Scalar> hb = hermitian_part(b.form);
  if (min_eigenvalue(hb) < -1e-10 * std::max(1.0, hb.norm()))
    throw NonElliptic("viscosity_convergence: perturbation must be accretive");
  if (ns.size() < 2) throw InvalidInput("viscosity_convergence: need at least two step counts");

  auto base = associate(a);
  const Vector<Scalar> limit = base.resolvent(Scalar(lambda), f);
  std::vector<double> errs;
  for (int n : ns) {
    if (n < 1) throw InvalidInput("viscosity_convergence: n must be >= 1");
    FormTriple<Scalar> tn = a;
    tn.form = a.form + b.form / Scalar(n);
    auto opn = associate(tn);
    const Vector<Scalar> xn = opn.resolvent(Scalar(lambda), f);
    errs.push_back(weighted_norm(a.H.gram, Vector<Scalar>(xn - limit)));
  }
  CheckResult r;
  r.name = "viscosity_convergence";
  r.threshold = ratio_bound;
  const double scale = weighted_norm(a.H.gram, limit);
  if (errs.front() <= 1e-14 * std::max(1.0, scale)) {
    r.measured = 0.0;
    r.passed = true;
    r.detail = "perturbation invisible at this resolution";
    return r;
  }
  r.measured = errs.back() / errs.front();
  r.passed = r.measured <= ratio_bound && errs.back() <= errs.front();
  std::ostringstream os;
  os << "errors";
  for (double e : errs) os << " " << detail::fmt(e);
  r.detail = os.str();
  return r;
}

/// The semigroup of the shifted form a + w (j.|j.) is e^{-wt} times the
/// original one.
template <typename Scalar>
CheckResult rescale_consistency(const FormTriple<Scalar>& t, double w, double time,
                                const SemigroupScheme& scheme, double tol = -1.0) {
  detail::check_time(time);
  auto op = associate(t);
  auto ops = associate(shift_form(t, w));
  CheckResult r;
  r.name = "rescale_consistency";
  r.threshold = tol > 0.0 ? tol : scheme_equality_tolerance(op, scheme, time) *
                                      std::max(1.0, w * time);
  const Matrix<Scalar> lhs = evolve_matrix(ops, Complex(time, 0.0), scheme);
  const Matrix<Scalar> rhs =
      Scalar(std::exp(-w * time)) * evolve_matrix(op, Complex(time, 0.0), scheme);
  r.measured = weighted_operator_norm(op.mass(), Matrix<Scalar>(lhs - rhs));
  r.passed = r.measured <= r.threshold;
  r.detail = std::string("w ") + detail::fmt(w) + ", t " + detail::fmt(time) + ", scheme " +
             scheme_name(scheme.kind);
  return r;
}

struct VerificationReport {
  ValidationReport validation;
  std::map<std::string, double> constants;
  std::vector<CheckResult> checks;

  bool all_passed() const {
    if (!validation.ok) return false;
    for (const auto& c : checks)
      if (c.applicable && !c.passed) return false;
    return true;
  }
};

/// Battery that applies to any triple: validation, form constants, plain and
/// tilted accretivity, the sector resolvent bound, contraction, the semigroup
/// law and (when meaningful) the submarkovian property.  Sector checks run on
/// the complexification when the input is real.
template <typename Scalar>
VerificationReport standard_report(const FormTriple<Scalar>& t,
                                   std::vector<double> times = {0.1, 1.0, 10.0}) {
  VerificationReport rep;
  rep.validation = validate(t);
  if (!rep.validation.ok) return rep;

  const FormConstants fc = form_constants(t);
  const double theta = M_PI / 2 - fc.theta_prime;
  rep.constants["alpha"] = fc.alpha;
  rep.constants["M_cont"] = fc.continuity;
  rep.constants["theta_prime"] = fc.theta_prime;
  rep.constants["theta"] = theta;
  rep.constants["c"] = std::tan(fc.theta_prime);
  rep.constants["omega"] = t.omega;

  auto op = associate(t);
  rep.checks.push_back(check_accretivity(op));

  // theta' bounds the numerical range of the omega-shifted form, so the
  // sector checks apply to A + omega, not to A itself
  const FormTriple<Scalar> shifted = t.omega > 0.0 ? shift_form(t, t.omega) : t;
  ComplexTriple tc = [&] {
    if constexpr (is_complex_v<Scalar>)
      return shifted;
    else
      return complexify(shifted);
  }();
  auto opc = associate(tc);
  if (theta > 1e-12) {
    auto tilted = check_accretivity(opc, theta);
    tilted.name = "accretivity(theta=" + detail::fmt(theta) + ")";
    if (t.omega > 0.0) tilted.detail += " [on the shifted form]";
    rep.checks.push_back(tilted);
  }
  auto sector = check_resolvent_sector(opc, theta);
  if (t.omega > 0.0) sector.detail += " [on the shifted form]";
  rep.checks.push_back(sector);

  const SemigroupScheme scheme =
      op.selfadjoint() ? SemigroupScheme::spectral() : default_scheme(op, times.back());
  rep.checks.push_back(check_contraction_semigroup(op, times, scheme));
  if (times.size() >= 2)
    rep.checks.push_back(check_semigroup_law(op, times[0], times[1], scheme));
  rep.checks.push_back(check_submarkovian(op, times, scheme));
  std::stable_sort(rep.checks.begin(), rep.checks.end(),
                   [](const CheckResult& a, const CheckResult& b) { return a.name < b.name; });
  return rep;
}

}  // namespace formflow
