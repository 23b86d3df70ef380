#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "formflow/verification.hpp"
#include "support.hpp"

using namespace formflow;
using testing::fd_heat_triple;
using testing::random_coercive_triple;

namespace {

RealTriple plain_triple(const RealMatrix& f, double omega = 0.0) {
  RealTriple t;
  t.form = f;
  const Index n = f.rows();
  t.map = RealMatrix::Identity(n, n);
  t.H.gram = RealMatrix::Identity(n, n);
  t.V.gram = RealMatrix::Identity(n, n);
  t.omega = omega;
  return t;
}

RealMatrix rotation_form() {
  RealMatrix f(2, 2);
  f << 1.0, 1.0, -1.0, 1.0;
  return f;
}

}  // namespace

TEST_CASE("accretivity holds for the heat triple and fails for a negative coefficient") {
  auto heat = associate(fd_heat_triple(16));
  auto good = check_accretivity(heat);
  CHECK(good.passed);
  CHECK(good.measured >= -1e-10);

  auto bad = associate(plain_triple(-RealMatrix::Identity(1, 1), 2.0));
  auto r = check_accretivity(bad);
  CHECK_FALSE(r.passed);
}

TEST_CASE("tilted accretivity needs a complex operator") {
  auto heat = associate(fd_heat_triple(8));
  CHECK_THROWS_AS(check_accretivity(heat, 0.3), InvalidInput);
  CHECK_THROWS_AS(check_accretivity(heat, -0.1), InvalidInput);
}

TEST_CASE("the numerical range half angle is sharp for the rotation form") {
  auto t = plain_triple(rotation_form());
  const double theta = M_PI / 2 - form_constants(t).theta_prime;  // = pi/4
  auto opc = associate(complexify(t));
  CHECK(check_accretivity(opc, theta).passed);
  CHECK_FALSE(check_accretivity(opc, theta + 0.1).passed);
}

TEST_CASE("sector resolvent bound matches the accretivity verdict both ways") {
  auto t = plain_triple(rotation_form());
  const double theta = M_PI / 2 - form_constants(t).theta_prime;
  auto opc = associate(complexify(t));
  for (double frac : {0.5, 0.99}) {
    CHECK(check_accretivity(opc, frac * theta).passed);
    CHECK(check_resolvent_sector(opc, frac * theta).passed);
  }
  CHECK_FALSE(check_accretivity(opc, theta + 0.1).passed);
  CHECK_FALSE(check_resolvent_sector(opc, theta + 0.1).passed);
}

TEST_CASE("sector check fails when a grid shift is singular") {
  // A = -I sits on the grid radius 1, where lambda + A vanishes.
  auto op = associate(plain_triple(-RealMatrix::Identity(2, 2), 2.0));
  auto r = check_resolvent_sector(op, 0.0);
  CHECK_FALSE(r.passed);
  CHECK(std::isinf(r.measured));
}

TEST_CASE("real operators cover the positive axis only") {
  auto op = associate(fd_heat_triple(8));
  CHECK(check_resolvent_sector(op, 0.0).passed);
  CHECK_THROWS_AS(check_resolvent_sector(op, 0.5), InvalidInput);
}

TEST_CASE("contraction check over several times and schemes") {
  auto op = associate(fd_heat_triple(16));
  for (auto s : {SemigroupScheme::euler(32), SemigroupScheme::spectral(),
                 SemigroupScheme::dense_exp()})
    CHECK(check_contraction_semigroup(op, {0.1, 1.0, 10.0}, s).passed);

  auto growing = associate(plain_triple(-RealMatrix::Identity(1, 1), 2.0));
  auto r = check_contraction_semigroup(growing, {1.0}, SemigroupScheme::dense_exp());
  CHECK_FALSE(r.passed);
  CHECK(r.measured == doctest::Approx(std::exp(1.0)).epsilon(1e-10));
}

TEST_CASE("semigroup law holds tightly for exact schemes and loosely for stepping") {
  auto op = associate(fd_heat_triple(16));
  auto exact = check_semigroup_law(op, 0.1, 0.4, SemigroupScheme::spectral());
  CHECK(exact.passed);
  CHECK(exact.measured <= 1e-9);
  auto stepped = check_semigroup_law(op, 0.1, 0.4, SemigroupScheme::euler(64));
  CHECK(stepped.passed);
}

TEST_CASE("clipping criterion certifies order and box invariance for the heat triple") {
  auto t = fd_heat_triple(32);
  CHECK(check_invariance(t, ConvexSetSpec::nonnegative_cone(), 500, 7).passed);
  CHECK(check_invariance(t, ConvexSetSpec::box(0.0, 1.0), 500, 7).passed);
  CHECK(check_invariance(t, ConvexSetSpec::half_space_below_one(), 500, 7).passed);
}

TEST_CASE("clipping criterion rejects sets the flow leaves") {
  // expanding flow: e^{t} pushes values above any level set
  auto expanding = plain_triple(-RealMatrix::Identity(3, 3), 2.0);
  auto r = check_invariance(expanding, ConvexSetSpec::half_space_below_one(), 500, 7);
  CHECK_FALSE(r.passed);
  CHECK(r.measured < -1e-6);

  // coupling with the wrong sign breaks positivity
  RealMatrix f(2, 2);
  f << 1.0, 3.0, 0.0, 1.0;
  auto coupled = plain_triple(f, 2.0);
  CHECK_FALSE(check_invariance(coupled, ConvexSetSpec::nonnegative_cone(), 500, 7).passed);
}

TEST_CASE("clipping criterion needs a nodal map") {
  auto t = fd_heat_triple(8);
  t.map *= 0.5;
  t.H.gram *= 4.0;
  CHECK_THROWS_AS(check_invariance(t, ConvexSetSpec::nonnegative_cone(), 10, 1), NotNodal);
}

TEST_CASE("submarkovian check on the heat triple, inapplicable with consistent mass") {
  auto op = associate(fd_heat_triple(16));
  auto r = check_submarkovian(op, {0.1, 1.0}, SemigroupScheme::spectral());
  CHECK(r.applicable);
  CHECK(r.passed);

  auto t = fd_heat_triple(16);
  const Index n = t.dim_v();
  for (Index i = 0; i + 1 < n; ++i) {
    t.H.gram(i, i + 1) = t.H.gram(i, i) / 4.0;
    t.H.gram(i + 1, i) = t.H.gram(i, i) / 4.0;
  }
  auto opc = associate(t);
  auto rc = check_submarkovian(opc, {0.1}, SemigroupScheme::dense_exp());
  CHECK_FALSE(rc.applicable);
  CHECK(rc.passed);
}

TEST_CASE("submarkovian check flags a positive off diagonal coupling") {
  RealMatrix f(2, 2);
  f << 1.0, 0.5, 0.5, 1.0;
  auto op = associate(plain_triple(f));
  auto r = check_submarkovian(op, {0.5}, SemigroupScheme::dense_exp());
  CHECK(r.applicable);
  CHECK_FALSE(r.passed);
}

TEST_CASE("real sector certificate verifies honest constants and rejects tight ones") {
  auto t = plain_triple(rotation_form());
  auto good = real_sector_constants(t, 1.0, 0.0, 300, 5);
  CHECK(good.verified);  // |skew| = 2|u^T K v| <= a(u) + a(v) on the unit sphere
  auto bad = real_sector_constants(t, 0.01, 0.0, 300, 5);
  CHECK_FALSE(bad.verified);
  CHECK(bad.worst_slack < -1e-3);
}

TEST_CASE("viscosity regularization converges at first order in 1/n") {
  auto a = fd_heat_triple(24);
  std::mt19937_64 rng(9);
  RealTriple b = a;
  b.form = testing::random_spd(a.dim_v(), rng);
  RealVector f = testing::random_matrix<Real>(a.dim_h(), 1, rng);
  auto r = viscosity_convergence(a, b, 1.0, f);
  CHECK(r.passed);
  CHECK(r.measured <= 0.05);
}

TEST_CASE("viscosity regularization rejects a non accretive perturbation") {
  auto a = fd_heat_triple(8);
  RealTriple b = a;
  b.form = -RealMatrix::Identity(a.dim_v(), a.dim_v());
  RealVector f = RealVector::Ones(a.dim_h());
  CHECK_THROWS_AS(viscosity_convergence(a, b, 1.0, f), NonElliptic);
  RealTriple c = a;
  c.H.gram *= 2.0;
  CHECK_THROWS_AS(viscosity_convergence(a, c, 1.0, f), InvalidInput);
}

TEST_CASE("shifted forms evolve as the rescaled semigroup") {
  auto t = fd_heat_triple(16);
  for (double time : {0.1, 1.0}) {
    auto r = rescale_consistency(t, 5.0, time, SemigroupScheme::spectral(), 1e-9);
    CHECK(r.passed);
  }
  auto re = rescale_consistency(t, 2.0, 0.3, SemigroupScheme::euler(64));
  CHECK(re.passed);
}

TEST_CASE("standard report passes on good triples and localizes the failure") {
  auto rep = standard_report(fd_heat_triple(16), {0.1, 0.5});
  CHECK(rep.validation.ok);
  CHECK(rep.all_passed());
  CHECK(rep.constants.at("alpha") > 0.0);
  CHECK(rep.constants.at("theta") == doctest::Approx(M_PI / 2));
  CHECK(rep.constants.at("M_cont") >= rep.constants.at("alpha"));

  RealTriple broken;
  broken.form = RealMatrix::Identity(2, 2);
  broken.map = RealMatrix::Ones(2, 2);
  broken.H.gram = RealMatrix::Identity(2, 2);
  broken.V.gram = RealMatrix::Identity(2, 2);
  auto bad = standard_report(broken);
  CHECK_FALSE(bad.all_passed());
  CHECK(bad.validation.reason == "j lacks dense image");
  CHECK(bad.checks.empty());
}

TEST_CASE("standard report covers a rotated sector correctly") {
  auto rep = standard_report(plain_triple(rotation_form()), {0.1, 1.0});
  // the rotation semigroup e^{-t} R(t) has negative entries, so the
  // positivity check must fail while every sector check passes
  CHECK_FALSE(rep.all_passed());
  CHECK(rep.constants.at("theta_prime") == doctest::Approx(M_PI / 4).epsilon(1e-10));
  CHECK(rep.constants.at("c") == doctest::Approx(1.0).epsilon(1e-10));
  bool saw_tilted = false;
  for (const auto& c : rep.checks) {
    saw_tilted |= c.name.rfind("accretivity(theta", 0) == 0;
    if (c.name == "submarkovian") {
      CHECK(c.applicable);
      CHECK_FALSE(c.passed);
      CHECK(c.measured >= 0.05);
    } else if (c.applicable) {
      CHECK(c.passed);
    }
  }
  CHECK(saw_tilted);
  CHECK(std::is_sorted(rep.checks.begin(), rep.checks.end(),
                       [](const CheckResult& a, const CheckResult& b) { return a.name < b.name; }));
}

TEST_CASE("checks are neutral under complexification") {
  auto t = fd_heat_triple(16);
  auto tc = complexify(t);
  auto op = associate(t);
  auto opc = associate(tc);

  auto a1 = check_accretivity(op);
  auto a2 = check_accretivity(opc);
  CHECK(a1.passed == a2.passed);
  CHECK(std::abs(a1.measured - a2.measured) <= 1e-10);

  auto c1 = check_contraction_semigroup(op, {0.2, 2.0}, SemigroupScheme::dense_exp());
  auto c2 = check_contraction_semigroup(opc, {0.2, 2.0}, SemigroupScheme::dense_exp());
  CHECK(c1.passed == c2.passed);
  CHECK(std::abs(c1.measured - c2.measured) <= 1e-10);

  auto s1 = check_submarkovian(op, {0.5}, SemigroupScheme::dense_exp());
  auto s2 = check_submarkovian(opc, {0.5}, SemigroupScheme::dense_exp());
  CHECK(s1.applicable == s2.applicable);
  CHECK(s1.passed == s2.passed);
  CHECK(std::abs(s1.measured - s2.measured) <= 1e-10);

  auto rep1 = standard_report(t, {0.1, 0.5});
  auto rep2 = standard_report(tc, {0.1, 0.5});
  CHECK(rep1.all_passed() == rep2.all_passed());
  for (const auto& [key, val] : rep1.constants)
    CHECK(std::abs(val - rep2.constants.at(key)) <= 1e-10 * (1.0 + std::abs(val)));
}
