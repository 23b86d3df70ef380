// Acceptance battery: one line per criterion, exit 0 only if all pass.
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "formflow/gallery.hpp"
#include "formflow/verification.hpp"
#include "support.hpp"

using namespace formflow;

namespace {

int failures = 0;

void report(int idx, bool ok, const std::string& label, const std::string& detail) {
  if (!ok) ++failures;
  std::printf("criterion %2d: %s  %s%s%s\n", idx, ok ? "PASS" : "FAIL", label.c_str(),
              detail.empty() ? "" : "  -- ", detail.c_str());
  std::fflush(stdout);
}

template <typename Fn>
void criterion(int idx, const std::string& label, Fn&& fn) {
  try {
    std::string detail;
    const bool ok = fn(detail);
    report(idx, ok, label, detail);
  } catch (const std::exception& e) {
    report(idx, false, label, std::string("exception: ") + e.what());
  }
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", x);
  return buf;
}

RealTriple heat_interval(int cells, BoundaryCondition bc = BoundaryCondition::Dirichlet) {
  auto mesh = Mesh1D::uniform(0.0, 1.0, cells);
  return assemble_interval(mesh, Coefficients1D::constant(mesh, 1.0, 0.0, 0.0), bc);
}

}  // namespace

int main() {
  // 1. smallest Dirichlet eigenvalue converges to pi^2 at second order
  criterion(1, "interval spectrum reaches pi^2 at order >= 1.8, within 1% at 1/128", [](std::string& d) {
    const double frozen[] = {9.837936433546, 9.861679775341, 9.867622767228, 9.869108962780};
    const int cells[] = {16, 32, 64, 128};
    bool ok = true;
    double prev_err = 0.0, last_rel = 0.0, worst_order = 1e9;
    for (int k = 0; k < 4; ++k) {
      auto sd = spectral_decompose(associate(heat_interval(cells[k])));
      const double lam = sd.eigenvalues(0);
      ok = ok && std::abs(lam - frozen[k]) <= 1e-8;
      const double err = std::abs(lam - M_PI * M_PI);
      if (k > 0) worst_order = std::min(worst_order, std::log2(prev_err / err));
      prev_err = err;
      last_rel = err / (M_PI * M_PI);
    }
    ok = ok && worst_order >= 1.8 && last_rel <= 0.01;
    d = "order " + fmt(worst_order) + ", rel err " + fmt(last_rel);
    return ok;
  });

  // 2. backward Euler halves its error per step doubling
  criterion(2, "Euler error ratio in [1.5, 2.5] per doubling at t = 0.1", [](std::string& d) {
    auto op = associate(heat_interval(128));
    auto sd = spectral_decompose(op);
    const RealVector x0 = sd.eigenvectors.col(0);
    const RealVector ref = evolve_state(op, x0, 0.1, SemigroupScheme::spectral());
    std::vector<double> errs;
    for (int n : {8, 16, 32, 64})
      errs.push_back(weighted_norm(op.mass(), RealVector(euler_evolve(op, x0, 0.1, n) - ref)));
    bool ok = true;
    std::string ratios;
    for (size_t i = 1; i < errs.size(); ++i) {
      const double r = errs[i - 1] / errs[i];
      ok = ok && r >= 1.5 && r <= 2.5;
      ratios += (i > 1 ? " " : "") + fmt(r);
    }
    d = "ratios " + ratios;
    return ok;
  });

  // 3. Yosida approximation improves with lambda and its flows stay contractive
  criterion(3, "Yosida error decreasing, <= 1e-2 at lambda = 1000, flows contractive", [](std::string& d) {
    auto op = associate(heat_interval(128));
    auto sd = spectral_decompose(op);
    const RealVector x0 = sd.eigenvectors.col(0);
    const double t = 0.1;
    const RealVector ref = evolve_state(op, x0, t, SemigroupScheme::spectral());
    std::vector<double> errs;
    bool contractive = true;
    for (double lambda : {10.0, 100.0, 1000.0}) {
      errs.push_back(weighted_norm(
          op.mass(), RealVector(evolve_state(op, x0, t, SemigroupScheme::yosida(lambda)) - ref)));
      const RealMatrix flow = expm(RealMatrix(t * yosida_generator(op, lambda)));
      contractive = contractive && weighted_operator_norm(op.mass(), flow) <= 1.0 + 1e-10;
    }
    const bool decreasing = errs[0] > errs[1] && errs[1] > errs[2];
    d = "errors " + fmt(errs[0]) + " " + fmt(errs[1]) + " " + fmt(errs[2]);
    return decreasing && errs[2] <= 1e-2 && contractive;
  });

  // 4. drift form is accretive in its derived sector and satisfies the resolvent bound
  criterion(4, "drift triple passes tilted accretivity and the 65-point sector bound", [](std::string& d) {
    auto mesh = Mesh1D::uniform(0.0, 1.0, 32);
    auto co = Coefficients1D::constant(mesh, 1.0, 1.0, 0.0);
    auto t = assemble_interval(mesh, co, BoundaryCondition::Dirichlet);
    if (t.omega != 1.0) {
      d = "derived shift is " + fmt(t.omega) + ", expected 1";
      return false;
    }
    const FormConstants fc = form_constants(t);
    const double theta = M_PI / 2 - fc.theta_prime;
    // theta' belongs to the shifted form, so the sector statements do too
    auto tc = complexify(shift_form(t, t.omega));
    auto opc = associate(tc);
    auto acc = check_accretivity(opc, theta);
    auto sec = check_resolvent_sector(opc, theta);
    d = "theta " + fmt(theta) + ", sector margin " + fmt(sec.measured);
    return acc.passed && sec.passed;
  });

  // 5. shifted semigroup equals the rescaled one
  criterion(5, "shift by 5 rescales the flow to 1e-9 at t in {0.1, 1}", [](std::string& d) {
    auto t = heat_interval(32);
    bool ok = true;
    double worst = 0.0;
    for (double time : {0.1, 1.0}) {
      auto r = rescale_consistency(t, 5.0, time, SemigroupScheme::spectral(), 1e-9);
      worst = std::max(worst, r.measured);
      ok = ok && r.passed;
    }
    d = "worst deviation " + fmt(worst);
    return ok;
  });

  // 6. heat semigroup is submarkovian, matrix-level and form-level
  criterion(6, "positivity, sub-unit mass, and clipping inequality on 1000 samples", [](std::string& d) {
    auto t = heat_interval(64);
    auto op = associate(t);
    auto matrix_level = check_submarkovian(op, {0.01, 0.1, 1.0}, SemigroupScheme::spectral(), 1e-12);
    auto form_level = check_invariance(t, ConvexSetSpec::half_space_below_one(), 1000, 1, 1e-10);
    d = "matrix violation " + fmt(matrix_level.measured) + ", form margin " +
        fmt(form_level.measured);
    return matrix_level.applicable && matrix_level.passed && form_level.applicable &&
           form_level.passed;
  });

  // 7. Neumann flow conserves constants under every scheme
  criterion(7, "2D Neumann constant preserved to 1e-10 by all four schemes", [](std::string& d) {
    auto mesh = Mesh2D::rectangle(0.0, 1.0, 0.0, 1.0, 8, 8);
    auto co = Coefficients2D::constant(mesh, Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero(),
                                       0.0);
    auto t = assemble_rect(mesh, co, BoundaryCondition::Neumann);
    auto op = associate(t);
    const RealVector one = RealVector::Ones(op.dim());
    double worst = 0.0;
    for (const auto& scheme :
         {SemigroupScheme::euler(32), SemigroupScheme::yosida(100.0), SemigroupScheme::spectral(),
          SemigroupScheme::dense_exp()}) {
      for (double time : {0.1, 1.0, 10.0}) {
        const RealVector evolved = evolve_state(op, one, time, scheme);
        worst = std::max(worst, weighted_norm(op.mass(), RealVector(evolved - one)));
      }
    }
    d = "worst drift " + fmt(worst);
    return worst <= 1e-10;
  });

  // 8. flux operator of the harmonic extension
  criterion(8, "trace operator: exact 1D form, 2D Schur match, spectrum, submarkovian", [](std::string& d) {
    RealMatrix expect(2, 2);
    expect << 1.0, -1.0, -1.0, 1.0;
    bool ok = true;
    for (int cells : {2, 6, 51}) {
      auto p = DtNProblem::interval(Mesh1D::uniform(0.0, 1.0, cells));
      ok = ok && (associate(assemble_dtn(p)).matrix() - expect).norm() <= 1e-12;
    }
    auto p2 = DtNProblem::rectangle(Mesh2D::rectangle(0.0, 1.0, 0.0, 1.0, 8, 8));
    auto op = associate(assemble_dtn(p2));
    const double delta = (op.matrix() - dtn_schur_reference(p2)).norm();
    ok = ok && delta <= 1e-9;
    auto sd = spectral_decompose(op);
    int kernel = 0;
    for (Index i = 0; i < sd.eigenvalues.size(); ++i) {
      ok = ok && sd.eigenvalues(i) >= -1e-10;
      if (sd.eigenvalues(i) <= 1e-10) ++kernel;
    }
    ok = ok && kernel == 1;
    auto markov = check_submarkovian(op, {0.1, 1.0, 10.0}, SemigroupScheme::spectral());
    ok = ok && markov.applicable && markov.passed;
    d = "Schur delta " + fmt(delta) + ", kernel dim " + std::to_string(kernel);
    return ok;
  });

  // 9. option price against the closed form
  criterion(9, "call price within 1% of 10.450583572185565 on 400 cells", [](std::string& d) {
    auto p = assemble_black_scholes(0.2, 0.05, 12.5, 400.0, 400);
    const double pde =
        black_scholes_fem_price(p, 100.0, 100.0, 1.0, SemigroupScheme::dense_exp());
    const double exact = 10.450583572185565;
    const double rel = std::abs(pde - exact) / exact;
    d = "price " + fmt(pde) + ", rel err " + fmt(rel);
    return rel <= 0.01;
  });

  // 10. vanishing regularization of a degenerate diffusion
  criterion(10, "viscosity errors nonincreasing over n = 1..256 with e_256 <= 0.05 e_1", [](std::string& d) {
    auto mesh = Mesh2D::rectangle(0.0, 1.0, 0.0, 1.0, 6, 6);
    Eigen::Matrix2d degenerate;
    degenerate << 1.0, 0.0, 0.0, 0.0;
    auto ta = assemble_rect(
        mesh, Coefficients2D::constant(mesh, degenerate, Eigen::Vector2d::Zero(), 0.0),
        BoundaryCondition::Dirichlet);
    auto tb = assemble_rect(
        mesh,
        Coefficients2D::constant(mesh, Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero(), 0.0),
        BoundaryCondition::Dirichlet);
    auto base = associate(ta);
    const RealVector f = RealVector::Ones(base.dim());
    const RealVector limit = base.resolvent(1.0, f);
    std::vector<double> errs;
    for (int n = 1; n <= 256; ++n) {
      RealTriple tn = ta;
      tn.form = ta.form + tb.form / double(n);
      const RealVector xn = associate(tn).resolvent(1.0, f);
      errs.push_back(weighted_norm(ta.H.gram, RealVector(xn - limit)));
    }
    bool monotone = true;
    for (size_t i = 1; i < errs.size(); ++i)
      monotone = monotone && errs[i] <= errs[i - 1] * (1.0 + 1e-12);
    const double ratio = errs.back() / errs.front();
    auto check = viscosity_convergence(ta, tb, 1.0, f);
    d = "ratio " + fmt(ratio) + (monotone ? ", monotone" : ", NOT monotone");
    return monotone && ratio <= 0.05 && check.passed;
  });

  // 11. compressing onto a subspace matches the brute-force domain description
  criterion(11, "compressed operator matches {Pw : Aw in span Q} on 20 seeded triples", [](std::string& d) {
    std::mt19937_64 rng(7);
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      const Index n = 4, k = 2;
      RealTriple t;
      t.form = testing::random_spd(n, rng);
      t.map = RealMatrix::Identity(n, n);
      t.H.gram = testing::random_spd(n, rng);
      t.V.gram = testing::random_spd(n, rng);
      t.omega = 0.0;

      // M-orthonormal 2-frame by Gram-Schmidt
      RealMatrix q(n, k);
      std::normal_distribution<double> gauss;
      for (Index j = 0; j < k; ++j) {
        RealVector v(n);
        for (Index i = 0; i < n; ++i) v(i) = gauss(rng);
        for (Index p = 0; p < j; ++p) v -= q.col(p).dot(t.H.gram * v) * q.col(p);
        q.col(j) = v / weighted_norm(t.H.gram, v);
      }

      auto op = associate(t);
      auto compressed = associate(compose_projection(t, q));
      // brute force: B = (Q^* M A^{-1} Q)^{-1}
      const RealMatrix a_inv = op.matrix().fullPivLu().inverse();
      const RealMatrix s_q = q.transpose() * t.H.gram * a_inv * q;
      worst = std::max(worst, (s_q * compressed.matrix() - RealMatrix::Identity(k, k)).norm());
      // vector form: w = A^{-1} Q c lands on c after compression
      for (int probe = 0; probe < 3; ++probe) {
        RealVector c(k);
        for (Index i = 0; i < k; ++i) c(i) = gauss(rng);
        const RealVector w = a_inv * (q * c);
        const RealVector z = q.transpose() * (t.H.gram * w);
        worst = std::max(worst,
                         (compressed.matrix() * z - c).norm() / std::max(1.0, c.norm()));
      }
    }
    d = "worst residual " + fmt(worst);
    return worst <= 1e-9;
  });

  std::printf("%d of 11 criteria passed\n", 11 - failures);
  return failures == 0 ? 0 : 1;
}
