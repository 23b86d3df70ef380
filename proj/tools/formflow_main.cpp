#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "formflow/gallery.hpp"
#include "formflow/io.hpp"

namespace {

using namespace formflow;

constexpr int kExitPass = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitInputError = 2;

SemigroupScheme make_scheme(const std::string& name, int steps, double lambda) {
  if (name == "euler") return SemigroupScheme::euler(steps);
  if (name == "yosida") return SemigroupScheme::yosida(lambda);
  if (name == "spectral") return SemigroupScheme::spectral();
  if (name == "exp") return SemigroupScheme::dense_exp();
  throw InvalidInput("unknown scheme \"" + name + "\" (euler|yosida|spectral|exp)");
}

RealTriple make_builtin(const std::string& name, int cells) {
  if (name == "identity") {
    const Index n = cells;
    return {VSpace<Real>::euclidean(n), HSpace<Real>::euclidean(n),
            RealMatrix::Identity(n, n), RealMatrix::Identity(n, n), 0.0};
  }
  if (name == "negative") {
    const Index n = cells;
    RealTriple t{VSpace<Real>::euclidean(n), HSpace<Real>::euclidean(n),
                 -RealMatrix::Identity(n, n), RealMatrix::Identity(n, n), 0.0};
    auto w = suggest_omega(t);
    if (!w) throw NonElliptic("negative: no admissible shift");
    t.omega = *w;
    return t;
  }
  if (name == "heat-1d" || name == "neumann-1d" || name == "drift-1d" ||
      name == "degenerate-1d") {
    auto mesh = Mesh1D::uniform(0.0, 1.0, cells);
    const auto bc =
        name == "neumann-1d" ? BoundaryCondition::Neumann : BoundaryCondition::Dirichlet;
    if (name == "drift-1d")
      return assemble_interval(mesh, Coefficients1D::constant(mesh, 1.0, 1.0, 0.0), bc);
    if (name == "degenerate-1d")
      return assemble_interval(mesh,
                               Coefficients1D::from_functions(
                                   mesh, [](double x) { return x * x; },
                                   [](double x) { return x; }, [](double) { return -0.25; }),
                               bc);
    return assemble_interval(mesh, Coefficients1D::constant(mesh, 1.0, 0.0, 0.0), bc);
  }
  if (name == "heat-2d" || name == "neumann-2d") {
    auto mesh = Mesh2D::rectangle(0.0, 1.0, 0.0, 1.0, cells, cells);
    const auto bc =
        name == "neumann-2d" ? BoundaryCondition::Neumann : BoundaryCondition::Dirichlet;
    auto co = Coefficients2D::constant(mesh, Eigen::Matrix2d::Identity(),
                                       Eigen::Vector2d::Zero(), 0.0);
    return assemble_rect(mesh, co, bc);
  }
  if (name == "black-scholes")
    return assemble_black_scholes(0.2, 0.05, 12.5, 400.0, cells).triple;
  throw InvalidInput("unknown problem \"" + name +
                     "\" (identity|negative|heat-1d|neumann-1d|drift-1d|degenerate-1d|"
                     "heat-2d|neumann-2d|black-scholes, inline JSON, or a file path)");
}

AnyTriple load_problem(const std::string& spec, int cells) {
  if (spec.empty()) throw InvalidInput("no problem given");
  if (spec.front() == '{') {
    Json j = Json::parse(spec, nullptr, false);
    if (j.is_discarded()) throw InvalidInput("problem is not valid JSON");
    return triple_from_json(j);
  }
  std::ifstream in(spec);
  if (in.good()) {
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) throw InvalidInput("problem file is not valid JSON: " + spec);
    return triple_from_json(j);
  }
  return make_builtin(spec, cells);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open output file " + path);
  out << text;
}

std::string short_number(double x) {
  std::ostringstream os;
  os << std::setprecision(4) << x;
  return os.str();
}

std::string render_table(const VerificationReport& rep) {
  std::ostringstream os;
  os << std::left << std::setw(36) << "check" << std::setw(8) << "status" << std::setw(14)
     << "measured" << std::setw(14) << "threshold" << "\n";
  os << std::string(72, '-') << "\n";
  for (const auto& c : rep.checks) {
    const char* status = !c.applicable ? "SKIP" : (c.passed ? "PASS" : "FAIL");
    os << std::left << std::setw(36) << c.name << std::setw(8) << status << std::setw(14)
       << short_number(c.measured) << std::setw(14) << short_number(c.threshold) << "\n";
  }
  os << std::string(72, '-') << "\n";
  os << "constants:";
  for (const auto& [k, v] : rep.constants) os << " " << k << "=" << short_number(v);
  os << "\n";
  if (!rep.validation.ok) os << "validation failed: " << rep.validation.reason << "\n";
  os << "overall: " << (rep.all_passed() ? "PASS" : "FAIL") << "\n";
  return os.str();
}

struct CommonOpts {
  std::string problem;
  std::string scheme = "spectral";
  int steps = 32;
  double lambda = 100.0;
  int cells = 32;
  std::vector<double> times = {0.1, 1.0, 10.0};
  std::string out;
  int seed = 1;
  double tol = -1.0;
  double theta = -1.0;
};

void add_scheme_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--scheme", o.scheme, "euler|yosida|spectral|exp")
      ->check(CLI::IsMember({"euler", "yosida", "spectral", "exp"}));
  cmd->add_option("--steps", o.steps, "backward Euler step count")->check(CLI::PositiveNumber);
  cmd->add_option("--lambda", o.lambda, "Yosida regularization parameter")
      ->check(CLI::PositiveNumber);
}

Json config_json(const CommonOpts& o, const std::string& command) {
  Json cfg;
  cfg["command"] = command;
  cfg["problem"] = o.problem;
  cfg["scheme"] = o.scheme;
  cfg["steps"] = o.steps;
  cfg["lambda"] = o.lambda;
  cfg["cells"] = o.cells;
  cfg["t"] = o.times;
  cfg["seed"] = o.seed;
  if (o.tol > 0.0) cfg["tol"] = o.tol;
  if (o.theta >= 0.0) cfg["theta"] = o.theta;
  return cfg;
}

int cmd_verify(const CommonOpts& o) {
  AnyTriple any = load_problem(o.problem, o.cells);
  VerificationReport rep = std::visit(
      [&](const auto& t) {
        auto r = standard_report(t, o.times);
        if (o.theta >= 0.0 && r.validation.ok) {
          const auto shifted = t.omega > 0.0 ? shift_form(t, t.omega) : t;
          ComplexTriple tc = [&] {
            if constexpr (is_complex_v<std::decay_t<decltype(t.form(0, 0))>>)
              return shifted;
            else
              return complexify(shifted);
          }();
          auto extra = check_accretivity(associate(tc), o.theta,
                                         o.tol > 0.0 ? o.tol : 1e-10);
          extra.name = "accretivity(requested theta)";
          r.checks.push_back(extra);
        }
        return r;
      },
      any);

  std::cout << render_table(rep);
  Json doc;
  doc["config"] = config_json(o, "verify");
  doc["report"] = report_to_json(rep);
  const std::string text = doc.dump(2) + "\n";
  if (!o.out.empty())
    write_text(o.out, text);
  else
    std::cout << text;
  return rep.all_passed() ? kExitPass : kExitCheckFailed;
}

int cmd_evolve(const CommonOpts& o, const std::string& initial, const std::string& compare,
               double strike) {
  const SemigroupScheme scheme = make_scheme(o.scheme, o.steps, o.lambda);
  std::ostringstream os;

  if (initial == "payoff") {
    if (o.problem != "black-scholes")
      throw InvalidInput("--initial payoff requires --problem black-scholes");
    auto p = assemble_black_scholes(0.2, 0.05, 12.5, 400.0, o.cells);
    auto op = associate(p.triple);
    auto nodes = retained_nodes(p.mesh, BoundaryCondition::Dirichlet);
    RealVector x0(op.dim());
    for (Index i = 0; i < x0.size(); ++i) x0(i) = std::max(nodes[size_t(i)] - strike, 0.0);
    auto result = evolve(op, x0, o.times, scheme);
    write_evolution_csv(os, result);
    write_text(o.out, os.str());
    return kExitPass;
  }

  AnyTriple any = load_problem(o.problem, o.cells);
  std::visit(
      [&](const auto& t) {
        using Scalar = typename std::decay_t<decltype(t.form(0, 0))>;
        auto op = associate(t);
        Vector<Scalar> x0;
        if (initial == "ones") {
          x0 = Vector<Scalar>::Ones(op.dim());
        } else if (initial == "random") {
          std::mt19937_64 rng(uint64_t(o.seed));
          x0 = random_gaussian_vector<Scalar>(op.dim(), rng);
        } else {
          throw InvalidInput("unknown initial state \"" + initial + "\" (ones|random|payoff)");
        }
        auto result = evolve(op, x0, o.times, scheme);
        if (compare.empty()) {
          write_evolution_csv(os, result);
          return;
        }
        const SemigroupScheme other = make_scheme(compare, o.steps, o.lambda);
        auto result2 = evolve(op, x0, o.times, other);
        os << "t,norm_" << scheme_name(scheme.kind) << ",norm_" << scheme_name(other.kind)
           << ",delta\n";
        for (size_t i = 0; i < result.times.size(); ++i) {
          const double delta =
              weighted_norm(op.mass(), Vector<Scalar>(result.states[i] - result2.states[i]));
          os << detail::full_precision(result.times[i]) << ","
             << detail::full_precision(result.norms[i]) << ","
             << detail::full_precision(result2.norms[i]) << ","
             << detail::full_precision(delta) << "\n";
        }
      },
      any);
  write_text(o.out, os.str());
  return kExitPass;
}

int cmd_dtn(const CommonOpts& o, int dim, int nx, int ny, const std::string& mass) {
  const MassKind mk = mass == "consistent" ? MassKind::Consistent : MassKind::Lumped;
  DtNProblem p = dim == 1
                     ? DtNProblem::interval(Mesh1D::uniform(0.0, 1.0, o.cells))
                     : DtNProblem::rectangle(
                           Mesh2D::rectangle(0.0, 1.0, 0.0, 1.0, nx > 0 ? nx : o.cells,
                                             ny > 0 ? ny : o.cells),
                           mk);
  auto t = assemble_dtn(p);
  auto op = associate(t);
  const RealMatrix ref = dtn_schur_reference(p);
  const double delta = (op.matrix() - ref).norm() / std::max(1.0, ref.norm());
  auto sd = spectral_decompose(op);
  auto markov = check_submarkovian(op, o.times, SemigroupScheme::spectral());
  const double tol = o.tol > 0.0 ? o.tol : 1e-9;

  Json doc;
  doc["config"] = config_json(o, "dtn");
  doc["config"]["dim"] = dim;
  doc["config"]["mass"] = mass;
  doc["operator"] = detail::matrix_to_json(op.matrix());
  Json spectrum = Json::array();
  for (Index i = 0; i < sd.eigenvalues.size(); ++i) spectrum.push_back(sd.eigenvalues(i));
  doc["spectrum"] = spectrum;
  doc["schur_delta"] = delta;
  doc["schur_tolerance"] = tol;
  doc["submarkovian"] = check_to_json(markov);
  const bool ok = delta <= tol && (!markov.applicable || markov.passed);
  doc["all_passed"] = ok;
  write_text(o.out, doc.dump(2) + "\n");
  return ok ? kExitPass : kExitCheckFailed;
}

int cmd_bs(const CommonOpts& o, double sigma, double rate, double strike, double maturity,
           double spot, double smin, double smax) {
  auto p = assemble_black_scholes(sigma, rate, smin, smax, o.cells);
  const SemigroupScheme scheme = make_scheme(o.scheme, o.steps, o.lambda);
  const double pde = black_scholes_fem_price(p, spot, strike, maturity, scheme);
  const double exact = black_scholes_call_price(spot, strike, maturity, sigma, rate);
  const double rel = std::abs(pde - exact) / std::max(std::abs(exact), 1e-300);
  const double bound = o.tol > 0.0 ? o.tol : 0.01;

  Json doc;
  doc["config"] = config_json(o, "bs");
  doc["config"]["sigma"] = sigma;
  doc["config"]["rate"] = rate;
  doc["config"]["strike"] = strike;
  doc["config"]["maturity"] = maturity;
  doc["config"]["spot"] = spot;
  doc["config"]["s_min"] = smin;
  doc["config"]["s_max"] = smax;
  doc["pde_price"] = pde;
  doc["closed_form_price"] = exact;
  doc["relative_error"] = rel;
  doc["error_bound"] = bound;
  doc["all_passed"] = rel <= bound;
  write_text(o.out, doc.dump(2) + "\n");
  return rel <= bound ? kExitPass : kExitCheckFailed;
}

int cmd_convergence(const CommonOpts& o, const std::string& kind, std::vector<int> levels) {
  if (levels.empty()) throw InvalidInput("convergence: need at least one level");
  std::ostringstream os;
  if (kind == "eigenvalue") {
    os << "cells,h,lambda1,abs_error,order\n";
    double prev_err = 0.0;
    for (size_t i = 0; i < levels.size(); ++i) {
      const int cells = levels[i];
      if (cells < 2) throw InvalidInput("convergence: need at least 2 cells");
      auto mesh = Mesh1D::uniform(0.0, 1.0, cells);
      auto t = assemble_interval(mesh, Coefficients1D::constant(mesh, 1.0, 0.0, 0.0),
                                 BoundaryCondition::Dirichlet);
      auto sd = spectral_decompose(associate(t));
      const double err = std::abs(sd.eigenvalues(0) - M_PI * M_PI);
      os << cells << "," << detail::full_precision(1.0 / cells) << ","
         << detail::full_precision(sd.eigenvalues(0)) << "," << detail::full_precision(err);
      if (i == 0)
        os << ",\n";
      else
        os << "," << detail::full_precision(std::log2(prev_err / err)) << "\n";
      prev_err = err;
    }
  } else if (kind == "euler") {
    auto mesh = Mesh1D::uniform(0.0, 1.0, o.cells);
    auto t = assemble_interval(mesh, Coefficients1D::constant(mesh, 1.0, 0.0, 0.0),
                               BoundaryCondition::Dirichlet);
    auto op = associate(t);
    auto sd = spectral_decompose(op);
    const RealVector x0 = sd.eigenvectors.col(0);
    const double time = o.times.front();
    const RealVector ref = evolve_state(op, x0, time, SemigroupScheme::spectral());
    os << "steps,error,ratio\n";
    double prev_err = 0.0;
    for (size_t i = 0; i < levels.size(); ++i) {
      const int n = levels[i];
      if (n < 1) throw InvalidInput("convergence: steps must be >= 1");
      const RealVector xn = evolve_state(op, x0, time, SemigroupScheme::euler(n));
      const double err = weighted_norm(op.mass(), RealVector(xn - ref));
      os << n << "," << detail::full_precision(err);
      if (i == 0)
        os << ",\n";
      else
        os << "," << detail::full_precision(prev_err / err) << "\n";
      prev_err = err;
    }
  } else {
    throw InvalidInput("unknown convergence kind \"" + kind + "\" (eigenvalue|euler)");
  }
  write_text(o.out, os.str());
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semigroup laboratory for sesquilinear form triples"};
  app.require_subcommand(1);

  CommonOpts o;
  std::string initial = "ones";
  std::string compare;
  std::string mass = "lumped";
  std::string kind = "eigenvalue";
  std::vector<int> levels = {16, 32, 64, 128};
  int dim = 2, nx = 0, ny = 0;
  double sigma = 0.2, rate = 0.05, strike = 100.0, maturity = 1.0, spot = 100.0;
  double smin = 12.5, smax = 400.0;

  const auto add_common = [&](CLI::App* cmd, bool with_problem) {
    if (with_problem)
      cmd->add_option("--problem", o.problem,
                      "named problem, inline JSON triple, or JSON file path");
    cmd->add_option("--cells", o.cells, "mesh cells (per side in 2D)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--t", o.times, "time grid t0,t1,...")->delimiter(',');
    cmd->add_option("--out", o.out, "output file (default: standard output)");
    cmd->add_option("--tol", o.tol, "tolerance override")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", o.seed, "seed for sampled data");
  };

  auto* verify = app.add_subcommand("verify", "run the standard check battery on a triple");
  add_common(verify, true);
  verify->add_option("--theta", o.theta, "extra tilted accretivity angle (radians)");

  auto* evolve_cmd = app.add_subcommand("evolve", "evaluate the semigroup on a time grid");
  add_common(evolve_cmd, true);
  add_scheme_flags(evolve_cmd, o);
  evolve_cmd->add_option("--initial", initial, "ones|random|payoff");
  evolve_cmd->add_option("--compare", compare, "second scheme, adds per-time delta columns")
      ->check(CLI::IsMember({"euler", "yosida", "spectral", "exp"}));
  evolve_cmd->add_option("--strike", strike, "payoff strike (with --initial payoff)");

  auto* dtn = app.add_subcommand("dtn", "boundary flux operator of the harmonic extension");
  add_common(dtn, false);
  dtn->add_option("--dim", dim, "1 or 2")->check(CLI::IsMember({1, 2}));
  dtn->add_option("--nx", nx, "2D cells in x")->check(CLI::PositiveNumber);
  dtn->add_option("--ny", ny, "2D cells in y")->check(CLI::PositiveNumber);
  dtn->add_option("--mass", mass, "boundary mass: lumped|consistent")
      ->check(CLI::IsMember({"lumped", "consistent"}));

  auto* bs = app.add_subcommand("bs", "price a European call against the closed form");
  add_common(bs, false);
  add_scheme_flags(bs, o);
  bs->add_option("--sigma", sigma, "volatility")->check(CLI::PositiveNumber);
  bs->add_option("--rate", rate, "interest rate");
  bs->add_option("--strike", strike, "strike");
  bs->add_option("--maturity", maturity, "maturity")->check(CLI::PositiveNumber);
  bs->add_option("--spot", spot, "spot price")->check(CLI::PositiveNumber);
  bs->add_option("--smin", smin, "left truncation")->check(CLI::PositiveNumber);
  bs->add_option("--smax", smax, "right truncation")->check(CLI::PositiveNumber);

  auto* conv = app.add_subcommand("convergence", "emit a refinement table as CSV");
  add_common(conv, false);
  conv->add_option("--kind", kind, "eigenvalue|euler")
      ->check(CLI::IsMember({"eigenvalue", "euler"}));
  conv->add_option("--levels", levels, "cells or step counts, comma separated")
      ->delimiter(',');

  // subcommand defaults that differ from the shared ones
  bs->parse_complete_callback([&] {
    if (bs->count("--cells") == 0) o.cells = 400;
    if (bs->count("--scheme") == 0) o.scheme = "exp";
  });
  evolve_cmd->parse_complete_callback([&] {
    if (initial == "payoff" && evolve_cmd->count("--cells") == 0) o.cells = 200;
  });
  dtn->parse_complete_callback([&] {
    if (dtn->count("--cells") == 0) o.cells = 8;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitInputError;
  }

  try {
    if (verify->parsed()) return cmd_verify(o);
    if (evolve_cmd->parsed()) return cmd_evolve(o, initial, compare, strike);
    if (dtn->parsed()) return cmd_dtn(o, dim, nx, ny, mass);
    if (bs->parsed()) return cmd_bs(o, sigma, rate, strike, maturity, spot, smin, smax);
    if (conv->parsed()) return cmd_convergence(o, kind, levels);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
