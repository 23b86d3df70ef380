#pragma once

#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "formflow/engines.hpp"

namespace formflow {

enum class BoundaryCondition { Dirichlet, Neumann };
enum class MassKind { Lumped, Consistent };

// ---------------------------------------------------------------------------
// one dimensional problems
// ---------------------------------------------------------------------------

struct Mesh1D {
  std::vector<double> nodes;  // strictly increasing

  static Mesh1D uniform(double a, double b, int cells) {
    if (!(a < b) || cells < 1) throw InvalidInput("Mesh1D::uniform: need a < b and cells >= 1");
    Mesh1D m;
    m.nodes.resize(cells + 1);
    for (int i = 0; i <= cells; ++i) m.nodes[i] = a + (b - a) * double(i) / cells;
    return m;
  }

  int cells() const { return int(nodes.size()) - 1; }
  double h(int e) const { return nodes[e + 1] - nodes[e]; }

  void check() const {
    if (nodes.size() < 2) throw InvalidInput("Mesh1D: need at least two nodes");
    for (std::size_t i = 1; i < nodes.size(); ++i)
      if (!(nodes[i] > nodes[i - 1])) throw InvalidInput("Mesh1D: nodes must increase");
  }
};

/// Elementwise coefficients of the form
///   a(u,v) = sum_e  alpha_e u' v' + beta_e u' v + gamma_e u v   (midpoint values),
/// with the drift controlled by the diffusion:  beta^2 <= c1 * alpha.
struct Coefficients1D {
  std::vector<double> alpha, beta, gamma;
  double c1 = 0.0;
  double gamma_minus_inf = 0.0;  // bound on the negative part of gamma

  static Coefficients1D constant(const Mesh1D& mesh, double a, double b, double g) {
    mesh.check();
    Coefficients1D c;
    const int ne = mesh.cells();
    c.alpha.assign(ne, a);
    c.beta.assign(ne, b);
    c.gamma.assign(ne, g);
    c.gamma_minus_inf = std::max(0.0, -g);
    if (b != 0.0) {
      if (!(a > 0.0))
        throw CoefficientViolation("Coefficients1D: drift needs positive diffusion");
      c.c1 = b * b / a;
    }
    c.check(mesh);
    return c;
  }

  template <typename FA, typename FB, typename FG>
  static Coefficients1D from_functions(const Mesh1D& mesh, FA fa, FB fb, FG fg) {
    mesh.check();
    Coefficients1D c;
    const int ne = mesh.cells();
    c.alpha.resize(ne);
    c.beta.resize(ne);
    c.gamma.resize(ne);
    for (int e = 0; e < ne; ++e) {
      const double x = 0.5 * (mesh.nodes[e] + mesh.nodes[e + 1]);
      c.alpha[e] = fa(x);
      c.beta[e] = fb(x);
      c.gamma[e] = fg(x);
      c.gamma_minus_inf = std::max(c.gamma_minus_inf, -c.gamma[e]);
      if (c.beta[e] != 0.0) {
        if (!(c.alpha[e] > 0.0))
          throw CoefficientViolation("Coefficients1D: drift needs positive diffusion");
        c.c1 = std::max(c.c1, c.beta[e] * c.beta[e] / c.alpha[e]);
      }
    }
    c.check(mesh);
    return c;
  }

  void check(const Mesh1D& mesh) const {
    const std::size_t ne = std::size_t(mesh.cells());
    if (alpha.size() != ne || beta.size() != ne || gamma.size() != ne)
      throw InvalidInput("Coefficients1D: one value per element required");
    for (std::size_t e = 0; e < ne; ++e) {
      if (!(alpha[e] >= 0.0)) throw CoefficientViolation("Coefficients1D: alpha must be >= 0");
      if (beta[e] * beta[e] > c1 * alpha[e] * (1.0 + 1e-12))
        throw CoefficientViolation("Coefficients1D: beta^2 <= c1 * alpha violated");
      if (-gamma[e] > gamma_minus_inf * (1.0 + 1e-12) + 1e-300)
        throw CoefficientViolation("Coefficients1D: gamma_minus_inf does not bound gamma");
    }
  }
};

struct SectorialConstants {
  double c = 1.0;
  double omega = 0.0;
};

/// Constants for the real sector inequality of the drift form, from the
/// elementwise Young argument:  omega(c) = c ||gamma^-|| + c1 (c + 1/c) / 2.
inline SectorialConstants derive_sectorial_constants_1d(const Coefficients1D& co, double c = 1.0) {
  if (!(c > 0.0)) throw InvalidInput("derive_sectorial_constants_1d: c must be positive");
  return {c, c * co.gamma_minus_inf + co.c1 * (c + 1.0 / c) / 2.0};
}

inline std::vector<int> retained_node_indices_1d(const Mesh1D& mesh, BoundaryCondition bc) {
  const int nn = int(mesh.nodes.size());
  std::vector<int> keep;
  for (int i = 0; i < nn; ++i) {
    if (bc == BoundaryCondition::Dirichlet && (i == 0 || i == nn - 1)) continue;
    keep.push_back(i);
  }
  return keep;
}

inline std::vector<double> retained_nodes(const Mesh1D& mesh, BoundaryCondition bc) {
  std::vector<double> xs;
  for (int i : retained_node_indices_1d(mesh, bc)) xs.push_back(mesh.nodes[i]);
  return xs;
}

namespace detail {

inline RealMatrix restrict_to(const RealMatrix& a, const std::vector<int>& keep) {
  const Index k = Index(keep.size());
  RealMatrix r(k, k);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j) r(i, j) = a(keep[i], keep[j]);
  return r;
}

/// Full (no boundary condition) 1D matrices with one point quadrature for the
/// coefficient terms; the mass is exact (Consistent) or row lumped.
inline void assemble_1d_full(const Mesh1D& mesh, const Coefficients1D& co, MassKind mass,
                             RealMatrix& form, RealMatrix& m_h, RealMatrix& unit_stiffness) {
  const int nn = int(mesh.nodes.size());
  form = RealMatrix::Zero(nn, nn);
  m_h = RealMatrix::Zero(nn, nn);
  unit_stiffness = RealMatrix::Zero(nn, nn);
  for (int e = 0; e < mesh.cells(); ++e) {
    const double h = mesh.h(e);
    const int l = e, r = e + 1;
    const double k = co.alpha[e] / h;
    form(l, l) += k;
    form(r, r) += k;
    form(l, r) -= k;
    form(r, l) -= k;
    const double b = co.beta[e] / 2.0;
    form(l, l) -= b;
    form(r, l) -= b;
    form(l, r) += b;
    form(r, r) += b;
    const double g = co.gamma[e] * h / 4.0;
    form(l, l) += g;
    form(l, r) += g;
    form(r, l) += g;
    form(r, r) += g;
    unit_stiffness(l, l) += 1.0 / h;
    unit_stiffness(r, r) += 1.0 / h;
    unit_stiffness(l, r) -= 1.0 / h;
    unit_stiffness(r, l) -= 1.0 / h;
    if (mass == MassKind::Lumped) {
      m_h(l, l) += h / 2.0;
      m_h(r, r) += h / 2.0;
    } else {
      m_h(l, l) += h / 3.0;
      m_h(r, r) += h / 3.0;
      m_h(l, r) += h / 6.0;
      m_h(r, l) += h / 6.0;
    }
  }
}

template <typename T>
double certify_omega(T& triple, double derived) {
  if (elliptic_at(triple, derived)) return derived;
  const auto w = suggest_omega(triple);
  if (!w) throw NonElliptic("assembler: no shift certifies ellipticity");
  return std::max(derived, *w);
}

}  // namespace detail

/// P1 triple for the drift diffusion form on an interval.  H is L2 with the
/// chosen mass, J the identity on the retained nodes, and the V norm the unit
/// H1 norm.  The certificate shift comes from the derived sector constants,
/// raised along the ladder when the discrete form needs more.
inline RealTriple assemble_interval(const Mesh1D& mesh, const Coefficients1D& co,
                                    BoundaryCondition bc, MassKind mass = MassKind::Lumped) {
  mesh.check();
  co.check(mesh);
  RealMatrix form, m_h, ks;
  detail::assemble_1d_full(mesh, co, mass, form, m_h, ks);
  const auto keep = retained_node_indices_1d(mesh, bc);
  if (keep.empty()) throw InvalidInput("assemble_interval: no unknowns left");
  RealTriple t;
  t.form = detail::restrict_to(form, keep);
  t.H.gram = detail::restrict_to(m_h, keep);
  t.V.gram = detail::restrict_to(ks, keep) + t.H.gram;
  t.map = RealMatrix::Identity(Index(keep.size()), Index(keep.size()));
  t.omega = detail::certify_omega(t, derive_sectorial_constants_1d(co).omega);
  return t;
}

// ---------------------------------------------------------------------------
// two dimensional problems
// ---------------------------------------------------------------------------

struct Mesh2D {
  std::vector<std::array<double, 2>> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> boundary;  // node indices along the closed boundary loop

  static Mesh2D rectangle(double x0, double x1, double y0, double y1, int nx, int ny) {
    if (!(x0 < x1) || !(y0 < y1) || nx < 1 || ny < 1)
      throw InvalidInput("Mesh2D::rectangle: degenerate box or cell counts");
    Mesh2D m;
    const auto id = [nx](int i, int j) { return i + j * (nx + 1); };
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i)
        m.nodes.push_back({x0 + (x1 - x0) * double(i) / nx, y0 + (y1 - y0) * double(j) / ny});
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        m.triangles.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
        m.triangles.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
      }
    for (int i = 0; i <= nx; ++i) m.boundary.push_back(id(i, 0));
    for (int j = 1; j <= ny; ++j) m.boundary.push_back(id(nx, j));
    for (int i = nx - 1; i >= 0; --i) m.boundary.push_back(id(i, ny));
    for (int j = ny - 1; j >= 1; --j) m.boundary.push_back(id(0, j));
    return m;
  }

  int num_nodes() const { return int(nodes.size()); }

  void check() const {
    if (nodes.empty() || triangles.empty()) throw InvalidInput("Mesh2D: empty mesh");
    std::vector<int> parent(nodes.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<char> used(nodes.size(), 0);
    auto find = [&](int a) {
      while (parent[a] != a) a = parent[a] = parent[parent[a]];
      return a;
    };
    for (const auto& t : triangles) {
      for (int v : t) {
        if (v < 0 || v >= int(nodes.size())) throw InvalidInput("Mesh2D: vertex out of range");
        used[v] = 1;
      }
      parent[find(t[1])] = find(t[0]);
      parent[find(t[2])] = find(t[0]);
    }
    const int root = find(triangles[0][0]);
    for (std::size_t v = 0; v < nodes.size(); ++v)
      if (!used[v] || find(int(v)) != root)
        throw DisconnectedMesh("Mesh2D: mesh does not connect all nodes");
    for (int b : boundary)
      if (b < 0 || b >= int(nodes.size())) throw InvalidInput("Mesh2D: boundary index out of range");
  }

  double area(int t) const {
    const auto& p0 = nodes[triangles[t][0]];
    const auto& p1 = nodes[triangles[t][1]];
    const auto& p2 = nodes[triangles[t][2]];
    return 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
  }
};

/// Per triangle coefficients of
///   a(u,v) = sum_T  (A grad u) . grad v + (b . grad u) v + c u v
/// with the admissibility bound |b . xi|^2 <= c1 (A_sym xi . xi).
struct Coefficients2D {
  std::vector<Eigen::Matrix2d> a;
  std::vector<Eigen::Vector2d> b;
  std::vector<double> c;
  double c1 = 0.0;
  double c_minus_inf = 0.0;

  static Coefficients2D constant(const Mesh2D& mesh, const Eigen::Matrix2d& diff,
                                 const Eigen::Vector2d& drift, double react) {
    Coefficients2D co;
    const std::size_t nt = mesh.triangles.size();
    co.a.assign(nt, diff);
    co.b.assign(nt, drift);
    co.c.assign(nt, react);
    co.c_minus_inf = std::max(0.0, -react);
    co.finalize(mesh);
    return co;
  }

  void finalize(const Mesh2D& mesh) {
    const std::size_t nt = mesh.triangles.size();
    if (a.size() != nt || b.size() != nt || c.size() != nt)
      throw InvalidInput("Coefficients2D: one value per triangle required");
    for (std::size_t t = 0; t < nt; ++t) {
      const Eigen::Matrix2d as = 0.5 * (a[t] + a[t].transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(as);
      if (es.eigenvalues()(0) < -1e-14 * std::max(1.0, as.norm()))
        throw CoefficientViolation("Coefficients2D: diffusion must be positive semidefinite");
      if (b[t].norm() > 0.0) {
        if (es.eigenvalues()(0) <= 0.0)
          throw CoefficientViolation("Coefficients2D: drift needs positive definite diffusion");
        const double need = b[t].dot(as.inverse() * b[t]);
        c1 = std::max(c1, need);
      }
      c_minus_inf = std::max(c_minus_inf, -c[t]);
    }
  }
};

inline std::vector<int> retained_node_indices_2d(const Mesh2D& mesh, BoundaryCondition bc) {
  std::vector<char> is_boundary(mesh.nodes.size(), 0);
  for (int b : mesh.boundary) is_boundary[b] = 1;
  std::vector<int> keep;
  for (int i = 0; i < mesh.num_nodes(); ++i)
    if (bc == BoundaryCondition::Neumann || !is_boundary[i]) keep.push_back(i);
  return keep;
}

namespace detail {

inline void triangle_gradients(const Mesh2D& mesh, int t, Eigen::Matrix<double, 2, 3>& grads,
                               double& area) {
  area = mesh.area(t);
  if (!(area > 0.0)) throw InvalidInput("Mesh2D: triangle with nonpositive area");
  const auto& tri = mesh.triangles[t];
  for (int i = 0; i < 3; ++i) {
    const auto& pa = mesh.nodes[tri[(i + 1) % 3]];
    const auto& pb = mesh.nodes[tri[(i + 2) % 3]];
    grads(0, i) = (pa[1] - pb[1]) / (2.0 * area);
    grads(1, i) = (pb[0] - pa[0]) / (2.0 * area);
  }
}

inline void assemble_2d_full(const Mesh2D& mesh, const Coefficients2D& co, MassKind mass,
                             RealMatrix& form, RealMatrix& m_h, RealMatrix& unit_stiffness) {
  const int nn = mesh.num_nodes();
  form = RealMatrix::Zero(nn, nn);
  m_h = RealMatrix::Zero(nn, nn);
  unit_stiffness = RealMatrix::Zero(nn, nn);
  Eigen::Matrix<double, 2, 3> g;
  double area;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    triangle_gradients(mesh, int(t), g, area);
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double diff = area * g.col(i).dot(co.a[t] * g.col(j));
        const double drift = area * co.b[t].dot(g.col(j)) / 3.0;
        const double react = co.c[t] * area / 9.0;
        form(tri[i], tri[j]) += diff + drift + react;
        unit_stiffness(tri[i], tri[j]) += area * g.col(i).dot(g.col(j));
        if (mass == MassKind::Consistent)
          m_h(tri[i], tri[j]) += area / 12.0 * (i == j ? 2.0 : 1.0);
      }
    if (mass == MassKind::Lumped)
      for (int i = 0; i < 3; ++i) m_h(tri[i], tri[i]) += area / 3.0;
  }
}

}  // namespace detail

/// P1 triple on a triangulated rectangle, same conventions as the interval
/// assembler.
inline RealTriple assemble_rect(const Mesh2D& mesh, const Coefficients2D& co,
                                BoundaryCondition bc, MassKind mass = MassKind::Lumped) {
  mesh.check();
  RealMatrix form, m_h, ks;
  detail::assemble_2d_full(mesh, co, mass, form, m_h, ks);
  const auto keep = retained_node_indices_2d(mesh, bc);
  if (keep.empty()) throw InvalidInput("assemble_rect: no unknowns left");
  RealTriple t;
  t.form = detail::restrict_to(form, keep);
  t.H.gram = detail::restrict_to(m_h, keep);
  t.V.gram = detail::restrict_to(ks, keep) + t.H.gram;
  t.map = RealMatrix::Identity(Index(keep.size()), Index(keep.size()));
  const double derived = co.c_minus_inf + co.c1;  // the 1D formula at c = 1
  t.omega = detail::certify_omega(t, derived);
  return t;
}

// ---------------------------------------------------------------------------
// trace operator (Dirichlet to Neumann)
// ---------------------------------------------------------------------------

/// Data for the form  a(u,v) = integral grad u . grad v  on the whole domain
/// with j = trace onto the boundary nodes.  The associated operator maps
/// boundary data to the normal flux of its harmonic extension.
struct DtNProblem {
  RealMatrix stiffness;      // full Neumann stiffness, all nodes
  RealMatrix domain_gram;    // V norm: stiffness + domain mass
  RealMatrix boundary_mass;  // Gram of the trace space
  std::vector<int> boundary; // rows of J, indices into the full node set

  static DtNProblem interval(const Mesh1D& mesh) {
    mesh.check();
    DtNProblem p;
    Coefficients1D co = Coefficients1D::constant(mesh, 1.0, 0.0, 0.0);
    RealMatrix form, m_h, ks;
    detail::assemble_1d_full(mesh, co, MassKind::Lumped, form, m_h, ks);
    p.stiffness = form;
    p.domain_gram = ks + m_h;
    p.boundary = {0, int(mesh.nodes.size()) - 1};
    p.boundary_mass = RealMatrix::Identity(2, 2);  // counting measure on two points
    return p;
  }

  static DtNProblem rectangle(const Mesh2D& mesh, MassKind mass = MassKind::Lumped) {
    mesh.check();
    if (mesh.boundary.size() < 3) throw InvalidInput("DtNProblem: boundary loop too short");
    DtNProblem p;
    Coefficients2D co =
        Coefficients2D::constant(mesh, Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero(), 0.0);
    RealMatrix form, m_h, ks;
    detail::assemble_2d_full(mesh, co, MassKind::Lumped, form, m_h, ks);
    p.stiffness = form;
    p.domain_gram = ks + m_h;
    p.boundary = mesh.boundary;
    const int nb = int(p.boundary.size());
    p.boundary_mass = RealMatrix::Zero(nb, nb);
    for (int k = 0; k < nb; ++k) {
      const int kn = (k + 1) % nb;
      const auto& pa = mesh.nodes[p.boundary[k]];
      const auto& pb = mesh.nodes[p.boundary[kn]];
      const double len = std::hypot(pb[0] - pa[0], pb[1] - pa[1]);
      if (!(len > 0.0)) throw InvalidInput("DtNProblem: degenerate boundary edge");
      if (mass == MassKind::Lumped) {
        p.boundary_mass(k, k) += len / 2.0;
        p.boundary_mass(kn, kn) += len / 2.0;
      } else {
        p.boundary_mass(k, k) += len / 3.0;
        p.boundary_mass(kn, kn) += len / 3.0;
        p.boundary_mass(k, kn) += len / 6.0;
        p.boundary_mass(kn, k) += len / 6.0;
      }
    }
    return p;
  }
};

/// Triple whose associated operator is the Dirichlet to Neumann map.  j picks
/// the boundary nodes, so it is not injective; the interior provides the
/// harmonic extension.
inline RealTriple assemble_dtn(const DtNProblem& p) {
  const Index n = p.stiffness.rows();
  const Index m = Index(p.boundary.size());
  if (m < 1 || m > n) throw InvalidInput("assemble_dtn: bad boundary size");
  RealTriple t;
  t.form = p.stiffness;
  t.V.gram = p.domain_gram;
  t.H.gram = p.boundary_mass;
  t.map = RealMatrix::Zero(m, n);
  for (Index k = 0; k < m; ++k) t.map(k, p.boundary[k]) = 1.0;
  t.omega = detail::certify_omega(t, 1.0);
  return t;
}

/// Block elimination route to the same operator: eliminate the interior and
/// invert the trace Gram,  M^{-1} (F_bb - F_bi F_ii^{-1} F_ib).
inline RealMatrix dtn_schur_reference(const DtNProblem& p) {
  const Index n = p.stiffness.rows();
  const Index m = Index(p.boundary.size());
  std::vector<char> is_b(n, 0);
  for (int b : p.boundary) is_b[b] = 1;
  std::vector<int> interior;
  for (Index i = 0; i < n; ++i)
    if (!is_b[i]) interior.push_back(int(i));
  const Index ni = Index(interior.size());
  RealMatrix fbb(m, m), fbi(m, ni), fib(ni, m), fii(ni, ni);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) fbb(i, j) = p.stiffness(p.boundary[i], p.boundary[j]);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < ni; ++j) fbi(i, j) = p.stiffness(p.boundary[i], interior[j]);
  for (Index i = 0; i < ni; ++i)
    for (Index j = 0; j < m; ++j) fib(i, j) = p.stiffness(interior[i], p.boundary[j]);
  for (Index i = 0; i < ni; ++i)
    for (Index j = 0; j < ni; ++j) fii(i, j) = p.stiffness(interior[i], interior[j]);
  RealMatrix schur = fbb;
  if (ni > 0) {
    Eigen::FullPivLU<RealMatrix> lu(fii);
    if (!lu.isInvertible())
      throw SingularInterior("dtn_schur_reference: interior stiffness block singular");
    schur -= fbi * lu.solve(fib);
  }
  Eigen::LLT<RealMatrix> mass(p.boundary_mass);
  if (mass.info() != Eigen::Success)
    throw InvalidInput("dtn_schur_reference: boundary mass not positive definite");
  return mass.solve(schur);
}

// ---------------------------------------------------------------------------
// option pricing
// ---------------------------------------------------------------------------

/// Spatial operator of the backward value PDE in time to maturity:
///   alpha = sigma^2 s^2 / 2,  beta = (sigma^2 - r) s,  gamma = r,
/// Dirichlet at both truncation ends.
struct BlackScholesProblem {
  Mesh1D mesh;
  Coefficients1D coefficients;
  RealTriple triple;
  double sigma = 0.0;
  double rate = 0.0;
};

inline BlackScholesProblem assemble_black_scholes(double sigma, double rate, double s_min,
                                                  double s_max, int cells,
                                                  MassKind mass = MassKind::Lumped) {
  if (!(sigma > 0.0)) throw CoefficientViolation("black_scholes: sigma must be positive");
  if (!(rate >= 0.0)) throw CoefficientViolation("black_scholes: rate must be >= 0");
  if (!(s_min > 0.0)) throw InvalidInput("black_scholes: need s_min > 0");
  BlackScholesProblem p;
  p.sigma = sigma;
  p.rate = rate;
  p.mesh = Mesh1D::uniform(s_min, s_max, cells);
  p.coefficients = Coefficients1D::from_functions(
      p.mesh, [&](double s) { return 0.5 * sigma * sigma * s * s; },
      [&](double s) { return (sigma * sigma - rate) * s; }, [&](double) { return rate; });
  p.triple = assemble_interval(p.mesh, p.coefficients, BoundaryCondition::Dirichlet, mass);
  return p;
}

/// Piecewise linear interpolation of nodal values; xs strictly increasing.
inline double linear_interpolate(const std::vector<double>& xs, const RealVector& ys, double x) {
  if (Index(xs.size()) != ys.size() || xs.size() < 2)
    throw InvalidInput("linear_interpolate: size mismatch");
  if (x <= xs.front()) return ys(0);
  if (x >= xs.back()) return ys(ys.size() - 1);
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const Index j = Index(it - xs.begin());
  const double w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
  return (1.0 - w) * ys(j - 1) + w * ys(j);
}

/// Closed form European call value (the pricing oracle).
inline double black_scholes_call_price(double s0, double strike, double maturity, double sigma,
                                       double rate) {
  if (!(s0 > 0.0) || !(strike > 0.0)) throw InvalidInput("call price: need s0, strike > 0");
  if (!(maturity >= 0.0)) throw InvalidInput("call price: need maturity >= 0");
  const auto normal_cdf = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  const double disc = strike * std::exp(-rate * maturity);
  const double width = sigma * std::sqrt(maturity);
  if (width <= 0.0) return std::max(s0 - disc, 0.0);
  const double d1 = (std::log(s0 / strike) + (rate + 0.5 * sigma * sigma) * maturity) / width;
  const double d2 = d1 - width;
  return s0 * normal_cdf(d1) - disc * normal_cdf(d2);
}

/// Evolve the call payoff with the semigroup and read the value at s0.
inline double black_scholes_fem_price(const BlackScholesProblem& p, double s0, double strike,
                                      double maturity, const SemigroupScheme& scheme) {
  const auto xs = retained_nodes(p.mesh, BoundaryCondition::Dirichlet);
  RealVector payoff(Index(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) payoff(Index(i)) = std::max(xs[i] - strike, 0.0);
  auto op = associate(p.triple);
  const RealVector value = evolve_state(op, payoff, maturity, scheme);
  return linear_interpolate(xs, value, s0);
}

}  // namespace formflow
