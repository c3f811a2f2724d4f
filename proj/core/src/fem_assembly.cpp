#include "rnc/fem_assembly.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "rnc/errors.hpp"
#include "rnc/quadrature.hpp"

namespace rnc {

std::string short_name(BoundaryKind bc) {
  switch (bc) {
    case BoundaryKind::HingedNeumann: return "h-N";
    case BoundaryKind::ClampedDirichlet: return "c-D";
    case BoundaryKind::MixedMixed: return "m-m";
  }
  return "?";
}

BoundaryKind parse_boundary(const std::string& name) {
  if (name == "h-N" || name == "hN" || name == "HingedNeumann" || name == "hinged_neumann")
    return BoundaryKind::HingedNeumann;
  if (name == "c-D" || name == "cD" || name == "ClampedDirichlet" || name == "clamped_dirichlet")
    return BoundaryKind::ClampedDirichlet;
  if (name == "m-m" || name == "mm" || name == "MixedMixed" || name == "mixed_mixed")
    return BoundaryKind::MixedMixed;
  throw ValidationError("unknown boundary family '" + name + "' (expected h-N, c-D or m-m)");
}

Mesh Mesh::uniform(double length, int n_elements, LagrangeOrder y_order) {
  if (n_elements < 1) throw ValidationError("mesh: n_elements must be positive");
  Mesh m;
  m.y_order = y_order;
  m.nodes.resize(n_elements + 1);
  for (int i = 0; i <= n_elements; ++i) m.nodes[i] = length * i / n_elements;
  m.nodes.back() = length;
  return m;
}

std::vector<std::string> validate(const Mesh& mesh, double length) {
  std::vector<std::string> out;
  if (mesh.nodes.size() < 2) {
    out.push_back("mesh: need at least one element");
    return out;
  }
  if (mesh.nodes.front() != 0.0) out.push_back("mesh: first node must be 0");
  if (std::abs(mesh.nodes.back() - length) > 1e-12 * length)
    out.push_back("mesh: last node must equal the beam length");
  for (std::size_t i = 1; i < mesh.nodes.size(); ++i)
    if (!(mesh.nodes[i] > mesh.nodes[i - 1])) {
      out.push_back("mesh: nodes must be strictly increasing");
      break;
    }
  return out;
}

std::string to_string(TraceId id, int layer) {
  const std::string l = std::to_string(2 * layer + 1);
  switch (id) {
    case TraceId::dz: return "dz_L";
    case TraceId::d2z: return "d2z_L";
    case TraceId::d3z: return "d3z_L";
    case TraceId::v: return "v" + l + "_L";
    case TraceId::dv: return "dv" + l + "_L";
    case TraceId::d2v: return "d2v" + l + "_L";
  }
  return "?";
}

std::array<double, 4> hermite_basis(double t, double he, int derivative) {
  switch (derivative) {
    case 0:
      return {1 - 3 * t * t + 2 * t * t * t, he * (t - 2 * t * t + t * t * t),
              3 * t * t - 2 * t * t * t, he * (-t * t + t * t * t)};
    case 1:
      return {(-6 * t + 6 * t * t) / he, 1 - 4 * t + 3 * t * t, (6 * t - 6 * t * t) / he,
              -2 * t + 3 * t * t};
    case 2:
      return {(-6 + 12 * t) / (he * he), (-4 + 6 * t) / he, (6 - 12 * t) / (he * he),
              (-2 + 6 * t) / he};
    case 3:
      return {12 / (he * he * he), 6 / (he * he), -12 / (he * he * he), 6 / (he * he)};
    default:
      return {0, 0, 0, 0};
  }
}

std::array<double, 3> lagrange_basis(double t, double he, int order, int derivative) {
  if (order == 1) {
    switch (derivative) {
      case 0: return {1 - t, t, 0};
      case 1: return {-1 / he, 1 / he, 0};
      default: return {0, 0, 0};
    }
  }
  switch (derivative) {
    case 0: return {2 * t * t - 3 * t + 1, 4 * t - 4 * t * t, 2 * t * t - t};
    case 1: return {(4 * t - 3) / he, (4 - 8 * t) / he, (4 * t - 1) / he};
    case 2: return {4 / (he * he), -8 / (he * he), 4 / (he * he)};
    default: return {0, 0, 0};
  }
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SpMat from_triplets(int n, const Triplets& t) {
  SpMat A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  A.prune(0.0);
  return A;
}

// Row vector on the full space evaluating d^k w / dx^k at x = L.
Eigen::VectorXd w_row_at_end(const DiscreteSystem& s, int k) {
  const int e = s.layout.n_elements - 1;
  const auto N = hermite_basis(1.0, s.mesh.element_length(e), k);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(s.layout.n_full());
  for (int a = 0; a < 4; ++a) r(2 * e + a) = N[a];
  return r;
}

Eigen::VectorXd y_row_at_end(const DiscreteSystem& s, int layer, int k) {
  const int e = s.layout.n_elements - 1;
  const int p = s.layout.y_order;
  const auto L = lagrange_basis(1.0, s.mesh.element_length(e), p, k);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(s.layout.n_full());
  for (int a = 0; a <= p; ++a) r(s.layout.y_begin(layer) + p * e + a) = L[a];
  return r;
}

Eigen::VectorXd shear_row_at_end(const DiscreteSystem& s, int j) {
  Eigen::VectorXd r = s.coupling.N(j) * w_row_at_end(s, 1);
  for (int i = 0; i < s.stack.n_odd(); ++i)
    if (s.coupling.B(j, i) != 0.0) r += s.coupling.B(j, i) / s.stack.h_even(j) * y_row_at_end(s, i, 0);
  return r;
}

TraceFunctional empty_functional(Eigen::Index n) {
  return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n),
          Eigen::VectorXd::Zero(n)};
}

// Residual of the variational equation tested with the full basis function `dof`.
TraceFunctional reaction(const DiscreteSystem& s, int dof) {
  const Eigen::Index nf = s.layout.n_full();
  Eigen::VectorXd e = Eigen::VectorXd::Zero(nf);
  e(dof) = 1.0;
  TraceFunctional f = empty_functional(s.size());
  f.lx = s.T.transpose() * (s.stiffness_full * e);
  f.lvd = s.T.transpose() * (s.damping_full * e);
  f.la = s.T.transpose() * (s.mass_full * e);
  return f;
}

void axpy(TraceFunctional& y, double a, const TraceFunctional& x) {
  y.lx += a * x.lx;
  y.lv += a * x.lv;
  y.lvd += a * x.lvd;
  y.la += a * x.la;
}

bool is_prescribed(const DiscreteSystem& s, int dof) {
  for (int d : s.control_dofs)
    if (d == dof) return true;
  return false;
}

// sum_j c_j (G_j phi_j + s G~_j phi_j') at x = L
TraceFunctional shear_force_at_end(const DiscreteSystem& s, const Eigen::VectorXd& c) {
  TraceFunctional f = empty_functional(s.size());
  for (int j = 0; j < s.stack.n_core; ++j) {
    if (c(j) == 0.0) continue;
    Eigen::VectorXd row = s.T.transpose() * shear_row_at_end(s, j);
    f.lx += c(j) * s.stack.shear_even[j] * row;
    f.lvd += c(j) * s.stack.damping_even[j] * row;
  }
  return f;
}

Observation build_observation(const DiscreteSystem& s, double sign) {
  Observation o;
  std::vector<std::pair<TraceId, int>> ids;
  switch (s.bc) {
    case BoundaryKind::HingedNeumann:
      ids.push_back({TraceId::d3z, 0});
      for (int i = 0; i < s.stack.n_odd(); ++i) ids.push_back({TraceId::d2v, i});
      break;
    case BoundaryKind::ClampedDirichlet:
      ids.push_back({TraceId::d2z, 0});
      for (int i = 0; i < s.stack.n_odd(); ++i) ids.push_back({TraceId::dv, i});
      break;
    case BoundaryKind::MixedMixed:
      ids.push_back({TraceId::dz, 0});
      for (int i = 0; i < s.stack.n_odd(); ++i) ids.push_back({TraceId::v, i});
      break;
  }
  const auto n = s.size();
  o.Cx.resize(ids.size(), n);
  o.Cv.resize(ids.size(), n);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    o.names.push_back(to_string(ids[r].first, ids[r].second));
    Eigen::VectorXd cx(n), cv(n);
    pull_back(s, trace_functional(s, ids[r].first, ids[r].second), sign, cx, cv);
    o.Cx.row(r) = cx.transpose();
    o.Cv.row(r) = cv.transpose();
  }
  return o;
}

}  // namespace

Eigen::VectorXd DiscreteSystem::restrict_full(const Eigen::VectorXd& full) const {
  return solve_mass(T.transpose() * (mass_full * full));
}

Eigen::VectorXd DiscreteSystem::solve_mass(const Eigen::VectorXd& b) const {
  return mass_solver->solve(b);
}

Eigen::VectorXd DiscreteSystem::solve_stiffness(const Eigen::VectorXd& b) const {
  return stiffness_solver->solve(b);
}

Eigen::VectorXd DiscreteSystem::control_observation(const State& z) const {
  Eigen::VectorXd o = control_v.transpose() * z.x;
  if (bc == BoundaryKind::ClampedDirichlet)
    o += control_x.transpose() * (damping * z.x - mass * z.v);
  return o.cwiseQuotient(control_weight);
}

std::vector<std::string> DiscreteSystem::input_names() const {
  std::vector<std::string> out{"M"};
  for (int i = 0; i < stack.n_odd(); ++i) out.push_back("g" + std::to_string(2 * i + 1));
  return out;
}

DiscreteSystem assemble(const LayerStack& stack, const Mesh& mesh, BoundaryKind bc) {
  require_valid(stack);
  if (auto d = validate(mesh, stack.length); !d.empty()) throw ValidationError(d.front());

  DiscreteSystem s;
  s.stack = stack;
  s.coupling = build_coupling(stack);
  s.mesh = mesh;
  s.bc = bc;
  const int ne = mesh.n_elements();
  const int p = static_cast<int>(mesh.y_order);
  const int nl = stack.n_odd();
  s.layout.n_elements = ne;
  s.layout.y_order = p;
  s.layout.n_layers = nl;
  const int nf = s.layout.n_full();
  const auto& A = s.coupling;

  const GaussRule rule = gauss_legendre(5);
  const int nloc = 4 + nl * (p + 1);
  Triplets tm, tk, td;
  std::vector<int> dofs(nloc);
  Eigen::VectorXd integrals = Eigen::VectorXd::Zero(nf);

  for (int e = 0; e < ne; ++e) {
    const double he = mesh.element_length(e);
    for (int a = 0; a < 4; ++a) dofs[a] = 2 * e + a;
    for (int i = 0; i < nl; ++i)
      for (int a = 0; a <= p; ++a) dofs[4 + i * (p + 1) + a] = s.layout.y_begin(i) + p * e + a;

    Eigen::MatrixXd Me = Eigen::MatrixXd::Zero(nloc, nloc);
    Eigen::MatrixXd Ke = Eigen::MatrixXd::Zero(nloc, nloc);
    Eigen::MatrixXd De = Eigen::MatrixXd::Zero(nloc, nloc);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double t = rule.points[q];
      const double wq = rule.weights[q] * he;
      const auto N0 = hermite_basis(t, he, 0);
      const auto N1 = hermite_basis(t, he, 1);
      const auto N2 = hermite_basis(t, he, 2);
      const auto L0 = lagrange_basis(t, he, p, 0);
      const auto L1 = lagrange_basis(t, he, p, 1);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          Me(a, b) += wq * (stack.mass_coeff * N0[a] * N0[b] + stack.rotary_coeff * N1[a] * N1[b]);
          Ke(a, b) += wq * stack.bending_stiffness * N2[a] * N2[b];
        }
      for (int i = 0; i < nl; ++i) {
        const int o = 4 + i * (p + 1);
        const double hr = stack.h_odd(i) * stack.densities_odd[i];
        const double hE = stack.h_odd(i) * stack.youngs_odd[i];
        for (int a = 0; a <= p; ++a) {
          integrals(dofs[o + a]) += wq * L0[a];
          for (int b = 0; b <= p; ++b) {
            Me(o + a, o + b) += wq * hr * L0[a] * L0[b];
            Ke(o + a, o + b) += wq * hE * L1[a] * L1[b];
          }
        }
      }
      for (int j = 0; j < stack.n_core; ++j) {
        const double G = stack.shear_even[j], Gt = stack.damping_even[j];
        if (G == 0.0 && Gt == 0.0) continue;
        Eigen::VectorXd g = Eigen::VectorXd::Zero(nloc);
        for (int a = 0; a < 4; ++a) g(a) = A.N(j) * N1[a];
        for (int i = 0; i < nl; ++i) {
          if (A.B(j, i) == 0.0) continue;
          const int o = 4 + i * (p + 1);
          for (int a = 0; a <= p; ++a) g(o + a) += A.B(j, i) / stack.h_even(j) * L0[a];
        }
        const double hj = stack.h_even(j);
        if (G != 0.0) Ke.noalias() += (wq * G * hj) * g * g.transpose();
        if (Gt != 0.0) De.noalias() += (wq * Gt * hj) * g * g.transpose();
      }
    }
    for (int a = 0; a < nloc; ++a)
      for (int b = 0; b < nloc; ++b) {
        if (Me(a, b) != 0.0) tm.emplace_back(dofs[a], dofs[b], Me(a, b));
        if (Ke(a, b) != 0.0) tk.emplace_back(dofs[a], dofs[b], Ke(a, b));
        if (De(a, b) != 0.0) td.emplace_back(dofs[a], dofs[b], De(a, b));
      }
  }
  s.mass_full = from_triplets(nf, tm);
  s.stiffness_full = from_triplets(nf, tk);
  s.damping_full = from_triplets(nf, td);
  s.layer_integrals = integrals;

  // essential constraints
  std::vector<char> removed(nf, 0);
  auto fix = [&](int d) { removed[d] = 1; };
  const auto& L = s.layout;
  switch (bc) {
    case BoundaryKind::HingedNeumann:
      fix(L.w_value(0));
      fix(L.w_value(ne));
      for (int i = 0; i < nl; ++i) s.eliminated_dofs.push_back(L.y_node(i, 0));
      break;
    case BoundaryKind::ClampedDirichlet:
      fix(L.w_value(0));
      fix(L.w_slope(0));
      fix(L.w_value(ne));
      s.control_dofs.push_back(L.w_slope(ne));
      for (int i = 0; i < nl; ++i) {
        fix(L.y_node(i, 0));
        s.control_dofs.push_back(L.y_node(i, ne));
      }
      break;
    case BoundaryKind::MixedMixed:
      fix(L.w_value(0));
      fix(L.w_slope(0));
      fix(L.w_value(ne));
      for (int i = 0; i < nl; ++i) fix(L.y_node(i, 0));
      break;
  }
  for (int d : s.control_dofs) fix(d);
  for (int d : s.eliminated_dofs) fix(d);

  std::vector<int> col(nf, -1);
  int n = 0;
  for (int d = 0; d < nf; ++d)
    if (!removed[d]) col[d] = n++;
  Triplets tt;
  std::vector<char> mean_zero(nf, 0);
  for (int i = 0; i < static_cast<int>(s.eliminated_dofs.size()); ++i)
    for (int d = L.y_begin(i); d < L.y_begin(i) + L.n_y(); ++d) mean_zero[d] = 1;
  for (int d = 0; d < nf; ++d)
    if (col[d] >= 0 && !mean_zero[d]) tt.emplace_back(d, col[d], 1.0);
  // Mean-zero layers use the local basis (c_{d} e_{d-1} - c_{d-1} e_d) / (c_{d-1} + c_d),
  // which keeps the reduced matrices banded.
  for (int d = 0; d < nf; ++d)
    if (col[d] >= 0 && mean_zero[d]) {
      const double a = integrals(d - 1), b = integrals(d);
      tt.emplace_back(d - 1, col[d], b / (a + b));
      tt.emplace_back(d, col[d], -a / (a + b));
    }
  s.T.resize(nf, n);
  s.T.setFromTriplets(tt.begin(), tt.end());

  const SpMat Tt = s.T.transpose();
  s.mass = Tt * s.mass_full * s.T;
  s.stiffness = Tt * s.stiffness_full * s.T;
  s.damping = Tt * s.damping_full * s.T;
  s.mass.prune(0.0);
  s.stiffness.prune(0.0);
  s.damping.prune(0.0);

  auto ms = std::make_shared<Eigen::SimplicialLDLT<SpMat>>(s.mass);
  if (ms->info() != Eigen::Success) throw SolverError("assembly: mass matrix factorization failed");
  auto ks = std::make_shared<Eigen::SimplicialLDLT<SpMat>>(s.stiffness);
  if (ks->info() != Eigen::Success)
    throw SolverError("assembly: stiffness matrix factorization failed");
  s.mass_solver = ms;
  s.stiffness_solver = ks;

  // boundary inputs
  const int m = s.n_inputs();
  s.control_weight.resize(m);
  s.control_weight(0) = stack.bending_stiffness;
  for (int i = 0; i < nl; ++i) s.control_weight(1 + i) = stack.h_odd(i) * stack.youngs_odd[i];
  s.control_x = Eigen::MatrixXd::Zero(n, m);
  s.control_v = Eigen::MatrixXd::Zero(n, m);
  if (bc == BoundaryKind::ClampedDirichlet) {
    Eigen::MatrixXd Mfb(n, m), Kfb(n, m), Dfb(n, m);
    for (int k = 0; k < m; ++k) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(nf);
      e(s.control_dofs[k]) = 1.0;
      Mfb.col(k) = Tt * (s.mass_full * e);
      Kfb.col(k) = Tt * (s.stiffness_full * e);
      Dfb.col(k) = Tt * (s.damping_full * e);
    }
    s.lift.resize(n, m);
    for (int k = 0; k < m; ++k) s.lift.col(k) = s.solve_mass(Mfb.col(k));
    Eigen::MatrixXd C = s.damping * s.lift - Dfb;
    for (int k = 0; k < m; ++k) s.control_x.col(k) = s.solve_mass(C.col(k));
    s.control_v = s.stiffness * s.lift - Kfb - s.damping * s.control_x;
  } else {
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(nf, m);
    F(L.w_slope(ne), 0) = s.control_weight(0);
    for (int i = 0; i < nl; ++i) F(L.y_node(i, ne), 1 + i) = s.control_weight(1 + i);
    s.control_v = Tt * F;
  }

  s.observed_forward = build_observation(s, 1.0);
  s.observed_adjoint = build_observation(s, -1.0);
  return s;
}

TraceFunctional trace_functional(const DiscreteSystem& s, TraceId id, int layer, TraceMode mode) {
  const auto& L = s.layout;
  const int ne = L.n_elements;
  const Eigen::SparseMatrix<double> Tt = s.T.transpose();
  TraceFunctional f = empty_functional(s.size());
  if (layer < 0 || layer >= s.stack.n_odd()) throw ValidationError("trace: layer index out of range");

  auto unsupported = [&](const char* why) {
    throw ValidationError("trace " + to_string(id, layer) + ": " + why);
  };

  switch (id) {
    case TraceId::dz:
      if (mode == TraceMode::flux) unsupported("no flux form");
      f.lx = Tt * w_row_at_end(s, 1);
      return f;
    case TraceId::v:
      if (mode == TraceMode::flux) unsupported("no flux form");
      f.lx = Tt * y_row_at_end(s, layer, 0);
      return f;
    case TraceId::d2z: {
      const bool flux_ok = is_prescribed(s, L.w_slope(ne));
      if (mode == TraceMode::flux && !flux_ok) unsupported("flux needs a prescribed slope at L");
      if (mode == TraceMode::direct || (mode == TraceMode::automatic && !flux_ok)) {
        f.lx = Tt * w_row_at_end(s, 2);
        return f;
      }
      axpy(f, 1.0 / s.stack.bending_stiffness, reaction(s, L.w_slope(ne)));
      return f;
    }
    case TraceId::dv: {
      const int d = L.y_node(layer, ne);
      const bool flux_ok = is_prescribed(s, d);
      if (mode == TraceMode::flux && !flux_ok) unsupported("flux needs a prescribed value at L");
      if (mode == TraceMode::direct || (mode == TraceMode::automatic && !flux_ok)) {
        f.lx = Tt * y_row_at_end(s, layer, 1);
        return f;
      }
      axpy(f, 1.0 / s.control_weight(1 + layer), reaction(s, d));
      return f;
    }
    case TraceId::d3z: {
      if (mode == TraceMode::direct) {
        f.lx = Tt * w_row_at_end(s, 3);
        return f;
      }
      // K z''' = alpha z''(L)_tt + N^T h (G phi + G~ phi_t)(L) - R
      Eigen::VectorXd c(s.stack.n_core);
      for (int j = 0; j < s.stack.n_core; ++j) c(j) = s.coupling.N(j) * s.stack.h_even(j);
      axpy(f, 1.0, shear_force_at_end(s, c));
      f.la += s.stack.rotary_coeff * (Tt * w_row_at_end(s, 1));
      axpy(f, -1.0, reaction(s, L.w_value(ne)));
      const double K = s.stack.bending_stiffness;
      f.lx /= K;
      f.lv /= K;
      f.lvd /= K;
      f.la /= K;
      return f;
    }
    case TraceId::d2v: {
      if (mode == TraceMode::direct) {
        if (L.y_order < 2) unsupported("second derivative vanishes for linear elements");
        f.lx = Tt * y_row_at_end(s, layer, 2);
        return f;
      }
      // h E y'' = h rho y_tt + (B^T (G phi + G~ phi_t))_i - lambda_i
      const double hr = s.stack.h_odd(layer) * s.stack.densities_odd[layer];
      f.la += hr * (Tt * y_row_at_end(s, layer, 0));
      axpy(f, 1.0, shear_force_at_end(s, s.coupling.B.col(layer)));
      if (!s.eliminated_dofs.empty()) {
        const int js = s.eliminated_dofs[layer];
        axpy(f, -1.0 / s.layer_integrals(js), reaction(s, js));
      }
      const double hE = s.control_weight(1 + layer);
      f.lx /= hE;
      f.lv /= hE;
      f.lvd /= hE;
      f.la /= hE;
      return f;
    }
  }
  return f;
}

void pull_back(const DiscreteSystem& s, const TraceFunctional& f, double sign,
               Eigen::Ref<Eigen::VectorXd> cx, Eigen::Ref<Eigen::VectorXd> cv) {
  cx = f.lx;
  cv = f.lv + sign * f.lvd;
  if (f.la.cwiseAbs().maxCoeff() > 0.0) {
    const Eigen::VectorXd ma = s.solve_mass(f.la);
    cx -= s.stiffness * ma;
    cv -= sign * (s.damping * ma);
  }
}

double trace(const DiscreteSystem& s, const State& st, TraceId id, int layer, TraceMode mode,
             double sign) {
  Eigen::VectorXd cx(s.size()), cv(s.size());
  pull_back(s, trace_functional(s, id, layer, mode), sign, cx, cv);
  return cx.dot(st.x) + cv.dot(st.v);
}

double energy(const DiscreteSystem& s, const State& st, EnergyKind kind) {
  if (kind == EnergyKind::natural)
    return 0.5 * (st.x.dot(s.stiffness * st.x) + st.v.dot(s.mass * st.v));
  if (s.bc != BoundaryKind::HingedNeumann)
    throw ValidationError("higher energy is defined for the h-N family only");
  const Eigen::VectorXd kx = s.stiffness * st.x;
  return 0.5 * (kx.dot(s.solve_mass(kx)) + st.v.dot(s.stiffness * st.v));
}

QuadGrid quadrature_grid(const Mesh& mesh, int ppe) {
  const GaussRule r = gauss_legendre(ppe);
  QuadGrid g;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const double he = mesh.element_length(e);
    for (int q = 0; q < ppe; ++q) {
      g.element.push_back(e);
      g.t.push_back(r.points[q]);
      g.x.push_back(mesh.nodes[e] + he * r.points[q]);
      g.w.push_back(he * r.weights[q]);
    }
  }
  return g;
}

Eigen::VectorXd sample_field(const DiscreteSystem& s, const Eigen::VectorXd& full, int field,
                             int derivative, const QuadGrid& grid) {
  Eigen::VectorXd out(grid.size());
  const int p = s.layout.y_order;
  for (std::size_t q = 0; q < grid.size(); ++q) {
    const int e = grid.element[q];
    const double he = s.mesh.element_length(e);
    double acc = 0.0;
    if (field < 0) {
      const auto N = hermite_basis(grid.t[q], he, derivative);
      for (int a = 0; a < 4; ++a) acc += N[a] * full(2 * e + a);
    } else {
      const auto Lb = lagrange_basis(grid.t[q], he, p, derivative);
      for (int a = 0; a <= p; ++a) acc += Lb[a] * full(s.layout.y_begin(field) + p * e + a);
    }
    out(q) = acc;
  }
  return out;
}

Eigen::MatrixXd shear_angle(const DiscreteSystem& s, const Eigen::VectorXd& x,
                            const QuadGrid& grid) {
  if (x.size() != s.size()) throw ValidationError("shear_angle: coefficient vector has wrong size");
  const Eigen::VectorXd full = s.expand(x);
  const Eigen::VectorXd dz = sample_field(s, full, -1, 1, grid);
  Eigen::MatrixXd phi(s.stack.n_core, grid.size());
  for (int j = 0; j < s.stack.n_core; ++j) {
    Eigen::VectorXd row = s.coupling.N(j) * dz;
    for (int i = 0; i < s.stack.n_odd(); ++i)
      if (s.coupling.B(j, i) != 0.0)
        row += s.coupling.B(j, i) / s.stack.h_even(j) * sample_field(s, full, i, 0, grid);
    phi.row(j) = row.transpose();
  }
  return phi;
}

Eigen::VectorXd apply_rayleigh_operator(const DiscreteSystem& s, const Eigen::VectorXd& full,
                                        const QuadGrid& grid) {
  return s.stack.mass_coeff * sample_field(s, full, -1, 0, grid) -
         s.stack.rotary_coeff * sample_field(s, full, -1, 2, grid);
}

Eigen::MatrixXd quotient_basis(const LayerStack& stack, const QuadGrid& grid,
                               QuotientSubspace subspace) {
  const double l = std::sqrt(stack.rotary_coeff / stack.mass_coeff);
  const double L = stack.length;
  const Eigen::Index nq = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd B(nq, subspace == QuotientSubspace::M ? 2 : 1);
  for (Eigen::Index q = 0; q < nq; ++q) {
    const double x = grid.x[q];
    if (subspace == QuotientSubspace::M) {
      B(q, 0) = std::exp(-x / l);
      B(q, 1) = std::exp((x - L) / l);
    } else {
      B(q, 0) = std::sinh((x - L) / l);
    }
  }
  return B;
}

QuotientSplit quotient_project(const LayerStack& stack, const QuadGrid& grid,
                               const Eigen::VectorXd& f, QuotientSubspace subspace) {
  const Eigen::MatrixXd B = quotient_basis(stack, grid, subspace);
  const Eigen::Map<const Eigen::VectorXd> w(grid.w.data(), static_cast<Eigen::Index>(grid.w.size()));
  const Eigen::MatrixXd WB = w.asDiagonal() * B;
  QuotientSplit out;
  out.coefficients = (B.transpose() * WB).ldlt().solve(WB.transpose() * f);
  out.component_in = B * out.coefficients;
  out.component_orthogonal = f - out.component_in;
  return out;
}

Eigen::VectorXd l2_project_w(const DiscreteSystem& s, const QuadGrid& grid,
                             const Eigen::VectorXd& f) {
  const int nw = s.layout.n_w();
  Eigen::MatrixXd Mw = Eigen::MatrixXd::Zero(nw, nw);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nw);
  for (std::size_t q = 0; q < grid.size(); ++q) {
    const int e = grid.element[q];
    const auto N = hermite_basis(grid.t[q], s.mesh.element_length(e), 0);
    for (int a = 0; a < 4; ++a) {
      rhs(2 * e + a) += grid.w[q] * N[a] * f(q);
      for (int b = 0; b < 4; ++b) Mw(2 * e + a, 2 * e + b) += grid.w[q] * N[a] * N[b];
    }
  }
  // free w-columns of T are plain selections
  std::vector<int> rows, cols;
  for (int k = 0; k < s.T.outerSize(); ++k)
    for (SpMat::InnerIterator it(s.T, k); it; ++it)
      if (it.row() < nw) {
        rows.push_back(static_cast<int>(it.row()));
        cols.push_back(k);
      }
  const int nr = static_cast<int>(rows.size());
  Eigen::MatrixXd A(nr, nr);
  Eigen::VectorXd b(nr);
  for (int a = 0; a < nr; ++a) {
    b(a) = rhs(rows[a]);
    for (int c = 0; c < nr; ++c) A(a, c) = Mw(rows[a], rows[c]);
  }
  const Eigen::VectorXd sol = A.ldlt().solve(b);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(s.size());
  for (int a = 0; a < nr; ++a) out(cols[a]) = sol(a);
  return out;
}

void write_triplets(std::ostream& os, const SpMat& A) {
  os.precision(17);
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace rnc
