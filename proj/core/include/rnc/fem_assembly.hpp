#pragma once

#include <array>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "rnc/beam_model.hpp"

namespace rnc {

using SpMat = Eigen::SparseMatrix<double>;

enum class BoundaryKind { HingedNeumann, ClampedDirichlet, MixedMixed };

// "h-N", "c-D", "m-m"
std::string short_name(BoundaryKind bc);
BoundaryKind parse_boundary(const std::string& name);
inline constexpr std::array<BoundaryKind, 3> kAllBoundaryKinds = {
    BoundaryKind::HingedNeumann, BoundaryKind::ClampedDirichlet, BoundaryKind::MixedMixed};

enum class LagrangeOrder { linear = 1, quadratic = 2 };

struct Mesh {
  std::vector<double> nodes;
  LagrangeOrder y_order = LagrangeOrder::quadratic;

  static Mesh uniform(double length, int n_elements,
                      LagrangeOrder y_order = LagrangeOrder::quadratic);
  int n_elements() const { return static_cast<int>(nodes.size()) - 1; }
  double element_length(int e) const { return nodes[e + 1] - nodes[e]; }
};

std::vector<std::string> validate(const Mesh& mesh, double length);

// Full (unconstrained) coefficient numbering: w dofs (value, slope) per node
// first, then one block per odd layer of Lagrange dofs.
struct DofLayout {
  int n_elements = 0;
  int y_order = 2;
  int n_layers = 0;

  int n_w() const { return 2 * (n_elements + 1); }
  int n_y() const { return y_order * n_elements + 1; }
  int n_full() const { return n_w() + n_layers * n_y(); }
  int w_value(int node) const { return 2 * node; }
  int w_slope(int node) const { return 2 * node + 1; }
  int y_begin(int layer) const { return n_w() + layer * n_y(); }
  int y_node(int layer, int node) const { return y_begin(layer) + y_order * node; }
};

// (U, V) = (displacement coefficients, velocity coefficients) on the free dofs.
struct State {
  Eigen::VectorXd x;
  Eigen::VectorXd v;

  static State zero(Eigen::Index n) {
    return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  }
};

// All traces are taken at x = L. Layer traces carry a layer index.
enum class TraceId { dz, d2z, d3z, v, dv, d2v };
enum class TraceMode { automatic, direct, flux };

std::string to_string(TraceId id, int layer = 0);

// value = lx.x + (lv + s*lvd).v + la.a, with a the acceleration of the
// homogeneous problem whose damping carries sign s.
struct TraceFunctional {
  Eigen::VectorXd lx, lv, lvd, la;
};

// Rows of observed channels as linear maps on (x, v).
struct Observation {
  std::vector<std::string> names;
  Eigen::MatrixXd Cx, Cv;

  Eigen::VectorXd apply(const State& s) const { return Cx * s.x + Cv * s.v; }
};

struct DiscreteSystem {
  LayerStack stack;
  CouplingMatrices coupling;
  Mesh mesh;
  BoundaryKind bc = BoundaryKind::HingedNeumann;
  DofLayout layout;

  SpMat T;  // full <- free
  std::vector<int> control_dofs;  // prescribed full dofs (Dirichlet controls)
  // h-N only: per layer, the full dof whose residual carries the mean-zero multiplier,
  // and the constraint weights (integrals of the Lagrange basis). Free layer coordinates
  // are local mean-zero differences, not nodal values.
  std::vector<int> eliminated_dofs;
  Eigen::VectorXd layer_integrals;

  SpMat mass, stiffness, damping;
  SpMat mass_full, stiffness_full, damping_full;

  std::shared_ptr<const Eigen::SimplicialLDLT<SpMat>> mass_solver, stiffness_solver;

  // Boundary inputs u = (M, g_1, g_3, ...) enter as
  //   x' = v + control_x u,   M v' = -K x - D v + control_v u.
  Eigen::MatrixXd control_x, control_v;
  Eigen::VectorXd control_weight;  // (K, h_i E_i)
  Eigen::MatrixXd lift;            // Dirichlet families: M^{-1} M_fb

  Observation observed_forward, observed_adjoint;

  Eigen::Index size() const { return mass.rows(); }
  int n_inputs() const { return stack.n_core + 2; }

  Eigen::VectorXd expand(const Eigen::VectorXd& x) const { return T * x; }
  // Mass-orthogonal projection of a full coefficient vector onto the free space.
  Eigen::VectorXd restrict_full(const Eigen::VectorXd& full) const;
  Eigen::VectorXd solve_mass(const Eigen::VectorXd& b) const;
  Eigen::VectorXd solve_stiffness(const Eigen::VectorXd& b) const;

  const Observation& observation(double damping_sign) const {
    return damping_sign >= 0.0 ? observed_forward : observed_adjoint;
  }
  // Boundary observation dual to the inputs under the transposition pairing,
  // scaled by 1/control_weight.
  Eigen::VectorXd control_observation(const State& z) const;
  std::vector<std::string> input_names() const;
};

DiscreteSystem assemble(const LayerStack& stack, const Mesh& mesh, BoundaryKind bc);

TraceFunctional trace_functional(const DiscreteSystem& sys, TraceId id, int layer = 0,
                                 TraceMode mode = TraceMode::automatic);
double trace(const DiscreteSystem& sys, const State& s, TraceId id, int layer = 0,
             TraceMode mode = TraceMode::automatic, double damping_sign = 1.0);
// Reduce a functional to rows acting on (x, v) for the given damping sign.
void pull_back(const DiscreteSystem& sys, const TraceFunctional& f, double damping_sign,
               Eigen::Ref<Eigen::VectorXd> cx, Eigen::Ref<Eigen::VectorXd> cv);

enum class EnergyKind { natural, higher };

double energy(const DiscreteSystem& sys, const State& s, EnergyKind kind = EnergyKind::natural);

// Global quadrature points, element-aligned.
struct QuadGrid {
  std::vector<int> element;
  std::vector<double> t, x, w;
  std::size_t size() const { return x.size(); }
};

QuadGrid quadrature_grid(const Mesh& mesh, int points_per_element);

// field = -1 selects w; field >= 0 selects odd layer `field`.
Eigen::VectorXd sample_field(const DiscreteSystem& sys, const Eigen::VectorXd& full, int field,
                             int derivative, const QuadGrid& grid);

// phi_E = h_E^{-1} B v_O + N z' at the grid points, one row per compliant layer.
Eigen::MatrixXd shear_angle(const DiscreteSystem& sys, const Eigen::VectorXd& x,
                            const QuadGrid& grid);

// m w - alpha w'' evaluated elementwise on a full coefficient vector.
Eigen::VectorXd apply_rayleigh_operator(const DiscreteSystem& sys, const Eigen::VectorXd& full,
                                        const QuadGrid& grid);

enum class QuotientSubspace { M, H };

struct QuotientSplit {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd component_in;
  Eigen::VectorXd component_orthogonal;
};

// Columns: M -> {exp(-x/l), exp((x-L)/l)}, H -> {sinh((x-L)/l)}, l = sqrt(alpha/m).
Eigen::MatrixXd quotient_basis(const LayerStack& stack, const QuadGrid& grid,
                               QuotientSubspace subspace);
QuotientSplit quotient_project(const LayerStack& stack, const QuadGrid& grid,
                               const Eigen::VectorXd& samples, QuotientSubspace subspace);

// L2 projection of sampled data onto the free w-coefficients (y components zero).
Eigen::VectorXd l2_project_w(const DiscreteSystem& sys, const QuadGrid& grid,
                             const Eigen::VectorXd& samples);

// Hermite basis on a reference element: values of d^k/dx^k at t in [0,1].
std::array<double, 4> hermite_basis(double t, double he, int derivative);
// Lagrange basis of order 1 or 2; entries past order+1 are zero.
std::array<double, 3> lagrange_basis(double t, double he, int order, int derivative);

// "row col value" lines, 0-based, one entry per line.
void write_triplets(std::ostream& os, const SpMat& A);

}  // namespace rnc
