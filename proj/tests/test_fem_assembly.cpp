#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "rnc/errors.hpp"
#include "rnc/fem_assembly.hpp"
#include "support.hpp"

namespace rnc {
namespace {

using std::numbers::pi;

double sym_defect(const SpMat& A) {
  const Eigen::MatrixXd D(A);
  return (D - D.transpose()).norm() / D.norm();
}

using testing::interpolate;

TEST(Assembly, SymmetryAndDefiniteness) {
  for (auto bc : kAllBoundaryKinds) {
    const auto s = assemble(testing::graded_stack(), Mesh::uniform(1.0, 16), bc);
    EXPECT_LT(sym_defect(s.mass), 1e-12) << short_name(bc);
    EXPECT_LT(sym_defect(s.stiffness), 1e-12) << short_name(bc);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Eigen::MatrixXd(s.mass)).eigenvalues();
    EXPECT_GT(ev.minCoeff(), 0.0);
    const Eigen::VectorXd ek =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Eigen::MatrixXd(s.stiffness)).eigenvalues();
    EXPECT_GT(ek.minCoeff(), 0.0) << "stiffness must be definite on the constrained space";
  }
}

TEST(Assembly, DampingVanishesWithoutShearDamping) {
  const auto s = assemble(unit_stack(2), Mesh::uniform(1.0, 8), BoundaryKind::MixedMixed);
  EXPECT_EQ(s.damping.nonZeros(), 0);
  EXPECT_EQ(s.damping_full.nonZeros(), 0);
  const auto d = assemble(testing::damped_stack(2, 0.1), Mesh::uniform(1.0, 8), BoundaryKind::MixedMixed);
  EXPECT_GT(d.damping.nonZeros(), 0);
  EXPECT_LT(sym_defect(d.damping), 1e-12);
}

TEST(Assembly, DecoupledStiffnessIsDirectSumOfClosedForms) {
  const LayerStack st = testing::decoupled_stack(2);
  const int ne = 6;
  const auto s = assemble(st, Mesh::uniform(1.0, ne), BoundaryKind::HingedNeumann);
  const Eigen::MatrixXd K(s.stiffness_full);
  const auto& L = s.layout;
  Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(L.n_full(), L.n_full());
  const double h = 1.0 / ne;
  Eigen::Matrix4d kb;
  kb << 12, 6 * h, -12, 6 * h, 6 * h, 4 * h * h, -6 * h, 2 * h * h, -12, -6 * h, 12, -6 * h, 6 * h,
      2 * h * h, -6 * h, 4 * h * h;
  kb *= st.bending_stiffness / (h * h * h);
  Eigen::Matrix3d kw;
  kw << 7, -8, 1, -8, 16, -8, 1, -8, 7;
  kw /= 3.0 * h;
  for (int e = 0; e < ne; ++e) {
    ref.block(2 * e, 2 * e, 4, 4) += kb;
    for (int i = 0; i < L.n_layers; ++i) {
      const int o = L.y_begin(i) + 2 * e;
      ref.block(o, o, 3, 3) += st.h_odd(i) * st.youngs_odd[i] * kw;
    }
  }
  EXPECT_LT((K - ref).cwiseAbs().maxCoeff(), 1e-9 * ref.cwiseAbs().maxCoeff());
  // no entries coupling w and y, or distinct layers
  for (int k = 0; k < s.stiffness_full.outerSize(); ++k)
    for (SpMat::InnerIterator it(s.stiffness_full, k); it; ++it) {
      auto block = [&](Eigen::Index d) { return d < L.n_w() ? -1 : static_cast<int>((d - L.n_w()) / L.n_y()); };
      EXPECT_EQ(block(it.row()), block(it.col()));
    }
}

TEST(Assembly, UniformTranslationIsRigid) {
  const auto s = assemble(testing::graded_stack(), Mesh::uniform(1.0, 10), BoundaryKind::HingedNeumann);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(s.layout.n_full());
  u.tail(s.layout.n_layers * s.layout.n_y()).setOnes();
  EXPECT_LT((s.stiffness_full * u).norm(), 1e-12);
  // mean-zero constraint holds for every reduced vector
  const Eigen::VectorXd x = Eigen::VectorXd::Random(s.size());
  const Eigen::VectorXd full = s.expand(x);
  for (int i = 0; i < s.layout.n_layers; ++i) {
    const int b = s.layout.y_begin(i);
    EXPECT_NEAR(s.layer_integrals.segment(b, s.layout.n_y()).dot(full.segment(b, s.layout.n_y())), 0.0, 1e-13);
  }
}

double clamped_eb_root() {
  // cos x cosh x = 1, first nonzero root
  double a = 4.0, b = 5.0;
  auto f = [](double x) { return std::cos(x) * std::cosh(x) - 1.0; };
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (a + b);
    ((f(m) < 0) == (f(a) < 0) ? a : b) = m;
  }
  return 0.5 * (a + b);
}

double lowest_w_eigenvalue(const DiscreteSystem& s) {
  std::vector<int> wcols;
  for (int k = 0; k < s.T.outerSize(); ++k)
    for (SpMat::InnerIterator it(s.T, k); it; ++it)
      if (it.row() < s.layout.n_w()) wcols.push_back(k);
  const Eigen::MatrixXd K(s.stiffness), M(s.mass);
  const int n = static_cast<int>(wcols.size());
  Eigen::MatrixXd Kw(n, n), Mw(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Kw(a, b) = K(wcols[a], wcols[b]);
      Mw(a, b) = M(wcols[a], wcols[b]);
    }
  return Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd>(Kw, Mw).eigenvalues()(0);
}

TEST(Assembly, ClampedBeamFundamentalMatchesCharacteristicEquation) {
  // tiny rotary inertia: Rayleigh beam reduces to Euler-Bernoulli
  LayerStack st = testing::decoupled_stack(1);
  st.rotary_coeff = 1e-8;
  const auto s = assemble(st, Mesh::uniform(1.0, 64), BoundaryKind::ClampedDirichlet);
  const double b = clamped_eb_root();
  EXPECT_NEAR(b, 4.730040745, 1e-8);
  const double omega2 = st.bending_stiffness * std::pow(b, 4) / (st.mass_coeff + st.rotary_coeff * b * b);
  EXPECT_LT(testing::rel_err(lowest_w_eigenvalue(s), omega2), 1e-3);
}

TEST(Assembly, LowestEigenvaluesConvergeAtFemRate) {
  const LayerStack st = testing::decoupled_stack(1);
  std::vector<double> exact;
  for (int k = 1; k <= 5; ++k) {
    const double b2 = k * k * pi * pi;
    exact.push_back(b2 * b2 / (1.0 + b2));  // hinged Rayleigh
  }
  auto err = [&](int ne) {
    const auto s = assemble(st, Mesh::uniform(1.0, ne), BoundaryKind::HingedNeumann);
    std::vector<int> wcols;
    for (int k = 0; k < s.T.outerSize(); ++k)
      for (SpMat::InnerIterator it(s.T, k); it; ++it)
        if (it.row() < s.layout.n_w()) wcols.push_back(k);
    const Eigen::MatrixXd K(s.stiffness), M(s.mass);
    const int n = static_cast<int>(wcols.size());
    Eigen::MatrixXd Kw(n, n), Mw(n, n);
    for (int a = 0; a < n; ++a)
      for (int c = 0; c < n; ++c) {
        Kw(a, c) = K(wcols[a], wcols[c]);
        Mw(a, c) = M(wcols[a], wcols[c]);
      }
    const Eigen::VectorXd ev = Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd>(Kw, Mw).eigenvalues();
    double e = 0.0;
    for (int k = 0; k < 5; ++k) e = std::max(e, testing::rel_err(ev(k), exact[k]));
    return e;
  };
  const double e1 = err(8), e2 = err(16);
  EXPECT_GE(std::log2(e1 / e2), 2.0);
}

TEST(ShearAngle, ZeroState) {
  const auto s = assemble(unit_stack(1), Mesh::uniform(1.0, 8), BoundaryKind::MixedMixed);
  const auto g = quadrature_grid(s.mesh, 3);
  EXPECT_EQ(shear_angle(s, Eigen::VectorXd::Zero(s.size()), g).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(shear_angle(s, Eigen::VectorXd::Zero(3), g), ValidationError);
}

TEST(ShearAngle, OpposedLinearLayers) {
  const auto s = assemble(unit_stack(1), Mesh::uniform(1.0, 8), BoundaryKind::MixedMixed);
  const auto full = interpolate(s, nullptr, nullptr,
                                [](double x, int layer) { return layer == 0 ? x : -x; });
  const auto g = quadrature_grid(s.mesh, 3);
  const Eigen::MatrixXd phi = shear_angle(s, s.restrict_full(full), g);
  for (std::size_t q = 0; q < g.size(); ++q) EXPECT_NEAR(phi(0, q), -2.0 * g.x[q], 1e-12);
}

TEST(ShearAngle, PureBendingGivesNTimesSlope) {
  LayerStack st = testing::graded_stack();
  const auto s = assemble(st, Mesh::uniform(1.0, 8), BoundaryKind::HingedNeumann);
  const auto full = interpolate(s, [](double x) { return x * (1.0 - x); },
                                [](double x) { return 1.0 - 2.0 * x; }, nullptr);
  const auto g = quadrature_grid(s.mesh, 3);
  const Eigen::MatrixXd phi = shear_angle(s, s.restrict_full(full), g);
  for (int j = 0; j < st.n_core; ++j)
    for (std::size_t q = 0; q < g.size(); ++q)
      EXPECT_NEAR(phi(j, q), s.coupling.N(j) * (1.0 - 2.0 * g.x[q]), 1e-12);
}

TEST(Energy, SineModeKineticEnergy) {
  const auto s = assemble(unit_stack(1), Mesh::uniform(1.0, 64), BoundaryKind::HingedNeumann);
  const auto full = interpolate(s, [](double x) { return std::sin(pi * x); },
                                [](double x) { return pi * std::cos(pi * x); }, nullptr);
  const State y{Eigen::VectorXd::Zero(s.size()), s.restrict_full(full)};
  EXPECT_LT(testing::rel_err(energy(s, y), 0.5 * (1.0 + pi * pi) * 0.5), 1e-6);
  const State y2{2.0 * y.x, 2.0 * y.v};
  EXPECT_NEAR(energy(s, y2), 4.0 * energy(s, y), 1e-12);
  EXPECT_EQ(energy(s, State::zero(s.size())), 0.0);
  EXPECT_EQ(energy(s, State::zero(s.size()), EnergyKind::higher), 0.0);
}

TEST(Energy, HigherOnlyForHingedNeumann) {
  const auto s = assemble(unit_stack(1), Mesh::uniform(1.0, 4), BoundaryKind::ClampedDirichlet);
  EXPECT_THROW(energy(s, State::zero(s.size()), EnergyKind::higher), ValidationError);
}

TEST(Trace, ZeroState) {
  const auto s = assemble(unit_stack(1), Mesh::uniform(1.0, 8), BoundaryKind::HingedNeumann);
  for (auto id : {TraceId::dz, TraceId::d2z, TraceId::d3z, TraceId::v, TraceId::dv, TraceId::d2v})
    EXPECT_EQ(trace(s, State::zero(s.size()), id), 0.0);
}

TEST(Trace, CubicSecondDerivativeDirect) {
  const auto s = assemble(unit_stack(1), Mesh::uniform(1.0, 8), BoundaryKind::MixedMixed);
  // z = x^2 (x - 1): admissible for m-m, z''(1) = 4
  const auto full = interpolate(s, [](double x) { return x * x * (x - 1.0); },
                                [](double x) { return 3 * x * x - 2 * x; }, nullptr);
  const State y{s.restrict_full(full), Eigen::VectorXd::Zero(s.size())};
  EXPECT_NEAR(trace(s, y, TraceId::d2z), 4.0, 1e-10);
  EXPECT_NEAR(trace(s, y, TraceId::dz), 1.0, 1e-10);
  EXPECT_THROW(trace(s, y, TraceId::d2z, 0, TraceMode::flux), ValidationError);
}

TEST(Trace, ClampedFluxSecondDerivative) {
  // z = x^2 (1 - x)^2: z''(1) = 2
  auto errors = [](int ne) {
    const auto s = assemble(testing::decoupled_stack(1), Mesh::uniform(1.0, ne), BoundaryKind::ClampedDirichlet);
    const auto full = interpolate(s, [](double x) { return x * x * (1 - x) * (1 - x); },
                                  [](double x) { return 2 * x * (1 - x) * (1 - 2 * x); }, nullptr);
    const State y{s.restrict_full(full), Eigen::VectorXd::Zero(s.size())};
    return std::pair{std::abs(trace(s, y, TraceId::d2z, 0, TraceMode::direct) - 2.0),
                     std::abs(trace(s, y, TraceId::d2z, 0, TraceMode::flux) - 2.0)};
  };
  const auto [d1, f1] = errors(32);
  const auto [d2, f2] = errors(64);
  EXPECT_LT(d2, 1e-3);
  EXPECT_LT(f2, 2.5e-2);
  EXPECT_GT(std::log2(d1 / d2), 1.8);
  EXPECT_GT(std::log2(f1 / f2), 0.9);
}

class HingedSineTrace : public ::testing::TestWithParam<int> {};

TEST_P(HingedSineTrace, FluxRecoveryOfThirdDerivative) {
  const int k = GetParam();
  for (const LayerStack& st : {testing::decoupled_stack(1), unit_stack(1)}) {
    const auto s = assemble(st, Mesh::uniform(1.0, 64), BoundaryKind::HingedNeumann);
    const DofLayout& L = s.layout;
    Eigen::VectorXd full = Eigen::VectorXd::Zero(L.n_full());
    for (int i = 0; i <= L.n_elements; ++i) {
      const double x = s.mesh.nodes[i];
      full(L.w_value(i)) = std::sin(k * pi * x);
      full(L.w_slope(i)) = k * pi * std::cos(k * pi * x);
    }
    const State y{s.restrict_full(full), Eigen::VectorXd::Zero(s.size())};
    const double exact = -std::pow(k * pi, 3) * std::cos(k * pi);
    EXPECT_LT(testing::rel_err(trace(s, y, TraceId::d3z), exact), 1e-2) << "k=" << k;
  }
}

INSTANTIATE_TEST_SUITE_P(Modes, HingedSineTrace, ::testing::Values(1, 2, 3, 4));

TEST(Trace, DirectAndFluxThirdDerivativeConverge) {
  // z = x - 2x^3 + x^4 satisfies the hinged conditions, z'''(1) = 12
  double prev_direct = 1e300, prev_flux = 1e300;
  for (int ne : {16, 32, 64}) {
    const auto s = assemble(unit_stack(1), Mesh::uniform(1.0, ne), BoundaryKind::HingedNeumann);
    const auto full = interpolate(s, [](double x) { return x - 2 * x * x * x + x * x * x * x; },
                                  [](double x) { return 1 - 6 * x * x + 4 * x * x * x; }, nullptr);
    const State y{s.restrict_full(full), Eigen::VectorXd::Zero(s.size())};
    const double ed = std::abs(trace(s, y, TraceId::d3z, 0, TraceMode::direct) - 12.0);
    const double ef = std::abs(trace(s, y, TraceId::d3z, 0, TraceMode::flux) - 12.0);
    EXPECT_LT(ed, prev_direct);
    EXPECT_LT(ef, prev_flux);
    prev_direct = ed;
    prev_flux = ef;
  }
  EXPECT_LT(prev_flux, 0.12);
}

TEST(Trace, SecondDerivativeOfLinearElementsUnsupported) {
  const auto s = assemble(unit_stack(1), Mesh::uniform(1.0, 8, LagrangeOrder::linear),
                          BoundaryKind::HingedNeumann);
  EXPECT_THROW(trace(s, State::zero(s.size()), TraceId::d2v, 0, TraceMode::direct), ValidationError);
  EXPECT_NO_THROW(trace(s, State::zero(s.size()), TraceId::d2v, 0, TraceMode::flux));
}

TEST(Trace, WaveLayerNeumannSecondDerivative) {
  // y = cos(pi x) in the bottom layer, decoupled: y''(1) = pi^2
  const auto s = assemble(testing::decoupled_stack(1), Mesh::uniform(1.0, 64), BoundaryKind::HingedNeumann);
  const auto full = interpolate(s, nullptr, nullptr,
                                [](double x, int layer) { return layer == 0 ? std::cos(pi * x) : 0.0; });
  const State y{s.restrict_full(full), Eigen::VectorXd::Zero(s.size())};
  EXPECT_LT(testing::rel_err(trace(s, y, TraceId::d2v, 0), pi * pi), 1e-2);
  EXPECT_LT(testing::rel_err(trace(s, y, TraceId::d2v, 0, TraceMode::direct), pi * pi), 1e-2);
}

TEST(Quotient, IdempotentOnBasis) {
  const LayerStack st = unit_stack(1);
  const auto g = quadrature_grid(Mesh::uniform(1.0, 16), 8);
  const Eigen::MatrixXd B = quotient_basis(st, g, QuotientSubspace::H);
  const auto split = quotient_project(st, g, 3.0 * B.col(0), QuotientSubspace::H);
  EXPECT_LT(split.component_orthogonal.cwiseAbs().maxCoeff(), 1e-12);
  const Eigen::VectorXd f = Eigen::VectorXd::Random(g.size());
  const auto s2 = quotient_project(st, g, f, QuotientSubspace::M);
  EXPECT_LT((s2.component_in + s2.component_orthogonal - f).norm(), 1e-14);
}

// max over discrete basis functions phi of |<L phi, b>| / (||L phi|| ||b||)
double range_defect(BoundaryKind family, QuotientSubspace sub) {
  LayerStack st = unit_stack(1);
  st.rotary_coeff = 0.3;
  const auto s = assemble(st, Mesh::uniform(1.0, 16), family);
  const auto g = quadrature_grid(s.mesh, 10);
  const Eigen::MatrixXd B = quotient_basis(st, g, sub);
  const Eigen::Map<const Eigen::VectorXd> w(g.w.data(), g.size());
  double worst = 0.0;
  for (int k = 0; k < s.T.outerSize(); ++k) {
    const Eigen::VectorXd full = s.T.col(k);
    if (full.head(s.layout.n_w()).cwiseAbs().maxCoeff() == 0.0) continue;
    const Eigen::VectorXd Lphi = apply_rayleigh_operator(s, full, g);
    const double nl = std::sqrt(Lphi.dot(w.cwiseProduct(Lphi)));
    for (int c = 0; c < B.cols(); ++c) {
      const double nb = std::sqrt(B.col(c).dot(w.cwiseProduct(B.col(c))));
      worst = std::max(worst, std::abs(Lphi.dot(w.cwiseProduct(B.col(c)))) / (nl * nb));
    }
  }
  return worst;
}

TEST(Quotient, RangeOfRayleighOperatorOrthogonalToM) {
  // free w dofs of the clamped family span discrete H^2_0
  EXPECT_LT(range_defect(BoundaryKind::ClampedDirichlet, QuotientSubspace::M), 1e-8);
}

TEST(Quotient, RangeOfRayleighOperatorOrthogonalToH) {
  // z(0) = z'(0) = z(L) = 0
  EXPECT_LT(range_defect(BoundaryKind::MixedMixed, QuotientSubspace::H), 1e-8);
}

TEST(Quotient, HingedRangeIsNotOrthogonalToM) {
  EXPECT_GT(range_defect(BoundaryKind::HingedNeumann, QuotientSubspace::M), 1e-3);
}

TEST(Mesh, Validation) {
  EXPECT_TRUE(validate(Mesh::uniform(2.0, 5), 2.0).empty());
  Mesh m = Mesh::uniform(1.0, 4);
  m.nodes[2] = m.nodes[1];
  EXPECT_FALSE(validate(m, 1.0).empty());
  EXPECT_FALSE(validate(Mesh::uniform(1.0, 4), 2.0).empty());
  EXPECT_THROW(assemble(unit_stack(1), m, BoundaryKind::MixedMixed), ValidationError);
}

TEST(Mesh, NonuniformNodesAssemble) {
  Mesh m;
  for (int i = 0; i <= 12; ++i) m.nodes.push_back(std::pow(i / 12.0, 1.3));
  const auto s = assemble(unit_stack(1), m, BoundaryKind::ClampedDirichlet);
  EXPECT_LT(sym_defect(s.stiffness), 1e-12);
}

TEST(Triplets, Format) {
  SpMat A(2, 2);
  A.insert(0, 1) = 2.5;
  A.insert(1, 0) = -1.0;
  std::ostringstream os;
  write_triplets(os, A);
  EXPECT_EQ(os.str(), "1 0 -1\n0 1 2.5\n");
}

TEST(Boundary, Names) {
  for (auto bc : kAllBoundaryKinds) EXPECT_EQ(parse_boundary(short_name(bc)), bc);
  EXPECT_THROW(parse_boundary("x-y"), ValidationError);
}

}  // namespace
}  // namespace rnc
