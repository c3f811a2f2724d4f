#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rnc/errors.hpp"
#include "rnc/spectral.hpp"
#include "support.hpp"

namespace rnc {
namespace {

using std::numbers::pi;

std::vector<double> analytic_union(const LayerStack& st, BoundaryKind bc, int per_block) {
  std::vector<double> f;
  for (int k = 1; k <= per_block; ++k) {
    f.push_back(decoupled_frequency(st, bc, -1, k));
    for (int i = 0; i < st.n_odd(); ++i) f.push_back(decoupled_frequency(st, bc, i, k));
  }
  std::sort(f.begin(), f.end());
  return f;
}

class DecoupledSpectrum : public ::testing::TestWithParam<BoundaryKind> {};

TEST_P(DecoupledSpectrum, MatchesClosedForms) {
  LayerStack st = testing::decoupled_stack(1);
  st.youngs_odd = {2.0, 0.7};
  st.rotary_coeff = 0.05;
  const auto s = assemble(st, Mesh::uniform(1.0, 48), GetParam());
  const ModalBasis mb = undamped_modes(s, 6);
  const auto exact = analytic_union(st, GetParam(), 6);
  for (int k = 0; k < 6; ++k) EXPECT_LT(testing::rel_err(mb.omega(k), exact[k]), 1e-4) << k;
}

INSTANTIATE_TEST_SUITE_P(Families, DecoupledSpectrum, ::testing::ValuesIn(kAllBoundaryKinds),
                         [](const auto& info) {
                           std::string n = short_name(info.param);
                           n.erase(std::remove(n.begin(), n.end(), '-'), n.end());
                           return n;
                         });

TEST(ClampedRoots, EulerBernoulliLimit) {
  LayerStack st = unit_stack(1);
  st.rotary_coeff = 1e-12;
  EXPECT_NEAR(clamped_rayleigh_wavenumber(st, false, 1), 4.730040745, 1e-6);
  EXPECT_NEAR(clamped_rayleigh_wavenumber(st, false, 2), 7.853204624, 1e-6);
  EXPECT_NEAR(clamped_rayleigh_wavenumber(st, true, 1), 3.926602312, 1e-6);
  EXPECT_NEAR(clamped_rayleigh_wavenumber(st, true, 2), 7.068582765, 1e-6);
}

TEST(ClampedRoots, ScaleWithLength) {
  LayerStack st = unit_stack(1);
  st.rotary_coeff = 1e-12;
  st.length = 2.0;
  EXPECT_NEAR(clamped_rayleigh_wavenumber(st, false, 1), 4.730040745 / 2.0, 1e-6);
  EXPECT_THROW(clamped_rayleigh_wavenumber(st, false, 0), ValidationError);
}

TEST(Spectrum, UndampedModesAreMassOrthonormal) {
  const auto s = assemble(testing::graded_stack(), Mesh::uniform(1.0, 16), BoundaryKind::ClampedDirichlet);
  const ModalBasis mb = undamped_modes(s, 10);
  const Eigen::MatrixXd G = mb.phi.transpose() * (s.mass * mb.phi);
  EXPECT_LT((G - Eigen::MatrixXd::Identity(10, 10)).norm(), 1e-9);
  for (int k = 1; k < 10; ++k) EXPECT_GE(mb.omega(k), mb.omega(k - 1));
}

TEST(Spectrum, UndampedPairsArePurelyImaginary) {
  const auto s = assemble(unit_stack(1), Mesh::uniform(1.0, 16), BoundaryKind::HingedNeumann);
  const auto pairs = eigenpairs(s, 5, true);
  ASSERT_EQ(pairs.size(), 10u);
  for (std::size_t k = 0; k < pairs.size(); k += 2) {
    EXPECT_EQ(pairs[k].lambda.real(), 0.0);
    EXPECT_GT(pairs[k].lambda.imag(), 0.0);
    EXPECT_EQ(pairs[k + 1].lambda, std::conj(pairs[k].lambda));
    EXPECT_LT(pairs[k].residual, 1e-8);
  }
}

TEST(Spectrum, DampedEigenvaluesInLeftHalfPlane) {
  for (auto bc : kAllBoundaryKinds) {
    const auto s = assemble(testing::damped_stack(2, 0.2), Mesh::uniform(1.0, 10), bc);
    const auto pairs = eigenpairs(s, 8, true);
    for (const auto& p : pairs) {
      EXPECT_LE(p.lambda.real(), 1e-10 * std::abs(p.lambda)) << short_name(bc);
      EXPECT_LT(p.residual, 1e-7);
    }
  }
}

TEST(Spectrum, QuadraticEigenIdentity) {
  const auto s = assemble(testing::damped_stack(1, 0.5), Mesh::uniform(1.0, 10), BoundaryKind::MixedMixed);
  const auto n = s.size();
  const auto pairs = eigenpairs(s, 6, true);
  using C = std::complex<double>;
  const Eigen::SparseMatrix<C> M = s.mass.cast<C>(), D = s.damping.cast<C>(), K = s.stiffness.cast<C>();
  for (const auto& p : pairs) {
    const Eigen::VectorXcd U = p.mode.head(n);
    const C m = U.dot(M * U), d = U.dot(D * U), k = U.dot(K * U);
    EXPECT_LT(std::abs(p.lambda * p.lambda * m + p.lambda * d + k), 1e-8 * std::abs(k));
  }
}

TEST(Spectrum, ZeroDampingSwitchMatchesUndamped) {
  const auto s = assemble(testing::damped_stack(1, 0.5), Mesh::uniform(1.0, 10), BoundaryKind::MixedMixed);
  const auto off = eigenpairs(s, 4, false);
  const auto und = assemble(unit_stack(1), Mesh::uniform(1.0, 10), BoundaryKind::MixedMixed);
  const auto ref = eigenpairs(und, 4, true);
  for (std::size_t k = 0; k < off.size(); ++k) EXPECT_NEAR(off[k].lambda.imag(), ref[k].lambda.imag(), 1e-9);
}

TEST(Margins, PositiveForCoupledStacks) {
  for (auto bc : kAllBoundaryKinds) {
    const auto s = assemble(testing::graded_stack(), Mesh::uniform(1.0, 24), bc);
    const auto pairs = eigenpairs(s, 10, true);
    EXPECT_GT(uniqueness_margin(s, pairs), 1e-6) << short_name(bc);
  }
}

TEST(Margins, BlindObservationHasZeroMargin) {
  const auto s = assemble(unit_stack(1), Mesh::uniform(1.0, 8), BoundaryKind::HingedNeumann);
  const auto pairs = eigenpairs(s, 3, true);
  Observation blind;
  blind.names = {"none"};
  blind.Cx = Eigen::MatrixXd::Zero(1, s.size());
  blind.Cv = Eigen::MatrixXd::Zero(1, s.size());
  EXPECT_EQ(uniqueness_margin(s, pairs, blind), 0.0);
  EXPECT_THROW(uniqueness_margin(s, {}), ValidationError);
}

TEST(Margins, HingedSineModeThirdDerivative) {
  // decoupled h-N beam mode sin(k pi x), M-normalized, has |z'''(1)| = (k pi)^3 / norm
  const auto s = assemble(testing::decoupled_stack(1), Mesh::uniform(1.0, 64), BoundaryKind::HingedNeumann);
  const auto pairs = eigenpairs(s, 1, false);
  const double amp = std::abs(pairs[0].margin_traces(0));
  const double norm = std::sqrt((1.0 + pi * pi) * 0.5);  // M-norm of sin(pi x)
  EXPECT_LT(testing::rel_err(amp, std::pow(pi, 3) / norm), 1e-2);
}

}  // namespace
}  // namespace rnc
