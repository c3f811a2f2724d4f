#include <gtest/gtest.h>

#include <cmath>

#include "rnc/errors.hpp"
#include "rnc/observability.hpp"
#include "support.hpp"

namespace rnc {
namespace {

TEST(Norms, ModalStateNorms) {
  for (auto bc : kAllBoundaryKinds) {
    const auto s = assemble(testing::graded_stack(), Mesh::uniform(1.0, 16), bc);
    const ModalBasis mb = undamped_modes(s, 3);
    for (int k = 0; k < 3; ++k) {
      const double w = mb.omega(k);
      const State y{mb.phi.col(k), Eigen::VectorXd::Zero(s.size())};
      EXPECT_LT(testing::rel_err(natural_norm(s, y), w), 1e-9);
      EXPECT_LT(testing::rel_err(state_norm(s, y, NormKind::H_minus_1), 1.0), 1e-9);
      const double h = bc == BoundaryKind::HingedNeumann ? w * w : w;
      EXPECT_LT(testing::rel_err(state_norm(s, y, NormKind::H), h), 1e-9) << short_name(bc);
      const State yv{Eigen::VectorXd::Zero(s.size()), w * mb.phi.col(k)};
      EXPECT_LT(testing::rel_err(natural_norm(s, yv), w), 1e-9);
      EXPECT_LT(testing::rel_err(state_norm(s, yv, NormKind::H_minus_1), 1.0), 1e-9);
    }
  }
  EXPECT_EQ(observability_norm(BoundaryKind::MixedMixed), NormKind::H_minus_1);
  EXPECT_EQ(observability_norm(BoundaryKind::ClampedDirichlet), NormKind::H);
}

TEST(Ensemble, DeterministicPerSeed) {
  const auto s = assemble(unit_stack(1), Mesh::uniform(1.0, 12), BoundaryKind::HingedNeumann);
  const ModalBasis mb = undamped_modes(s, 8);
  const auto a = draw_ensemble(mb, {4, 7, 8});
  const auto b = draw_ensemble(mb, {4, 7, 8});
  const auto c = draw_ensemble(mb, {4, 8, 8});
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(a[i].x == b[i].x && a[i].v == b[i].v);
  EXPECT_FALSE(a[0].x == c[0].x);
  EXPECT_THROW(draw_ensemble(mb, {4, 1, 9}), ValidationError);
  EXPECT_THROW(draw_ensemble(mb, {0, 1, 4}), ValidationError);
}

TEST(Observability, ZeroSampleRejected) {
  const auto s = assemble(unit_stack(1), Mesh::uniform(1.0, 8), BoundaryKind::MixedMixed);
  const std::vector<State> samples{State::zero(s.size())};
  EXPECT_THROW(estimate_constants(s, 1.0, 0.01, samples), ValidationError);
  EXPECT_THROW(time_sweep(s, {0.5, 1.0}, 0.01, samples), ValidationError);
}

TEST(Observability, RatioIsScaleInvariant) {
  const auto s = assemble(testing::graded_stack(), Mesh::uniform(1.0, 16), BoundaryKind::ClampedDirichlet);
  const auto ens = draw_ensemble(undamped_modes(s, 6), {1, 3, 6});
  std::vector<State> scaled{{-7.5 * ens[0].x, -7.5 * ens[0].v}};
  const double a = estimate_constants(s, 1.0, 0.01, ens).ratio_min;
  const double b = estimate_constants(s, 1.0, 0.01, scaled).ratio_min;
  EXPECT_LT(testing::rel_err(b, a), 1e-12);
}

TEST(Observability, ReportBookkeeping) {
  const auto s = assemble(unit_stack(1), Mesh::uniform(1.0, 12), BoundaryKind::HingedNeumann);
  const auto r = estimate_constants(s, 1.0, 0.01, EnsembleSpec{5, 3, 6});
  EXPECT_EQ(r.n_samples, 5);
  EXPECT_EQ(r.ratios.size(), 5u);
  EXPECT_EQ(r.ratio_min, r.ratios[r.argmin]);
  EXPECT_EQ(r.ratio_max, r.ratios[r.argmax]);
  EXPECT_LE(r.ratio_min, r.ratio_max);
  EXPECT_EQ(r.tau_used, min_control_time(s.stack, TauInterpretation::physical));
  EXPECT_GT(r.ratio_min, 0.0);
}

TEST(Observability, SweepIsMonotoneInTime) {
  for (auto bc : kAllBoundaryKinds) {
    const auto s = assemble(testing::damped_stack(1, 0.1), Mesh::uniform(1.0, 16), bc);
    const auto tab = time_sweep(s, {0.5, 1.0, 2.0, 3.0, 4.0}, 0.01, EnsembleSpec{6, 2, 8});
    for (std::size_t i = 1; i < tab.rows.size(); ++i)
      EXPECT_GE(tab.rows[i].ratio_min, tab.rows[i - 1].ratio_min) << short_name(bc);
    EXPECT_EQ(tab.tau, 2.0);
  }
}

TEST(Observability, SweepAgreesWithDirectEstimate) {
  const auto s = assemble(unit_stack(1), Mesh::uniform(1.0, 12), BoundaryKind::MixedMixed);
  const auto ens = draw_ensemble(undamped_modes(s, 6), {3, 11, 6});
  const auto tab = time_sweep(s, {1.0, 2.0}, 0.01, ens);
  const auto rep = estimate_constants(s, 2.0, 0.01, ens);
  EXPECT_LT(testing::rel_err(tab.rows[1].ratio_min, rep.ratio_min), 1e-12);
  EXPECT_LT(testing::rel_err(tab.rows[1].ratio_max, rep.ratio_max), 1e-12);
}

TEST(Observability, LocalizedDataUnseenBeforeArrival) {
  const auto s = assemble(testing::decoupled_stack(1), Mesh::uniform(1.0, 64), BoundaryKind::HingedNeumann);
  const std::vector<State> samples{localized_state(s, 0.2)};
  const auto tab = time_sweep(s, {0.4, 4.0}, 0.0025, samples);
  EXPECT_LT(tab.rows[0].ratio_max, 1e-3 * tab.rows[1].ratio_max);
}

TEST(Observability, CumulativeTraceEnergy) {
  Trajectory tr;
  tr.times = {0.0, 0.5, 1.0};
  tr.channels.resize(3, 2);
  tr.channels << 1, 0, 1, 1, 0, 2;
  const auto c = cumulative_trace_energy(tr);
  EXPECT_DOUBLE_EQ(c[1], 0.25 * (1 + 2));
  EXPECT_DOUBLE_EQ(c[2], 0.75 + 0.25 * (2 + 4));
  EXPECT_DOUBLE_EQ(trace_energy(tr), c[2]);
  Trajectory none;
  EXPECT_THROW(trace_energy(none), ValidationError);
}

TEST(DirectInequality, ZeroForcingFlagged) {
  const auto s = assemble(unit_stack(1), Mesh::uniform(1.0, 8), BoundaryKind::HingedNeumann);
  const auto r = direct_inequality_check(s, Eigen::VectorXd::Zero(s.size()),
                                         Eigen::VectorXd::Ones(101), 1.0, 0.01);
  EXPECT_TRUE(r.zero_forcing);
  EXPECT_THROW(direct_inequality_check(s, Eigen::VectorXd::Zero(s.size()), Eigen::VectorXd::Ones(5), 1.0, 0.01),
               ValidationError);
}

TEST(DirectInequality, RatioBoundedUnderRefinement) {
  for (auto bc : kAllBoundaryKinds) {
    std::vector<double> ratios;
    for (int ne : {16, 32}) {
      const auto s = assemble(unit_stack(1), Mesh::uniform(1.0, ne), bc);
      const auto load = transverse_load(s, [](double x) { return std::exp(-40 * (x - 0.4) * (x - 0.4)); });
      const int n = 200;
      Eigen::VectorXd sig(n + 1);
      for (int k = 0; k <= n; ++k) sig(k) = std::sin(0.1 * k);
      const auto r = direct_inequality_check(s, load, sig, 2.0, 0.01);
      EXPECT_FALSE(r.zero_forcing);
      EXPECT_TRUE(std::isfinite(r.ratio));
      ratios.push_back(r.ratio);
    }
    EXPECT_LT(ratios[1], 2.0 * ratios[0]) << short_name(bc);
    EXPECT_GT(ratios[1], 0.5 * ratios[0]) << short_name(bc);
  }
}

TEST(Loads, TransverseLoadIntegratesForce) {
  // l . x equals the integral of f w
  const auto s = assemble(unit_stack(1), Mesh::uniform(1.0, 16), BoundaryKind::HingedNeumann);
  const auto full = testing::interpolate(s, [](double x) { return x * (1 - x); },
                                         [](double x) { return 1 - 2 * x; }, nullptr);
  const Eigen::VectorXd x = s.restrict_full(full);
  const auto l = transverse_load(s, [](double) { return 3.0; });
  EXPECT_NEAR(l.dot(x), 3.0 / 6.0, 1e-12);
}

}  // namespace
}  // namespace rnc
