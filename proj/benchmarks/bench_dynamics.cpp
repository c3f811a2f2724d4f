#include <benchmark/benchmark.h>

#include "rnc/dynamics.hpp"
#include "rnc/spectral.hpp"

namespace {

void BM_CrankNicolsonStep(benchmark::State& state) {
  const auto bc = static_cast<rnc::BoundaryKind>(state.range(1));
  rnc::LayerStack stack = rnc::unit_stack(2);
  stack.damping_even.assign(2, 0.05);
  const auto sys = rnc::assemble(stack, rnc::Mesh::uniform(1.0, static_cast<int>(state.range(0))), bc);
  const rnc::Stepper st(sys, 1e-3);
  const auto mb = rnc::undamped_modes(sys, 3);
  rnc::State y{mb.phi.col(0), mb.phi.col(2)};
  for (auto _ : state) {
    st.step(y, 1, 1.0, nullptr, nullptr);
    benchmark::DoNotOptimize(y.x.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_CrankNicolsonStep)->ArgsProduct({{32, 64, 128}, {0, 1, 2}});

void BM_Integrate(benchmark::State& state) {
  const auto sys =
      rnc::assemble(rnc::unit_stack(1), rnc::Mesh::uniform(1.0, 64), rnc::BoundaryKind::HingedNeumann);
  const auto mb = rnc::undamped_modes(sys, 2);
  const rnc::State y0{mb.phi.col(0), mb.phi.col(1)};
  for (auto _ : state) benchmark::DoNotOptimize(rnc::integrate(sys, y0, 2.0, 1e-3));
}
BENCHMARK(BM_Integrate)->Unit(benchmark::kMillisecond);

}  // namespace
