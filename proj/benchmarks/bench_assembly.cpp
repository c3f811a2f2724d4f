#include <benchmark/benchmark.h>

#include "rnc/fem_assembly.hpp"
#include "rnc/spectral.hpp"

namespace {

void BM_Assemble(benchmark::State& state) {
  const auto bc = static_cast<rnc::BoundaryKind>(state.range(1));
  const rnc::LayerStack stack = rnc::unit_stack(2);
  const rnc::Mesh mesh = rnc::Mesh::uniform(1.0, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rnc::assemble(stack, mesh, bc));
}
BENCHMARK(BM_Assemble)->ArgsProduct({{32, 64, 128}, {0, 1, 2}})->Unit(benchmark::kMillisecond);

void BM_UndampedModes(benchmark::State& state) {
  const auto sys = rnc::assemble(rnc::unit_stack(2), rnc::Mesh::uniform(1.0, static_cast<int>(state.range(0))),
                                 rnc::BoundaryKind::ClampedDirichlet);
  for (auto _ : state) benchmark::DoNotOptimize(rnc::undamped_modes(sys, 20));
}
BENCHMARK(BM_UndampedModes)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
