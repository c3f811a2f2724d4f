#include <benchmark/benchmark.h>

#include "rnc/hum_control.hpp"

namespace {

void BM_GramianApply(benchmark::State& state) {
  const auto bc = static_cast<rnc::BoundaryKind>(state.range(0));
  const auto sys = rnc::assemble(rnc::unit_stack(1), rnc::Mesh::uniform(1.0, 32), bc);
  const rnc::HumOperator op(sys, 3.0, 3.0 / 1000, 10);
  const Eigen::VectorXd a = Eigen::VectorXd::LinSpaced(op.dim(), -1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(rnc::gramian_apply(op, a));
}
BENCHMARK(BM_GramianApply)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

}  // namespace
