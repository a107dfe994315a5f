#include <benchmark/benchmark.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "pinntk/limiting_kernel.hpp"
#include "pinntk/trainer.hpp"

using namespace pinntk;

namespace {

DenseMatrix random_symmetric(Eigen::Index n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  DenseMatrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      a(i, j) = a(j, i) = normal(rng);
    }
  }
  return a;
}

ArchSpec width(std::size_t w) {
  ArchSpec spec;
  spec.hidden = {w};
  return spec;
}

void BM_SymEigJacobi(benchmark::State& state) {
  const DenseMatrix a = random_symmetric(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sym_eig(a));
  }
}
BENCHMARK(BM_SymEigJacobi)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_SymEigEigenLibrary(benchmark::State& state) {
  const DenseMatrix a = random_symmetric(state.range(0));
  for (auto _ : state) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(a);
    benchmark::DoNotOptimize(solver.eigenvalues().data());
  }
}
BENCHMARK(BM_SymEigEigenLibrary)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_AssemblePoisson(benchmark::State& state) {
  const PdeProblem prob = poisson1d(4.0);
  const MlpParams p = init(width(static_cast<std::size_t>(state.range(0))), 0);
  const Batch b = sample_batch(prob, {100, 100}, SamplingStrategy::fixed_uniform_grid, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble(p, prob, b));
  }
}
BENCHMARK(BM_AssemblePoisson)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_OperatorTapeVjp(benchmark::State& state) {
  ArchSpec spec;
  spec.input_dim = 2;
  spec.hidden = {128, 128, 128};
  const MlpParams p = init(spec, 0);
  const PdeProblem prob = wave1d();
  const Batch b = sample_batch(prob, {300, 300, 300}, SamplingStrategy::uniform_random, 0);
  const GroupBatch& g = b.groups.back();
  const Vector w = Vector::Ones(g.points.cols());
  for (auto _ : state) {
    const OperatorTape tape(p, g.points, g.op);
    benchmark::DoNotOptimize(tape.vjp(w));
  }
}
BENCHMARK(BM_OperatorTapeVjp)->Unit(benchmark::kMillisecond);

void BM_LossGradientWave(benchmark::State& state) {
  ArchSpec spec;
  spec.input_dim = 2;
  spec.hidden = {128, 128, 128};
  const MlpParams p = init(spec, 0);
  const PdeProblem prob = wave1d();
  const Batch b = sample_batch(prob, {300, 300, 300}, SamplingStrategy::uniform_random, 0);
  const WeightState weights{{1.0, 1.0, 1.0}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(loss_and_gradient(p, b, weights));
  }
}
BENCHMARK(BM_LossGradientWave)->Unit(benchmark::kMillisecond);

void BM_LimitingThetaRr(benchmark::State& state) {
  const std::size_t order = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(theta_rr(0.3, 0.7, order));
  }
}
BENCHMARK(BM_LimitingThetaRr)->Arg(60)->Arg(200)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
