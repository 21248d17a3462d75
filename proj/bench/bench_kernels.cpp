// Serial reference against the OpenMP kernels, plus one master step and a
// small ensemble. Set OMP_NUM_THREADS to compare thread counts.

#include <random>

#include <benchmark/benchmark.h>

#include "iondecoh/fock.hpp"
#include "iondecoh/kernels.hpp"
#include "iondecoh/master.hpp"
#include "iondecoh/trajectories.hpp"

using namespace iondecoh;

namespace {

Operator x_squared(std::size_t dim) {
  const auto q = quadratures(FockSpace(dim));
  return q.X * q.X;
}

struct Fixture {
  kernels::BandedOperator X2;
  Operator M;

  explicit Fixture(std::size_t dim) : X2(kernels::BandedOperator::from_dense(x_squared(dim))) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> d;
    M.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      for (Eigen::Index i = 0; i < M.rows(); ++i) M(i, j) = {d(rng), d(rng)};
  }
};

void BM_CommutatorSerial(benchmark::State& state) {
  const Fixture f(static_cast<std::size_t>(state.range(0)));
  Operator out;
  for (auto _ : state) {
    kernels::serial::sandwich_commutator(f.X2, f.M, f.X2, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_CommutatorParallel(benchmark::State& state) {
  const Fixture f(static_cast<std::size_t>(state.range(0)));
  Operator out;
  for (auto _ : state) {
    kernels::sandwich_commutator(f.X2, f.M, f.X2, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_DenseCommutator(benchmark::State& state) {
  const Fixture f(static_cast<std::size_t>(state.range(0)));
  const Operator X2 = f.X2.to_dense();
  Operator out;
  for (auto _ : state) {
    out.noalias() = X2 * f.M;
    out.noalias() -= f.M * X2;
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_MasterRhs(benchmark::State& state) {
  auto p = desk_params();
  p.dim = static_cast<std::size_t>(state.range(0));
  const master::MasterEquation eq(p, {});
  const auto blocks = master::initial_blocks(p, 1.0);
  for (auto _ : state) {
    auto d = eq.rhs(blocks);
    benchmark::DoNotOptimize(d.ge.data());
  }
}

void BM_Ensemble(benchmark::State& state) {
  auto p = desk_params();
  p.dim = 48;
  const std::vector<double> grid{0.0, 0.5, 1.0};
  trajectories::EnsembleOptions o;
  o.dt = 0.01;
  for (auto _ : state) {
    const auto r = state.range(0) == 0 ? trajectories::run_ensemble_serial(p, 0.05, 64, grid, 1, o)
                                       : trajectories::run_ensemble(p, 0.05, 64, grid, 1, o);
    benchmark::DoNotOptimize(r.R.data());
  }
}

}  // namespace

BENCHMARK(BM_CommutatorSerial)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_CommutatorParallel)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_DenseCommutator)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_MasterRhs)->Arg(64)->Arg(128);
BENCHMARK(BM_Ensemble)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
