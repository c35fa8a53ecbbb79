// Serial reference against the OpenMP path for the data-parallel kernels.
// Run with e.g. OMP_NUM_THREADS=4 ./bench_kernels.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "cpt/kernels.hpp"
#include "cpt/synthetic.hpp"
#include "cpt/tree.hpp"

namespace {

using cpt::kernels::Exec;

cpt::SparseVector sample_vector(std::mt19937_64& rng) {
  std::vector<cpt::Feature> f;
  for (int i = 0; i < 20; ++i) f.push_back({static_cast<std::uint32_t>(rng() & 0x3ffff), 1.0});
  return cpt::canonicalize(std::move(f), 18);
}

std::vector<cpt::LinearRegressor> trained_bank(std::size_t n, std::mt19937_64& rng) {
  std::vector<cpt::LinearRegressor> regs(n, cpt::LinearRegressor({0.05, 18}));
  for (int i = 0; i < 20; ++i) cpt::kernels::update_one_hot(regs, sample_vector(rng), rng() % n, Exec::kSerial);
  return regs;
}

template <Exec E>
void BM_predict_all(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto regs = trained_bank(n, rng);
  const auto x = sample_vector(rng);
  std::vector<double> out(n);
  for (auto _ : state) {
    cpt::kernels::predict_all(regs, x, out, E);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <Exec E>
void BM_update_one_hot(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  auto regs = trained_bank(n, rng);
  const auto x = sample_vector(rng);
  std::size_t hot = 0;
  for (auto _ : state) {
    cpt::kernels::update_one_hot(regs, x, hot, E);
    hot = (hot + 1) % n;
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <Exec E>
void BM_true_regret(benchmark::State& state) {
  cpt::SyntheticSpec spec;
  spec.labels = 256;
  spec.contexts = static_cast<std::size_t>(state.range(0));
  spec.clusters = 16;
  const auto task = cpt::SyntheticTask::generate(spec);
  cpt::CondProbTree tree;
  for (const auto& ex : task.sample(5000, 3)) tree.learn(ex);
  for (auto _ : state) benchmark::DoNotOptimize(cpt::true_regret(tree, task, E));
}

BENCHMARK(BM_predict_all<Exec::kSerial>)->Arg(64)->Arg(1024)->Arg(16384);
BENCHMARK(BM_predict_all<Exec::kParallel>)->Arg(64)->Arg(1024)->Arg(16384);
BENCHMARK(BM_update_one_hot<Exec::kSerial>)->Arg(64)->Arg(1024)->Arg(16384);
BENCHMARK(BM_update_one_hot<Exec::kParallel>)->Arg(64)->Arg(1024)->Arg(16384);
BENCHMARK(BM_true_regret<Exec::kSerial>)->Arg(256)->Arg(4096);
BENCHMARK(BM_true_regret<Exec::kParallel>)->Arg(256)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
