// Serial reference kernels against their OpenMP counterparts.

#include "specquant/kernels.hpp"
#include "specquant/parallel.hpp"
#include "specquant/pca.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace specquant;

namespace {

struct Workload {
  Workload() {
    grid = std::make_shared<const WavelengthGrid>(WavelengthGrid::default_mid_ir());
    library = std::make_shared<const GasLibrary>(synthesize_library(1, grid));
    setup.shapes = &library->shapes();
    setup.scaled_norms = kDefaultPathLengthCm * library->norms();
    setup.scheme = group_scheme(1);
    setup.noise = NoiseSpec::from_snr_db(30);
    setup.seed = 3;
    data = generate_dataset(*library, group_scheme(1), 2000, kDefaultPathLengthCm, setup.noise, 3).absorbances;
    basis = fit_pca(data, grid, Flavor::kFunctional, true, 20);
    scores = project(basis, data).scores;
  }

  GridPtr grid;
  std::shared_ptr<const GasLibrary> library;
  kernels::ForwardSetup setup;
  RowMatrix data;
  PcBasis basis;
  RowMatrix scores;
};

const Workload& workload() {
  static const Workload w;
  return w;
}

template <bool Parallel>
void synthesize(benchmark::State& state) {
  const auto& w = workload();
  set_thread_count(static_cast<int>(state.range(0)));
  const auto n = static_cast<Eigen::Index>(state.range(1));
  RowMatrix a(n, static_cast<Eigen::Index>(w.grid->size())), c(n, 9);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::omp::synthesize_rows(w.setup, 0, a, c);
    } else {
      kernels::serial::synthesize_rows(w.setup, 0, a, c);
    }
    benchmark::DoNotOptimize(a.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}

template <bool Parallel>
void project_scores(benchmark::State& state) {
  const auto& w = workload();
  set_thread_count(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    RowMatrix s = Parallel ? kernels::omp::project_rows(w.data, w.basis.mean, w.basis.weights(), w.basis.components)
                           : kernels::serial::project_rows(w.data, w.basis.mean, w.basis.weights(), w.basis.components);
    benchmark::DoNotOptimize(s.data());
  }
  state.SetItemsProcessed(state.iterations() * w.data.rows());
}

template <bool Parallel>
void reconstruct_spectra(benchmark::State& state) {
  const auto& w = workload();
  set_thread_count(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    RowMatrix x = Parallel ? kernels::omp::reconstruct_rows(w.scores, w.basis.components, w.basis.mean, 20)
                           : kernels::serial::reconstruct_rows(w.scores, w.basis.components, w.basis.mean, 20);
    benchmark::DoNotOptimize(x.data());
  }
  state.SetItemsProcessed(state.iterations() * w.scores.rows());
}

}  // namespace

BENCHMARK(synthesize<false>)->Args({1, 1000})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(synthesize<true>)->ArgsProduct({{1, 2, 4, 8}, {1000}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(project_scores<false>)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(project_scores<true>)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(reconstruct_spectra<false>)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(reconstruct_spectra<true>)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
