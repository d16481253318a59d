// Serial reference kernels against their OpenMP variants.

#include "thmrom/experiments.hpp"
#include "thmrom/kernels.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace thmrom;

Exec exec_of(const benchmark::State& state) {
  return state.range(1) == 0 ? Exec::serial : Exec::parallel;
}

std::shared_ptr<const SpaceSet> spaces(int n) {
  return build_spaces(std::make_shared<const Mesh>(build_unit_square_mesh(n)),
                      BcSpec::all_dirichlet());
}

DenseMatrix random_matrix(int rows, int cols) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  DenseMatrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = d(rng);
  return m;
}

void BM_AssembleElasticity(benchmark::State& state) {
  const auto s = spaces(static_cast<int>(state.range(0)));
  const ManufacturedCase mc = ManufacturedCase::standard();
  AssemblyOptions opts;
  opts.exec = exec_of(state);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        assemble_form(FormId::AUU, mc.params(), mc.coefficients(), *s, 0.01, opts));
}

void BM_AssembleLoad(benchmark::State& state) {
  const auto s = spaces(static_cast<int>(state.range(0)));
  const Forcing f = ManufacturedCase::standard().forcing_functions();
  for (auto _ : state) benchmark::DoNotOptimize(assemble_load(f.f, 0.5, *s, exec_of(state)));
}

void BM_GramCorrelation(benchmark::State& state) {
  const auto s = spaces(static_cast<int>(state.range(0)));
  const SparseMatrix g = assemble_form(FormId::GRAM_P, PhysicalParams{},
                                       CoefficientField::uniform(1, 1), *s, 1.0);
  const DenseMatrix snaps = random_matrix(static_cast<int>(g.rows()), 200);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::gram_correlation(g, snaps, exec_of(state)));
}

void BM_Congruence(benchmark::State& state) {
  const auto s = spaces(static_cast<int>(state.range(0)));
  const ManufacturedCase mc = ManufacturedCase::standard();
  const SparseMatrix a =
      assemble_form(FormId::AUU, mc.params(), mc.coefficients(), *s, 1.0);
  const DenseMatrix basis = random_matrix(static_cast<int>(a.rows()), 20);
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::congruence(basis, a, basis, exec_of(state)));
}

void mesh_sizes(benchmark::internal::Benchmark* b) {
  for (int n : {32, 64, 128})
    for (int parallel : {0, 1}) b->Args({n, parallel});
  b->ArgNames({"n", "parallel"})->Unit(benchmark::kMillisecond);
}

BENCHMARK(BM_AssembleElasticity)->Apply(mesh_sizes);
BENCHMARK(BM_AssembleLoad)->Apply(mesh_sizes);
BENCHMARK(BM_GramCorrelation)->Apply(mesh_sizes);
BENCHMARK(BM_Congruence)->Apply(mesh_sizes);

}  // namespace

BENCHMARK_MAIN();
