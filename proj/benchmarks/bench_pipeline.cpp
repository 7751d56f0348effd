#include <benchmark/benchmark.h>

#include <map>
#include <type_traits>

#include "gom/estimator.hpp"
#include "gom/moment_matrix.hpp"
#include "gom/oracle.hpp"
#include "gom/worked_example.hpp"

using namespace gom;

namespace {

const DiscreteLatentModel<Rational>& design_model(std::size_t J) {
  static std::map<std::size_t, DiscreteLatentModel<Rational>> cache;
  auto it = cache.find(J);
  if (it == cache.end()) it = cache.emplace(J, random_model(Scheme(std::vector<int>(J, 3)), 3, 11, true)).first;
  return it->second;
}

void BM_Tabulate(benchmark::State& state) {
  const Sample s = sample(worked_example_model(), static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(tabulate(s, 3));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Tabulate)->Arg(1000)->Arg(100000);

void BM_ExactMoments(benchmark::State& state) {
  const auto& model = design_model(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(exact_ell_moments(model, model.scheme().measurements()));
}
BENCHMARK(BM_ExactMoments)->DenseRange(3, 5);

template <typename T>
void BM_Complete(benchmark::State& state) {
  const auto& model = design_model(static_cast<std::size_t>(state.range(0)));
  MomentTable<T> mt;
  if constexpr (std::is_same_v<T, Rational>) {
    mt = exact_ell_moments(model, model.scheme().measurements());
  } else {
    mt = to_double_table(exact_ell_moments(model, model.scheme().measurements()));
  }
  const auto m = build_moment_matrix(mt, 2);
  const CompletionOptions opts{std::is_same_v<T, Rational> ? 0.0 : 1e-8, 10.0};
  for (auto _ : state) benchmark::DoNotOptimize(complete(m, 3, opts));
}
BENCHMARK(BM_Complete<Rational>)->DenseRange(3, 5)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Complete<double>)->DenseRange(3, 5)->Unit(benchmark::kMillisecond);

void BM_FitReferenceRational(benchmark::State& state) {
  const auto mt = exact_ell_moments(worked_example_model(), 3);
  FitConfig cfg;
  cfg.arithmetic = Arithmetic::rational;
  for (auto _ : state) benchmark::DoNotOptimize(fit(mt, cfg));
}
BENCHMARK(BM_FitReferenceRational)->Unit(benchmark::kMillisecond);

template <typename T>
void BM_Fit(benchmark::State& state) {
  const auto& model = design_model(static_cast<std::size_t>(state.range(0)));
  FitConfig cfg;
  cfg.main_residual = false;
  cfg.threads = static_cast<std::size_t>(state.range(1));
  if constexpr (std::is_same_v<T, Rational>) {
    cfg.arithmetic = Arithmetic::rational;
    const auto mt = exact_ell_moments(model, model.scheme().measurements());
    for (auto _ : state) benchmark::DoNotOptimize(fit(mt, cfg));
  } else {
    const auto mt = to_double_table(exact_ell_moments(model, model.scheme().measurements()));
    for (auto _ : state) benchmark::DoNotOptimize(fit(mt, cfg));
  }
}
BENCHMARK(BM_Fit<Rational>)->ArgsProduct({{4, 5}, {1, 4}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Fit<double>)->ArgsProduct({{4, 5}, {1, 4}})->Unit(benchmark::kMillisecond);

void BM_FitSampledWithRefinement(benchmark::State& state) {
  const auto& model = design_model(4);
  const auto mt = to_frequencies<double>(tabulate(sample(model, 5000, 3), 4));
  FitConfig cfg;
  cfg.K_override = 3;
  cfg.refine = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(fit(mt, cfg));
}
BENCHMARK(BM_FitSampledWithRefinement)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
