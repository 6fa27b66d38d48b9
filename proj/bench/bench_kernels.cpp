#include <benchmark/benchmark.h>

#include "mflab/fields.hpp"
#include "mflab/initial_law.hpp"
#include "mflab/particle.hpp"
#include "mflab/wasserstein.hpp"

namespace {

using namespace mflab;

struct Setup {
  LabelSpacePtr space = LabelSpace::line({0.0, 0.5, 1.0});
  FieldPtr field = make_field("linear", {{"a", 0.5}, {"b", 0.3}, {"c", 0.2}, {"d", 0.4}, {"e", 0.2}, {"f", 0.1}}, space);
  EmpiricalMeasure state;
  std::vector<double> noise;
  explicit Setup(std::size_t n) {
    InitialLaw law;
    state = sample_initial(law, space, n, 1, 7);
    noise.resize(n);
    fill_noise(7, 0, n, 1, 1e-3, noise);
  }
};

void BM_step_parallel(benchmark::State& st) {
  Setup s(static_cast<std::size_t>(st.range(0)));
  EmpiricalMeasure out = s.state;
  const StepParams p{1e-3, 0.005, 1.0};
  for (auto _ : st) {
    step(s.state, *s.field, p, s.noise, out);
    benchmark::DoNotOptimize(out.positions().data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_step_serial(benchmark::State& st) {
  Setup s(static_cast<std::size_t>(st.range(0)));
  EmpiricalMeasure out = s.state;
  const StepParams p{1e-3, 0.005, 1.0};
  for (auto _ : st) {
    step_serial(s.state, *s.field, p, s.noise, out);
    benchmark::DoNotOptimize(out.positions().data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_cost_parallel(benchmark::State& st) {
  Setup a(static_cast<std::size_t>(st.range(0))), b(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(ground_cost_matrix(a.state, b.state));
}

void BM_cost_serial(benchmark::State& st) {
  Setup a(static_cast<std::size_t>(st.range(0))), b(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(ground_cost_matrix_serial(a.state, b.state));
}

}  // namespace

BENCHMARK(BM_step_parallel)->Arg(1000)->Arg(10000);
BENCHMARK(BM_step_serial)->Arg(1000)->Arg(10000);
BENCHMARK(BM_cost_parallel)->Arg(100)->Arg(400);
BENCHMARK(BM_cost_serial)->Arg(100)->Arg(400);
BENCHMARK_MAIN();
