// OpenMP kernels against their single-threaded references.

#include <benchmark/benchmark.h>

#include <filesystem>
#include <unistd.h>

#include <omp.h>

#include "illum/dataset.hpp"
#include "illum/metrics.hpp"
#include "illum/png_io.hpp"
#include "illum/rng.hpp"

using namespace illum;
namespace fs = std::filesystem;

namespace {

std::vector<StimulusSpec> batch_specs() {
  SweepConfig c;
  c.seed = 3;
  c.targets = {{Family::sbc, 64}, {Family::white, 32}, {Family::grating, 64}, {Family::grid, 64}};
  return enumerate_sweep(c);
}

ResponseMap noise_map(int size, std::uint64_t seed) {
  CounterRng rng(seed, "bench");
  ResponseMap m(size, size);
  for (auto& v : m.pixels()) v = rng.uniform();
  return m;
}

void BM_render_batch(benchmark::State& state) {
  const auto specs = batch_specs();
  for (auto _ : state) benchmark::DoNotOptimize(render_batch(specs));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(specs.size()));
}

void BM_render_batch_serial(benchmark::State& state) {
  const auto specs = batch_specs();
  for (auto _ : state) benchmark::DoNotOptimize(render_batch_serial(specs));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(specs.size()));
}

void BM_ssim(benchmark::State& state) {
  const auto a = noise_map(static_cast<int>(state.range(0)), 1);
  const auto b = noise_map(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(ssim(a, b));
}

void BM_ssim_serial(benchmark::State& state) {
  const auto a = noise_map(static_cast<int>(state.range(0)), 1);
  const auto b = noise_map(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(ssim_serial(a, b));
}

// A small corpus scored against its own masks.
class EvalFixture : public benchmark::Fixture {
 public:
  void SetUp(const benchmark::State&) override {
    if (!manifest_.entries.empty()) return;
    dir_ = fs::temp_directory_path() / ("illum_bench_" + std::to_string(::getpid()));
    SweepConfig c;
    c.seed = 9;
    c.targets = {{Family::sbc, 40}, {Family::white, 20}, {Family::grid, 40}};
    manifest_ = build_dataset(c, dir_ / "corpus");
    fs::create_directories(dir_ / "pred");
    for (const auto& e : manifest_.entries) {
      auto mask = read_mask_png(manifest_.root / e.mask_path);
      Image pred(mask.width(), mask.height());
      for (std::size_t i = 0; i < mask.size(); ++i) pred.pixels()[i] = mask.pixels()[i] ? 200 : 20;
      write_png(dir_ / "pred" / (e.id + ".png"), pred);
    }
  }
  ~EvalFixture() override {
    std::error_code ec;
    if (!dir_.empty()) fs::remove_all(dir_, ec);
  }

 protected:
  fs::path dir_;
  Manifest manifest_;
};

BENCHMARK_DEFINE_F(EvalFixture, evaluate)(benchmark::State& state) {
  EvalOptions o;
  o.parallel = true;
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_directory(dir_ / "pred", manifest_, o));
}

BENCHMARK_DEFINE_F(EvalFixture, evaluate_serial)(benchmark::State& state) {
  EvalOptions o;
  o.parallel = false;
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_directory(dir_ / "pred", manifest_, o));
}

}  // namespace

BENCHMARK(BM_render_batch)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_render_batch_serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ssim)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ssim_serial)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_REGISTER_F(EvalFixture, evaluate)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_REGISTER_F(EvalFixture, evaluate_serial)->Unit(benchmark::kMillisecond)->UseRealTime();

int main(int argc, char** argv) {
  benchmark::AddCustomContext("omp_max_threads", std::to_string(omp_get_max_threads()));
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
