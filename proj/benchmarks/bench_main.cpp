#include <random>

#include <benchmark/benchmark.h>

#include "gibbslab/flow.hpp"
#include "gibbslab/gibbs.hpp"
#include "gibbslab/hamiltonians.hpp"
#include "gibbslab/spectral.hpp"
#include "gibbslab/transport.hpp"

using namespace gibbslab;

namespace {

FourierField noise(const Lattice& lat, bool real, std::uint64_t seed) {
  return sample_free_field(real ? GaussianReference::real_loop(lat) : GaussianReference::loop(lat), seed);
}

// args: dim, n
void BM_RoundTrip(benchmark::State& st) {
  Lattice lat(int(st.range(0)), int(st.range(1)));
  FourierField u = noise(lat, false, 1);
  for (auto _ : st) {
    FourierField v = to_coeffs(to_grid(u), lat, false, false);
    benchmark::DoNotOptimize(v.c.data());
  }
  st.SetItemsProcessed(st.iterations() * std::int64_t(lat.size()));
}
BENCHMARK(BM_RoundTrip)->Args({1, 64})->Args({1, 1024})->Args({2, 16})->Args({2, 64});

void BM_GradientNls(benchmark::State& st) {
  Lattice lat(1, int(st.range(0)));
  ModelSpec m = ModelSpec::nls(4, 1.0);
  FourierField u = noise(lat, false, 2);
  for (auto _ : st) benchmark::DoNotOptimize(gradient(m, u).c.data());
}
BENCHMARK(BM_GradientNls)->Arg(32)->Arg(256)->Arg(2048);

void BM_GradientGp(benchmark::State& st) {
  Lattice lat(2, int(st.range(0)));
  ModelSpec m = ModelSpec::gp(cosine_potential(lat), 1.0, 1.0, 1.0, 0.0);
  FourierField u = sample_free_field(GaussianReference::massive(lat, 1.0), 3);
  for (auto _ : st) benchmark::DoNotOptimize(gradient(m, u).c.data());
}
BENCHMARK(BM_GradientGp)->Arg(8)->Arg(32);

void BM_FlowStep(benchmark::State& st) {
  Lattice lat(1, int(st.range(0)));
  bool kdv = st.range(1) != 0;
  ModelSpec m = kdv ? ModelSpec::kdv(1.0) : ModelSpec::nls(4, 1.0);
  FourierField u = noise(lat, kdv, 4);
  u *= 1.0 / std::sqrt(u.norm_sq());
  for (auto _ : st) {
    flow_step(m, u, 1e-3);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_FlowStep)->Args({64, 0})->Args({512, 0})->Args({64, 1})->Args({512, 1});

void BM_PcnChain(benchmark::State& st) {
  Lattice lat(1, int(st.range(0)));
  ModelSpec m = ModelSpec::nls(4, 0.01);
  ChainConfig cc;
  cc.steps = 1000;
  cc.burn_in = 0;
  cc.thin = 10;
  for (auto _ : st) {
    auto r = run_pcn_chain(m, PhaseDomain::mass_ball(10.0), GaussianReference::loop(lat), cc);
    benchmark::DoNotOptimize(r.stats.acceptance);
  }
  st.SetItemsProcessed(st.iterations() * cc.steps);
}
BENCHMARK(BM_PcnChain)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);

std::vector<std::vector<double>> cloud(std::size_t n, double shift, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<std::vector<double>> p(n, std::vector<double>(2));
  for (auto& x : p) x = {g(rng) + shift, g(rng)};
  return p;
}

void BM_Sinkhorn(benchmark::State& st) {
  auto n = std::size_t(st.range(0));
  EmpiricalMeasure a = EmpiricalMeasure::uniform(cloud(n, 0, 5)), b = EmpiricalMeasure::uniform(cloud(n, 1, 6));
  SinkhornOptions opt;
  opt.eps = 0.05;
  opt.tol = 1e-6;
  for (auto _ : st) benchmark::DoNotOptimize(sinkhorn(a, b, CostSpec{}, opt).value);
}
BENCHMARK(BM_Sinkhorn)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_ExactTransport(benchmark::State& st) {
  auto n = std::size_t(st.range(0));
  EmpiricalMeasure a = EmpiricalMeasure::uniform(cloud(n, 0, 7)), b = EmpiricalMeasure::uniform(cloud(n, 1, 8));
  for (auto _ : st) benchmark::DoNotOptimize(wasserstein_exact(a, b, CostSpec{}).value);
}
BENCHMARK(BM_ExactTransport)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
