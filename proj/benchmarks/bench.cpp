#include <benchmark/benchmark.h>

#include <cmath>

#include "shubin/expansion.hpp"
#include "shubin/hermite.hpp"
#include "shubin/operator.hpp"
#include "shubin/spectral.hpp"

using namespace shubin;

static void BM_HermiteEval(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto h = hermite_eval(N, 1.37);
    benchmark::DoNotOptimize(h.values.data());
  }
  state.SetComplexityN(N);
}
BENCHMARK(BM_HermiteEval)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

static void BM_GaussHermiteRule(benchmark::State& state) {
  const int q = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto rule = gauss_hermite_rule(q);
    benchmark::DoNotOptimize(rule.nodes.data());
  }
}
BENCHMARK(BM_GaussHermiteRule)->RangeMultiplier(4)->Range(64, 1024);

static void BM_AssembleQuartic(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  auto op = model_operator(1, 2, 4);
  for (auto _ : state) {
    auto A = assemble(op, BasisSpec(1, N, 4));
    benchmark::DoNotOptimize(A.entries.vals.data());
  }
}
BENCHMARK(BM_AssembleQuartic)->RangeMultiplier(4)->Range(256, 4096);

static void BM_BandedEigensolve(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  auto A = assemble(model_operator(1, 2, 4), BasisSpec(1, N, 4));
  for (auto _ : state) {
    auto dec = eigendecompose(A, std::min(64, N / 4), 1e-8);
    benchmark::DoNotOptimize(dec.eigenvalues.data());
  }
}
BENCHMARK(BM_BandedEigensolve)->RangeMultiplier(2)->Range(256, 2048);

static void BM_IterateNorms(benchmark::State& state) {
  const int M = static_cast<int>(state.range(0));
  auto A = assemble(model_operator(1, 2, 2), BasisSpec(1, 256, 2));
  auto dec = eigendecompose(A, 256, 1e-8);
  ExpansionCoefficients c;
  c.values = VectorXcd(dec.J_trusted);
  for (int j = 1; j <= dec.J_trusted; ++j)
    c.values(j - 1) = std::exp(-std::sqrt(static_cast<double>(j)));
  c.dec_signature = dec.signature;
  for (auto _ : state) {
    auto s = iterate_norms(dec, c, M, 1, 2, 2);
    benchmark::DoNotOptimize(s.log_norms.data());
  }
}
BENCHMARK(BM_IterateNorms)->Arg(25)->Arg(100);

static void BM_Expand(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  auto A = assemble(model_operator(1, 2, 2), BasisSpec(1, N, 2));
  auto dec = eigendecompose(A, N / 2, 1e-8);
  auto rule = gauss_hermite_rule(2 * N + 64);
  SampledFunction g;
  g.evaluator = [](const VectorXd& x) { return cxd(std::exp(-x.squaredNorm()), 0.0); };
  g.symmetry_hint = {+1};
  for (auto _ : state) {
    auto c = expand(g, dec, rule);
    benchmark::DoNotOptimize(c.values.data());
  }
}
BENCHMARK(BM_Expand)->RangeMultiplier(2)->Range(128, 1024);

BENCHMARK_MAIN();
