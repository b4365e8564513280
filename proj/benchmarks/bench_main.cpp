// Copyright 2026 The wincodec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "wincodec/attention.hpp"
#include "wincodec/codec.hpp"
#include "wincodec/entropy.hpp"
#include "wincodec/image.hpp"
#include "wincodec/ops.hpp"
#include "wincodec/range_coder.hpp"

namespace wincodec {
namespace {

Tensor random_tensor(Shape shape, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  std::vector<double> v(static_cast<size_t>(n));
  for (double& x : v) x = u(rng);
  return Tensor(std::move(shape), std::move(v));
}

std::vector<size_t> gaussian_symbols(const CdfTable& t, size_t n) {
  std::mt19937_64 rng(1);
  std::vector<double> w(t.size());
  for (size_t i = 0; i < w.size(); ++i) w[i] = t.frequency(i);
  std::discrete_distribution<size_t> d(w.begin(), w.end());
  std::vector<size_t> s(n);
  for (auto& x : s) x = d(rng);
  return s;
}

void BM_RangeEncode(benchmark::State& state) {
  const CdfTable& t = GaussianTables::instance().table(static_cast<int>(state.range(0)));
  const auto sym = gaussian_symbols(t, 1 << 16);
  for (auto _ : state) {
    RangeEncoder enc;
    for (size_t s : sym) enc.encode_symbol(s, t);
    benchmark::DoNotOptimize(enc.finish());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(sym.size()));
}
BENCHMARK(BM_RangeEncode)->Arg(10)->Arg(40);

void BM_RangeDecode(benchmark::State& state) {
  const CdfTable& t = GaussianTables::instance().table(static_cast<int>(state.range(0)));
  const auto sym = gaussian_symbols(t, 1 << 16);
  RangeEncoder enc;
  for (size_t s : sym) enc.encode_symbol(s, t);
  const auto bytes = enc.finish();
  for (auto _ : state) {
    RangeDecoder dec(bytes);
    size_t acc = 0;
    for (size_t i = 0; i < sym.size(); ++i) acc += dec.decode_symbol(t);
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(sym.size()));
}
BENCHMARK(BM_RangeDecode)->Arg(10)->Arg(40);

void BM_Matmul(benchmark::State& state) {
  const int64_t n = state.range(0);
  const Tensor a = random_tensor({n, n}, 1), b = random_tensor({n, n}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * 2 * n * n * n);  // flops
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(256);

void BM_SwinBlock(benchmark::State& state) {
  const int64_t c = state.range(0), side = 16;
  ParameterStore store(3);
  const SwinBlock block = SwinBlock::create(store, "b", c, c / 8, 4, 2);
  const Tensor tokens = random_tensor({side * side, c}, 4);
  for (auto _ : state) benchmark::DoNotOptimize(block(tokens, side, side));
}
BENCHMARK(BM_SwinBlock)->Arg(24)->Arg(96);

void BM_Compress(benchmark::State& state) {
  ModelConfig cfg;
  cfg.architecture = state.range(0) ? Architecture::kStf : Architecture::kCnn;
  const Model model(cfg);
  const Tensor img = synthetic_image(Pattern::kTexture, 128, 128, 5);
  for (auto _ : state) benchmark::DoNotOptimize(compress(model, img));
  state.SetLabel(to_string(cfg.architecture) + " 128x128");
}
BENCHMARK(BM_Compress)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace wincodec

BENCHMARK_MAIN();
