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


#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "support/gradcheck.hpp"
#include "wincodec/entropy.hpp"
#include "wincodec/error.hpp"
#include "wincodec/ops.hpp"
#include "wincodec/range_coder.hpp"

namespace wincodec {
namespace {

using testing::grad_check;
using testing::random_tensor;
using testing::weighted_sum;

Tensor scalar(double v) { return Tensor({1}, v); }

TEST(Quantize, RoundsAroundTheMean) {
  const Tensor y({3}, std::vector<double>{1.4, 1.4, -2.6});
  const Tensor mu({3}, std::vector<double>{0.0, 1.6, 0.3});
  const Tensor q = quantize(y, mu, QuantMode::kHard);
  EXPECT_DOUBLE_EQ(q[0], 1.0);
  EXPECT_DOUBLE_EQ(q[1], 1.6);
  EXPECT_NEAR(q[2], -2.7, 1e-12);
  std::mt19937_64 rng(1);
  const Tensor yy = random_tensor({500}, rng, -20, 20), mm = random_tensor({500}, rng, -3, 3);
  const Tensor qq = quantize(yy, mm, QuantMode::kHard);
  for (int64_t i = 0; i < 500; ++i) {
    EXPECT_LE(std::abs(qq[i] - yy[i]), 0.5 + 1e-12);
    const double k = qq[i] - mm[i];
    EXPECT_NEAR(k, std::round(k), 1e-9);
  }
}

TEST(Quantize, StraightThroughGradientIsIdentity) {
  Tensor y({4}, std::vector<double>{0.2, -1.7, 3.3, 0.5});
  y.set_requires_grad(true);
  const Tensor mu({4}, 0.1);
  Tape tape;
  {
    TapeScope scope(tape);
    tape.backward(sum(quantize(y, mu, QuantMode::kTrain)));
  }
  for (int64_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(y.grad()[i], 1.0);
}

TEST(GaussianBits, KnownValues) {
  // -log2(Phi(0.5) - Phi(-0.5))
  EXPECT_NEAR(gaussian_rate(scalar(0), scalar(0), scalar(1)), 1.384866534290990, 1e-9);
  EXPECT_NEAR(gaussian_rate(scalar(1.3), scalar(0), scalar(0.7)), 3.041150387084526, 1e-9);
  // A very narrow Gaussian puts (almost) all mass on the centre bin.
  EXPECT_NEAR(gaussian_rate(scalar(0), scalar(0), scalar(kSigmaMin)), 0.0, 1e-12);
}

TEST(GaussianBits, FloorKeepsFarValuesFinite) {
  const double b = gaussian_rate(scalar(1e4), scalar(0), scalar(kSigmaMin));
  EXPECT_DOUBLE_EQ(b, 16.0);
  EXPECT_TRUE(std::isfinite(gaussian_rate(scalar(-1e300), scalar(0), scalar(1))));
}

TEST(GaussianBits, CentreCostGrowsWithSigma) {
  double prev = -1.0;
  for (double s = 0.05; s < 64; s *= 1.3) {
    const double b = gaussian_rate(scalar(0), scalar(0), scalar(s));
    EXPECT_GT(b, prev);
    prev = b;
  }
}

TEST(GaussianBits, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(2);
  Tensor y = random_tensor({2, 3, 3}, rng, -2, 2);
  Tensor mu = random_tensor({2, 3, 3}, rng, -1, 1);
  Tensor s = random_tensor({2, 3, 3}, rng, 0.4, 2.5);
  const auto r = grad_check([&] { return sum(gaussian_bits(y, mu, s)); },
                            {{"y", y}, {"mu", mu}, {"sigma", s}}, 1e-4);
  EXPECT_TRUE(r.failures == 0) << r.worst;
}

TEST(LogisticBits, KnownValueAndGradients) {
  const Tensor v = logistic_bits(Tensor({1, 1, 1}, 0.0), Tensor({1}, 0.0), Tensor({1}, 1.0));
  EXPECT_NEAR(v[0], 2.029625385781440, 1e-9);
  EXPECT_NEAR(logistic_bin_mass(0.0, 1.0), 2 * (1 / (1 + std::exp(-0.5))) - 1, 1e-15);
  std::mt19937_64 rng(3);
  Tensor z = random_tensor({3, 2, 2}, rng, -3, 3);
  Tensor loc = random_tensor({3}, rng, -1, 1);
  Tensor sc = random_tensor({3}, rng, 0.5, 2);
  const auto r = grad_check([&] { return sum(logistic_bits(z, loc, sc)); },
                            {{"z", z}, {"loc", loc}, {"scale", sc}}, 1e-4);
  EXPECT_TRUE(r.failures == 0) << r.worst;
}

TEST(GaussianTables, LevelsCoverSigmaRange) {
  const auto& t = GaussianTables::instance();
  EXPECT_EQ(t.level_for(kSigmaMin), 0);
  EXPECT_EQ(t.level_for(kSigmaMax), GaussianTables::kLevels - 1);
  EXPECT_EQ(t.level_for(1e-9), 0);
  EXPECT_EQ(t.level_for(1e9), GaussianTables::kLevels - 1);
  for (int l = 1; l < GaussianTables::kLevels; ++l) EXPECT_GT(t.level_sigma(l), t.level_sigma(l - 1));
  for (int l = 0; l < GaussianTables::kLevels; ++l) {
    const CdfTable& c = t.table(l);
    ASSERT_TRUE(c.has_escape());
    EXPECT_EQ(c.min_symbol(), -GaussianTables::kRadius);
    EXPECT_EQ(c.max_symbol(), GaussianTables::kRadius);
    EXPECT_EQ(c.cdf().back(), CdfTable::kTotal);
    for (size_t i = 0; i < c.size(); ++i) ASSERT_GE(c.frequency(i), 1u);
  }
  const CdfTable& narrow = t.table(0);
  EXPECT_GE(narrow.frequency(GaussianTables::kRadius) / double(CdfTable::kTotal), 0.99);
}

TEST(GaussianTables, CodedCostTracksContinuousRate) {
  // Quantizing sigma to the grid and probabilities to 16 bits costs little.
  const auto& t = GaussianTables::instance();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> logs(std::log(0.1), std::log(40.0));
  double coded = 0, ideal = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double s = std::exp(logs(rng));
    const double v = std::round(std::normal_distribution<double>(0, s)(rng));
    ideal += -std::log2(std::max(gaussian_bin_mass(v, s), kLikelihoodFloor));
    coded += value_bits(static_cast<int32_t>(v), t.table(t.level_for(s)));
  }
  EXPECT_LT((coded - ideal) / n, 0.02);
}

EntropyConfig small_config(int64_t slices = 2) {
  EntropyConfig c;
  c.latent_channels = 8;
  c.hyper_channels = 4;
  c.slices = slices;
  c.slice_hidden = 8;
  return c;
}

TEST(EntropyModel, ShapesAndTotals) {
  ParameterStore store(5);
  const EntropyModel m(store, small_config());
  std::mt19937_64 rng(5);
  const Tensor y = random_tensor({8, 8, 12}, rng, -4, 4);
  EXPECT_EQ(m.hyper_encode(y).shape(), (Shape{4, 2, 3}));
  EXPECT_THROW(m.hyper_encode(Tensor({8, 6, 8}, 0.0)), Error);
  const EntropyOutput o = m.forward(y, QuantMode::kHard);
  EXPECT_EQ(o.mu.shape(), y.shape());
  EXPECT_EQ(o.sigma.shape(), y.shape());
  double s = 0;
  for (double b : o.y_element_bits.values()) s += b;
  EXPECT_NEAR(o.y_bits[0], s, 1e-9 * s);
  for (double v : o.sigma.values()) {
    EXPECT_GE(v, kSigmaMin);
    EXPECT_LE(v, kSigmaMax);
  }
  EXPECT_THROW(m.forward(y, QuantMode::kTrain, nullptr), Error);
}

TEST(EntropyModel, LaterSlicesSeeEarlierOnes) {
  ParameterStore store(6);
  const EntropyModel m(store, small_config(4));
  std::mt19937_64 rng(6);
  const Tensor y = random_tensor({8, 4, 4}, rng, -4, 4);
  const Tensor z = m.hyper_encode(y);
  const HyperFeatures h = m.hyper_decode(quantize(z, Tensor(z.shape(), 0.0), QuantMode::kHard));
  std::vector<Tensor> dec{random_tensor({2, 4, 4}, rng, -3, 3)};
  std::vector<Tensor> dec2{random_tensor({2, 4, 4}, rng, -3, 3)};
  const auto [m1, s1] = m.slice_params(1, h, dec);
  const auto [m2, s2] = m.slice_params(1, h, dec2);
  double diff = 0;
  for (int64_t i = 0; i < m1.numel(); ++i) diff += std::abs(m1[i] - m2[i]) + std::abs(s1[i] - s2[i]);
  EXPECT_GT(diff, 0.0);
}

TEST(EntropyModel, SingleSliceWorks) {
  ParameterStore store(7);
  const EntropyModel m(store, small_config(1));
  std::mt19937_64 rng(7);
  const Tensor y = random_tensor({8, 4, 4}, rng, -4, 4);
  const EncodedLatents e = m.compress(y);
  ASSERT_EQ(e.slice_segments.size(), 1u);
  const DecodedLatents d = m.decompress(e.z_segment, e.slice_segments, 4, 4);
  for (int64_t i = 0; i < y.numel(); ++i) ASSERT_EQ(d.y_hat[i], e.y_hat[i]);
}

TEST(EntropyModel, LrpStartsAsIdentityAndIsBounded) {
  ParameterStore store(8);
  const EntropyModel m(store, small_config());
  std::mt19937_64 rng(8);
  const Tensor y = random_tensor({8, 4, 4}, rng, -4, 4);
  const HyperFeatures h = m.hyper_decode(Tensor({4, 1, 1}, 0.0));
  const Tensor ys = random_tensor({4, 4, 4}, rng, -3, 3);
  const Tensor same = m.lrp_apply(0, ys, h, {});
  for (int64_t i = 0; i < ys.numel(); ++i) EXPECT_EQ(same[i], ys[i]);
  // Perturb every LRP parameter: the correction must stay within +-0.5.
  for (const auto& name : store.names()) {
    if (name.find("lrp") == std::string::npos) continue;
    const Tensor p = store.get(name);
    std::vector<double> v(static_cast<size_t>(p.numel()));
    for (double& x : v) x = std::normal_distribution<double>(0, 3)(rng);
    store.assign(name, v);
  }
  const Tensor moved = m.lrp_apply(0, ys, h, {});
  double max_c = 0;
  for (int64_t i = 0; i < ys.numel(); ++i) max_c = std::max(max_c, std::abs(moved[i] - ys[i]));
  EXPECT_GT(max_c, 0.0);
  EXPECT_LE(max_c, 0.5);
  (void)y;
}

TEST(EntropyModel, CompressMatchesHardForward) {
  ParameterStore store(9);
  const EntropyModel m(store, small_config());
  std::mt19937_64 rng(9);
  const Tensor y = random_tensor({8, 8, 8}, rng, -6, 6);
  const EntropyOutput o = m.forward(y, QuantMode::kHard);
  const EncodedLatents e = m.compress(y);
  for (int64_t i = 0; i < y.numel(); ++i) {
    ASSERT_EQ(e.y_hat[i], o.y_hat[i]);
    ASSERT_EQ(e.mu[i], o.mu[i]);
    ASSERT_EQ(e.sigma[i], o.sigma[i]);
  }
  const DecodedLatents d = m.decompress(e.z_segment, e.slice_segments, 8, 8);
  for (int64_t i = 0; i < y.numel(); ++i) {
    ASSERT_EQ(d.y_hat[i], e.y_hat[i]);
    ASSERT_EQ(d.mu[i], e.mu[i]);
    ASSERT_EQ(d.sigma[i], e.sigma[i]);
  }
}

TEST(EntropyModel, ModelGradientsMatchFiniteDifferences) {
  ParameterStore store(10);
  const EntropyModel m(store, small_config());
  std::mt19937_64 rng(10);
  Tensor y = random_tensor({8, 4, 4}, rng, -1.5, 1.5);
  const auto loss = [&] {
    std::mt19937_64 noise(77);
    const EntropyOutput o = m.forward(y, QuantMode::kNoise, &noise);
    return add(add(o.y_bits, o.z_bits), weighted_sum(o.y_hat));
  };
  std::vector<std::pair<std::string, Tensor>> inputs{{"y", y}};
  for (const char* n : {"hyper.a1.weight", "slice1.mean1.weight", "slice0.lrp1.weight", "prior.scale"})
    if (store.contains(n)) inputs.emplace_back(n, store.get(n));
  const auto r = grad_check(loss, inputs, 1e-4, 24);
  EXPECT_TRUE(r.failures == 0) << r.worst << " max_rel=" << r.max_rel;
}

}  // namespace
}  // namespace wincodec
