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

#include "support/gradcheck.hpp"
#include "wincodec/error.hpp"
#include "wincodec/nn.hpp"
#include "wincodec/ops.hpp"

namespace wincodec {
namespace {

using testing::grad_check;
using testing::random_tensor;
using testing::weighted_sum;

TEST(Conv2d, IdentityPointwiseKernel) {
  std::mt19937_64 rng(1);
  const Tensor x = random_tensor({2, 5, 4}, rng);
  const Tensor w({2, 2, 1, 1}, std::vector<double>{1, 0, 0, 1});
  const Tensor y = conv2d(x, w, Tensor(), 1, 0);
  ASSERT_EQ(y.shape(), x.shape());
  for (int64_t i = 0; i < x.numel(); ++i) EXPECT_EQ(y[i], x[i]);
}

TEST(Conv2d, OnesKernelInteriorSum) {
  const Tensor x({1, 5, 5}, 1.0);
  const Tensor y = conv2d(x, Tensor({1, 1, 3, 3}, 1.0), Tensor(), 1, 1);
  EXPECT_EQ(y[2 * 5 + 2], 9.0);
  EXPECT_EQ(y[0], 4.0);  // corner sees 2x2 of the padded map
}

TEST(Conv2d, StrideTwoShape) {
  const Tensor y = conv2d(Tensor({1, 4, 4}, 1.0), Tensor({3, 1, 3, 3}, 0.1), Tensor(), 2, 1);
  EXPECT_EQ(y.shape(), (Shape{3, 2, 2}));
}

TEST(Conv2d, ChannelMismatchThrows) {
  EXPECT_THROW(conv2d(Tensor({2, 4, 4}, 1.0), Tensor({1, 3, 3, 3}, 1.0), Tensor(), 1, 1), Error);
}

TEST(Conv2d, TransposeIsAdjoint) {
  std::mt19937_64 rng(2);
  const Tensor w = random_tensor({4, 3, 5, 5}, rng);
  const Tensor x = random_tensor({3, 12, 10}, rng);
  const Tensor fx = conv2d(x, w, Tensor(), 2, 2);  // [4,6,5]
  const Tensor y = random_tensor(fx.shape(), rng);
  const Tensor ty = conv_transpose2d(y, w, Tensor(), 2, 2, 1);
  ASSERT_EQ(ty.shape(), x.shape());
  double lhs = 0.0, rhs = 0.0;
  for (int64_t i = 0; i < fx.numel(); ++i) lhs += fx[i] * y[i];
  for (int64_t i = 0; i < x.numel(); ++i) rhs += x[i] * ty[i];
  EXPECT_LT(std::abs(lhs - rhs) / std::abs(lhs), 1e-6);
}

TEST(Conv2d, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(3);
  Tensor x = random_tensor({3, 7, 6}, rng), w = random_tensor({4, 3, 3, 3}, rng, -1, 1),
         b = random_tensor({4}, rng);
  Tensor wt = random_tensor({3, 2, 5, 5}, rng, -1, 1), bt = random_tensor({2}, rng);
  Tensor w1 = random_tensor({5, 3, 1, 1}, rng, -1, 1);
  auto r = grad_check([&] { return weighted_sum(conv2d(x, w, b, 2, 1)); }, {{"x", x}, {"w", w}, {"b", b}}, 1e-4);
  EXPECT_EQ(r.failures, 0) << r.worst;
  r = grad_check([&] { return weighted_sum(conv_transpose2d(x, wt, bt, 2, 2, 1)); },
                 {{"x", x}, {"w", wt}, {"b", bt}}, 1e-4);
  EXPECT_EQ(r.failures, 0) << r.worst;
  r = grad_check([&] { return weighted_sum(conv2d(x, w1, Tensor(), 1, 0)); }, {{"x", x}, {"w", w1}}, 1e-4);
  EXPECT_EQ(r.failures, 0) << r.worst;
}

TEST(Gdn, UnitBetaZeroGammaIsIdentity) {
  std::mt19937_64 rng(4);
  const Tensor x = random_tensor({3, 4, 4}, rng);
  const Tensor y = gdn(x, Tensor({3}, 1.0), Tensor({3, 3}, 0.0), false);
  for (int64_t i = 0; i < x.numel(); ++i) EXPECT_EQ(y[i], x[i]);
}

TEST(Gdn, ScalarClosedForm) {
  const Tensor y = gdn(Tensor({1, 1, 1}, 1.0), Tensor({1}, 0.5), Tensor({1, 1}, 0.5), false);
  EXPECT_DOUBLE_EQ(y.item(), 1.0);
}

TEST(Gdn, InverseWithPureBetaIsExact) {
  std::mt19937_64 rng(11);
  const Tensor x = random_tensor({3, 4, 4}, rng);
  const Tensor beta({3}, std::vector<double>{0.5, 1.5, 2.0}), gamma({3, 3}, 0.0);
  const Tensor back = gdn(gdn(x, beta, gamma, false), beta, gamma, true);
  for (int64_t i = 0; i < x.numel(); ++i) EXPECT_NEAR(back[i], x[i], 1e-12);
}

TEST(Gdn, InverseUndoesForward) {
  ParameterStore store(5);
  Gdn fwd = Gdn::create(store, "g", 4, false);
  std::mt19937_64 rng(5);
  std::vector<double> beta(4), gamma(16);
  for (double& b : beta) b = 0.5 + std::uniform_real_distribution<double>(0, 1)(rng);
  for (double& g : gamma) g = std::uniform_real_distribution<double>(0, 0.1)(rng);
  fwd.set(beta, gamma);
  Gdn inv = fwd;
  inv.inverse = true;
  const Tensor x = random_tensor({4, 6, 6}, rng);
  const Tensor y = fwd(x);
  // IGDN with the same parameters applied to y normalizes by y's own
  // energy, so invert by fixed-point iteration on x = y * sqrt(b + g x^2).
  Tensor est = y;
  for (int it = 0; it < 200; ++it) {
    const Tensor scale_x = div(inv(est), est);  // sqrt(b + g est^2)
    est = mul(y, scale_x);
  }
  double err = 0.0;
  for (int64_t i = 0; i < x.numel(); ++i) err = std::max(err, std::abs(est[i] - x[i]));
  EXPECT_LT(err, 1e-6);
}

TEST(Gdn, ParametersStayValid) {
  ParameterStore store(6);
  Gdn g = Gdn::create(store, "g", 3, false);
  auto bp = g.beta_param.mutable_values();
  for (double& v : bp) v = -3.0 * v;  // any raw value maps into the valid set
  auto gp = g.gamma_param.mutable_values();
  for (double& v : gp) v = -v;
  const Tensor beta = g.beta(), gamma = g.gamma();
  for (double b : beta.values()) EXPECT_GE(b, Gdn::kBetaFloor);
  for (double v : gamma.values()) EXPECT_GE(v, 0.0);
}

TEST(Gdn, GradientsMatchFiniteDifferences) {
  ParameterStore store(7);
  Gdn g = Gdn::create(store, "g", 3, false);
  Gdn ig = Gdn::create(store, "ig", 3, true);
  std::mt19937_64 rng(7);
  Tensor x = random_tensor({3, 4, 5}, rng);
  for (auto p : {g.beta_param, g.gamma_param, ig.beta_param, ig.gamma_param}) {
    auto v = p.mutable_values();
    for (double& e : v) e += std::uniform_real_distribution<double>(0.1, 0.4)(rng);
  }
  auto r = grad_check([&] { return weighted_sum(g(x)); },
                      {{"x", x}, {"beta", g.beta_param}, {"gamma", g.gamma_param}}, 1e-4);
  EXPECT_EQ(r.failures, 0) << r.worst;
  r = grad_check([&] { return weighted_sum(ig(x)); },
                 {{"x", x}, {"beta", ig.beta_param}, {"gamma", ig.gamma_param}}, 1e-4);
  EXPECT_EQ(r.failures, 0) << r.worst;
}

TEST(LayerNorm, KnownValues) {
  const Tensor c = layer_norm(Tensor({1, 4}, 3.0), Tensor({4}, 1.0), Tensor({4}, 0.0));
  for (double v : c.values()) EXPECT_EQ(v, 0.0);
  const Tensor y = layer_norm(Tensor({1, 2}, std::vector<double>{1.0, -1.0}), Tensor({2}, 1.0), Tensor({2}, 0.0));
  EXPECT_NEAR(y[0], 0.99999500003749969, 1e-15);
  EXPECT_NEAR(y[1], -0.99999500003749969, 1e-15);
}

TEST(LayerNorm, StandardizesEachRow) {
  std::mt19937_64 rng(8);
  const Tensor x = random_tensor({5, 16}, rng, -3, 5);
  const Tensor y = layer_norm(x, Tensor({16}, 1.0), Tensor({16}, 0.0));
  for (int64_t r = 0; r < 5; ++r) {
    double m = 0, v = 0;
    for (int64_t c = 0; c < 16; ++c) m += y[r * 16 + c] / 16;
    for (int64_t c = 0; c < 16; ++c) v += (y[r * 16 + c] - m) * (y[r * 16 + c] - m) / 16;
    EXPECT_NEAR(m, 0.0, 1e-12);
    EXPECT_NEAR(v, 1.0, 1e-3);
  }
}

TEST(LayerNorm, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(9);
  Tensor x = random_tensor({6, 8}, rng), g = random_tensor({8}, rng), b = random_tensor({8}, rng);
  const auto r = grad_check([&] { return weighted_sum(layer_norm(x, g, b)); }, {{"x", x}, {"g", g}, {"b", b}}, 1e-4);
  EXPECT_EQ(r.failures, 0) << r.worst;
}

TEST(Gelu, Asymptotes) {
  const Tensor y = gelu(Tensor({3}, std::vector<double>{0.0, 10.0, -10.0}));
  EXPECT_EQ(y[0], 0.0);
  EXPECT_NEAR(y[1], 10.0, 1e-6);
  EXPECT_NEAR(y[2], 0.0, 1e-6);
  EXPECT_NEAR(gelu(Tensor::scalar(1.0)).item(), 0.84119199060827670, 1e-15);
}

TEST(Linear, GradientsMatchFiniteDifferences) {
  ParameterStore store(10);
  const Linear lin = Linear::create(store, "lin", 5, 3);
  std::mt19937_64 rng(10);
  Tensor x = random_tensor({4, 5}, rng);
  const auto r = grad_check([&] { return weighted_sum(lin(x)); },
                            {{"x", x}, {"w", lin.weight}, {"b", lin.bias}}, 1e-4);
  EXPECT_EQ(r.failures, 0) << r.worst;
}

}  // namespace
}  // namespace wincodec
