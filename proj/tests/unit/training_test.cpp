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
#include "wincodec/codec.hpp"
#include "wincodec/error.hpp"
#include "wincodec/image.hpp"
#include "wincodec/metrics.hpp"
#include "wincodec/training.hpp"

namespace wincodec {
namespace {

TEST(RdLoss, Examples) {
  const Tensor x = synthetic_image(Pattern::kShapes, 16, 16, 1);
  EXPECT_DOUBLE_EQ(rd_loss(x, x, Tensor({1}, 0.0), 0.013, Metric::kMse).item(), 0.0);
  // Uniform error of 10/255 gives MSE 100 on the 255 scale.
  std::vector<double> v(x.values().begin(), x.values().end());
  for (double& p : v) p += 10.0 / 255.0;
  const Tensor xh(x.shape(), v);
  const double bits = 0.454 * 256;
  EXPECT_NEAR(rd_loss(x, xh, Tensor({1}, bits), 0.013, Metric::kMse).item(), 0.454 + 1.30, 1e-9);
  // Linear in lambda with slope equal to the distortion.
  const double l1 = rd_loss(x, xh, Tensor({1}, bits), 0.02, Metric::kMse).item();
  const double l2 = rd_loss(x, xh, Tensor({1}, bits), 0.03, Metric::kMse).item();
  EXPECT_NEAR((l2 - l1) / 0.01, 100.0, 1e-6);
  const double ms = rd_loss(x, xh, Tensor({1}, 0.0), 5.0, Metric::kMsSsim).item();
  EXPECT_GT(ms, 0.0);
}

TEST(MsSsimTensor, MatchesMetricAndDifferentiates) {
  const Tensor a = synthetic_image(Pattern::kTexture, 40, 40, 2);
  std::mt19937_64 rng(2);
  Tensor b = testing::random_tensor({3, 40, 40}, rng, 0, 1);
  EXPECT_NEAR(ms_ssim_tensor(a, b).item(), ms_ssim(a, b), 1e-12);
  const auto r = testing::grad_check([&] { return ms_ssim_tensor(a, b); }, {{"b", b}}, 1e-4, 32);
  EXPECT_EQ(r.failures, 0) << r.worst;
}

TEST(Adam, FirstStepAndZeroGrad) {
  Tensor p({5}, 1.0);
  p.set_requires_grad(true);
  Adam opt({p});
  for (double& g : p.mutable_grad()) g = 1.0;
  ASSERT_TRUE(opt.step(1e-4));
  for (double v : p.values()) EXPECT_NEAR(v, 1.0 - 1e-4, 1e-10);
  Tensor q({3}, 2.0);
  q.set_requires_grad(true);
  Adam opt2({q});
  for (double& g : q.mutable_grad()) g = 0.0;
  opt2.step(1e-3);
  for (double v : q.values()) EXPECT_EQ(v, 2.0);
}

TEST(Adam, NonFiniteGradIsSkipped) {
  Tensor p({2}, 1.0);
  p.set_requires_grad(true);
  Adam opt({p});
  p.mutable_grad()[0] = std::nan("");
  EXPECT_FALSE(opt.step(0.1));
  EXPECT_EQ(opt.skipped(), 1);
  EXPECT_EQ(p.values()[1], 1.0);
}

TEST(Adam, ConvergesOnQuadraticBowl) {
  Tensor p({4}, std::vector<double>{3.0, -2.0, 0.5, 4.0});
  p.set_requires_grad(true);
  const std::vector<double> target{1.0, 1.0, -1.0, 0.0};
  Adam opt({p});
  for (int t = 0; t < 5000; ++t) {
    auto g = p.mutable_grad();
    for (int i = 0; i < 4; ++i) g[i] = 2.0 * (p.values()[i] - target[i]);
    opt.step(t < 2500 ? 1e-2 : 1e-3);
  }
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(p.values()[i], target[i], 1e-6);
}

TEST(Schedule, Milestones) {
  TrainConfig c;
  c.steps = 600;
  EXPECT_DOUBLE_EQ(lr_schedule(0, c), 1e-4);
  EXPECT_DOUBLE_EQ(lr_schedule(399, c), 1e-4);
  EXPECT_NEAR(lr_schedule(400, c), 3e-5, 1e-18);
  EXPECT_NEAR(lr_schedule(500, c), 1e-5, 1e-18);
  EXPECT_NEAR(lr_schedule(599, c), 1e-5, 1e-18);
}

TEST(TrainConfigTest, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate(64));
  c.crop = 48;
  EXPECT_THROW(c.validate(64), Error);
  c.crop = 64;
  c.lambda = 0;
  EXPECT_THROW(c.validate(64), Error);
}

TEST(Dataset, SeededCyclingCrops) {
  std::vector<Tensor> imgs;
  for (int i = 0; i < 5; ++i) imgs.push_back(synthetic_image(Pattern::kTexture, 80, 100 + i, i));
  imgs.push_back(synthetic_image(Pattern::kNoise, 30, 20, 9));  // smaller than the crop
  DatasetCrops a(imgs, 64, 11), b(imgs, 64, 11);
  for (int e = 0; e < 3; ++e) {
    std::vector<bool> seen(imgs.size(), false);
    for (size_t i = 0; i < imgs.size(); ++i) {
      const Tensor ca = a.next(), cb = b.next();
      EXPECT_EQ(ca.shape(), (Shape{3, 64, 64}));
      for (int64_t k = 0; k < ca.numel(); ++k) {
        ASSERT_EQ(ca[k], cb[k]);
        ASSERT_GE(ca[k], 0.0);
        ASSERT_LE(ca[k], 1.0);
      }
      EXPECT_FALSE(seen[a.last_index()]);
      seen[a.last_index()] = true;
    }
    EXPECT_EQ(a.epoch(), e);
  }
}

TEST(Trainer, DeterministicAndLogsRecords) {
  ModelConfig mc;
  mc.architecture = Architecture::kCnn;
  mc.cnn.channels = 8;
  mc.cnn.latent_channels = 8;
  mc.entropy.latent_channels = 8;
  mc.entropy.hyper_channels = 4;
  mc.entropy.slices = 2;
  mc.entropy.slice_hidden = 8;
  TrainConfig tc;
  tc.steps = 3;
  tc.batch = 2;
  tc.seed = 5;
  std::vector<Tensor> imgs{synthetic_image(Pattern::kShapes, 64, 64, 1),
                           synthetic_image(Pattern::kTexture, 64, 64, 2)};
  std::vector<std::string> logs[2];
  uint32_t ids[2];
  for (int run = 0; run < 2; ++run) {
    Model m(mc);
    DatasetCrops d(imgs, 64, tc.seed);
    for (const auto& s : train(m, d, tc)) logs[run].push_back(format_log_line(s));
    ids[run] = m.model_id();
  }
  EXPECT_EQ(logs[0], logs[1]);
  EXPECT_EQ(ids[0], ids[1]);
  ASSERT_EQ(logs[0].size(), 3u);
  EXPECT_NE(logs[0][0].find("step="), std::string::npos);
  EXPECT_NE(logs[0][0].find("lr="), std::string::npos);
}

}  // namespace
}  // namespace wincodec
