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
#include <numeric>
#include <random>

#include "wincodec/error.hpp"
#include "wincodec/image.hpp"
#include "wincodec/metrics.hpp"

namespace wincodec {
namespace {

Tensor noisy(const Tensor& x, double amplitude, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(x.values().begin(), x.values().end());
  for (double& p : v) p += amplitude * n(rng);
  return Tensor(x.shape(), std::move(v));
}

TEST(Psnr, ReferenceValues) {
  const Tensor x = synthetic_image(Pattern::kTexture, 32, 32, 1);
  EXPECT_DOUBLE_EQ(psnr(x, x), 100.0);
  EXPECT_NEAR(psnr_from_mse(100.0), 28.1308036086791, 1e-9);
  EXPECT_NEAR(psnr_from_mse(65025.0), 0.0, 1e-12);
  const Tensor zero({3, 4, 4}, 0.0), one({3, 4, 4}, 1.0);
  EXPECT_DOUBLE_EQ(mse_255(zero, one), 65025.0);
  EXPECT_THROW(psnr(zero, Tensor({3, 4, 5}, 0.0)), Error);
}

TEST(Psnr, DecreasesWithNoise) {
  const Tensor x = synthetic_image(Pattern::kShapes, 48, 48, 2);
  double prev = 1e9;
  for (double a : {0.001, 0.01, 0.03, 0.1, 0.3}) {
    const double p = psnr(x, noisy(x, a, 7));
    EXPECT_LT(p, prev);
    prev = p;
  }
}

TEST(MsSsim, IdentityInverseAndSymmetry) {
  const Tensor x = synthetic_image(Pattern::kShapes, 176, 176, 3);
  EXPECT_NEAR(ms_ssim(x, x), 1.0, 1e-12);
  std::mt19937_64 rng(3);
  std::vector<double> bin(3 * 176 * 176), inv(bin.size());
  for (size_t i = 0; i < bin.size(); ++i) {
    bin[i] = static_cast<double>(rng() & 1);
    inv[i] = 1.0 - bin[i];
  }
  EXPECT_LT(ms_ssim(Tensor({3, 176, 176}, bin), Tensor({3, 176, 176}, inv)), 0.1);
  const Tensor y = noisy(x, 0.05, 4);
  EXPECT_DOUBLE_EQ(ms_ssim(x, y), ms_ssim(y, x));
}

TEST(MsSsim, NonIncreasingUnderNoise) {
  const Tensor x = synthetic_image(Pattern::kTexture, 64, 64, 5);
  double prev = 1.0 + 1e-12;
  for (double a : {0.0, 0.01, 0.03, 0.1, 0.3}) {
    const double s = ms_ssim(x, noisy(x, a, 9));
    EXPECT_LE(s, prev);
    prev = s;
  }
}

TEST(MsSsim, ScaleCountFollowsImageSize) {
  EXPECT_EQ(ms_ssim_scales(256, 256), 5);
  EXPECT_EQ(ms_ssim_scales(161, 400), 5);
  EXPECT_EQ(ms_ssim_scales(160, 400), 4);
  EXPECT_EQ(ms_ssim_scales(64, 64), 3);
  EXPECT_EQ(ms_ssim_weights().size(), 5u);
  double s = 0;
  for (double w : ms_ssim_weights()) s += w;
  EXPECT_NEAR(s, 1.0, 1e-3);
  const auto g = gaussian_window();
  EXPECT_EQ(g.size(), 11u);
  EXPECT_NEAR(std::accumulate(g.begin(), g.end(), 0.0), 1.0, 1e-15);
  EXPECT_THROW(ms_ssim(Tensor({3, 8, 8}, 0.1), Tensor({3, 8, 8}, 0.2)), Error);
}

TEST(Bpp, Arithmetic) {
  EXPECT_NEAR(bits_per_pixel(65536, 512, 768), 0.1666666667, 1e-9);
  EXPECT_GT(bits_per_pixel(8 * 20, 512, 768), 0.0);
}

TEST(RdReport, AveragesAndSorts) {
  std::vector<RdPoint> pts;
  for (int i = 0; i < 24; ++i) {
    pts.push_back({"img" + std::to_string(i), "wam", 0.013, 0.5 + 0.01 * i, 30 + 0.1 * i, 0.95});
    pts.push_back({"img" + std::to_string(i), "wam", 0.0018, 0.1 + 0.001 * i, 27, 0.9});
  }
  pts.push_back({"only", "base", 0.013, 0.7, 31, 0.97});
  const auto avg = rd_average(pts);
  ASSERT_EQ(avg.size(), 3u);
  EXPECT_EQ(avg[0].model, "base");
  EXPECT_EQ(avg[0].count, 1u);
  EXPECT_EQ(avg[1].model, "wam");
  EXPECT_LT(avg[1].bpp, avg[2].bpp);
  EXPECT_NEAR(avg[2].bpp, 0.5 + 0.01 * 11.5, 1e-12);
  EXPECT_NEAR(avg[2].psnr, 30 + 0.1 * 11.5, 1e-12);
  EXPECT_EQ(avg[2].count, 24u);

  const std::string table = rd_table(pts);
  const auto back = parse_rd_table(table);
  ASSERT_EQ(back.size(), pts.size());
  size_t average_rows = 0, pos = 0;
  while ((pos = table.find("average", pos)) != std::string::npos) ++average_rows, ++pos;
  EXPECT_EQ(average_rows, 3u);
  EXPECT_FALSE(rd_series(pts).empty());
}

TEST(Image, PpmRoundTripAndPadding) {
  const Tensor x = synthetic_image(Pattern::kGradient, 5, 7, 1);
  const Tensor y = decode_ppm(encode_ppm(x));
  ASSERT_EQ(y.shape(), x.shape());
  for (int64_t i = 0; i < x.numel(); ++i) EXPECT_EQ(y[i], x[i]);
  EXPECT_THROW(decode_ppm(std::vector<uint8_t>{'P', '3', '\n'}), Error);
  const Tensor p = pad_replicate(x, 8, 8);
  EXPECT_EQ(p.shape(), (Shape{3, 8, 8}));
  EXPECT_EQ(p[7 * 8 + 7], x[4 * 7 + 6]);
  const Tensor c = crop(p, 0, 0, 5, 7);
  for (int64_t i = 0; i < x.numel(); ++i) EXPECT_EQ(c[i], x[i]);
  EXPECT_EQ(round_up(50, 64), 64);
  EXPECT_EQ(round_up(128, 64), 128);
}

TEST(Image, HalfNoiseLayout) {
  const Tensor x = synthetic_image(Pattern::kHalfNoise, 16, 16, 2);
  for (int64_t y = 0; y < 16; ++y)
    for (int64_t xx = 0; xx < 8; ++xx) EXPECT_NEAR(x[y * 16 + xx], 128.0 / 255.0, 0.003);
  double var = 0;
  for (int64_t y = 0; y < 16; ++y)
    for (int64_t xx = 8; xx < 16; ++xx) var += std::pow(x[y * 16 + xx] - 0.5, 2);
  EXPECT_GT(var / 128, 0.01);
  EXPECT_EQ(parse_pattern("half-noise"), Pattern::kHalfNoise);
}

}  // namespace
}  // namespace wincodec
