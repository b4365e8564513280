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


#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "wincodec/nn.hpp"
#include "wincodec/params.hpp"
#include "wincodec/range_coder.hpp"
#include "wincodec/tensor.hpp"

namespace wincodec {

inline constexpr double kSigmaMin = 0.04;
inline constexpr double kSigmaMax = 64.0;
inline constexpr double kLikelihoodFloor = 1.0 / 65536.0;

// Elementwise -log2 of the Gaussian mass of the unit bin around y, i.e.
// Phi((y-mu+0.5)/sigma) - Phi((y-mu-0.5)/sigma), floored at 2^-16. The
// gradient is taken through the floored likelihood everywhere.
Tensor gaussian_bits(const Tensor& y, const Tensor& mu, const Tensor& sigma);
// Sum of gaussian_bits.
double gaussian_rate(const Tensor& y, const Tensor& mu, const Tensor& sigma);

// Same for a per-channel logistic(loc_c, scale_c); z is [C,h,w], loc/scale [C].
Tensor logistic_bits(const Tensor& z, const Tensor& loc, const Tensor& scale);

// Plain-double versions shared by tables and tests.
double gaussian_bin_mass(double offset, double sigma);
double logistic_bin_mass(double offset, double scale);

/// Gaussian table set: one CdfTable per level of a log-spaced sigma grid,
/// over integer offsets [-kRadius, kRadius] plus escape.
class GaussianTables {
 public:
  static constexpr int kVersion = 1;
  static constexpr int kLevels = 64;
  static constexpr int32_t kRadius = 127;

  static const GaussianTables& instance();

  double level_sigma(int level) const { return sigmas_[static_cast<size_t>(level)]; }
  // Nearest level in log space.
  int level_for(double sigma) const;
  const CdfTable& table(int level) const { return tables_[static_cast<size_t>(level)]; }

 private:
  GaussianTables();
  std::vector<double> sigmas_;
  std::vector<CdfTable> tables_;
};

CdfTable logistic_table(double scale);

enum class QuantMode {
  kTrain,  // uniform noise for the rate, straight-through rounding for the output
  kNoise,  // uniform noise on both paths (smooth; used for gradient checks)
  kHard,   // rounding on both paths, as coded
};

struct EntropyConfig {
  int64_t latent_channels = 64;  // C_y
  int64_t hyper_channels = 32;   // C_z
  int64_t slices = 4;
  int64_t slice_hidden = 64;
  bool lrp = true;

  void validate() const;
  int64_t slice_channels() const { return latent_channels / slices; }
};

struct HyperFeatures {
  Tensor mean;   // [C_y, h, w]
  Tensor scale;  // [C_y, h, w]
};

struct SliceNet {
  Conv2d first;
  Conv2d second;
  Tensor operator()(const Tensor& x) const;
};

struct EntropyOutput {
  Tensor y_hat;   // decoder input (quantized, LRP-corrected)
  Tensor z_hat;
  Tensor mu;      // [C_y,h,w]
  Tensor sigma;   // [C_y,h,w]
  Tensor y_bits;  // scalar
  Tensor z_bits;  // scalar
  Tensor y_element_bits;  // [C_y,h,w]
};

struct EncodedLatents {
  std::vector<uint8_t> z_segment;
  std::vector<std::vector<uint8_t>> slice_segments;
  Tensor y_hat;
  Tensor mu;
  Tensor sigma;
};

struct DecodedLatents {
  Tensor y_hat;
  Tensor mu;
  Tensor sigma;
};

/// Hyper-prior with a factorized logistic prior on z and a channel-sliced
/// conditional Gaussian on y. Slice s sees the hyper features and the
/// LRP-corrected slices before it.
class EntropyModel {
 public:
  EntropyModel(ParameterStore& store, const EntropyConfig& config);

  const EntropyConfig& config() const { return config_; }

  Tensor hyper_encode(const Tensor& y) const;
  HyperFeatures hyper_decode(const Tensor& z_hat) const;
  // [C_z] location and positive scale of the factorized prior.
  Tensor prior_loc() const { return prior_loc_; }
  Tensor prior_scale() const;

  // (mu, sigma) of slice s given hyper features and the decoded slices < s.
  std::pair<Tensor, Tensor> slice_params(int64_t s, const HyperFeatures& hyper,
                                         std::span<const Tensor> decoded) const;
  // y_s + 0.5 tanh(r_s), or y_s unchanged when LRP is off.
  Tensor lrp_apply(int64_t s, const Tensor& y_s, const HyperFeatures& hyper,
                   std::span<const Tensor> decoded) const;

  // `rng` is required for kTrain and kNoise.
  EntropyOutput forward(const Tensor& y, QuantMode mode, std::mt19937_64* rng = nullptr) const;

  EncodedLatents compress(const Tensor& y) const;
  DecodedLatents decompress(std::span<const uint8_t> z_segment,
                            std::span<const std::vector<uint8_t>> slice_segments, int64_t height,
                            int64_t width) const;

  std::vector<CdfTable> prior_tables() const;

 private:
  Tensor quantize_z(const Tensor& z, QuantMode mode, std::mt19937_64* rng, Tensor* z_rate_input) const;

  EntropyConfig config_;
  Conv2d ha1_, ha2_, ha3_;
  Conv2d hs_mean1_, hs_mean2_, hs_mean3_;
  Conv2d hs_scale1_, hs_scale2_, hs_scale3_;
  Tensor prior_loc_;
  Tensor prior_scale_param_;
  std::vector<SliceNet> mean_nets_;
  std::vector<SliceNet> scale_nets_;
  std::vector<SliceNet> lrp_nets_;
};

// Mean-centred quantization round(y - mu) + mu, straight-through in training.
Tensor quantize(const Tensor& y, const Tensor& mu, QuantMode mode);

}  // namespace wincodec
