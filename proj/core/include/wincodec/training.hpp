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
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "wincodec/codec.hpp"
#include "wincodec/tensor.hpp"

namespace wincodec {

struct TrainConfig {
  double lambda = 0.0130;
  Metric metric = Metric::kMse;
  int64_t steps = 5000;
  int64_t batch = 4;
  int64_t crop = 64;
  double lr = 1e-4;
  // Fractions of `steps` after which the rate drops to 0.3x and 0.1x.
  double first_milestone = 2.0 / 3.0;
  double second_milestone = 5.0 / 6.0;
  double grad_clip = 1.0;  // global-norm clip; <= 0 disables
  uint64_t seed = 0;

  void validate(int64_t pad_multiple) const;
};

// 65025 * mean((a - b)^2), differentiable.
Tensor mse_loss_255(const Tensor& a, const Tensor& b);
// Differentiable MS-SSIM of [C,H,W] images in [0,1]; matches ms_ssim().
Tensor ms_ssim_tensor(const Tensor& a, const Tensor& b);
// bits / pixels + lambda * distortion.
Tensor rd_loss(const Tensor& x, const Tensor& x_hat, const Tensor& rate_bits, double lambda, Metric metric);

double lr_schedule(int64_t step, const TrainConfig& cfg);

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  explicit Adam(std::vector<Tensor> params, AdamOptions opts = {});
  // Applies one update from the current grads. Returns false (and leaves
  // parameters untouched) when any grad is non-finite.
  bool step(double lr);
  int64_t skipped() const { return skipped_; }
  int64_t steps() const { return t_; }

 private:
  std::vector<Tensor> params_;
  AdamOptions opts_;
  std::vector<std::vector<double>> m_, v_;
  int64_t t_ = 0;
  int64_t skipped_ = 0;
};

// Scales all grads so their joint L2 norm is at most max_norm; returns the
// norm before clipping.
double clip_grad_norm(const std::vector<Tensor>& params, double max_norm);

/// Seeded random crops, cycling through the images in a fresh shuffled
/// order every epoch. Images smaller than the crop are replicate-padded.
class DatasetCrops {
 public:
  DatasetCrops(std::vector<Tensor> images, int64_t crop, uint64_t seed);
  static DatasetCrops from_dir(const std::filesystem::path& dir, int64_t crop, uint64_t seed);

  Tensor next();
  std::vector<Tensor> next_batch(int64_t n);
  size_t size() const { return images_.size(); }
  int64_t epoch() const { return epoch_; }
  // Index (into the constructor's list) of the image behind the last crop.
  size_t last_index() const { return last_; }

 private:
  std::vector<Tensor> images_;
  int64_t crop_;
  std::mt19937_64 rng_;
  std::vector<size_t> order_;
  size_t cursor_ = 0;
  int64_t epoch_ = -1;
  size_t last_ = 0;
};

struct TrainStats {
  int64_t step = 0;
  double loss = 0.0;
  double bpp = 0.0;
  double distortion = 0.0;
  double lr = 0.0;
};

std::string format_log_line(const TrainStats& s);

class Trainer {
 public:
  Trainer(Model& model, const TrainConfig& cfg);

  // One optimizer step on a batch of already-padded images.
  TrainStats step(const std::vector<Tensor>& batch);
  int64_t steps_done() const { return step_; }
  int64_t skipped() const { return adam_.skipped(); }

 private:
  Model& model_;
  TrainConfig cfg_;
  Adam adam_;
  std::mt19937_64 noise_rng_;
  int64_t step_ = 0;
};

// Runs cfg.steps steps. `on_step` may return false to stop early.
std::vector<TrainStats> train(Model& model, DatasetCrops& data, const TrainConfig& cfg,
                              const std::function<bool(const TrainStats&)>& on_step = {});

struct RdEstimate {
  double bpp = 0.0;       // hard-quantized rate estimate
  double mse = 0.0;       // 255 scale, on the clamped reconstruction
  double psnr = 0.0;
  double loss = 0.0;      // bpp + lambda * distortion
};

// Deterministic evaluation with rounding (no coding).
RdEstimate evaluate(const Model& model, const Tensor& image, double lambda, Metric metric);

}  // namespace wincodec
