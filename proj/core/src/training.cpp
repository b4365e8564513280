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


#include "wincodec/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "wincodec/error.hpp"
#include "wincodec/image.hpp"
#include "wincodec/metrics.hpp"
#include "wincodec/nn.hpp"
#include "wincodec/ops.hpp"

namespace wincodec {

void TrainConfig::validate(int64_t pad_multiple) const {
  require(lambda > 0.0, "lambda must be positive");
  require(steps >= 0 && batch >= 1, "steps must be >= 0 and batch >= 1");
  require(crop >= pad_multiple && crop % pad_multiple == 0,
          "crop (" + std::to_string(crop) + ") must be a positive multiple of " + std::to_string(pad_multiple));
  require(lr > 0.0, "learning rate must be positive");
  require(0.0 <= first_milestone && first_milestone <= second_milestone && second_milestone <= 1.0,
          "milestones must satisfy 0 <= first <= second <= 1");
}

Tensor mse_loss_255(const Tensor& a, const Tensor& b) { return scale(mean(square(sub(a, b))), 65025.0); }

namespace {

constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

struct SsimKernels {
  Tensor row;   // [1,1,1,11]
  Tensor col;   // [1,1,11,1]
  Tensor pool;  // [1,1,2,2]
};

const SsimKernels& ssim_kernels() {
  static const SsimKernels k = [] {
    const std::vector<double> g = gaussian_window();
    const auto n = static_cast<int64_t>(g.size());
    return SsimKernels{Tensor({1, 1, 1, n}, g), Tensor({1, 1, n, 1}, g), Tensor({1, 1, 2, 2}, 0.25)};
  }();
  return k;
}

Tensor blur(const Tensor& p) {
  const SsimKernels& k = ssim_kernels();
  return conv2d(conv2d(p, k.row, Tensor(), 1, 0), k.col, Tensor(), 1, 0);
}

// (mean SSIM, mean contrast-structure) for one [1,H,W] plane pair.
std::pair<Tensor, Tensor> ssim_terms(const Tensor& a, const Tensor& b) {
  const Tensor ma = blur(a), mb = blur(b);
  const Tensor ma2 = square(ma), mb2 = square(mb), mab = mul(ma, mb);
  const Tensor va = sub(blur(square(a)), ma2), vb = sub(blur(square(b)), mb2);
  const Tensor cov = sub(blur(mul(a, b)), mab);
  const Tensor cs = div(add_scalar(scale(cov, 2.0), kC2), add_scalar(add(va, vb), kC2));
  const Tensor lum = div(add_scalar(scale(mab, 2.0), kC1), add_scalar(add(ma2, mb2), kC1));
  return {mean(mul(cs, lum)), mean(cs)};
}

Tensor crop_even(const Tensor& p) {
  const int64_t h = p.dim(1), w = p.dim(2);
  if (h % 2 == 0 && w % 2 == 0) return p;
  std::vector<int64_t> index;
  for (int64_t y = 0; y < h / 2 * 2; ++y)
    for (int64_t x = 0; x < w / 2 * 2; ++x) index.push_back(y * w + x);
  return gather(p, std::move(index), Shape{1, h / 2 * 2, w / 2 * 2});
}

}  // namespace

Tensor ms_ssim_tensor(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape() && a.rank() == 3, "ms_ssim_tensor: expected matching [C,H,W] inputs");
  const int64_t c = a.dim(0), h = a.dim(1), w = a.dim(2);
  const int scales = ms_ssim_scales(h, w);
  require(scales >= 1, "ms_ssim_tensor: images must be larger than 10 pixels per side");
  std::vector<double> weights(ms_ssim_weights().begin(), ms_ssim_weights().begin() + scales);
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  const Tensor& pool = ssim_kernels().pool;
  Tensor total;
  for (int64_t ch = 0; ch < c; ++ch) {
    Tensor pa = slice(a, ch, ch + 1), pb = slice(b, ch, ch + 1);
    Tensor score;
    for (int s = 0; s < scales; ++s) {
      auto [ssim, cs] = ssim_terms(pa, pb);
      const Tensor term = pow_scalar(relu(s + 1 == scales ? ssim : cs), weights[s] / wsum);
      score = s == 0 ? term : mul(score, term);
      if (s + 1 < scales) {
        pa = conv2d(crop_even(pa), pool, Tensor(), 2, 0);
        pb = conv2d(crop_even(pb), pool, Tensor(), 2, 0);
      }
    }
    total = ch == 0 ? score : add(total, score);
  }
  return scale(total, 1.0 / static_cast<double>(c));
}

Tensor rd_loss(const Tensor& x, const Tensor& x_hat, const Tensor& rate_bits, double lambda, Metric metric) {
  require(x.shape() == x_hat.shape() && x.rank() == 3, "rd_loss: x and x_hat shapes differ");
  const double pixels = static_cast<double>(x.dim(1) * x.dim(2));
  const Tensor distortion =
      metric == Metric::kMse ? mse_loss_255(x, x_hat) : add_scalar(neg(ms_ssim_tensor(x, x_hat)), 1.0);
  return add(scale(rate_bits, 1.0 / pixels), scale(distortion, lambda));
}

double lr_schedule(int64_t step, const TrainConfig& cfg) {
  const double t = static_cast<double>(step);
  const double n = static_cast<double>(cfg.steps);
  if (t < cfg.first_milestone * n) return cfg.lr;
  if (t < cfg.second_milestone * n) return cfg.lr * 0.3;
  return cfg.lr * 0.1;
}

Adam::Adam(std::vector<Tensor> params, AdamOptions opts) : params_(std::move(params)), opts_(opts) {
  for (const Tensor& p : params_) {
    m_.emplace_back(static_cast<size_t>(p.numel()), 0.0);
    v_.emplace_back(static_cast<size_t>(p.numel()), 0.0);
  }
}

bool Adam::step(double lr) {
  for (const Tensor& p : params_) {
    if (!p.has_grad()) continue;
    for (double g : p.grad())
      if (!std::isfinite(g)) {
        ++skipped_;
        return false;
      }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
  for (size_t k = 0; k < params_.size(); ++k) {
    Tensor& p = params_[k];
    if (!p.has_grad()) continue;
    const auto g = p.grad();
    auto x = p.mutable_values();
    auto& m = m_[k];
    auto& v = v_[k];
    for (size_t i = 0; i < x.size(); ++i) {
      m[i] = opts_.beta1 * m[i] + (1.0 - opts_.beta1) * g[i];
      v[i] = opts_.beta2 * v[i] + (1.0 - opts_.beta2) * g[i] * g[i];
      x[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + opts_.eps);
    }
  }
  return true;
}

double clip_grad_norm(const std::vector<Tensor>& params, double max_norm) {
  double sq = 0.0;
  for (const Tensor& p : params)
    if (p.has_grad())
      for (double g : p.grad()) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm && std::isfinite(norm)) {
    const double f = max_norm / norm;
    for (Tensor p : params)
      if (p.has_grad())
        for (double& g : p.mutable_grad()) g *= f;
  }
  return norm;
}

DatasetCrops::DatasetCrops(std::vector<Tensor> images, int64_t crop, uint64_t seed)
    : images_(std::move(images)), crop_(crop), rng_(seed) {
  require(!images_.empty(), "dataset is empty");
  require(crop_ >= 1, "crop must be positive");
  for (Tensor& im : images_) {
    require(im.rank() == 3 && im.dim(0) == 3, "dataset images must be [3,H,W]");
    if (im.dim(1) < crop_ || im.dim(2) < crop_)
      im = pad_replicate(im, std::max(im.dim(1), crop_), std::max(im.dim(2), crop_));
  }
  order_.resize(images_.size());
  cursor_ = order_.size();
}

DatasetCrops DatasetCrops::from_dir(const std::filesystem::path& dir, int64_t crop, uint64_t seed) {
  const auto files = list_images(dir);
  if (files.empty()) fail(ErrorKind::kIo, "no .ppm images in " + dir.string());
  std::vector<Tensor> images;
  for (const auto& f : files) images.push_back(read_ppm(f));
  return DatasetCrops(std::move(images), crop, seed);
}

Tensor DatasetCrops::next() {
  if (cursor_ == order_.size()) {
    std::iota(order_.begin(), order_.end(), size_t{0});
    std::shuffle(order_.begin(), order_.end(), rng_);
    cursor_ = 0;
    ++epoch_;
  }
  last_ = order_[cursor_++];
  const Tensor& im = images_[last_];
  std::uniform_int_distribution<int64_t> dy(0, im.dim(1) - crop_), dx(0, im.dim(2) - crop_);
  const int64_t top = dy(rng_), left = dx(rng_);
  return crop(im, top, left, crop_, crop_);
}

std::vector<Tensor> DatasetCrops::next_batch(int64_t n) {
  std::vector<Tensor> out;
  for (int64_t i = 0; i < n; ++i) out.push_back(next());
  return out;
}

std::string format_log_line(const TrainStats& s) {
  char buf[192];
  std::snprintf(buf, sizeof buf, "step=%lld loss=%.6f bpp=%.6f distortion=%.6f lr=%.3g",
                static_cast<long long>(s.step), s.loss, s.bpp, s.distortion, s.lr);
  return buf;
}

Trainer::Trainer(Model& model, const TrainConfig& cfg)
    : model_(model), cfg_(cfg), adam_(model.params().tensors()), noise_rng_(cfg.seed * 0x9E3779B97F4A7C15ull + 7) {
  cfg_.validate(model.pad_multiple());
}

TrainStats Trainer::step(const std::vector<Tensor>& batch) {
  require(!batch.empty(), "training batch is empty");
  TrainStats stats;
  stats.step = step_;
  stats.lr = lr_schedule(step_, cfg_);
  model_.params().zero_grad();
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (const Tensor& x : batch) {
    Tape tape;
    TapeScope scope(tape);
    const Model::Output out = model_.forward(x, QuantMode::kTrain, &noise_rng_);
    const Tensor rate = add(out.entropy.y_bits, out.entropy.z_bits);
    const double pixels = static_cast<double>(x.dim(1) * x.dim(2));
    const Tensor distortion = cfg_.metric == Metric::kMse
                                  ? mse_loss_255(x, out.x_hat)
                                  : add_scalar(neg(ms_ssim_tensor(x, out.x_hat)), 1.0);
    const Tensor loss = scale(add(scale(rate, 1.0 / pixels), scale(distortion, cfg_.lambda)), inv);
    tape.backward(loss);
    stats.loss += loss.item();
    stats.bpp += rate.item() / pixels * inv;
    stats.distortion += distortion.item() * inv;
  }
  const std::vector<Tensor> params = model_.params().tensors();
  clip_grad_norm(params, cfg_.grad_clip);
  adam_.step(stats.lr);
  ++step_;
  return stats;
}

std::vector<TrainStats> train(Model& model, DatasetCrops& data, const TrainConfig& cfg,
                              const std::function<bool(const TrainStats&)>& on_step) {
  Trainer trainer(model, cfg);
  std::vector<TrainStats> log;
  for (int64_t s = 0; s < cfg.steps; ++s) {
    std::vector<Tensor> batch = data.next_batch(cfg.batch);
    log.push_back(trainer.step(batch));
    if (!std::isfinite(log.back().loss)) fail(ErrorKind::kNumeric, "training loss is not finite at step " + std::to_string(s));
    if (on_step && !on_step(log.back())) break;
  }
  return log;
}

RdEstimate evaluate(const Model& model, const Tensor& image, double lambda, Metric metric) {
  const int64_t h = image.dim(1), w = image.dim(2), m = model.pad_multiple();
  const Tensor x = pad_replicate(image, round_up(h, m), round_up(w, m));
  const Model::Output out = model.forward(x, QuantMode::kHard);
  const Tensor x_hat = crop(clamp01(out.x_hat), 0, 0, h, w);
  RdEstimate r;
  r.bpp = (out.entropy.y_bits.item() + out.entropy.z_bits.item()) / static_cast<double>(h * w);
  r.mse = mse_255(image, x_hat);
  r.psnr = psnr_from_mse(r.mse);
  const double d = metric == Metric::kMse ? r.mse : 1.0 - ms_ssim(image, x_hat);
  r.loss = r.bpp + lambda * d;
  return r;
}

}  // namespace wincodec
