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


#include "wincodec/entropy.hpp"

#include <algorithm>
#include <cmath>

#include "autograd.hpp"
#include "wincodec/error.hpp"
#include "wincodec/ops.hpp"

namespace wincodec {

using detail::input_grad;
using detail::make_result;
using detail::Node;

namespace {

constexpr double kInvLn2 = 1.4426950408889634;
constexpr double kInvSqrt2 = 0.7071067811865476;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

double phi_cdf(double t) { return 0.5 * std::erfc(-t * kInvSqrt2); }
double phi_pdf(double t) { return kInvSqrt2Pi * std::exp(-0.5 * t * t); }

double logistic(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double logistic_pdf(double t) {
  const double s = logistic(t);
  return s * (1.0 - s);
}

double sign_of(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

int32_t clamp_symbol(double v) {
  return static_cast<int32_t>(std::clamp(std::round(v), double(-kMaxEscaped), double(kMaxEscaped)));
}

// Inverse of softplus, for initializing reparameterized positives.
double softplus_inverse(double v) { return std::log(std::expm1(v)); }

}  // namespace

double gaussian_bin_mass(double offset, double sigma) {
  const double a = std::abs(offset);
  return phi_cdf((0.5 - a) / sigma) - phi_cdf((-0.5 - a) / sigma);
}

double logistic_bin_mass(double offset, double scale) {
  const double a = std::abs(offset);
  return logistic((0.5 - a) / scale) - logistic((-0.5 - a) / scale);
}

Tensor gaussian_bits(const Tensor& y, const Tensor& mu, const Tensor& sigma) {
  require(y.shape() == mu.shape() && y.shape() == sigma.shape(),
          "gaussian_bits: shapes " + shape_str(y.shape()) + ", " + shape_str(mu.shape()) + ", " +
              shape_str(sigma.shape()) + " differ");
  const int64_t n = y.numel();
  const auto& yv = y.values();
  const auto& mv = mu.values();
  const auto& sv = sigma.values();
  std::vector<double> out(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i)
    out[i] = -std::log2(std::max(gaussian_bin_mass(yv[i] - mv[i], sv[i]), kLikelihoodFloor));
  return make_result("gaussian_bits", y.shape(), std::move(out), {&y, &mu, &sigma}, [n](Node& self) {
    const double* g = self.grad.data();
    const double* yv = self.inputs[0]->data.data();
    const double* mv = self.inputs[1]->data.data();
    const double* sv = self.inputs[2]->data.data();
    double* gy = input_grad(self, 0);
    double* gm = input_grad(self, 1);
    double* gs = input_grad(self, 2);
    for (int64_t i = 0; i < n; ++i) {
      const double v = yv[i] - mv[i], a = std::abs(v), s = sv[i];
      const double u = (0.5 - a) / s, l = (-0.5 - a) / s;
      const double pu = phi_pdf(u), pl = phi_pdf(l);
      const double p = std::max(phi_cdf(u) - phi_cdf(l), kLikelihoodFloor);
      const double dbits_dp = -kInvLn2 / p;
      const double dp_dv = sign_of(v) * (pl - pu) / s;
      const double dp_ds = (l * pl - u * pu) / s;
      if (gy) gy[i] += g[i] * dbits_dp * dp_dv;
      if (gm) gm[i] -= g[i] * dbits_dp * dp_dv;
      if (gs) gs[i] += g[i] * dbits_dp * dp_ds;
    }
  });
}

double gaussian_rate(const Tensor& y, const Tensor& mu, const Tensor& sigma) {
  double total = 0.0;
  const Tensor bits = gaussian_bits(y, mu, sigma);
  for (double b : bits.values()) total += b;
  return total;
}

Tensor logistic_bits(const Tensor& z, const Tensor& loc, const Tensor& scale) {
  require(z.rank() >= 1 && loc.shape() == Shape{z.dim(0)} && scale.shape() == loc.shape(),
          "logistic_bits: expects z [C,...] with loc/scale [C]");
  const int64_t n = z.numel(), per = n / std::max<int64_t>(z.dim(0), 1);
  const auto& zv = z.values();
  const auto& lv = loc.values();
  const auto& sv = scale.values();
  std::vector<double> out(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    const int64_t c = i / per;
    out[i] = -std::log2(std::max(logistic_bin_mass(zv[i] - lv[c], sv[c]), kLikelihoodFloor));
  }
  return make_result("logistic_bits", z.shape(), std::move(out), {&z, &loc, &scale}, [n, per](Node& self) {
    const double* g = self.grad.data();
    const double* zv = self.inputs[0]->data.data();
    const double* lv = self.inputs[1]->data.data();
    const double* sv = self.inputs[2]->data.data();
    double* gz = input_grad(self, 0);
    double* gl = input_grad(self, 1);
    double* gs = input_grad(self, 2);
    for (int64_t i = 0; i < n; ++i) {
      const int64_t c = i / per;
      const double t = zv[i] - lv[c], a = std::abs(t), s = sv[c];
      const double u = (0.5 - a) / s, l = (-0.5 - a) / s;
      const double pu = logistic_pdf(u), pl = logistic_pdf(l);
      const double p = std::max(logistic(u) - logistic(l), kLikelihoodFloor);
      const double dbits_dp = -kInvLn2 / p;
      const double dp_dt = sign_of(t) * (pl - pu) / s;
      if (gz) gz[i] += g[i] * dbits_dp * dp_dt;
      if (gl) gl[c] -= g[i] * dbits_dp * dp_dt;
      if (gs) gs[c] += g[i] * dbits_dp * (l * pl - u * pu) / s;
    }
  });
}

GaussianTables::GaussianTables() {
  const double lo = std::log(kSigmaMin), step = (std::log(kSigmaMax) - lo) / (kLevels - 1);
  std::vector<double> pmf(2 * kRadius + 1);
  for (int k = 0; k < kLevels; ++k) {
    const double sigma = std::exp(lo + step * k);
    sigmas_.push_back(sigma);
    for (int32_t s = -kRadius; s <= kRadius; ++s) pmf[s + kRadius] = gaussian_bin_mass(s, sigma);
    tables_.push_back(CdfTable::from_pmf(pmf, -kRadius, true));
  }
}

const GaussianTables& GaussianTables::instance() {
  static const GaussianTables tables;
  return tables;
}

int GaussianTables::level_for(double sigma) const {
  const double lo = std::log(kSigmaMin), step = (std::log(kSigmaMax) - lo) / (kLevels - 1);
  const double k = std::round((std::log(std::max(sigma, kSigmaMin)) - lo) / step);
  return static_cast<int>(std::clamp(k, 0.0, double(kLevels - 1)));
}

CdfTable logistic_table(double scale) {
  constexpr int32_t r = GaussianTables::kRadius;
  std::vector<double> pmf(2 * r + 1);
  for (int32_t s = -r; s <= r; ++s) pmf[s + r] = logistic_bin_mass(s, scale);
  return CdfTable::from_pmf(pmf, -r, true);
}

void EntropyConfig::validate() const {
  require(latent_channels >= 1 && hyper_channels >= 1 && slice_hidden >= 1, "entropy: sizes must be positive");
  require(slices >= 1 && latent_channels % slices == 0,
          "entropy: slices (" + std::to_string(slices) + ") must divide latent channels (" +
              std::to_string(latent_channels) + ")");
}

Tensor SliceNet::operator()(const Tensor& x) const { return second(gelu(first(x))); }

Tensor quantize(const Tensor& y, const Tensor& mu, QuantMode mode) {
  require(y.shape() == mu.shape(), "quantize: y and mu shapes differ");
  if (mode == QuantMode::kHard) {
    std::vector<double> out(y.values().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = std::round(y.values()[i] - mu.values()[i]) + mu.values()[i];
    return Tensor(y.shape(), std::move(out));
  }
  return add(round_ste(sub(y, mu)), mu);
}

EntropyModel::EntropyModel(ParameterStore& store, const EntropyConfig& config) : config_(config) {
  config_.validate();
  const int64_t cy = config_.latent_channels, cz = config_.hyper_channels, k = config_.slice_channels();
  ha1_ = Conv2d::create(store, "hyper.a1", cy, cz, 3, 1);
  ha2_ = Conv2d::create(store, "hyper.a2", cz, cz, 5, 2);
  ha3_ = Conv2d::create(store, "hyper.a3", cz, cz, 5, 2);
  hs_mean1_ = Conv2d::create(store, "hyper.s_mean1", cz, cz, 5, 2, true);
  hs_mean2_ = Conv2d::create(store, "hyper.s_mean2", cz, cz, 5, 2, true);
  hs_mean3_ = Conv2d::create(store, "hyper.s_mean3", cz, cy, 3, 1);
  hs_scale1_ = Conv2d::create(store, "hyper.s_scale1", cz, cz, 5, 2, true);
  hs_scale2_ = Conv2d::create(store, "hyper.s_scale2", cz, cz, 5, 2, true);
  hs_scale3_ = Conv2d::create(store, "hyper.s_scale3", cz, cy, 3, 1);
  prior_loc_ = store.create("prior.loc", {cz}, Init::zeros());
  prior_scale_param_ = store.create("prior.scale", {cz}, Init::constant(softplus_inverse(1.0 - kSigmaMin)));
  const int64_t h = config_.slice_hidden;
  for (int64_t s = 0; s < config_.slices; ++s) {
    const std::string p = "slice" + std::to_string(s);
    const int64_t in = cy + s * k;
    mean_nets_.push_back({Conv2d::create(store, p + ".mean1", in, h, 1, 1),
                          Conv2d::create(store, p + ".mean2", h, k, 1, 1)});
    scale_nets_.push_back({Conv2d::create(store, p + ".scale1", in, h, 1, 1),
                           Conv2d::create(store, p + ".scale2", h, k, 1, 1)});
    if (config_.lrp)
      lrp_nets_.push_back({Conv2d::create(store, p + ".lrp1", in + k, h, 1, 1),
                           Conv2d::create(store, p + ".lrp2", h, k, 1, 1, false, true)});
  }
}

Tensor EntropyModel::hyper_encode(const Tensor& y) const {
  require(y.rank() == 3 && y.dim(0) == config_.latent_channels,
          "hyper_encode expects [C_y,h,w], got " + shape_str(y.shape()));
  require(y.dim(1) % 4 == 0 && y.dim(2) % 4 == 0, "hyper_encode: latent dims must be multiples of 4");
  return ha3_(relu(ha2_(relu(ha1_(y)))));
}

HyperFeatures EntropyModel::hyper_decode(const Tensor& z_hat) const {
  return {hs_mean3_(relu(hs_mean2_(relu(hs_mean1_(z_hat))))),
          hs_scale3_(relu(hs_scale2_(relu(hs_scale1_(z_hat)))))};
}

Tensor EntropyModel::prior_scale() const { return add_scalar(softplus(prior_scale_param_), kSigmaMin); }

std::pair<Tensor, Tensor> EntropyModel::slice_params(int64_t s, const HyperFeatures& hyper,
                                                     std::span<const Tensor> decoded) const {
  require(s >= 0 && s < config_.slices, "slice index out of range");
  require(static_cast<int64_t>(decoded.size()) >= s,
          "slice " + std::to_string(s) + " requested before slice " + std::to_string(decoded.size()) +
              " was decoded");
  std::vector<Tensor> mean_in{hyper.mean}, scale_in{hyper.scale};
  for (int64_t j = 0; j < s; ++j) {
    mean_in.push_back(decoded[j]);
    scale_in.push_back(decoded[j]);
  }
  const Tensor mu = mean_nets_[s](concat(mean_in));
  const Tensor raw = scale_nets_[s](concat(scale_in));
  return {mu, clamp(add_scalar(softplus(raw), kSigmaMin), kSigmaMin, kSigmaMax)};
}

Tensor EntropyModel::lrp_apply(int64_t s, const Tensor& y_s, const HyperFeatures& hyper,
                               std::span<const Tensor> decoded) const {
  if (!config_.lrp) return y_s;
  std::vector<Tensor> in{hyper.mean};
  for (int64_t j = 0; j < s; ++j) in.push_back(decoded[j]);
  in.push_back(y_s);
  return add(y_s, scale(tanh(lrp_nets_[s](concat(in))), 0.5));
}

namespace {

Tensor uniform_noise_like(const Tensor& t, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<double> v(t.values().size());
  for (double& x : v) x = u(rng);
  return Tensor(t.shape(), std::move(v));
}

}  // namespace

Tensor EntropyModel::quantize_z(const Tensor& z, QuantMode mode, std::mt19937_64* rng, Tensor* z_rate_input) const {
  const Tensor neg_loc = neg(prior_loc_);
  switch (mode) {
    case QuantMode::kHard: {
      const Tensor zh = add_channel(round_ste(add_channel(z, neg_loc)), prior_loc_);
      *z_rate_input = zh;
      return zh;
    }
    case QuantMode::kTrain:
      *z_rate_input = add(z, uniform_noise_like(z, *rng));
      return add_channel(round_ste(add_channel(z, neg_loc)), prior_loc_);
    case QuantMode::kNoise:
      *z_rate_input = add(z, uniform_noise_like(z, *rng));
      return *z_rate_input;
  }
  return z;
}

EntropyOutput EntropyModel::forward(const Tensor& y, QuantMode mode, std::mt19937_64* rng) const {
  require(mode == QuantMode::kHard || rng != nullptr, "entropy forward: noisy modes need an rng");
  EntropyOutput out;
  const Tensor z = hyper_encode(y);
  Tensor z_rate_input;
  out.z_hat = quantize_z(z, mode, rng, &z_rate_input);
  out.z_bits = sum(logistic_bits(z_rate_input, prior_loc_, prior_scale()));
  const HyperFeatures hyper = hyper_decode(out.z_hat);

  const int64_t k = config_.slice_channels();
  std::vector<Tensor> decoded, mus, sigmas, bits;
  for (int64_t s = 0; s < config_.slices; ++s) {
    const Tensor y_s = slice(y, s * k, (s + 1) * k);
    auto [mu, sigma] = slice_params(s, hyper, decoded);
    Tensor y_q, rate_input;
    switch (mode) {
      case QuantMode::kHard:
        y_q = add(round_ste(sub(y_s, mu)), mu);
        rate_input = y_q;
        break;
      case QuantMode::kTrain:
        y_q = quantize(y_s, mu, mode);
        rate_input = add(y_s, uniform_noise_like(y_s, *rng));
        break;
      case QuantMode::kNoise:
        y_q = add(y_s, uniform_noise_like(y_s, *rng));
        rate_input = y_q;
        break;
    }
    bits.push_back(gaussian_bits(rate_input, mu, sigma));
    decoded.push_back(lrp_apply(s, y_q, hyper, decoded));
    mus.push_back(mu);
    sigmas.push_back(sigma);
  }
  out.y_hat = concat(decoded);
  out.mu = concat(mus);
  out.sigma = concat(sigmas);
  out.y_element_bits = concat(bits);
  out.y_bits = sum(out.y_element_bits);
  return out;
}

std::vector<CdfTable> EntropyModel::prior_tables() const {
  std::vector<CdfTable> tables;
  const Tensor scale = prior_scale();
  for (double s : scale.values()) tables.push_back(logistic_table(s));
  return tables;
}

EncodedLatents EntropyModel::compress(const Tensor& y) const {
  const Tensor z = hyper_encode(y);
  const int64_t cz = z.dim(0), per_z = z.dim(1) * z.dim(2);
  const std::vector<CdfTable> ztables = prior_tables();
  const auto& loc = prior_loc_.values();
  EncodedLatents out;
  RangeEncoder enc;
  std::vector<double> zh(z.values().size());
  for (int64_t i = 0; i < cz * per_z; ++i) {
    const int64_t c = i / per_z;
    const int32_t sym = clamp_symbol(z.values()[i] - loc[c]);
    encode_value(enc, sym, ztables[c]);
    zh[i] = static_cast<double>(sym) + loc[c];
  }
  out.z_segment = enc.finish();
  const HyperFeatures hyper = hyper_decode(Tensor(z.shape(), std::move(zh)));

  const GaussianTables& tables = GaussianTables::instance();
  const int64_t k = config_.slice_channels();
  std::vector<Tensor> decoded, mus, sigmas;
  for (int64_t s = 0; s < config_.slices; ++s) {
    const Tensor y_s = slice(y, s * k, (s + 1) * k);
    auto [mu, sigma] = slice_params(s, hyper, decoded);
    const auto& yv = y_s.values();
    const auto& mv = mu.values();
    const auto& sv = sigma.values();
    std::vector<double> yq(yv.size());
    for (size_t i = 0; i < yv.size(); ++i) {
      const int32_t sym = clamp_symbol(yv[i] - mv[i]);
      encode_value(enc, sym, tables.table(tables.level_for(sv[i])));
      yq[i] = static_cast<double>(sym) + mv[i];
    }
    out.slice_segments.push_back(enc.finish());
    decoded.push_back(lrp_apply(s, Tensor(y_s.shape(), std::move(yq)), hyper, decoded));
    mus.push_back(mu);
    sigmas.push_back(sigma);
  }
  out.y_hat = concat(decoded);
  out.mu = concat(mus);
  out.sigma = concat(sigmas);
  return out;
}

DecodedLatents EntropyModel::decompress(std::span<const uint8_t> z_segment,
                                        std::span<const std::vector<uint8_t>> slice_segments, int64_t height,
                                        int64_t width) const {
  require(height % 4 == 0 && width % 4 == 0 && height > 0 && width > 0,
          "decompress: latent dims must be positive multiples of 4");
  if (static_cast<int64_t>(slice_segments.size()) != config_.slices)
    fail(ErrorKind::kFormat, "bitstream has " + std::to_string(slice_segments.size()) + " slices, model expects " +
                                 std::to_string(config_.slices));
  const int64_t cz = config_.hyper_channels, per_z = (height / 4) * (width / 4);
  const std::vector<CdfTable> ztables = prior_tables();
  const auto& loc = prior_loc_.values();
  std::vector<double> zh(static_cast<size_t>(cz * per_z));
  RangeDecoder zdec(z_segment);
  for (int64_t i = 0; i < cz * per_z; ++i) {
    const int64_t c = i / per_z;
    zh[i] = static_cast<double>(decode_value(zdec, ztables[c])) + loc[c];
  }
  const HyperFeatures hyper = hyper_decode(Tensor({cz, height / 4, width / 4}, std::move(zh)));

  const GaussianTables& tables = GaussianTables::instance();
  const int64_t k = config_.slice_channels();
  DecodedLatents out;
  std::vector<Tensor> decoded, mus, sigmas;
  for (int64_t s = 0; s < config_.slices; ++s) {
    auto [mu, sigma] = slice_params(s, hyper, decoded);
    const auto& mv = mu.values();
    const auto& sv = sigma.values();
    std::vector<double> yq(mv.size());
    RangeDecoder dec(slice_segments[s]);
    for (size_t i = 0; i < mv.size(); ++i)
      yq[i] = static_cast<double>(decode_value(dec, tables.table(tables.level_for(sv[i])))) + mv[i];
    decoded.push_back(lrp_apply(s, Tensor({k, height, width}, std::move(yq)), hyper, decoded));
    mus.push_back(mu);
    sigmas.push_back(sigma);
  }
  out.y_hat = concat(decoded);
  out.mu = concat(mus);
  out.sigma = concat(sigmas);
  return out;
}

}  // namespace wincodec
