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


#include "wincodec/models.hpp"

#include <algorithm>

#include "wincodec/error.hpp"
#include "wincodec/ops.hpp"

namespace wincodec {

std::string to_string(Architecture a) { return a == Architecture::kCnn ? "cnn" : "stf"; }

std::string to_string(AttentionMode m) {
  switch (m) {
    case AttentionMode::kOff:
      return "off";
    case AttentionMode::kWindow:
      return "on";
    case AttentionMode::kGlobal:
      return "nlam";
  }
  return "on";
}

Architecture parse_architecture(const std::string& s) {
  if (s == "cnn") return Architecture::kCnn;
  if (s == "stf") return Architecture::kStf;
  fail(ErrorKind::kInvalidArgument, "unknown architecture '" + s + "' (expected cnn or stf)");
}

AttentionMode parse_attention_mode(const std::string& s) {
  if (s == "off") return AttentionMode::kOff;
  if (s == "on") return AttentionMode::kWindow;
  if (s == "nlam") return AttentionMode::kGlobal;
  fail(ErrorKind::kInvalidArgument, "unknown WAM mode '" + s + "' (expected on, off or nlam)");
}

void StfConfig::validate() const {
  require(patch_size >= 1 && window_size >= 1 && embed_dim >= 1, "stf: sizes must be positive");
  require(!depths.empty() && depths.size() == heads.size(), "stf: depths and heads must have equal length");
  for (int64_t s = 0; s < stages(); ++s) {
    require(depths[s] >= 1, "stf: every stage needs at least one block");
    require(heads[s] >= 1 && stage_channels(s) % heads[s] == 0,
            "stf: heads[" + std::to_string(s) + "] must divide " + std::to_string(stage_channels(s)));
  }
  require(latent_channels >= 1, "stf: latent channels must be positive");
}

void CnnConfig::validate() const {
  require(channels >= 2 && latent_channels >= 2, "cnn: channel counts must be >= 2");
  for (int64_t p : wam_positions) require(p >= 1 && p <= kStages, "cnn: WAM positions must be in 1..4");
  if (attention != AttentionMode::kOff) {
    for (int64_t p : wam_positions) {
      const int64_t c = p == kStages ? latent_channels : channels;
      require(c % wam_heads == 0, "cnn: wam heads must divide " + std::to_string(c));
    }
  }
}

Tensor PatchEmbed::operator()(const Tensor& image) const {
  require(image.rank() == 3, "patch_embed expects [C,H,W], got " + shape_str(image.shape()));
  const int64_t c = image.dim(0), h = image.dim(1), w = image.dim(2), n = patch;
  require(h >= n && w >= n, "image " + shape_str(image.shape()) + " is smaller than one patch");
  require(h % n == 0 && w % n == 0, "patch_embed: dims must be multiples of the patch size");
  require(c * n * n == proj.in_features(), "patch_embed: channel count does not match projection");
  const int64_t ph = h / n, pw = w / n, feat = c * n * n;
  std::vector<int64_t> index(static_cast<size_t>(ph * pw * feat));
  for (int64_t py = 0; py < ph; ++py)
    for (int64_t px = 0; px < pw; ++px)
      for (int64_t ch = 0; ch < c; ++ch)
        for (int64_t dy = 0; dy < n; ++dy)
          for (int64_t dx = 0; dx < n; ++dx)
            index[((py * pw + px) * c + ch) * n * n + dy * n + dx] = ch * h * w + (py * n + dy) * w + px * n + dx;
  return proj(gather(image, std::move(index), Shape{ph * pw, feat}));
}

Tensor PatchEmbed::as_map(const Tensor& image) const {
  return from_tokens((*this)(image), image.dim(1) / patch, image.dim(2) / patch);
}

Tensor PatchUnembed::operator()(const Tensor& tokens, int64_t height, int64_t width) const {
  const Tensor pixels = proj(tokens);  // [h*w, 3*N*N]
  const int64_t n = patch, c = pixels.dim(1) / (n * n);
  const int64_t oh = height * n, ow = width * n;
  std::vector<int64_t> index(static_cast<size_t>(c * oh * ow));
  for (int64_t ch = 0; ch < c; ++ch)
    for (int64_t y = 0; y < oh; ++y)
      for (int64_t x = 0; x < ow; ++x)
        index[(ch * oh + y) * ow + x] =
            ((y / n) * width + x / n) * (c * n * n) + ch * n * n + (y % n) * n + x % n;
  return gather(pixels, std::move(index), Shape{c, oh, ow});
}

PatchMerge PatchMerge::create(ParameterStore& store, const std::string& name, int64_t channels) {
  PatchMerge m;
  m.norm = LayerNorm::create(store, name + ".norm", 4 * channels);
  m.reduction = Linear::create(store, name + ".reduction", 4 * channels, 2 * channels, false);
  return m;
}

Tensor PatchMerge::operator()(const Tensor& tokens, int64_t height, int64_t width) const {
  require(height % 2 == 0 && width % 2 == 0,
          "patch_merge needs even dims, got " + std::to_string(height) + "x" + std::to_string(width));
  require(tokens.rank() == 2 && tokens.dim(0) == height * width, "patch_merge: token count mismatch");
  const int64_t c = tokens.dim(1), oh = height / 2, ow = width / 2;
  static constexpr int64_t kOffsets[4][2] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  std::vector<int64_t> index(static_cast<size_t>(oh * ow * 4 * c));
  for (int64_t y = 0; y < oh; ++y)
    for (int64_t x = 0; x < ow; ++x)
      for (int64_t k = 0; k < 4; ++k)
        for (int64_t ch = 0; ch < c; ++ch)
          index[((y * ow + x) * 4 + k) * c + ch] =
              ((2 * y + kOffsets[k][0]) * width + 2 * x + kOffsets[k][1]) * c + ch;
  Tensor merged = gather(tokens, std::move(index), Shape{oh * ow, 4 * c});
  if (use_norm) merged = norm(merged);
  return reduction(merged);
}

PatchSplit PatchSplit::create(ParameterStore& store, const std::string& name, int64_t channels) {
  PatchSplit s;
  s.expand = Linear::create(store, name + ".expand", channels, 2 * channels, false);
  s.norm = LayerNorm::create(store, name + ".norm", 2 * channels);
  return s;
}

Tensor PatchSplit::operator()(const Tensor& tokens, int64_t height, int64_t width) const {
  require(tokens.rank() == 2 && tokens.dim(0) == height * width, "patch_split: token count mismatch");
  Tensor expanded = expand(tokens);  // [h*w, 4C']
  if (use_norm) expanded = norm(expanded);
  const int64_t c = expanded.dim(1) / 4, oh = 2 * height, ow = 2 * width;
  std::vector<int64_t> index(static_cast<size_t>(oh * ow * c));
  for (int64_t y = 0; y < oh; ++y)
    for (int64_t x = 0; x < ow; ++x) {
      const int64_t k = (y % 2) + 2 * (x % 2);
      for (int64_t ch = 0; ch < c; ++ch)
        index[(y * ow + x) * c + ch] = ((y / 2) * width + x / 2) * 4 * c + k * c + ch;
    }
  return gather(expanded, std::move(index), Shape{oh * ow, c});
}

StfTransform::StfTransform(ParameterStore& store, const StfConfig& config) : config_(config) {
  config_.validate();
  const int64_t n = config_.patch_size, stages = config_.stages();
  const int64_t m = config_.window_size;
  embed_.patch = n;
  embed_.proj = Linear::create(store, "stf.embed", 3 * n * n, config_.embed_dim);
  for (int64_t s = 0; s < stages; ++s) {
    const int64_t c = config_.stage_channels(s);
    std::vector<SwinBlock> blocks;
    for (int64_t b = 0; b < config_.depths[s]; ++b)
      blocks.push_back(SwinBlock::create(store, "stf.enc" + std::to_string(s) + ".block" + std::to_string(b), c,
                                         config_.heads[s], m, b % 2 == 0 ? 0 : m / 2));
    encoder_stages_.push_back(std::move(blocks));
    if (s + 1 < stages) merges_.push_back(PatchMerge::create(store, "stf.merge" + std::to_string(s), c));
  }
  const int64_t deep = config_.stage_channels(stages - 1);
  latent_head_ = Linear::create(store, "stf.latent_head", deep, config_.latent_channels);
  latent_in_ = Linear::create(store, "stf.latent_in", config_.latent_channels, deep);
  for (int64_t s = stages - 1; s >= 0; --s) {
    const int64_t c = config_.stage_channels(s);
    std::vector<SwinBlock> blocks;
    for (int64_t b = 0; b < config_.depths[s]; ++b)
      blocks.push_back(SwinBlock::create(store, "stf.dec" + std::to_string(s) + ".block" + std::to_string(b), c,
                                         config_.heads[s], m, b % 2 == 0 ? 0 : m / 2));
    decoder_stages_.push_back(std::move(blocks));
    if (s > 0) splits_.push_back(PatchSplit::create(store, "stf.split" + std::to_string(s), c));
  }
  unembed_.patch = n;
  unembed_.proj = Linear::create(store, "stf.unembed", config_.embed_dim, 3 * n * n);
}

Tensor StfTransform::encode(const Tensor& x) const {
  require(x.rank() == 3 && x.dim(0) == 3, "stf encode expects [3,H,W], got " + shape_str(x.shape()));
  const int64_t ds = downsampling();
  require(x.dim(1) % ds == 0 && x.dim(2) % ds == 0,
          "stf encode: dims must be padded to a multiple of " + std::to_string(ds));
  Tensor t = embed_(x);
  int64_t h = x.dim(1) / config_.patch_size, w = x.dim(2) / config_.patch_size;
  for (int64_t s = 0; s < config_.stages(); ++s) {
    for (const SwinBlock& b : encoder_stages_[s]) t = b(t, h, w);
    if (s + 1 < config_.stages()) {
      t = merges_[s](t, h, w);
      h /= 2;
      w /= 2;
    }
  }
  return from_tokens(latent_head_(t), h, w);
}

Tensor StfTransform::decode(const Tensor& y) const {
  require(y.rank() == 3 && y.dim(0) == config_.latent_channels,
          "stf decode expects [C_y,h,w], got " + shape_str(y.shape()));
  int64_t h = y.dim(1), w = y.dim(2);
  Tensor t = latent_in_(to_tokens(y));
  for (size_t i = 0; i < decoder_stages_.size(); ++i) {
    for (const SwinBlock& b : decoder_stages_[i]) t = b(t, h, w);
    if (i < splits_.size()) {
      t = splits_[i](t, h, w);
      h *= 2;
      w *= 2;
    }
  }
  return unembed_(t, h, w);
}

CnnTransform::CnnTransform(ParameterStore& store, const CnnConfig& config) : config_(config) {
  config_.validate();
  const int64_t n = config_.channels, cy = config_.latent_channels;
  const bool with_wam = config_.attention != AttentionMode::kOff;
  const AttentionKind kind =
      config_.attention == AttentionMode::kGlobal ? AttentionKind::kGlobal : AttentionKind::kWindow;
  auto has_wam = [&](int64_t stage) {
    return with_wam && std::find(config_.wam_positions.begin(), config_.wam_positions.end(), stage) !=
                           config_.wam_positions.end();
  };
  auto stage_out = [&](int64_t stage) { return stage == CnnConfig::kStages ? cy : n; };
  for (int64_t s = 1; s <= CnnConfig::kStages; ++s) {
    const int64_t in = s == 1 ? 3 : n;
    enc_convs_.push_back(Conv2d::create(store, "cnn.enc" + std::to_string(s), in, stage_out(s), 5, 2));
    if (s < CnnConfig::kStages) enc_gdn_.push_back(Gdn::create(store, "cnn.gdn" + std::to_string(s), n, false));
    if (has_wam(s))
      enc_wams_.emplace_back(Wam::create(store, "cnn.enc_wam" + std::to_string(s), stage_out(s),
                                         config_.wam_heads, config_.wam_window, kind, config_.wam_blocks));
    else
      enc_wams_.emplace_back(std::nullopt);
  }
  // Decoder conv i undoes encoder stage 4 - i.
  for (int64_t i = 0; i < CnnConfig::kStages; ++i) {
    const int64_t stage = CnnConfig::kStages - i;
    if (has_wam(stage))
      dec_wams_.emplace_back(Wam::create(store, "cnn.dec_wam" + std::to_string(stage), stage_out(stage),
                                         config_.wam_heads, config_.wam_window, kind, config_.wam_blocks));
    else
      dec_wams_.emplace_back(std::nullopt);
    const int64_t out = stage == 1 ? 3 : n;
    dec_convs_.push_back(
        Conv2d::create(store, "cnn.dec" + std::to_string(stage), stage_out(stage), out, 5, 2, true));
    if (i + 1 < CnnConfig::kStages)
      dec_igdn_.push_back(Gdn::create(store, "cnn.igdn" + std::to_string(stage), n, true));
  }
}

const Wam* CnnTransform::encoder_wam(int64_t stage) const {
  if (stage < 1 || stage > CnnConfig::kStages) return nullptr;
  const auto& w = enc_wams_[static_cast<size_t>(stage - 1)];
  return w ? &*w : nullptr;
}

Tensor CnnTransform::encode(const Tensor& x) const {
  require(x.rank() == 3 && x.dim(0) == 3, "cnn encode expects [3,H,W], got " + shape_str(x.shape()));
  require(x.dim(1) % 16 == 0 && x.dim(2) % 16 == 0, "cnn encode: dims must be padded to a multiple of 16");
  Tensor t = x;
  for (size_t s = 0; s < enc_convs_.size(); ++s) {
    t = enc_convs_[s](t);
    if (s < enc_gdn_.size()) t = enc_gdn_[s](t);
    if (enc_wams_[s]) t = (*enc_wams_[s])(t);
  }
  return t;
}

Tensor CnnTransform::decode(const Tensor& y) const {
  require(y.rank() == 3 && y.dim(0) == config_.latent_channels,
          "cnn decode expects [C_y,h,w], got " + shape_str(y.shape()));
  Tensor t = y;
  for (size_t i = 0; i < dec_convs_.size(); ++i) {
    if (dec_wams_[i]) t = (*dec_wams_[i])(t);
    t = dec_convs_[i](t);
    if (i < dec_igdn_.size()) t = dec_igdn_[i](t);
  }
  return t;
}

}  // namespace wincodec
