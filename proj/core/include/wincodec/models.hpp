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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wincodec/attention.hpp"
#include "wincodec/nn.hpp"
#include "wincodec/params.hpp"

namespace wincodec {

enum class Architecture { kCnn, kStf };
// WAM insertion for the CNN model: none, window attention, or the global
// (non-local) baseline.
enum class AttentionMode { kOff, kWindow, kGlobal };

std::string to_string(Architecture a);
std::string to_string(AttentionMode m);
Architecture parse_architecture(const std::string& s);
AttentionMode parse_attention_mode(const std::string& s);

struct StfConfig {
  int64_t patch_size = 2;
  int64_t window_size = 4;
  int64_t embed_dim = 24;
  std::vector<int64_t> depths{2, 2, 2, 2};
  std::vector<int64_t> heads{3, 6, 12, 24};
  int64_t latent_channels = 64;

  int64_t stages() const { return static_cast<int64_t>(depths.size()); }
  int64_t stage_channels(int64_t stage) const { return embed_dim << stage; }
  int64_t downsampling() const { return patch_size << (stages() - 1); }
  void validate() const;
};

struct CnnConfig {
  int64_t channels = 32;
  int64_t latent_channels = 64;
  // 1-based stage indices after which a WAM sits in the encoder (mirrored
  // in the decoder).
  std::vector<int64_t> wam_positions{2, 4};
  AttentionMode attention = AttentionMode::kWindow;
  int64_t wam_window = 4;
  int64_t wam_heads = 2;
  int64_t wam_blocks = 3;

  static constexpr int64_t kStages = 4;
  int64_t downsampling() const { return 16; }
  void validate() const;
};

/// Analysis transform x [3,H,W] -> y [C_y, H/s, W/s] and its synthesis
/// counterpart; s = downsampling(). Inputs must already be padded.
class Transform {
 public:
  virtual ~Transform() = default;
  virtual Tensor encode(const Tensor& x) const = 0;
  virtual Tensor decode(const Tensor& y) const = 0;
  virtual int64_t downsampling() const = 0;
  virtual int64_t latent_channels() const = 0;
};

// N x N x 3 patches -> C channels via one linear map; tokens [(H/N)(W/N), C].
struct PatchEmbed {
  Linear proj;
  int64_t patch = 2;

  Tensor operator()(const Tensor& image) const;
  // Same result laid out as a feature map [C, H/N, W/N].
  Tensor as_map(const Tensor& image) const;
};

// tokens [h*w, C] -> [3, h*N, w*N].
struct PatchUnembed {
  Linear proj;
  int64_t patch = 2;

  Tensor operator()(const Tensor& tokens, int64_t height, int64_t width) const;
};

// 2x2 neighbourhood concat (4C) -> LN -> linear to 2C. Sub-pixel order:
// (0,0), (1,0), (0,1), (1,1) as (dy, dx).
struct PatchMerge {
  LayerNorm norm;
  Linear reduction;
  bool use_norm = true;

  static PatchMerge create(ParameterStore& store, const std::string& name, int64_t channels);
  Tensor operator()(const Tensor& tokens, int64_t height, int64_t width) const;
};

// Linear 2C -> 4C -> LN -> each token becomes a 2x2 block of C channels,
// in PatchMerge's sub-pixel order.
struct PatchSplit {
  Linear expand;
  LayerNorm norm;
  bool use_norm = true;

  static PatchSplit create(ParameterStore& store, const std::string& name, int64_t channels);
  Tensor operator()(const Tensor& tokens, int64_t height, int64_t width) const;
};

/// Symmetrical transformer: patch embedding, Swin stages with patch merging,
/// linear latent head; the decoder mirrors it with patch splitting and a
/// de-embedding layer. No convolutions.
class StfTransform : public Transform {
 public:
  StfTransform(ParameterStore& store, const StfConfig& config);

  Tensor encode(const Tensor& x) const override;
  Tensor decode(const Tensor& y) const override;
  int64_t downsampling() const override { return config_.downsampling(); }
  int64_t latent_channels() const override { return config_.latent_channels; }

  const StfConfig& config() const { return config_; }
  const PatchEmbed& patch_embed() const { return embed_; }

 private:
  StfConfig config_;
  PatchEmbed embed_;
  std::vector<std::vector<SwinBlock>> encoder_stages_;
  std::vector<PatchMerge> merges_;
  Linear latent_head_;
  Linear latent_in_;
  std::vector<std::vector<SwinBlock>> decoder_stages_;  // deepest first
  std::vector<PatchSplit> splits_;
  PatchUnembed unembed_;
};

/// Four stride-2 5x5 convolutions with GDN, WAMs after the configured
/// stages; decoder mirrors with transposed convolutions and inverse GDN.
class CnnTransform : public Transform {
 public:
  CnnTransform(ParameterStore& store, const CnnConfig& config);

  Tensor encode(const Tensor& x) const override;
  Tensor decode(const Tensor& y) const override;
  int64_t downsampling() const override { return config_.downsampling(); }
  int64_t latent_channels() const override { return config_.latent_channels; }

  const CnnConfig& config() const { return config_; }
  // WAM after encoder stage `stage` (1-based), if any.
  const Wam* encoder_wam(int64_t stage) const;

 private:
  CnnConfig config_;
  std::vector<Conv2d> enc_convs_;
  std::vector<Gdn> enc_gdn_;
  std::vector<std::optional<Wam>> enc_wams_;  // indexed by stage - 1
  std::vector<Conv2d> dec_convs_;
  std::vector<Gdn> dec_igdn_;
  std::vector<std::optional<Wam>> dec_wams_;  // before decoder conv i
};

}  // namespace wincodec
