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
#include <string>
#include <vector>

#include "wincodec/nn.hpp"
#include "wincodec/params.hpp"
#include "wincodec/tensor.hpp"

namespace wincodec {

/// Index map from an H x W map onto non-overlapping M x M windows. The map
/// is zero-padded up to multiples of M (bottom/right), cyclically shifted by
/// (-shift, -shift), then tiled in raster order of windows and of positions
/// within a window.
struct WindowLayout {
  int64_t height = 0;
  int64_t width = 0;
  int64_t window = 0;
  int64_t shift = 0;
  int64_t padded_height = 0;
  int64_t padded_width = 0;
  // Per window slot: flat source position y * width + x, or -1 for padding.
  std::vector<int64_t> source;
  // Per source position: its window slot.
  std::vector<int64_t> slot_of;
  // Additive logits [num_windows, T, T]: -inf where the key is padding or
  // lies in a different shifted region than the query. Every query keeps
  // itself.
  std::vector<double> mask;
  bool has_mask = false;

  static WindowLayout make(int64_t height, int64_t width, int64_t window, int64_t shift);

  int64_t num_windows() const { return (padded_height / window) * (padded_width / window); }
  int64_t tokens_per_window() const { return window * window; }
};

struct WindowGrid {
  Tensor windows;  // [num_windows, M*M, C]
  WindowLayout layout;
};

// Tokens are channel-last rows: [H*W, C].
Tensor to_tokens(const Tensor& x);  // [C,H,W] -> [H*W,C]
Tensor from_tokens(const Tensor& tokens, int64_t height, int64_t width);  // inverse

WindowGrid window_partition(const Tensor& x, int64_t window, int64_t shift);
Tensor window_reverse(const WindowGrid& grid);  // [C,H,W]
Tensor partition_tokens(const Tensor& tokens, const WindowLayout& layout);
Tensor reverse_tokens(const Tensor& windows, const WindowLayout& layout);

/// Per-window multi-head attention core. q, k, v: [num_windows, T, C] with
/// C = heads * d. Logits are scale * q.k + bias[h,i,j] + mask[w,i,j].
/// `bias` ([heads,T,T]) may be undefined; `mask` may be null.
Tensor windowed_attention_core(const Tensor& q, const Tensor& k, const Tensor& v, int64_t heads,
                               double scale, const Tensor& bias, const std::vector<double>* mask);

// Softmax weights of the core, [num_windows, heads, T, T]; no autodiff.
std::vector<double> attention_weights(const Tensor& q, const Tensor& k, int64_t heads, double scale,
                                      const Tensor& bias, const std::vector<double>* mask);

/// theta/phi/g are the cross-channel query/key/value transforms and z the
/// output transform. Relative position bias is optional ((2M-1)^2 x heads).
struct WindowAttentionParams {
  Linear theta;
  Linear phi;
  Linear g;
  Linear z;
  int64_t heads = 1;
  int64_t window = 4;
  Tensor relative_position_bias;

  static WindowAttentionParams create(ParameterStore& store, const std::string& name, int64_t channels,
                                      int64_t heads, int64_t window, bool relative_bias, bool with_bias);
  int64_t channels() const { return theta.in_features(); }
  double logit_scale() const;
  // [heads, T, T] gathered from the table, or undefined.
  Tensor bias_for_window() const;
};

// Attention inside each window; with `residual`, Z = W_z Y + X.
WindowGrid window_attention(const WindowGrid& grid, const WindowAttentionParams& p, bool residual = true);
std::vector<double> window_attention_weights(const WindowGrid& grid, const WindowAttentionParams& p);

// Non-local reference: one window covering the whole map, built from
// primitive ops. No positional bias. Output [C,H,W] with the residual.
Tensor global_attention(const Tensor& x, const WindowAttentionParams& p);

// 1x1 (C -> C/2), 3x3 (C/2), 1x1 (C/2 -> C), GELU between, plus identity.
struct ResidualBlock {
  Conv2d reduce;
  Conv2d spatial;
  Conv2d expand;

  static ResidualBlock create(ParameterStore& store, const std::string& name, int64_t channels);
  Tensor operator()(const Tensor& x) const;
};

enum class AttentionKind { kWindow, kGlobal };

/// Window Attention Module: x + trunk(x) * sigmoid(mask(x)). The trunk is
/// three residual blocks and a 1x1 projection; the mask branch is an
/// attention block, three residual blocks and a 1x1 projection. Both final
/// projections start at zero, so a fresh module is the identity.
struct Wam {
  AttentionKind kind = AttentionKind::kWindow;
  WindowAttentionParams attention;
  std::vector<ResidualBlock> trunk;
  Conv2d trunk_out;
  std::vector<ResidualBlock> mask_blocks;
  Conv2d mask_out;

  static Wam create(ParameterStore& store, const std::string& name, int64_t channels, int64_t heads,
                    int64_t window, AttentionKind kind, int64_t residual_blocks = 3);
  Tensor operator()(const Tensor& x) const;
  Tensor mask(const Tensor& x) const;  // sigmoid output, [C,H,W]
};

/// Swin-style block on tokens [H*W, C]:
///   x + proj((S)W-MSA(LN(x))), then + fc2(GELU(fc1(LN(.)))).
struct SwinBlock {
  LayerNorm norm1;
  WindowAttentionParams attention;
  LayerNorm norm2;
  Linear fc1;
  Linear fc2;
  int64_t shift = 0;

  static SwinBlock create(ParameterStore& store, const std::string& name, int64_t channels, int64_t heads,
                          int64_t window, int64_t shift, double mlp_ratio = 4.0);
  Tensor operator()(const Tensor& tokens, int64_t height, int64_t width) const;
  // Maps too small for a shifted window fall back to shift 0.
  int64_t effective_shift(int64_t height, int64_t width) const;
};

}  // namespace wincodec
