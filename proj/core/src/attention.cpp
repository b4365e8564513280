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


#include "wincodec/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "autograd.hpp"
#include "wincodec/error.hpp"
#include "wincodec/ops.hpp"

namespace wincodec {

using detail::input_grad;
using detail::make_result;
using detail::Node;

namespace {

constexpr double kMasked = -std::numeric_limits<double>::infinity();

int64_t region_label(int64_t coord, int64_t padded, int64_t window, int64_t shift) {
  if (shift == 0) return 0;
  if (coord < padded - window) return 0;
  if (coord < padded - shift) return 1;
  return 2;
}

}  // namespace

WindowLayout WindowLayout::make(int64_t height, int64_t width, int64_t window, int64_t shift) {
  require(height >= 1 && width >= 1, "window layout on an empty map");
  require(window >= 1, "window size must be >= 1");
  require(shift >= 0 && shift < window, "window shift must lie in [0, M)");
  WindowLayout l;
  l.height = height;
  l.width = width;
  l.window = window;
  l.shift = shift;
  l.padded_height = (height + window - 1) / window * window;
  l.padded_width = (width + window - 1) / window * window;
  const int64_t wy_count = l.padded_height / window;
  const int64_t wx_count = l.padded_width / window;
  const int64_t t = window * window;
  l.source.assign(static_cast<size_t>(wy_count * wx_count * t), -1);
  l.slot_of.assign(static_cast<size_t>(height * width), -1);
  std::vector<int64_t> label(l.source.size());
  bool padded = false;
  for (int64_t wy = 0; wy < wy_count; ++wy)
    for (int64_t wx = 0; wx < wx_count; ++wx)
      for (int64_t ty = 0; ty < window; ++ty)
        for (int64_t tx = 0; tx < window; ++tx) {
          const int64_t sy = wy * window + ty;
          const int64_t sx = wx * window + tx;
          const int64_t py = (sy + shift) % l.padded_height;
          const int64_t px = (sx + shift) % l.padded_width;
          const int64_t slot = (wy * wx_count + wx) * t + ty * window + tx;
          label[slot] = region_label(sy, l.padded_height, window, shift) * 3 +
                        region_label(sx, l.padded_width, window, shift);
          if (py < height && px < width) {
            l.source[slot] = py * width + px;
            l.slot_of[py * width + px] = slot;
          } else {
            padded = true;
          }
        }
  l.has_mask = padded || shift > 0;
  if (l.has_mask) {
    const int64_t nw = wy_count * wx_count;
    l.mask.assign(static_cast<size_t>(nw * t * t), 0.0);
    for (int64_t w = 0; w < nw; ++w)
      for (int64_t i = 0; i < t; ++i)
        for (int64_t j = 0; j < t; ++j) {
          const int64_t si = w * t + i, sj = w * t + j;
          const bool other_region = label[si] != label[sj];
          const bool pad_key = l.source[sj] < 0 && i != j;
          if (other_region || pad_key) l.mask[(w * t + i) * t + j] = kMasked;
        }
  }
  return l;
}

Tensor to_tokens(const Tensor& x) {
  require(x.rank() == 3, "to_tokens expects [C,H,W], got " + shape_str(x.shape()));
  return reshape(permute(x, {1, 2, 0}), Shape{x.dim(1) * x.dim(2), x.dim(0)});
}

Tensor from_tokens(const Tensor& tokens, int64_t height, int64_t width) {
  require(tokens.rank() == 2 && tokens.dim(0) == height * width,
          "from_tokens: " + shape_str(tokens.shape()) + " is not [H*W, C]");
  return permute(reshape(tokens, Shape{height, width, tokens.dim(1)}), {2, 0, 1});
}

Tensor partition_tokens(const Tensor& tokens, const WindowLayout& layout) {
  require(tokens.rank() == 2 && tokens.dim(0) == layout.height * layout.width,
          "partition_tokens: token count does not match layout");
  const int64_t c = tokens.dim(1);
  const int64_t slots = static_cast<int64_t>(layout.source.size());
  std::vector<int64_t> index(static_cast<size_t>(slots * c));
  for (int64_t s = 0; s < slots; ++s) {
    const int64_t src = layout.source[s];
    for (int64_t ch = 0; ch < c; ++ch) index[s * c + ch] = src < 0 ? -1 : src * c + ch;
  }
  return gather(tokens, std::move(index), Shape{layout.num_windows(), layout.tokens_per_window(), c});
}

Tensor reverse_tokens(const Tensor& windows, const WindowLayout& layout) {
  require(windows.rank() == 3 && windows.dim(0) == layout.num_windows() &&
              windows.dim(1) == layout.tokens_per_window(),
          "reverse_tokens: " + shape_str(windows.shape()) + " does not match layout");
  const int64_t c = windows.dim(2);
  const int64_t n = layout.height * layout.width;
  std::vector<int64_t> index(static_cast<size_t>(n * c));
  for (int64_t p = 0; p < n; ++p)
    for (int64_t ch = 0; ch < c; ++ch) index[p * c + ch] = layout.slot_of[p] * c + ch;
  return gather(windows, std::move(index), Shape{n, c});
}

WindowGrid window_partition(const Tensor& x, int64_t window, int64_t shift) {
  require(x.rank() == 3, "window_partition expects [C,H,W], got " + shape_str(x.shape()));
  WindowGrid g;
  g.layout = WindowLayout::make(x.dim(1), x.dim(2), window, shift);
  g.windows = partition_tokens(to_tokens(x), g.layout);
  return g;
}

Tensor window_reverse(const WindowGrid& grid) {
  return from_tokens(reverse_tokens(grid.windows, grid.layout), grid.layout.height, grid.layout.width);
}

namespace {

struct CoreDims {
  int64_t windows, tokens, channels, heads, head_dim;
};

CoreDims core_dims(const Tensor& q, const Tensor& k, int64_t heads) {
  require(q.rank() == 3 && q.shape() == k.shape(),
          "attention core expects matching [W,T,C] q/k, got " + shape_str(q.shape()) + " and " +
              shape_str(k.shape()));
  require(heads >= 1 && q.dim(2) % heads == 0, "heads must divide the channel count");
  return {q.dim(0), q.dim(1), q.dim(2), heads, q.dim(2) / heads};
}

// Softmax weights for every (window, head, query), written to probs.
void compute_weights(const CoreDims& d, const double* q, const double* k, double scale, const double* bias,
                     const double* mask, double* probs) {
  const int64_t t = d.tokens, c = d.channels, hd = d.head_dim;
  for (int64_t w = 0; w < d.windows; ++w) {
    const double* qw = q + w * t * c;
    const double* kw = k + w * t * c;
    for (int64_t h = 0; h < d.heads; ++h) {
      double* pw = probs + (w * d.heads + h) * t * t;
      for (int64_t i = 0; i < t; ++i) {
        double* row = pw + i * t;
        const double* qi = qw + i * c + h * hd;
        double mx = -std::numeric_limits<double>::infinity();
        for (int64_t j = 0; j < t; ++j) {
          const double* kj = kw + j * c + h * hd;
          double s = 0.0;
          for (int64_t e = 0; e < hd; ++e) s += qi[e] * kj[e];
          s *= scale;
          if (bias) s += bias[(h * t + i) * t + j];
          if (mask) s += mask[(w * t + i) * t + j];
          row[j] = s;
          mx = std::max(mx, s);
        }
        if (!(mx > -std::numeric_limits<double>::infinity()))
          fail(ErrorKind::kNumeric, "attention: every key masked for a query");
        double total = 0.0;
        for (int64_t j = 0; j < t; ++j) {
          row[j] = std::exp(row[j] - mx);
          total += row[j];
        }
        for (int64_t j = 0; j < t; ++j) row[j] /= total;
      }
    }
  }
}

void check_bias_mask(const CoreDims& d, const Tensor& bias, const std::vector<double>* mask) {
  if (bias.defined())
    require(bias.shape() == Shape{d.heads, d.tokens, d.tokens}, "attention bias must be [heads,T,T]");
  if (mask)
    require(static_cast<int64_t>(mask->size()) == d.windows * d.tokens * d.tokens,
            "attention mask must be [W,T,T]");
}

}  // namespace

std::vector<double> attention_weights(const Tensor& q, const Tensor& k, int64_t heads, double scale,
                                      const Tensor& bias, const std::vector<double>* mask) {
  const CoreDims d = core_dims(q, k, heads);
  check_bias_mask(d, bias, mask);
  std::vector<double> probs(static_cast<size_t>(d.windows * d.heads * d.tokens * d.tokens));
  compute_weights(d, q.values().data(), k.values().data(), scale,
                  bias.defined() ? bias.values().data() : nullptr, mask ? mask->data() : nullptr,
                  probs.data());
  return probs;
}

Tensor windowed_attention_core(const Tensor& q, const Tensor& k, const Tensor& v, int64_t heads,
                               double scale, const Tensor& bias, const std::vector<double>* mask) {
  const CoreDims d = core_dims(q, k, heads);
  require(v.shape() == q.shape(), "attention core: v shape differs from q");
  check_bias_mask(d, bias, mask);
  std::vector<double> probs = attention_weights(q, k, heads, scale, bias, mask);
  const int64_t t = d.tokens, c = d.channels, hd = d.head_dim;
  const double* pv = v.values().data();
  std::vector<double> out(static_cast<size_t>(q.numel()), 0.0);
  for (int64_t w = 0; w < d.windows; ++w)
    for (int64_t h = 0; h < d.heads; ++h) {
      const double* pw = probs.data() + (w * d.heads + h) * t * t;
      for (int64_t i = 0; i < t; ++i) {
        double* oi = out.data() + (w * t + i) * c + h * hd;
        for (int64_t j = 0; j < t; ++j) {
          const double p = pw[i * t + j];
          if (p == 0.0) continue;
          const double* vj = pv + (w * t + j) * c + h * hd;
          for (int64_t e = 0; e < hd; ++e) oi[e] += p * vj[e];
        }
      }
    }
  std::vector<Tensor> inputs{q, k, v};
  const bool has_bias = bias.defined();
  if (has_bias) inputs.push_back(bias);
  return make_result(
      "window_attention", q.shape(), std::move(out), inputs,
      [d, scale, has_bias, probs = std::move(probs)](Node& self) {
        const int64_t t = d.tokens, c = d.channels, hd = d.head_dim;
        const double* dy = self.grad.data();
        const double* q = self.inputs[0]->data.data();
        const double* k = self.inputs[1]->data.data();
        const double* v = self.inputs[2]->data.data();
        double* gq = input_grad(self, 0);
        double* gk = input_grad(self, 1);
        double* gv = input_grad(self, 2);
        double* gb = has_bias ? input_grad(self, 3) : nullptr;
        std::vector<double> dp(static_cast<size_t>(t * t));
        for (int64_t w = 0; w < d.windows; ++w)
          for (int64_t h = 0; h < d.heads; ++h) {
            const double* pw = probs.data() + (w * d.heads + h) * t * t;
            for (int64_t i = 0; i < t; ++i) {
              const double* dyi = dy + (w * t + i) * c + h * hd;
              for (int64_t j = 0; j < t; ++j) {
                const double* vj = v + (w * t + j) * c + h * hd;
                double s = 0.0;
                for (int64_t e = 0; e < hd; ++e) s += dyi[e] * vj[e];
                dp[i * t + j] = s;
                if (gv) {
                  const double p = pw[i * t + j];
                  double* gvj = gv + (w * t + j) * c + h * hd;
                  for (int64_t e = 0; e < hd; ++e) gvj[e] += p * dyi[e];
                }
              }
            }
            // dS = P * (dP - rowsum(P * dP))
            for (int64_t i = 0; i < t; ++i) {
              double dot = 0.0;
              for (int64_t j = 0; j < t; ++j) dot += pw[i * t + j] * dp[i * t + j];
              for (int64_t j = 0; j < t; ++j) dp[i * t + j] = pw[i * t + j] * (dp[i * t + j] - dot);
            }
            if (gb)
              for (int64_t i = 0; i < t * t; ++i) gb[h * t * t + i] += dp[i];
            for (int64_t i = 0; i < t; ++i)
              for (int64_t j = 0; j < t; ++j) {
                const double ds = dp[i * t + j] * scale;
                if (ds == 0.0) continue;
                if (gq) {
                  const double* kj = k + (w * t + j) * c + h * hd;
                  double* gqi = gq + (w * t + i) * c + h * hd;
                  for (int64_t e = 0; e < hd; ++e) gqi[e] += ds * kj[e];
                }
                if (gk) {
                  const double* qi = q + (w * t + i) * c + h * hd;
                  double* gkj = gk + (w * t + j) * c + h * hd;
                  for (int64_t e = 0; e < hd; ++e) gkj[e] += ds * qi[e];
                }
              }
          }
      });
}

WindowAttentionParams WindowAttentionParams::create(ParameterStore& store, const std::string& name,
                                                    int64_t channels, int64_t heads, int64_t window,
                                                    bool relative_bias, bool with_bias) {
  require(heads >= 1 && channels % heads == 0,
          name + ": heads (" + std::to_string(heads) + ") must divide channels (" +
              std::to_string(channels) + ")");
  WindowAttentionParams p;
  p.heads = heads;
  p.window = window;
  p.theta = Linear::create(store, name + ".theta", channels, channels, with_bias);
  p.phi = Linear::create(store, name + ".phi", channels, channels, with_bias);
  p.g = Linear::create(store, name + ".g", channels, channels, with_bias);
  p.z = Linear::create(store, name + ".z", channels, channels, with_bias);
  if (relative_bias) {
    const int64_t span = 2 * window - 1;
    p.relative_position_bias =
        store.create(name + ".relative_position_bias", Shape{span * span, heads}, Init::normal(0.02));
  }
  return p;
}

double WindowAttentionParams::logit_scale() const {
  return 1.0 / std::sqrt(static_cast<double>(channels() / heads));
}

Tensor WindowAttentionParams::bias_for_window() const {
  if (!relative_position_bias.defined()) return Tensor();
  const int64_t m = window, t = m * m, span = 2 * m - 1;
  std::vector<int64_t> index(static_cast<size_t>(heads * t * t));
  for (int64_t h = 0; h < heads; ++h)
    for (int64_t i = 0; i < t; ++i)
      for (int64_t j = 0; j < t; ++j) {
        const int64_t dy = i / m - j / m + m - 1;
        const int64_t dx = i % m - j % m + m - 1;
        index[(h * t + i) * t + j] = (dy * span + dx) * heads + h;
      }
  return gather(relative_position_bias, std::move(index), Shape{heads, t, t});
}

WindowGrid window_attention(const WindowGrid& grid, const WindowAttentionParams& p, bool residual) {
  const Tensor& x = grid.windows;
  require(x.rank() == 3 && x.dim(2) == p.channels(),
          "window_attention: windows " + shape_str(x.shape()) + " do not match params");
  require(grid.layout.window == p.window || !p.relative_position_bias.defined(),
          "window_attention: relative bias table built for a different window size");
  const int64_t nw = x.dim(0), t = x.dim(1), c = x.dim(2);
  const Tensor rows = reshape(x, Shape{nw * t, c});
  const Tensor q = reshape(p.theta(rows), x.shape());
  const Tensor k = reshape(p.phi(rows), x.shape());
  const Tensor v = reshape(p.g(rows), x.shape());
  const Tensor y = windowed_attention_core(q, k, v, p.heads, p.logit_scale(), p.bias_for_window(),
                                           grid.layout.has_mask ? &grid.layout.mask : nullptr);
  Tensor z = p.z(reshape(y, Shape{nw * t, c}));
  if (residual) z = add(z, rows);
  return WindowGrid{reshape(z, x.shape()), grid.layout};
}

std::vector<double> window_attention_weights(const WindowGrid& grid, const WindowAttentionParams& p) {
  const Tensor& x = grid.windows;
  const int64_t nw = x.dim(0), t = x.dim(1), c = x.dim(2);
  const Tensor rows = reshape(x, Shape{nw * t, c});
  return attention_weights(reshape(p.theta(rows), x.shape()), reshape(p.phi(rows), x.shape()), p.heads,
                           p.logit_scale(), p.bias_for_window(),
                           grid.layout.has_mask ? &grid.layout.mask : nullptr);
}

Tensor global_attention(const Tensor& x, const WindowAttentionParams& p) {
  require(x.rank() == 3 && x.dim(0) == p.channels(),
          "global_attention: input " + shape_str(x.shape()) + " does not match params");
  const int64_t c = x.dim(0), n = x.dim(1) * x.dim(2), heads = p.heads, d = c / heads;
  const Tensor tokens = to_tokens(x);
  auto split_heads = [&](const Tensor& t) { return permute(reshape(t, Shape{n, heads, d}), {1, 0, 2}); };
  const Tensor q = split_heads(p.theta(tokens));
  const Tensor k = split_heads(p.phi(tokens));
  const Tensor v = split_heads(p.g(tokens));
  std::vector<Tensor> outputs;
  for (int64_t h = 0; h < heads; ++h) {
    const Tensor qh = reshape(slice(q, h, h + 1), Shape{n, d});
    const Tensor kh = reshape(slice(k, h, h + 1), Shape{n, d});
    const Tensor vh = reshape(slice(v, h, h + 1), Shape{n, d});
    const Tensor logits = scale(matmul(qh, permute(kh, {1, 0})), p.logit_scale());
    outputs.push_back(reshape(matmul(softmax(logits, 1), vh), Shape{1, n, d}));
  }
  const Tensor y = reshape(permute(concat(outputs), {1, 0, 2}), Shape{n, c});
  return from_tokens(add(p.z(y), tokens), x.dim(1), x.dim(2));
}

ResidualBlock ResidualBlock::create(ParameterStore& store, const std::string& name, int64_t channels) {
  const int64_t half = std::max<int64_t>(channels / 2, 1);
  ResidualBlock rb;
  rb.reduce = Conv2d::create(store, name + ".reduce", channels, half, 1, 1);
  rb.spatial = Conv2d::create(store, name + ".spatial", half, half, 3, 1);
  rb.expand = Conv2d::create(store, name + ".expand", half, channels, 1, 1);
  return rb;
}

Tensor ResidualBlock::operator()(const Tensor& x) const {
  return add(x, expand(gelu(spatial(gelu(reduce(x))))));
}

Wam Wam::create(ParameterStore& store, const std::string& name, int64_t channels, int64_t heads,
                int64_t window, AttentionKind kind, int64_t residual_blocks) {
  Wam m;
  m.kind = kind;
  m.attention = WindowAttentionParams::create(store, name + ".attention", channels, heads, window,
                                              /*relative_bias=*/false, /*with_bias=*/false);
  for (int64_t i = 0; i < residual_blocks; ++i)
    m.trunk.push_back(ResidualBlock::create(store, name + ".trunk" + std::to_string(i), channels));
  m.trunk_out = Conv2d::create(store, name + ".trunk_out", channels, channels, 1, 1, false, true);
  for (int64_t i = 0; i < residual_blocks; ++i)
    m.mask_blocks.push_back(ResidualBlock::create(store, name + ".mask" + std::to_string(i), channels));
  m.mask_out = Conv2d::create(store, name + ".mask_out", channels, channels, 1, 1, false, true);
  return m;
}

Tensor Wam::mask(const Tensor& x) const {
  Tensor a = kind == AttentionKind::kWindow
                 ? window_reverse(window_attention(window_partition(x, attention.window, 0), attention))
                 : global_attention(x, attention);
  for (const ResidualBlock& rb : mask_blocks) a = rb(a);
  return sigmoid(mask_out(a));
}

Tensor Wam::operator()(const Tensor& x) const {
  Tensor t = x;
  for (const ResidualBlock& rb : trunk) t = rb(t);
  return add(x, mul(trunk_out(t), mask(x)));
}

SwinBlock SwinBlock::create(ParameterStore& store, const std::string& name, int64_t channels, int64_t heads,
                            int64_t window, int64_t shift, double mlp_ratio) {
  SwinBlock b;
  b.shift = shift;
  b.norm1 = LayerNorm::create(store, name + ".norm1", channels);
  b.attention = WindowAttentionParams::create(store, name + ".attention", channels, heads, window,
                                              /*relative_bias=*/true, /*with_bias=*/true);
  b.norm2 = LayerNorm::create(store, name + ".norm2", channels);
  const auto hidden = static_cast<int64_t>(std::lround(static_cast<double>(channels) * mlp_ratio));
  b.fc1 = Linear::create(store, name + ".fc1", channels, hidden);
  b.fc2 = Linear::create(store, name + ".fc2", hidden, channels);
  return b;
}

int64_t SwinBlock::effective_shift(int64_t height, int64_t width) const {
  return std::min(height, width) <= attention.window ? 0 : shift;
}

Tensor SwinBlock::operator()(const Tensor& tokens, int64_t height, int64_t width) const {
  const WindowLayout layout =
      WindowLayout::make(height, width, attention.window, effective_shift(height, width));
  const Tensor windows = partition_tokens(norm1(tokens), layout);
  const WindowGrid attended = window_attention(WindowGrid{windows, layout}, attention, false);
  const Tensor x = add(tokens, reverse_tokens(attended.windows, layout));
  return add(x, fc2(gelu(fc1(norm2(x)))));
}

}  // namespace wincodec
