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


#include "wincodec/nn.hpp"

#include <cmath>
#include <cstring>

#include "autograd.hpp"
#include "kernels.hpp"
#include "wincodec/error.hpp"
#include "wincodec/ops.hpp"

namespace wincodec {

using detail::input_grad;
using detail::make_result;
using detail::Node;

namespace {

// Patch geometry of a strided convolution from a [c,h,w] map to [oh,ow].
struct Geometry {
  int64_t c, h, w, kh, kw, stride, pad, oh, ow;
  int64_t rows() const { return c * kh * kw; }
  int64_t cols() const { return oh * ow; }
  bool is_pointwise() const { return kh == 1 && kw == 1 && stride == 1 && pad == 0; }
};

void im2col(const Geometry& g, const double* x, double* cols) {
  for (int64_t ci = 0; ci < g.c; ++ci)
    for (int64_t ky = 0; ky < g.kh; ++ky)
      for (int64_t kx = 0; kx < g.kw; ++kx) {
        double* dst = cols + ((ci * g.kh + ky) * g.kw + kx) * g.cols();
        for (int64_t oy = 0; oy < g.oh; ++oy) {
          const int64_t iy = oy * g.stride - g.pad + ky;
          double* drow = dst + oy * g.ow;
          if (iy < 0 || iy >= g.h) {
            std::memset(drow, 0, sizeof(double) * static_cast<size_t>(g.ow));
            continue;
          }
          const double* srow = x + (ci * g.h + iy) * g.w;
          for (int64_t ox = 0; ox < g.ow; ++ox) {
            const int64_t ix = ox * g.stride - g.pad + kx;
            drow[ox] = (ix >= 0 && ix < g.w) ? srow[ix] : 0.0;
          }
        }
      }
}

// Scatter-add of im2col's layout back into x.
void col2im(const Geometry& g, const double* cols, double* x) {
  for (int64_t ci = 0; ci < g.c; ++ci)
    for (int64_t ky = 0; ky < g.kh; ++ky)
      for (int64_t kx = 0; kx < g.kw; ++kx) {
        const double* src = cols + ((ci * g.kh + ky) * g.kw + kx) * g.cols();
        for (int64_t oy = 0; oy < g.oh; ++oy) {
          const int64_t iy = oy * g.stride - g.pad + ky;
          if (iy < 0 || iy >= g.h) continue;
          double* xrow = x + (ci * g.h + iy) * g.w;
          const double* srow = src + oy * g.ow;
          for (int64_t ox = 0; ox < g.ow; ++ox) {
            const int64_t ix = ox * g.stride - g.pad + kx;
            if (ix >= 0 && ix < g.w) xrow[ix] += srow[ox];
          }
        }
      }
}

void add_bias_rows(int64_t channels, int64_t plane, const double* bias, double* out) {
  for (int64_t c = 0; c < channels; ++c)
    for (int64_t i = 0; i < plane; ++i) out[c * plane + i] += bias[c];
}

void bias_grad(int64_t channels, int64_t plane, const double* g, double* gb) {
  for (int64_t c = 0; c < channels; ++c) {
    double s = 0.0;
    for (int64_t i = 0; i < plane; ++i) s += g[c * plane + i];
    gb[c] += s;
  }
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride, int padding) {
  require(x.rank() == 3 && weight.rank() == 4,
          "conv2d expects x [C,H,W] and weight [O,C,kh,kw], got " + shape_str(x.shape()) + " and " +
              shape_str(weight.shape()));
  require(weight.dim(1) == x.dim(0), "conv2d channel mismatch: input " + shape_str(x.shape()) +
                                         ", weight " + shape_str(weight.shape()));
  require(stride >= 1 && padding >= 0, "conv2d: invalid stride/padding");
  Geometry g{x.dim(0), x.dim(1), x.dim(2), weight.dim(2), weight.dim(3), stride, padding, 0, 0};
  require(g.h + 2 * g.pad >= g.kh && g.w + 2 * g.pad >= g.kw,
          "conv2d: kernel larger than padded input " + shape_str(x.shape()));
  g.oh = (g.h + 2 * g.pad - g.kh) / g.stride + 1;
  g.ow = (g.w + 2 * g.pad - g.kw) / g.stride + 1;
  const int64_t out_c = weight.dim(0);
  const bool has_bias = bias.defined();
  if (has_bias) require(bias.rank() == 1 && bias.dim(0) == out_c, "conv2d: bias shape mismatch");

  std::vector<double> cols;
  const double* colp = x.values().data();
  if (!g.is_pointwise()) {
    cols.resize(static_cast<size_t>(g.rows() * g.cols()));
    im2col(g, x.values().data(), cols.data());
    colp = cols.data();
  }
  std::vector<double> out(static_cast<size_t>(out_c * g.cols()), 0.0);
  kernels::gemm_nn(out_c, g.cols(), g.rows(), weight.values().data(), colp, out.data());
  if (has_bias) add_bias_rows(out_c, g.cols(), bias.values().data(), out.data());

  std::vector<Tensor> inputs{x, weight};
  if (has_bias) inputs.push_back(bias);
  return make_result(
      "conv2d", Shape{out_c, g.oh, g.ow}, std::move(out), inputs,
      [g, out_c, has_bias, cols = std::move(cols)](Node& self) {
        const double* dy = self.grad.data();
        const double* colp = g.is_pointwise() ? self.inputs[0]->data.data() : cols.data();
        if (double* gw = input_grad(self, 1)) kernels::gemm_nt(out_c, g.rows(), g.cols(), dy, colp, gw);
        if (has_bias)
          if (double* gb = input_grad(self, 2)) bias_grad(out_c, g.cols(), dy, gb);
        if (double* gx = input_grad(self, 0)) {
          const double* w = self.inputs[1]->data.data();
          if (g.is_pointwise()) {
            kernels::gemm_tn(g.rows(), g.cols(), out_c, w, dy, gx);
          } else {
            std::vector<double> dcols(static_cast<size_t>(g.rows() * g.cols()), 0.0);
            kernels::gemm_tn(g.rows(), g.cols(), out_c, w, dy, dcols.data());
            col2im(g, dcols.data(), gx);
          }
        }
      });
}

Tensor conv_transpose2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride,
                        int padding, int output_padding) {
  require(x.rank() == 3 && weight.rank() == 4,
          "conv_transpose2d expects x [C,H,W] and weight [C,O,kh,kw], got " + shape_str(x.shape()) +
              " and " + shape_str(weight.shape()));
  require(weight.dim(0) == x.dim(0), "conv_transpose2d channel mismatch: input " +
                                         shape_str(x.shape()) + ", weight " + shape_str(weight.shape()));
  require(stride >= 1 && padding >= 0 && output_padding >= 0 && output_padding < stride,
          "conv_transpose2d: invalid stride/padding/output_padding");
  const int64_t in_c = x.dim(0), h = x.dim(1), w = x.dim(2);
  const int64_t out_c = weight.dim(1), kh = weight.dim(2), kw = weight.dim(3);
  const int64_t oh = (h - 1) * stride - 2 * padding + kh + output_padding;
  const int64_t ow = (w - 1) * stride - 2 * padding + kw + output_padding;
  require(oh > 0 && ow > 0, "conv_transpose2d: empty output");
  // The forward conv that this op is the adjoint of maps [out_c,oh,ow] -> [in_c,h,w].
  const Geometry g{out_c, oh, ow, kh, kw, stride, padding, h, w};
  const bool has_bias = bias.defined();
  if (has_bias) require(bias.rank() == 1 && bias.dim(0) == out_c, "conv_transpose2d: bias shape mismatch");

  std::vector<double> cols(static_cast<size_t>(g.rows() * g.cols()), 0.0);
  kernels::gemm_tn(g.rows(), g.cols(), in_c, weight.values().data(), x.values().data(), cols.data());
  std::vector<double> out(static_cast<size_t>(out_c * oh * ow), 0.0);
  col2im(g, cols.data(), out.data());
  if (has_bias) add_bias_rows(out_c, oh * ow, bias.values().data(), out.data());

  std::vector<Tensor> inputs{x, weight};
  if (has_bias) inputs.push_back(bias);
  return make_result("conv_transpose2d", Shape{out_c, oh, ow}, std::move(out), inputs,
                     [g, in_c, out_c, has_bias](Node& self) {
                       const double* dy = self.grad.data();
                       if (has_bias)
                         if (double* gb = input_grad(self, 2)) bias_grad(out_c, g.h * g.w, dy, gb);
                       double* gx = input_grad(self, 0);
                       double* gw = input_grad(self, 1);
                       if (!gx && !gw) return;
                       std::vector<double> dcols(static_cast<size_t>(g.rows() * g.cols()));
                       im2col(g, dy, dcols.data());
                       if (gx)
                         kernels::gemm_nn(in_c, g.cols(), g.rows(), self.inputs[1]->data.data(),
                                          dcols.data(), gx);
                       if (gw)
                         kernels::gemm_nt(in_c, g.rows(), g.cols(), self.inputs[0]->data.data(),
                                          dcols.data(), gw);
                     });
}

Conv2d Conv2d::create(ParameterStore& store, const std::string& name, int64_t in, int64_t out,
                      int kernel, int stride, bool transposed, bool zero_init) {
  Conv2d c;
  c.stride = stride;
  c.padding = kernel / 2;
  c.transposed = transposed;
  c.output_padding = transposed ? stride - 1 : 0;
  const Init init = zero_init ? Init::zeros() : Init::fan_in(in * kernel * kernel);
  Shape shape = transposed ? Shape{in, out, kernel, kernel} : Shape{out, in, kernel, kernel};
  c.weight = store.create(name + ".weight", std::move(shape), init);
  c.bias = store.create(name + ".bias", Shape{out}, Init::zeros());
  return c;
}

Tensor Conv2d::operator()(const Tensor& x) const {
  return transposed ? conv_transpose2d(x, weight, bias, stride, padding, output_padding)
                    : conv2d(x, weight, bias, stride, padding);
}

Linear Linear::create(ParameterStore& store, const std::string& name, int64_t in, int64_t out,
                      bool with_bias, bool zero_init) {
  Linear l;
  l.weight = store.create(name + ".weight", Shape{in, out}, zero_init ? Init::zeros() : Init::fan_in(in));
  if (with_bias) l.bias = store.create(name + ".bias", Shape{out}, Init::zeros());
  return l;
}

Tensor Linear::operator()(const Tensor& x) const {
  Tensor y = matmul(x, weight);
  return bias.defined() ? add(y, bias) : y;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  require(x.rank() >= 1, "layer_norm on a scalar");
  const int64_t c = x.dim(-1);
  require(c >= 1 && gain.numel() == c && bias.numel() == c,
          "layer_norm: gain/bias do not match channel dim of " + shape_str(x.shape()));
  const int64_t rows = x.numel() / c;
  const double* px = x.values().data();
  const double* pg = gain.values().data();
  const double* pb = bias.values().data();
  std::vector<double> out(static_cast<size_t>(x.numel()));
  std::vector<double> xhat(static_cast<size_t>(x.numel()));
  std::vector<double> rstd(static_cast<size_t>(rows));
  for (int64_t r = 0; r < rows; ++r) {
    const double* xr = px + r * c;
    double m = 0.0;
    for (int64_t j = 0; j < c; ++j) m += xr[j];
    m /= static_cast<double>(c);
    double v = 0.0;
    for (int64_t j = 0; j < c; ++j) v += (xr[j] - m) * (xr[j] - m);
    v /= static_cast<double>(c);
    const double rs = 1.0 / std::sqrt(v + eps);
    rstd[r] = rs;
    for (int64_t j = 0; j < c; ++j) {
      const double xh = (xr[j] - m) * rs;
      xhat[r * c + j] = xh;
      out[r * c + j] = xh * pg[j] + pb[j];
    }
  }
  return make_result("layer_norm", x.shape(), std::move(out), {&x, &gain, &bias},
                     [rows, c, xhat = std::move(xhat), rstd = std::move(rstd)](Node& self) {
                       const double* dy = self.grad.data();
                       const double* pg = self.inputs[1]->data.data();
                       if (double* gg = input_grad(self, 1))
                         for (int64_t r = 0; r < rows; ++r)
                           for (int64_t j = 0; j < c; ++j) gg[j] += dy[r * c + j] * xhat[r * c + j];
                       if (double* gb = input_grad(self, 2))
                         for (int64_t r = 0; r < rows; ++r)
                           for (int64_t j = 0; j < c; ++j) gb[j] += dy[r * c + j];
                       double* gx = input_grad(self, 0);
                       if (!gx) return;
                       const double inv_c = 1.0 / static_cast<double>(c);
                       for (int64_t r = 0; r < rows; ++r) {
                         double s1 = 0.0, s2 = 0.0;
                         for (int64_t j = 0; j < c; ++j) {
                           const double d = dy[r * c + j] * pg[j];
                           s1 += d;
                           s2 += d * xhat[r * c + j];
                         }
                         s1 *= inv_c;
                         s2 *= inv_c;
                         for (int64_t j = 0; j < c; ++j) {
                           const double d = dy[r * c + j] * pg[j];
                           gx[r * c + j] += rstd[r] * (d - s1 - xhat[r * c + j] * s2);
                         }
                       }
                     });
}

LayerNorm LayerNorm::create(ParameterStore& store, const std::string& name, int64_t channels) {
  LayerNorm n;
  n.gain = store.create(name + ".gain", Shape{channels}, Init::constant(1.0));
  n.bias = store.create(name + ".bias", Shape{channels}, Init::zeros());
  return n;
}

Tensor gdn(const Tensor& x, const Tensor& beta, const Tensor& gamma, bool inverse) {
  require(x.rank() == 3, "gdn expects [C,H,W], got " + shape_str(x.shape()));
  const int64_t c = x.dim(0);
  require(beta.numel() == c && gamma.rank() == 2 && gamma.dim(0) == c && gamma.dim(1) == c,
          "gdn: parameter shapes do not match " + shape_str(x.shape()));
  for (double b : beta.values())
    if (!(b > 0)) fail(ErrorKind::kNumeric, "gdn: non-positive beta");
  const Tensor flat = reshape(x, Shape{c, x.dim(1) * x.dim(2)});
  const Tensor norm = sqrt(add_channel(matmul(gamma, square(flat)), beta));
  const Tensor y = inverse ? mul(flat, norm) : mul(flat, reciprocal(norm));
  return reshape(y, x.shape());
}

Gdn Gdn::create(ParameterStore& store, const std::string& name, int64_t channels, bool inverse) {
  Gdn g;
  g.inverse = inverse;
  std::vector<double> beta(static_cast<size_t>(channels), std::sqrt(1.0 - kBetaFloor));
  std::vector<double> gamma(static_cast<size_t>(channels * channels), std::sqrt(1e-4));
  for (int64_t i = 0; i < channels; ++i) gamma[i * channels + i] = std::sqrt(0.1);
  g.beta_param = store.create(name + ".beta", Shape{channels}, Init::from(std::move(beta)));
  g.gamma_param = store.create(name + ".gamma", Shape{channels, channels}, Init::from(std::move(gamma)));
  return g;
}

Tensor Gdn::beta() const { return add_scalar(square(beta_param), kBetaFloor); }
Tensor Gdn::gamma() const { return square(gamma_param); }

void Gdn::set(const std::vector<double>& beta_values, const std::vector<double>& gamma_values) {
  require(static_cast<int64_t>(beta_values.size()) == beta_param.numel() &&
              static_cast<int64_t>(gamma_values.size()) == gamma_param.numel(),
          "Gdn::set: size mismatch");
  auto b = beta_param.mutable_values();
  for (size_t i = 0; i < beta_values.size(); ++i) {
    require(beta_values[i] > kBetaFloor, "Gdn::set: beta must exceed the floor");
    b[i] = std::sqrt(beta_values[i] - kBetaFloor);
  }
  auto g = gamma_param.mutable_values();
  for (size_t i = 0; i < gamma_values.size(); ++i) {
    require(gamma_values[i] >= 0, "Gdn::set: gamma must be non-negative");
    g[i] = std::sqrt(gamma_values[i]);
  }
}

}  // namespace wincodec
