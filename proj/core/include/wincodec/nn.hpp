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

#include "wincodec/params.hpp"
#include "wincodec/tensor.hpp"

namespace wincodec {

// Cross-correlation of x [C_in,H,W] with weight [C_out,C_in,kh,kw].
// Output size: (H + 2*padding - kh) / stride + 1. `bias` may be undefined.
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride, int padding);

// Adjoint of conv2d: weight is [C_in,C_out,kh,kw] and the output size is
// (H - 1) * stride - 2 * padding + kh + output_padding.
Tensor conv_transpose2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride,
                        int padding, int output_padding);

struct Conv2d {
  Tensor weight;
  Tensor bias;
  int stride = 1;
  int padding = 0;
  int output_padding = 0;
  bool transposed = false;

  static Conv2d create(ParameterStore& store, const std::string& name, int64_t in, int64_t out,
                       int kernel, int stride, bool transposed = false, bool zero_init = false);
  Tensor operator()(const Tensor& x) const;
};

// y = x W + b over rows of x [T, in]; weight is [in, out].
struct Linear {
  Tensor weight;
  Tensor bias;

  static Linear create(ParameterStore& store, const std::string& name, int64_t in, int64_t out,
                       bool with_bias = true, bool zero_init = false);
  Tensor operator()(const Tensor& x) const;
  int64_t in_features() const { return weight.dim(0); }
  int64_t out_features() const { return weight.dim(1); }
};

// Normalizes over the last dim, then applies per-channel gain and bias.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-5);

struct LayerNorm {
  Tensor gain;
  Tensor bias;
  double eps = 1e-5;

  static LayerNorm create(ParameterStore& store, const std::string& name, int64_t channels);
  Tensor operator()(const Tensor& x) const { return layer_norm(x, gain, bias, eps); }
};

// Generalized divisive normalization over channels of x [C,H,W]:
//   forward: y_i = x_i / sqrt(beta_i + sum_j gamma_ij x_j^2)
//   inverse: y_i = x_i * sqrt(beta_i + sum_j gamma_ij x_j^2)
Tensor gdn(const Tensor& x, const Tensor& beta, const Tensor& gamma, bool inverse);

// beta = beta_param^2 + kBetaFloor and gamma = gamma_param^2 keep both in
// their valid ranges under unconstrained gradient steps.
struct Gdn {
  static constexpr double kBetaFloor = 1e-6;

  Tensor beta_param;   // [C]
  Tensor gamma_param;  // [C, C]
  bool inverse = false;

  static Gdn create(ParameterStore& store, const std::string& name, int64_t channels, bool inverse);
  Tensor beta() const;
  Tensor gamma() const;
  // Sets the underlying parameters so that beta()/gamma() reproduce the
  // given values (beta > floor, gamma >= 0).
  void set(const std::vector<double>& beta_values, const std::vector<double>& gamma_values);
  Tensor operator()(const Tensor& x) const { return gdn(x, beta(), gamma(), inverse); }
};

}  // namespace wincodec
