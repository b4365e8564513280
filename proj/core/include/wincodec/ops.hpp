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
#include <span>
#include <vector>

#include "wincodec/tensor.hpp"

// Differentiable primitives. Binary elementwise ops accept identical shapes,
// a scalar (numel 1) on either side, or a right operand whose shape equals
// the trailing dims of the left operand (repeated over the leading dims).
namespace wincodec {

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }

Tensor add_scalar(const Tensor& a, double s);
Tensor scale(const Tensor& a, double s);
Tensor neg(const Tensor& a);

Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor sqrt(const Tensor& a);
Tensor reciprocal(const Tensor& a);
Tensor square(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor softplus(const Tensor& a);
// tanh approximation: 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3))).
Tensor gelu(const Tensor& a);
// Forward round-half-away-from-zero, backward identity.
Tensor round_ste(const Tensor& a);
// x^p for x > 0 (inputs are floored at 1e-12 first).
Tensor pow_scalar(const Tensor& a, double p);
// Gradient is zero outside [lo, hi].
Tensor clamp(const Tensor& a, double lo, double hi);
// max(a, bound); gradient passes where a >= bound or where it would push a
// upward.
Tensor lower_bound(const Tensor& a, double bound);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

// [m,k] x [k,n] -> [m,n].
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor softmax(const Tensor& a, int64_t axis);

Tensor reshape(const Tensor& a, Shape shape);
Tensor permute(const Tensor& a, const std::vector<int>& order);
// out[i] = index[i] < 0 ? 0 : a[index[i]] over flat storage.
Tensor gather(const Tensor& a, std::vector<int64_t> index, Shape out_shape);
// Along the leading axis.
Tensor concat(std::span<const Tensor> parts);
Tensor slice(const Tensor& a, int64_t begin, int64_t end);

// x: [C, ...], b: [C]; adds b[c] to every element of channel c.
Tensor add_channel(const Tensor& x, const Tensor& b);

// Constant tensor (no grad) helpers.
Tensor full_like(const Tensor& a, double value);

}  // namespace wincodec
