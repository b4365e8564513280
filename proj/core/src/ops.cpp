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


#include "wincodec/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "autograd.hpp"
#include "kernels.hpp"
#include "wincodec/error.hpp"

namespace wincodec {

using detail::input_grad;
using detail::make_result;
using detail::Node;

namespace {

bool is_trailing(const Shape& small, const Shape& big) {
  if (small.size() > big.size()) return false;
  return std::equal(small.begin(), small.end(), big.end() - static_cast<std::ptrdiff_t>(small.size()));
}

Shape broadcast_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return a.shape();
  if (b.numel() == 1) return a.shape();
  if (a.numel() == 1) return b.shape();
  if (is_trailing(b.shape(), a.shape())) return a.shape();
  if (is_trailing(a.shape(), b.shape())) return b.shape();
  fail(ErrorKind::kInvalidArgument, std::string(op) + ": shapes " + shape_str(a.shape()) +
                                        " and " + shape_str(b.shape()) + " do not broadcast");
}

// out = f(a, b) with partials da(a, b, out) and db(a, b, out).
template <typename F, typename DA, typename DB>
Tensor binary(const char* op, const Tensor& a, const Tensor& b, F f, DA da, DB db) {
  Shape shape = broadcast_shape(a, b, op);
  const int64_t n = numel_of(shape);
  const int64_t na = a.numel(), nb = b.numel();
  const double* pa = a.values().data();
  const double* pb = b.values().data();
  std::vector<double> out(static_cast<size_t>(n));
  if (na == n && nb == n) {
    for (int64_t i = 0; i < n; ++i) out[i] = f(pa[i], pb[i]);
  } else {
    for (int64_t i = 0; i < n; ++i) out[i] = f(pa[i % na], pb[i % nb]);
  }
  return make_result(op, std::move(shape), std::move(out), {&a, &b}, [n, na, nb, da, db](Node& self) {
    const double* g = self.grad.data();
    const double* xa = self.inputs[0]->data.data();
    const double* xb = self.inputs[1]->data.data();
    const double* y = self.data.data();
    if (double* ga = input_grad(self, 0)) {
      for (int64_t i = 0; i < n; ++i) ga[i % na] += g[i] * da(xa[i % na], xb[i % nb], y[i]);
    }
    if (double* gb = input_grad(self, 1)) {
      for (int64_t i = 0; i < n; ++i) gb[i % nb] += g[i] * db(xa[i % na], xb[i % nb], y[i]);
    }
  });
}

// out = f(x) with derivative d(x, out).
template <typename F, typename D>
Tensor unary(const char* op, const Tensor& a, F f, D d) {
  const int64_t n = a.numel();
  const double* pa = a.values().data();
  std::vector<double> out(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) out[i] = f(pa[i]);
  return make_result(op, a.shape(), std::move(out), {&a}, [n, d](Node& self) {
    const double* g = self.grad.data();
    const double* x = self.inputs[0]->data.data();
    const double* y = self.data.data();
    double* gx = input_grad(self, 0);
    if (!gx) return;
    for (int64_t i = 0; i < n; ++i) gx[i] += g[i] * d(x[i], y[i]);
  });
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      "add", a, b, [](double x, double y) { return x + y; },
      [](double, double, double) { return 1.0; }, [](double, double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      "sub", a, b, [](double x, double y) { return x - y; },
      [](double, double, double) { return 1.0; }, [](double, double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      "mul", a, b, [](double x, double y) { return x * y; },
      [](double, double y, double) { return y; }, [](double x, double, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return binary(
      "div", a, b, [](double x, double y) { return x / y; },
      [](double, double y, double) { return 1.0 / y; },
      [](double, double y, double out) { return -out / y; });
}

Tensor add_scalar(const Tensor& a, double s) {
  return unary("add_scalar", a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Tensor scale(const Tensor& a, double s) {
  return unary("scale", a, [s](double x) { return x * s; }, [s](double, double) { return s; });
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor exp(const Tensor& a) {
  return unary("exp", a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  return unary("log", a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor tanh(const Tensor& a) {
  return unary("tanh", a, [](double x) { return std::tanh(x); },
               [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      "sigmoid", a,
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor sqrt(const Tensor& a) {
  return unary("sqrt", a, [](double x) { return std::sqrt(x); },
               [](double, double y) { return 0.5 / y; });
}

Tensor reciprocal(const Tensor& a) {
  return unary("reciprocal", a, [](double x) { return 1.0 / x; },
               [](double, double y) { return -y * y; });
}

Tensor square(const Tensor& a) {
  return unary("square", a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Tensor relu(const Tensor& a) {
  return unary("relu", a, [](double x) { return x > 0 ? x : 0.0; },
               [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Tensor softplus(const Tensor& a) {
  return unary(
      "softplus", a, [](double x) { return x > 30 ? x : std::log1p(std::exp(x)); },
      [](double x, double) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      });
}

Tensor gelu(const Tensor& a) {
  return unary(
      "gelu", a,
      [](double x) {
        const double t = std::tanh(kGeluC * (x + kGeluA * x * x * x));
        return 0.5 * x * (1.0 + t);
      },
      [](double x, double) {
        const double u = kGeluC * (x + kGeluA * x * x * x);
        const double t = std::tanh(u);
        const double du = kGeluC * (1.0 + 3.0 * kGeluA * x * x);
        return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
      });
}

Tensor round_ste(const Tensor& a) {
  return unary("round_ste", a, [](double x) { return std::round(x); }, [](double, double) { return 1.0; });
}

Tensor pow_scalar(const Tensor& a, double p) {
  static constexpr double kFloor = 1e-12;
  return unary(
      "pow", a, [p](double x) { return std::pow(std::max(x, kFloor), p); },
      [p](double x, double y) { return x > kFloor ? p * y / x : 0.0; });
}

Tensor clamp(const Tensor& a, double lo, double hi) {
  return unary(
      "clamp", a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Tensor lower_bound(const Tensor& a, double bound) {
  const int64_t n = a.numel();
  const double* pa = a.values().data();
  std::vector<double> out(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) out[i] = std::max(pa[i], bound);
  return make_result("lower_bound", a.shape(), std::move(out), {&a}, [n, bound](Node& self) {
    double* gx = input_grad(self, 0);
    if (!gx) return;
    const double* g = self.grad.data();
    const double* x = self.inputs[0]->data.data();
    // Descent moves x by -g: let it through when that raises x toward the bound.
    for (int64_t i = 0; i < n; ++i)
      if (x[i] >= bound || g[i] < 0) gx[i] += g[i];
  });
}

Tensor sum(const Tensor& a) {
  const int64_t n = a.numel();
  double s = 0.0;
  for (double v : a.values()) s += v;
  return make_result("sum", Shape{}, {s}, {&a}, [n](Node& self) {
    double* gx = input_grad(self, 0);
    if (!gx) return;
    const double g = self.grad[0];
    for (int64_t i = 0; i < n; ++i) gx[i] += g;
  });
}

Tensor mean(const Tensor& a) {
  require(a.numel() > 0, "mean of empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.numel()));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.rank() == 2 && b.rank() == 2, "matmul expects rank-2 operands, got " +
                                              shape_str(a.shape()) + " x " + shape_str(b.shape()));
  const int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  require(b.dim(0) == k, "matmul inner dimension mismatch: " + shape_str(a.shape()) + " x " +
                             shape_str(b.shape()));
  std::vector<double> out(static_cast<size_t>(m * n), 0.0);
  kernels::gemm_nn(m, n, k, a.values().data(), b.values().data(), out.data());
  return make_result("matmul", Shape{m, n}, std::move(out), {&a, &b}, [m, n, k](Node& self) {
    const double* g = self.grad.data();
    if (double* ga = input_grad(self, 0))  // dA = dC B^T
      kernels::gemm_nt(m, k, n, g, self.inputs[1]->data.data(), ga);
    if (double* gb = input_grad(self, 1))  // dB = A^T dC
      kernels::gemm_tn(k, n, m, self.inputs[0]->data.data(), g, gb);
  });
}

Tensor softmax(const Tensor& a, int64_t axis) {
  const int64_t r = a.rank();
  if (axis < 0) axis += r;
  require(axis >= 0 && axis < r, "softmax axis out of range");
  int64_t outer = 1, inner = 1;
  for (int64_t i = 0; i < axis; ++i) outer *= a.dim(i);
  for (int64_t i = axis + 1; i < r; ++i) inner *= a.dim(i);
  const int64_t len = a.dim(axis);
  const double* x = a.values().data();
  std::vector<double> out(static_cast<size_t>(a.numel()));
  for (int64_t o = 0; o < outer; ++o) {
    for (int64_t in = 0; in < inner; ++in) {
      const int64_t base = o * len * inner + in;
      double mx = -INFINITY;
      for (int64_t j = 0; j < len; ++j) {
        const double v = x[base + j * inner];
        if (std::isnan(v)) fail(ErrorKind::kNumeric, "softmax: NaN input");
        mx = std::max(mx, v);
      }
      double s = 0.0;
      for (int64_t j = 0; j < len; ++j) {
        const double e = std::exp(x[base + j * inner] - mx);
        out[base + j * inner] = e;
        s += e;
      }
      for (int64_t j = 0; j < len; ++j) out[base + j * inner] /= s;
    }
  }
  return make_result("softmax", a.shape(), std::move(out), {&a}, [outer, inner, len](Node& self) {
    double* gx = input_grad(self, 0);
    if (!gx) return;
    const double* g = self.grad.data();
    const double* y = self.data.data();
    for (int64_t o = 0; o < outer; ++o) {
      for (int64_t in = 0; in < inner; ++in) {
        const int64_t base = o * len * inner + in;
        double dot = 0.0;
        for (int64_t j = 0; j < len; ++j) dot += g[base + j * inner] * y[base + j * inner];
        for (int64_t j = 0; j < len; ++j) {
          const int64_t idx = base + j * inner;
          gx[idx] += y[idx] * (g[idx] - dot);
        }
      }
    }
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  require(numel_of(shape) == a.numel(),
          "reshape " + shape_str(a.shape()) + " -> " + shape_str(shape) + " changes element count");
  std::vector<double> out(a.values().begin(), a.values().end());
  const int64_t n = a.numel();
  return make_result("reshape", std::move(shape), std::move(out), {&a}, [n](Node& self) {
    double* gx = input_grad(self, 0);
    if (!gx) return;
    const double* g = self.grad.data();
    for (int64_t i = 0; i < n; ++i) gx[i] += g[i];
  });
}

Tensor permute(const Tensor& a, const std::vector<int>& order) {
  const int64_t r = a.rank();
  require(static_cast<int64_t>(order.size()) == r, "permute order has wrong length");
  std::vector<int> seen(static_cast<size_t>(r), 0);
  for (int o : order) {
    require(o >= 0 && o < r && !seen[o], "permute order is not a permutation");
    seen[o] = 1;
  }
  Shape out_shape(static_cast<size_t>(r));
  std::vector<int64_t> in_strides(static_cast<size_t>(r));
  int64_t st = 1;
  for (int64_t i = r - 1; i >= 0; --i) {
    in_strides[i] = st;
    st *= a.dim(i);
  }
  for (int64_t i = 0; i < r; ++i) out_shape[i] = a.dim(order[i]);
  // Build the flat source index of every output element, then gather.
  const int64_t n = a.numel();
  std::vector<int64_t> index(static_cast<size_t>(n));
  std::vector<int64_t> counter(static_cast<size_t>(r), 0);
  for (int64_t i = 0; i < n; ++i) {
    int64_t src = 0;
    for (int64_t d = 0; d < r; ++d) src += counter[d] * in_strides[order[d]];
    index[i] = src;
    for (int64_t d = r - 1; d >= 0; --d) {
      if (++counter[d] < out_shape[d]) break;
      counter[d] = 0;
    }
  }
  return gather(a, std::move(index), std::move(out_shape));
}

Tensor gather(const Tensor& a, std::vector<int64_t> index, Shape out_shape) {
  const int64_t n = numel_of(out_shape);
  require(static_cast<int64_t>(index.size()) == n, "gather index size does not match output shape");
  const double* x = a.values().data();
  const int64_t na = a.numel();
  std::vector<double> out(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    const int64_t s = index[i];
    require(s < na, "gather index out of range");
    out[i] = s < 0 ? 0.0 : x[s];
  }
  return make_result("gather", std::move(out_shape), std::move(out), {&a},
                     [index = std::move(index)](Node& self) {
                       double* gx = input_grad(self, 0);
                       if (!gx) return;
                       const double* g = self.grad.data();
                       const int64_t m = static_cast<int64_t>(index.size());
                       for (int64_t i = 0; i < m; ++i)
                         if (index[i] >= 0) gx[index[i]] += g[i];
                     });
}

Tensor concat(std::span<const Tensor> parts) {
  require(!parts.empty(), "concat of zero tensors");
  Shape tail(parts[0].shape().begin() + 1, parts[0].shape().end());
  int64_t lead = 0;
  std::vector<double> out;
  std::vector<int64_t> offsets;
  for (const Tensor& p : parts) {
    require(p.rank() >= 1 && Shape(p.shape().begin() + 1, p.shape().end()) == tail,
            "concat: trailing shapes differ (" + shape_str(p.shape()) + ")");
    offsets.push_back(static_cast<int64_t>(out.size()));
    out.insert(out.end(), p.values().begin(), p.values().end());
    lead += p.dim(0);
  }
  Shape shape{lead};
  shape.insert(shape.end(), tail.begin(), tail.end());
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  return make_result("concat", std::move(shape), std::move(out), inputs, [offsets](Node& self) {
    const double* g = self.grad.data();
    for (size_t i = 0; i < self.inputs.size(); ++i) {
      double* gx = input_grad(self, i);
      if (!gx) continue;
      const int64_t len = static_cast<int64_t>(self.inputs[i]->data.size());
      for (int64_t j = 0; j < len; ++j) gx[j] += g[offsets[i] + j];
    }
  });
}

Tensor slice(const Tensor& a, int64_t begin, int64_t end) {
  require(a.rank() >= 1 && begin >= 0 && begin <= end && end <= a.dim(0),
          "slice [" + std::to_string(begin) + "," + std::to_string(end) + ") out of range for " +
              shape_str(a.shape()));
  const int64_t row = a.numel() / std::max<int64_t>(a.dim(0), 1);
  Shape shape = a.shape();
  shape[0] = end - begin;
  std::vector<double> out(a.values().begin() + begin * row, a.values().begin() + end * row);
  const int64_t offset = begin * row;
  const int64_t len = (end - begin) * row;
  return make_result("slice", std::move(shape), std::move(out), {&a}, [offset, len](Node& self) {
    double* gx = input_grad(self, 0);
    if (!gx) return;
    const double* g = self.grad.data();
    for (int64_t j = 0; j < len; ++j) gx[offset + j] += g[j];
  });
}

Tensor add_channel(const Tensor& x, const Tensor& b) {
  require(x.rank() >= 1 && b.rank() == 1 && b.dim(0) == x.dim(0),
          "add_channel: bias " + shape_str(b.shape()) + " does not match " + shape_str(x.shape()));
  const int64_t c = x.dim(0);
  const int64_t plane = x.numel() / std::max<int64_t>(c, 1);
  std::vector<double> out(x.values().begin(), x.values().end());
  const double* pb = b.values().data();
  for (int64_t ch = 0; ch < c; ++ch)
    for (int64_t i = 0; i < plane; ++i) out[ch * plane + i] += pb[ch];
  return make_result("add_channel", x.shape(), std::move(out), {&x, &b}, [c, plane](Node& self) {
    const double* g = self.grad.data();
    if (double* gx = input_grad(self, 0))
      for (int64_t i = 0; i < c * plane; ++i) gx[i] += g[i];
    if (double* gb = input_grad(self, 1)) {
      for (int64_t ch = 0; ch < c; ++ch) {
        double s = 0.0;
        for (int64_t i = 0; i < plane; ++i) s += g[ch * plane + i];
        gb[ch] += s;
      }
    }
  });
}

Tensor full_like(const Tensor& a, double value) { return Tensor(a.shape(), value); }

}  // namespace wincodec
