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


#include "kernels.hpp"

#include <vector>

namespace wincodec::kernels {

namespace {

inline void axpy(int64_t n, double alpha, const double* __restrict x, double* __restrict y) {
  for (int64_t j = 0; j < n; ++j) y[j] += alpha * x[j];
}

}  // namespace

void gemm_nn(int64_t m, int64_t n, int64_t k, const double* a, const double* b, double* c) {
  // Four output rows share each streamed row of B.
  int64_t i = 0;
  for (; i + 4 <= m; i += 4) {
    double* __restrict c0 = c + (i + 0) * n;
    double* __restrict c1 = c + (i + 1) * n;
    double* __restrict c2 = c + (i + 2) * n;
    double* __restrict c3 = c + (i + 3) * n;
    const double* a0 = a + (i + 0) * k;
    const double* a1 = a + (i + 1) * k;
    const double* a2 = a + (i + 2) * k;
    const double* a3 = a + (i + 3) * k;
    for (int64_t p = 0; p < k; ++p) {
      const double* __restrict brow = b + p * n;
      const double v0 = a0[p], v1 = a1[p], v2 = a2[p], v3 = a3[p];
      for (int64_t j = 0; j < n; ++j) {
        const double bj = brow[j];
        c0[j] += v0 * bj;
        c1[j] += v1 * bj;
        c2[j] += v2 * bj;
        c3[j] += v3 * bj;
      }
    }
  }
  for (; i < m; ++i) {
    double* ci = c + i * n;
    const double* ai = a + i * k;
    for (int64_t p = 0; p < k; ++p) axpy(n, ai[p], b + p * n, ci);
  }
}

void gemm_tn(int64_t m, int64_t n, int64_t k, const double* a, const double* b, double* c) {
  std::vector<double> at(static_cast<size_t>(m * k));
  transpose(k, m, a, at.data());
  gemm_nn(m, n, k, at.data(), b, c);
}

void gemm_nt(int64_t m, int64_t n, int64_t k, const double* a, const double* b, double* c) {
  std::vector<double> bt(static_cast<size_t>(n * k));
  transpose(n, k, b, bt.data());
  gemm_nn(m, n, k, a, bt.data(), c);
}

void transpose(int64_t rows, int64_t cols, const double* src, double* dst) {
  constexpr int64_t kBlock = 32;
  for (int64_t r0 = 0; r0 < rows; r0 += kBlock) {
    const int64_t r1 = r0 + kBlock < rows ? r0 + kBlock : rows;
    for (int64_t c0 = 0; c0 < cols; c0 += kBlock) {
      const int64_t c1 = c0 + kBlock < cols ? c0 + kBlock : cols;
      for (int64_t r = r0; r < r1; ++r)
        for (int64_t cc = c0; cc < c1; ++cc) dst[cc * rows + r] = src[r * cols + cc];
    }
  }
}

}  // namespace wincodec::kernels
