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

// Row-major GEMM kernels with a fixed accumulation order: every output
// element sums its k terms in ascending k, independent of vector width.
namespace wincodec::kernels {

// C[m,n] += A[m,k] * B[k,n]
void gemm_nn(int64_t m, int64_t n, int64_t k, const double* a, const double* b, double* c);
// C[m,n] += A[k,m]^T * B[k,n]
void gemm_tn(int64_t m, int64_t n, int64_t k, const double* a, const double* b, double* c);
// C[m,n] += A[m,k] * B[n,k]^T
void gemm_nt(int64_t m, int64_t n, int64_t k, const double* a, const double* b, double* c);

// dst[cols, rows] = src[rows, cols]^T
void transpose(int64_t rows, int64_t cols, const double* src, double* dst);

}  // namespace wincodec::kernels
