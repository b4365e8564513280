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

#include "wincodec/tensor.hpp"

namespace wincodec {

inline constexpr double kPsnrCap = 100.0;

// Mean squared error on the 0..255 scale over all channels and pixels;
// inputs are [C,H,W] in [0,1].
double mse_255(const Tensor& a, const Tensor& b);
double psnr_from_mse(double mse255);
double psnr(const Tensor& a, const Tensor& b);

// Multi-scale SSIM with an 11x11 Gaussian window (sigma 1.5), 2x2 average
// downsampling and the standard five scale weights. Scales are dropped when
// the image is too small for the coarsest one (the remaining weights are
// renormalized). Per-channel scores are averaged.
double ms_ssim(const Tensor& a, const Tensor& b);
int ms_ssim_scales(int64_t height, int64_t width);
const std::vector<double>& ms_ssim_weights();
std::vector<double> gaussian_window(int size = 11, double sigma = 1.5);

double bits_per_pixel(uint64_t bits, int64_t height, int64_t width);

struct RdPoint {
  std::string image;
  std::string model;
  double lambda = 0.0;
  double bpp = 0.0;
  double psnr = 0.0;
  double ms_ssim = 0.0;
};

struct RdSummary {
  std::string model;
  double lambda = 0.0;
  size_t count = 0;
  double bpp = 0.0;
  double psnr = 0.0;
  double ms_ssim = 0.0;
};

// Per (model, lambda) averages sorted by bpp.
std::vector<RdSummary> rd_average(const std::vector<RdPoint>& points);
// Tab-separated: per-image rows then one "average" row per model.
std::string rd_table(const std::vector<RdPoint>& points);
// Parses rows written by rd_table (average rows are skipped).
std::vector<RdPoint> parse_rd_table(const std::string& text);
// "model<TAB>bpp<TAB>psnr<TAB>ms_ssim" lines of averaged points, grouped by model.
std::string rd_series(const std::vector<RdPoint>& points);

}  // namespace wincodec
