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


#include "wincodec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "wincodec/error.hpp"

namespace wincodec {

namespace {

constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

using Plane = std::vector<double>;

// Valid separable filtering of an h x w plane.
Plane blur_valid(const Plane& p, int64_t h, int64_t w, const std::vector<double>& g) {
  const int64_t k = static_cast<int64_t>(g.size()), oh = h - k + 1, ow = w - k + 1;
  Plane rows(static_cast<size_t>(h * ow));
  for (int64_t y = 0; y < h; ++y)
    for (int64_t x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int64_t t = 0; t < k; ++t) s += g[t] * p[y * w + x + t];
      rows[y * ow + x] = s;
    }
  Plane out(static_cast<size_t>(oh * ow));
  for (int64_t y = 0; y < oh; ++y)
    for (int64_t x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int64_t t = 0; t < k; ++t) s += g[t] * rows[(y + t) * ow + x];
      out[y * ow + x] = s;
    }
  return out;
}

// (mean SSIM, mean contrast-structure) of one plane pair.
std::pair<double, double> ssim_terms(const Plane& a, const Plane& b, int64_t h, int64_t w,
                                     const std::vector<double>& g) {
  Plane aa(a.size()), bb(a.size()), ab(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  const Plane ma = blur_valid(a, h, w, g), mb = blur_valid(b, h, w, g);
  const Plane saa = blur_valid(aa, h, w, g), sbb = blur_valid(bb, h, w, g), sab = blur_valid(ab, h, w, g);
  double ssim = 0.0, cs = 0.0;
  for (size_t i = 0; i < ma.size(); ++i) {
    const double va = saa[i] - ma[i] * ma[i], vb = sbb[i] - mb[i] * mb[i], cov = sab[i] - ma[i] * mb[i];
    const double c = (2 * cov + kC2) / (va + vb + kC2);
    cs += c;
    ssim += c * (2 * ma[i] * mb[i] + kC1) / (ma[i] * ma[i] + mb[i] * mb[i] + kC1);
  }
  const double n = static_cast<double>(ma.size());
  return {ssim / n, cs / n};
}

Plane downsample(const Plane& p, int64_t h, int64_t w) {
  const int64_t oh = h / 2, ow = w / 2;
  Plane out(static_cast<size_t>(oh * ow));
  for (int64_t y = 0; y < oh; ++y)
    for (int64_t x = 0; x < ow; ++x)
      out[y * ow + x] =
          0.25 * (p[2 * y * w + 2 * x] + p[2 * y * w + 2 * x + 1] + p[(2 * y + 1) * w + 2 * x] +
                  p[(2 * y + 1) * w + 2 * x + 1]);
  return out;
}

void check_pair(const Tensor& a, const Tensor& b, const char* what) {
  require(a.shape() == b.shape(), std::string(what) + ": shapes " + shape_str(a.shape()) + " and " +
                                      shape_str(b.shape()) + " differ");
  require(a.rank() == 3 && a.numel() > 0, std::string(what) + ": expected non-empty [C,H,W]");
}

}  // namespace

double mse_255(const Tensor& a, const Tensor& b) {
  check_pair(a, b, "mse");
  double s = 0.0;
  const auto& av = a.values();
  const auto& bv = b.values();
  for (size_t i = 0; i < av.size(); ++i) {
    const double d = 255.0 * (av[i] - bv[i]);
    s += d * d;
  }
  return s / static_cast<double>(av.size());
}

double psnr_from_mse(double mse255) {
  if (mse255 <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / mse255));
}

double psnr(const Tensor& a, const Tensor& b) { return psnr_from_mse(mse_255(a, b)); }

std::vector<double> gaussian_window(int size, double sigma) {
  std::vector<double> g(static_cast<size_t>(size));
  double total = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - (size - 1) / 2.0;
    g[i] = std::exp(-d * d / (2 * sigma * sigma));
    total += g[i];
  }
  for (double& v : g) v /= total;
  return g;
}

const std::vector<double>& ms_ssim_weights() {
  static const std::vector<double> w{0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  return w;
}

int ms_ssim_scales(int64_t height, int64_t width) {
  const int64_t m = std::min(height, width);
  for (int n = 5; n >= 1; --n)
    if (m > 10 * (int64_t{1} << (n - 1))) return n;
  return 0;
}

double ms_ssim(const Tensor& a, const Tensor& b) {
  check_pair(a, b, "ms_ssim");
  const int64_t c = a.dim(0), h0 = a.dim(1), w0 = a.dim(2);
  const int scales = ms_ssim_scales(h0, w0);
  require(scales >= 1, "ms_ssim: images must be larger than 10 pixels per side");
  std::vector<double> weights(ms_ssim_weights().begin(), ms_ssim_weights().begin() + scales);
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  for (double& w : weights) w /= wsum;
  const std::vector<double> g = gaussian_window();

  double total = 0.0;
  for (int64_t ch = 0; ch < c; ++ch) {
    Plane pa(a.values().begin() + ch * h0 * w0, a.values().begin() + (ch + 1) * h0 * w0);
    Plane pb(b.values().begin() + ch * h0 * w0, b.values().begin() + (ch + 1) * h0 * w0);
    int64_t h = h0, w = w0;
    double score = 1.0;
    for (int s = 0; s < scales; ++s) {
      const auto [ssim, cs] = ssim_terms(pa, pb, h, w, g);
      const double term = s + 1 == scales ? ssim : cs;
      score *= std::pow(std::max(term, 0.0), weights[s]);
      if (s + 1 < scales) {
        pa = downsample(pa, h, w);
        pb = downsample(pb, h, w);
        h /= 2;
        w /= 2;
      }
    }
    total += score;
  }
  return total / static_cast<double>(c);
}

double bits_per_pixel(uint64_t bits, int64_t height, int64_t width) {
  require(height > 0 && width > 0, "bpp: image dims must be positive");
  return static_cast<double>(bits) / static_cast<double>(height * width);
}

std::vector<RdSummary> rd_average(const std::vector<RdPoint>& points) {
  std::map<std::pair<std::string, double>, RdSummary> groups;
  for (const RdPoint& p : points) {
    RdSummary& g = groups[{p.model, p.lambda}];
    g.model = p.model;
    g.lambda = p.lambda;
    ++g.count;
    g.bpp += p.bpp;
    g.psnr += p.psnr;
    g.ms_ssim += p.ms_ssim;
  }
  std::vector<RdSummary> out;
  for (auto& [key, g] : groups) {
    const double n = static_cast<double>(g.count);
    g.bpp /= n;
    g.psnr /= n;
    g.ms_ssim /= n;
    out.push_back(g);
  }
  std::stable_sort(out.begin(), out.end(), [](const RdSummary& a, const RdSummary& b) {
    return a.model != b.model ? a.model < b.model : a.bpp < b.bpp;
  });
  return out;
}

namespace {
std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}
}  // namespace

std::string rd_table(const std::vector<RdPoint>& points) {
  std::string out = "image\tmodel\tlambda\tbpp\tpsnr\tms_ssim\n";
  for (const RdPoint& p : points)
    out += p.image + "\t" + p.model + "\t" + fmt("%.6g", p.lambda) + "\t" + fmt("%.6f", p.bpp) + "\t" +
           fmt("%.4f", p.psnr) + "\t" + fmt("%.6f", p.ms_ssim) + "\n";
  for (const RdSummary& s : rd_average(points))
    out += "average\t" + s.model + "\t" + fmt("%.6g", s.lambda) + "\t" + fmt("%.6f", s.bpp) + "\t" +
           fmt("%.4f", s.psnr) + "\t" + fmt("%.6f", s.ms_ssim) + "\n";
  return out;
}

std::vector<RdPoint> parse_rd_table(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<RdPoint> out;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("image\t", 0) == 0) continue;
    }
    std::vector<std::string> f;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, '\t')) f.push_back(cell);
    if (f.size() != 6) fail(ErrorKind::kFormat, "rd table: expected 6 columns in '" + line + "'");
    if (f[0] == "average") continue;
    try {
      out.push_back({f[0], f[1], std::stod(f[2]), std::stod(f[3]), std::stod(f[4]), std::stod(f[5])});
    } catch (const std::exception&) {
      fail(ErrorKind::kFormat, "rd table: bad number in '" + line + "'");
    }
  }
  return out;
}

std::string rd_series(const std::vector<RdPoint>& points) {
  std::string out = "# model\tbpp\tpsnr\tms_ssim\n";
  for (const RdSummary& s : rd_average(points))
    out += s.model + "\t" + fmt("%.6f", s.bpp) + "\t" + fmt("%.4f", s.psnr) + "\t" + fmt("%.6f", s.ms_ssim) + "\n";
  return out;
}

}  // namespace wincodec
