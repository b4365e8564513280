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


#include "wincodec/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>

#include "wincodec/checkpoint.hpp"
#include "wincodec/error.hpp"

namespace wincodec {

namespace {

// Next whitespace-separated header token, skipping '#' comments.
std::string ppm_token(std::span<const uint8_t> b, size_t& pos) {
  while (pos < b.size()) {
    if (b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
    } else if (std::isspace(b[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  std::string tok;
  while (pos < b.size() && !std::isspace(b[pos]) && b[pos] != '#') tok.push_back(static_cast<char>(b[pos++]));
  if (tok.empty()) fail(ErrorKind::kFormat, "ppm: truncated header");
  return tok;
}

int64_t ppm_number(std::span<const uint8_t> b, size_t& pos) {
  const std::string t = ppm_token(b, pos);
  if (!std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) ||
      t.size() > 9)
    fail(ErrorKind::kFormat, "ppm: bad header field '" + t + "'");
  return std::stoll(t);
}

}  // namespace

Tensor decode_ppm(std::span<const uint8_t> bytes) {
  size_t pos = 0;
  if (ppm_token(bytes, pos) != "P6") fail(ErrorKind::kFormat, "ppm: only binary P6 files are supported");
  const int64_t w = ppm_number(bytes, pos), h = ppm_number(bytes, pos), maxval = ppm_number(bytes, pos);
  if (w <= 0 || h <= 0 || maxval != 255) fail(ErrorKind::kFormat, "ppm: need positive dims and maxval 255");
  ++pos;  // single whitespace before the raster
  if (bytes.size() < pos || bytes.size() - pos < static_cast<size_t>(3 * w * h))
    fail(ErrorKind::kFormat, "ppm: truncated raster");
  std::vector<double> v(static_cast<size_t>(3 * h * w));
  for (int64_t i = 0; i < h * w; ++i)
    for (int64_t c = 0; c < 3; ++c) v[c * h * w + i] = bytes[pos + 3 * i + c] / 255.0;
  return Tensor({3, h, w}, std::move(v));
}

std::vector<uint8_t> encode_ppm(const Tensor& image) {
  require(image.rank() == 3 && image.dim(0) == 3, "ppm: expected [3,H,W], got " + shape_str(image.shape()));
  const int64_t h = image.dim(1), w = image.dim(2);
  const std::string header = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + 3 * h * w);
  const auto& v = image.values();
  for (int64_t i = 0; i < h * w; ++i)
    for (int64_t c = 0; c < 3; ++c)
      out.push_back(static_cast<uint8_t>(std::lround(std::clamp(v[c * h * w + i], 0.0, 1.0) * 255.0)));
  return out;
}

Tensor read_ppm(const std::filesystem::path& path) { return decode_ppm(read_file(path)); }

void write_ppm(const std::filesystem::path& path, const Tensor& image) { write_file_atomic(path, encode_ppm(image)); }

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) fail(ErrorKind::kIo, "not a directory: " + dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".ppm") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

Tensor pad_replicate(const Tensor& image, int64_t height, int64_t width) {
  require(image.rank() == 3, "pad_replicate: expected [C,H,W]");
  const int64_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
  require(height >= h && width >= w, "pad_replicate: target smaller than image");
  if (height == h && width == w) return image;
  std::vector<double> out(static_cast<size_t>(c * height * width));
  const auto& v = image.values();
  for (int64_t ch = 0; ch < c; ++ch)
    for (int64_t y = 0; y < height; ++y)
      for (int64_t x = 0; x < width; ++x)
        out[(ch * height + y) * width + x] = v[(ch * h + std::min(y, h - 1)) * w + std::min(x, w - 1)];
  return Tensor({c, height, width}, std::move(out));
}

Tensor crop(const Tensor& image, int64_t top, int64_t left, int64_t height, int64_t width) {
  require(image.rank() == 3, "crop: expected [C,H,W]");
  const int64_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
  require(top >= 0 && left >= 0 && top + height <= h && left + width <= w, "crop: window outside image");
  std::vector<double> out(static_cast<size_t>(c * height * width));
  const auto& v = image.values();
  for (int64_t ch = 0; ch < c; ++ch)
    for (int64_t y = 0; y < height; ++y)
      std::copy_n(v.begin() + (ch * h + top + y) * w + left, width, out.begin() + (ch * height + y) * width);
  return Tensor({c, height, width}, std::move(out));
}

Tensor clamp01(const Tensor& image) {
  std::vector<double> v(image.values().begin(), image.values().end());
  for (double& x : v) x = std::clamp(x, 0.0, 1.0);
  return Tensor(image.shape(), std::move(v));
}

Tensor quantize_8bit(const Tensor& image) {
  std::vector<double> v(image.values().begin(), image.values().end());
  for (double& x : v) x = std::round(std::clamp(x, 0.0, 1.0) * 255.0) / 255.0;
  return Tensor(image.shape(), std::move(v));
}

int64_t round_up(int64_t v, int64_t multiple) { return (v + multiple - 1) / multiple * multiple; }

Pattern parse_pattern(const std::string& s) {
  if (s == "noise") return Pattern::kNoise;
  if (s == "gradient") return Pattern::kGradient;
  if (s == "shapes") return Pattern::kShapes;
  if (s == "half-noise") return Pattern::kHalfNoise;
  if (s == "texture") return Pattern::kTexture;
  fail(ErrorKind::kInvalidArgument, "unknown pattern '" + s + "'");
}

std::string to_string(Pattern p) {
  switch (p) {
    case Pattern::kNoise:
      return "noise";
    case Pattern::kGradient:
      return "gradient";
    case Pattern::kShapes:
      return "shapes";
    case Pattern::kHalfNoise:
      return "half-noise";
    case Pattern::kTexture:
      return "texture";
  }
  return "noise";
}

Tensor synthetic_image(Pattern pattern, int64_t height, int64_t width, uint64_t seed) {
  require(height > 0 && width > 0, "synthetic_image: dims must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int64_t hw = height * width;
  std::vector<double> v(static_cast<size_t>(3 * hw));
  auto at = [&](int64_t c, int64_t y, int64_t x) -> double& { return v[c * hw + y * width + x]; };
  switch (pattern) {
    case Pattern::kNoise:
      for (double& x : v) x = u(rng);
      break;
    case Pattern::kGradient: {
      double base[3], dy[3], dx[3];
      for (int c = 0; c < 3; ++c) {
        base[c] = u(rng);
        dy[c] = u(rng) - 0.5;
        dx[c] = u(rng) - 0.5;
      }
      for (int64_t c = 0; c < 3; ++c)
        for (int64_t y = 0; y < height; ++y)
          for (int64_t x = 0; x < width; ++x)
            at(c, y, x) = std::clamp(base[c] + dy[c] * y / height + dx[c] * x / width, 0.0, 1.0);
      break;
    }
    case Pattern::kShapes: {
      double bg[3];
      for (double& b : bg) b = u(rng);
      for (int64_t c = 0; c < 3; ++c)
        for (int64_t i = 0; i < hw; ++i) v[c * hw + i] = bg[c];
      const int shapes = 3 + static_cast<int>(rng() % 4);
      for (int s = 0; s < shapes; ++s) {
        const double cy = u(rng) * height, cx = u(rng) * width;
        const double r = (0.1 + 0.25 * u(rng)) * std::min(height, width);
        const bool disc = rng() % 2 == 0;
        double col[3];
        for (double& c : col) c = u(rng);
        for (int64_t y = 0; y < height; ++y)
          for (int64_t x = 0; x < width; ++x) {
            const double ddy = y + 0.5 - cy, ddx = x + 0.5 - cx;
            const bool inside = disc ? ddy * ddy + ddx * ddx <= r * r : std::abs(ddy) <= r && std::abs(ddx) <= r;
            if (inside)
              for (int c = 0; c < 3; ++c) at(c, y, x) = col[c];
          }
      }
      break;
    }
    case Pattern::kHalfNoise: {
      const double grey = 0.5;
      for (int64_t c = 0; c < 3; ++c)
        for (int64_t y = 0; y < height; ++y)
          for (int64_t x = 0; x < width; ++x) at(c, y, x) = x < width / 2 ? grey : u(rng);
      break;
    }
    case Pattern::kTexture: {
      double fy[3], fx[3], ph[3];
      for (int c = 0; c < 3; ++c) {
        fy[c] = 0.05 + 0.4 * u(rng);
        fx[c] = 0.05 + 0.4 * u(rng);
        ph[c] = 6.283185307179586 * u(rng);
      }
      for (int64_t c = 0; c < 3; ++c)
        for (int64_t y = 0; y < height; ++y)
          for (int64_t x = 0; x < width; ++x)
            at(c, y, x) = 0.5 + 0.35 * std::sin(fy[c] * y + fx[c] * x + ph[c]) + 0.1 * (u(rng) - 0.5);
      break;
    }
  }
  for (double& x : v) x = std::round(std::clamp(x, 0.0, 1.0) * 255.0) / 255.0;
  return Tensor({3, height, width}, std::move(v));
}

}  // namespace wincodec
