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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "wincodec/tensor.hpp"

// Images are [3, H, W] tensors with values in [0, 1].
namespace wincodec {

Tensor decode_ppm(std::span<const uint8_t> bytes);
std::vector<uint8_t> encode_ppm(const Tensor& image);  // rounds to 8 bits
Tensor read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Tensor& image);

// Sorted *.ppm files of a directory (non-recursive).
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

// Extends bottom/right edges to height x width by repeating the last row/column.
Tensor pad_replicate(const Tensor& image, int64_t height, int64_t width);
Tensor crop(const Tensor& image, int64_t top, int64_t left, int64_t height, int64_t width);
Tensor clamp01(const Tensor& image);
// round(255 x) / 255 after clamping.
Tensor quantize_8bit(const Tensor& image);

int64_t round_up(int64_t v, int64_t multiple);

enum class Pattern { kNoise, kGradient, kShapes, kHalfNoise, kTexture };
Pattern parse_pattern(const std::string& s);
std::string to_string(Pattern p);
// Deterministic synthetic images. kHalfNoise is flat grey on the left half
// and uniform noise on the right half.
Tensor synthetic_image(Pattern pattern, int64_t height, int64_t width, uint64_t seed);

}  // namespace wincodec
