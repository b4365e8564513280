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

namespace wincodec {

// Little-endian container:
//   "WBS1" | u8 version | u32 model id | u8 lambda index (255 = none)
//   | u16 H | u16 W | u16 padded H | u16 padded W | u8 sigma-grid version
//   | u8 slice count | varint len + z segment | per slice: varint len + bytes
struct BitstreamHeader {
  static constexpr uint8_t kVersion = 1;
  static constexpr uint8_t kNoLambda = 255;

  uint8_t version = kVersion;
  uint32_t model_id = 0;
  uint8_t lambda_index = kNoLambda;
  uint16_t height = 0;
  uint16_t width = 0;
  uint16_t padded_height = 0;
  uint16_t padded_width = 0;
  uint8_t grid_version = 0;
  uint8_t num_slices = 0;
};

struct Bitstream {
  BitstreamHeader header;
  std::vector<uint8_t> z_segment;
  std::vector<std::vector<uint8_t>> slice_segments;

  // Bytes spent on entropy-coded payload, excluding header and length prefixes.
  size_t payload_bytes() const;
};

inline constexpr size_t kBitstreamHeaderBytes = 20;

std::vector<uint8_t> write_bitstream(const Bitstream& bs);
// Fails with ErrorKind::kFormat on bad magic, unknown version, truncation
// or trailing bytes.
Bitstream read_bitstream(std::span<const uint8_t> bytes);

}  // namespace wincodec
