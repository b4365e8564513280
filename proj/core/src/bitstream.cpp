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


#include "wincodec/bitstream.hpp"

#include <string>

#include "bytes.hpp"
#include "wincodec/error.hpp"

namespace wincodec {

namespace {
constexpr char kMagic[4] = {'W', 'B', 'S', '1'};
}

size_t Bitstream::payload_bytes() const {
  size_t n = z_segment.size();
  for (const auto& s : slice_segments) n += s.size();
  return n;
}

std::vector<uint8_t> write_bitstream(const Bitstream& bs) {
  require(bs.slice_segments.size() == bs.header.num_slices, "bitstream: slice count does not match header");
  detail::ByteWriter w;
  w.text(std::string(kMagic, 4));
  const BitstreamHeader& h = bs.header;
  w.u8(h.version);
  w.u32(h.model_id);
  w.u8(h.lambda_index);
  w.u16(h.height);
  w.u16(h.width);
  w.u16(h.padded_height);
  w.u16(h.padded_width);
  w.u8(h.grid_version);
  w.u8(h.num_slices);
  w.varint(bs.z_segment.size());
  w.bytes(bs.z_segment);
  for (const auto& s : bs.slice_segments) {
    w.varint(s.size());
    w.bytes(s);
  }
  return std::move(w.buffer());
}

Bitstream read_bitstream(std::span<const uint8_t> bytes) {
  detail::ByteReader r(bytes, "bitstream");
  const std::string magic = r.text(4);
  if (magic != std::string(kMagic, 4)) fail(ErrorKind::kFormat, "bitstream: bad magic (not a WBS1 file)");
  Bitstream bs;
  BitstreamHeader& h = bs.header;
  h.version = r.u8();
  if (h.version != BitstreamHeader::kVersion)
    fail(ErrorKind::kFormat, "bitstream: unsupported version " + std::to_string(h.version));
  h.model_id = r.u32();
  h.lambda_index = r.u8();
  h.height = r.u16();
  h.width = r.u16();
  h.padded_height = r.u16();
  h.padded_width = r.u16();
  h.grid_version = r.u8();
  h.num_slices = r.u8();
  if (h.height == 0 || h.width == 0 || h.padded_height < h.height || h.padded_width < h.width)
    fail(ErrorKind::kFormat, "bitstream: inconsistent image dimensions");
  auto segment = [&r]() {
    const uint64_t n = r.varint();
    if (n > r.remaining()) fail(ErrorKind::kFormat, "bitstream: truncated");
    auto s = r.bytes(n);
    return std::vector<uint8_t>(s.begin(), s.end());
  };
  bs.z_segment = segment();
  for (int i = 0; i < h.num_slices; ++i) bs.slice_segments.push_back(segment());
  if (r.remaining() != 0)
    fail(ErrorKind::kFormat, "bitstream: " + std::to_string(r.remaining()) + " trailing bytes");
  return bs;
}

}  // namespace wincodec
