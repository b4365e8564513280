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

// Quantized CDF over the integers [min_symbol, max_symbol] plus an optional
// trailing escape symbol. Index i codes min_symbol + i; cdf()[0] == 0 and
// cdf().back() == kTotal; every index has frequency >= 1.
class CdfTable {
 public:
  static constexpr int kPrecision = 16;
  static constexpr uint32_t kTotal = 1u << kPrecision;

  CdfTable() = default;

  // The escape symbol (if requested) receives the mass missing from `pmf`.
  // Counts are 1 + floor(p * (kTotal - n)); the leftover goes to the largest
  // fractional parts, ties to the lower index.
  static CdfTable from_pmf(std::span<const double> pmf, int32_t min_symbol, bool with_escape);
  static CdfTable from_frequencies(std::span<const uint32_t> freq, int32_t min_symbol, bool with_escape);

  int32_t min_symbol() const { return min_symbol_; }
  int32_t max_symbol() const { return min_symbol_ + static_cast<int32_t>(regular_size()) - 1; }
  size_t size() const { return cdf_.empty() ? 0 : cdf_.size() - 1; }
  size_t regular_size() const { return size() - (escape_ ? 1 : 0); }
  bool has_escape() const { return escape_; }
  size_t escape_index() const { return size() - 1; }

  uint32_t start(size_t i) const { return cdf_[i]; }
  uint32_t frequency(size_t i) const { return cdf_[i + 1] - cdf_[i]; }
  // Index whose [start, start + frequency) contains target.
  size_t find(uint32_t target) const;
  double bits(size_t i) const;
  const std::vector<uint32_t>& cdf() const { return cdf_; }

 private:
  int32_t min_symbol_ = 0;
  bool escape_ = false;
  std::vector<uint32_t> cdf_;
};

// Byte-wise range encoder with 16-bit frequencies (total 2^16): 64-bit low
// with carry into a cached byte, 32-bit range renormalized below 2^24.
class RangeEncoder {
 public:
  void encode(uint32_t start, uint32_t frequency);
  void encode_symbol(size_t index, const CdfTable& table);
  // Finishes the stream and returns its bytes; the encoder is then reset.
  std::vector<uint8_t> finish();
  size_t bytes_so_far() const { return out_.size(); }

 private:
  void shift_low();

  uint64_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint8_t cache_ = 0;
  uint64_t cache_size_ = 1;
  bool first_ = true;
  std::vector<uint8_t> out_;
};

// Reads past the end of its input as zero bytes.
class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const uint8_t> data);

  // Value in [0, kTotal) identifying the next symbol; follow with consume().
  uint32_t target();
  void consume(uint32_t start, uint32_t frequency);
  size_t decode_symbol(const CdfTable& table);
  // Bytes beyond the input that renormalization has asked for.
  size_t overrun() const { return pos_ > data_.size() ? pos_ - data_.size() : 0; }

 private:
  uint8_t next();

  std::span<const uint8_t> data_;
  size_t pos_ = 0;
  uint32_t code_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint32_t r_ = 0;
};

// Values outside the table's regular range are sent as the escape symbol
// followed by a raw 16-bit sign+magnitude word (|value| <= kMaxEscaped).
inline constexpr int32_t kMaxEscaped = 32767;
void encode_value(RangeEncoder& enc, int32_t value, const CdfTable& table);
int32_t decode_value(RangeDecoder& dec, const CdfTable& table);
// Cost in bits of encode_value under the table's quantized probabilities.
double value_bits(int32_t value, const CdfTable& table);

}  // namespace wincodec
