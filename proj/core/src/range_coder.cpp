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


#include "wincodec/range_coder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wincodec/error.hpp"

namespace wincodec {

namespace {
constexpr uint32_t kTop = 1u << 24;
}

CdfTable CdfTable::from_pmf(std::span<const double> pmf, int32_t min_symbol, bool with_escape) {
  const size_t n = pmf.size() + (with_escape ? 1 : 0);
  require(n >= 1 && n <= kTotal, "cdf table: alphabet size must be in [1, 2^16]");
  std::vector<double> p(pmf.begin(), pmf.end());
  double mass = 0.0;
  for (double& v : p) {
    require(std::isfinite(v), "cdf table: non-finite probability");
    v = std::max(v, 0.0);
    mass += v;
  }
  if (with_escape) p.push_back(std::max(0.0, 1.0 - mass));
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  const uint32_t free = kTotal - static_cast<uint32_t>(n);
  std::vector<uint32_t> freq(n, 1);
  std::vector<double> frac(n, 0.0);
  uint64_t assigned = 0;
  if (total > 0.0) {
    for (size_t i = 0; i < n; ++i) {
      const double share = p[i] / total * free;
      const double whole = std::floor(share);
      freq[i] += static_cast<uint32_t>(whole);
      frac[i] = share - whole;
      assigned += static_cast<uint64_t>(whole);
    }
  }
  uint64_t leftover = free - std::min<uint64_t>(assigned, free);
  if (leftover > 0) {
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return frac[a] > frac[b]; });
    for (size_t k = 0; leftover > 0; k = (k + 1) % n, --leftover) ++freq[order[k]];
  }
  return from_frequencies(freq, min_symbol, with_escape);
}

CdfTable CdfTable::from_frequencies(std::span<const uint32_t> freq, int32_t min_symbol, bool with_escape) {
  require(!freq.empty() && (!with_escape || freq.size() >= 2) && freq.size() <= kTotal,
          "cdf table: bad alphabet size");
  CdfTable t;
  t.min_symbol_ = min_symbol;
  t.escape_ = with_escape;
  t.cdf_.resize(freq.size() + 1);
  uint64_t acc = 0;
  for (size_t i = 0; i < freq.size(); ++i) {
    require(freq[i] >= 1, "cdf table: every symbol needs frequency >= 1");
    t.cdf_[i] = static_cast<uint32_t>(acc);
    acc += freq[i];
  }
  require(acc == kTotal, "cdf table: frequencies must sum to 2^16");
  t.cdf_.back() = kTotal;
  return t;
}

size_t CdfTable::find(uint32_t target) const {
  const auto it = std::upper_bound(cdf_.begin() + 1, cdf_.end(), target);
  return static_cast<size_t>(it - cdf_.begin()) - 1;
}

double CdfTable::bits(size_t i) const {
  return kPrecision - std::log2(static_cast<double>(frequency(i)));
}

void RangeEncoder::shift_low() {
  if (static_cast<uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    const auto carry = static_cast<uint8_t>(low_ >> 32);
    uint8_t byte = cache_;
    do {
      // The very first byte is always zero; it is never written.
      if (first_)
        first_ = false;
      else
        out_.push_back(static_cast<uint8_t>(byte + carry));
      byte = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<uint8_t>(low_ >> 24);
  }
  ++cache_size_;
  low_ = (low_ & 0x00FFFFFFu) << 8;
}

void RangeEncoder::encode(uint32_t start, uint32_t frequency) {
  require(frequency >= 1 && start + frequency <= CdfTable::kTotal, "range coder: invalid interval");
  const uint32_t r = range_ >> CdfTable::kPrecision;
  low_ += static_cast<uint64_t>(r) * start;
  range_ = r * frequency;
  while (range_ < kTop) {
    range_ <<= 8;
    shift_low();
  }
}

void RangeEncoder::encode_symbol(size_t index, const CdfTable& table) {
  require(index < table.size(), "range coder: symbol outside the table alphabet");
  encode(table.start(index), table.frequency(index));
}

std::vector<uint8_t> RangeEncoder::finish() {
  // Pick the point of [low, low + range) with the most trailing zero bits;
  // the decoder pads with zeros, so those bytes need not be written.
  const uint64_t hi = low_ + range_ - 1;
  for (int k = 40; k >= 0; --k) {
    const uint64_t mask = (uint64_t{1} << k) - 1;
    const uint64_t v = (low_ + mask) & ~mask;
    if (v >= low_ && v <= hi) {
      low_ = v;
      break;
    }
  }
  for (int i = 0; i < 5; ++i) shift_low();
  while (!out_.empty() && out_.back() == 0) out_.pop_back();
  std::vector<uint8_t> bytes = std::move(out_);
  *this = RangeEncoder();
  return bytes;
}

RangeDecoder::RangeDecoder(std::span<const uint8_t> data) : data_(data) {
  for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next();
}

uint8_t RangeDecoder::next() {
  const uint8_t b = pos_ < data_.size() ? data_[pos_] : 0;
  ++pos_;
  return b;
}

uint32_t RangeDecoder::target() {
  r_ = range_ >> CdfTable::kPrecision;
  return std::min<uint32_t>(code_ / r_, CdfTable::kTotal - 1);
}

void RangeDecoder::consume(uint32_t start, uint32_t frequency) {
  code_ -= r_ * start;
  range_ = r_ * frequency;
  while (range_ < kTop) {
    code_ = (code_ << 8) | next();
    range_ <<= 8;
  }
}

size_t RangeDecoder::decode_symbol(const CdfTable& table) {
  const size_t i = table.find(target());
  consume(table.start(i), table.frequency(i));
  return i;
}

void encode_value(RangeEncoder& enc, int32_t value, const CdfTable& table) {
  if (value >= table.min_symbol() && value <= table.max_symbol()) {
    enc.encode_symbol(static_cast<size_t>(value - table.min_symbol()), table);
    return;
  }
  require(table.has_escape(), "range coder: value " + std::to_string(value) + " outside a table without escape");
  require(value >= -kMaxEscaped && value <= kMaxEscaped,
          "range coder: value " + std::to_string(value) + " exceeds the escape range");
  enc.encode_symbol(table.escape_index(), table);
  const uint32_t raw = (value < 0 ? 0x8000u : 0u) | static_cast<uint32_t>(value < 0 ? -value : value);
  enc.encode(raw, 1);
}

int32_t decode_value(RangeDecoder& dec, const CdfTable& table) {
  const size_t i = dec.decode_symbol(table);
  if (!table.has_escape() || i != table.escape_index()) return table.min_symbol() + static_cast<int32_t>(i);
  const uint32_t raw = dec.target();
  dec.consume(raw, 1);
  const auto magnitude = static_cast<int32_t>(raw & 0x7FFFu);
  return (raw & 0x8000u) ? -magnitude : magnitude;
}

double value_bits(int32_t value, const CdfTable& table) {
  if (value >= table.min_symbol() && value <= table.max_symbol())
    return table.bits(static_cast<size_t>(value - table.min_symbol()));
  return table.bits(table.escape_index()) + CdfTable::kPrecision;
}

}  // namespace wincodec
