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


#include "wincodec/checkpoint.hpp"

#include <fstream>
#include <iterator>

#include "bytes.hpp"
#include "wincodec/error.hpp"

namespace wincodec {

namespace {
constexpr char kMagic[4] = {'W', 'C', 'K', '1'};
}

std::vector<uint8_t> serialize_checkpoint(const std::string& config_text, const ParameterStore& store) {
  detail::ByteWriter w;
  for (char c : kMagic) w.u8(static_cast<uint8_t>(c));
  w.u32(static_cast<uint32_t>(config_text.size()));
  w.text(config_text);
  w.u32(static_cast<uint32_t>(store.size()));
  const auto tensors = store.tensors();
  for (size_t i = 0; i < store.size(); ++i) {
    const std::string& name = store.names()[i];
    const Tensor& t = tensors[i];
    w.u32(static_cast<uint32_t>(name.size()));
    w.text(name);
    w.u32(static_cast<uint32_t>(t.rank()));
    for (int64_t d : t.shape()) w.u64(static_cast<uint64_t>(d));
    for (double v : t.values()) w.f64(v);
  }
  return std::move(w.buffer());
}

Checkpoint parse_checkpoint(const std::vector<uint8_t>& bytes) {
  detail::ByteReader r(bytes, "checkpoint");
  for (char c : kMagic)
    if (r.u8() != static_cast<uint8_t>(c)) fail(ErrorKind::kFormat, "checkpoint: bad magic");
  Checkpoint ck;
  ck.config_text = r.text(r.u32());
  const uint32_t count = r.u32();
  for (uint32_t i = 0; i < count; ++i) {
    std::string name = r.text(r.u32());
    const uint32_t ndim = r.u32();
    if (ndim > 8) fail(ErrorKind::kFormat, "checkpoint: implausible rank for " + name);
    Shape shape;
    for (uint32_t d = 0; d < ndim; ++d) shape.push_back(static_cast<int64_t>(r.u64()));
    const int64_t n = numel_of(shape);
    if (n < 0 || static_cast<uint64_t>(n) * 8 > r.remaining())
      fail(ErrorKind::kFormat, "checkpoint: truncated payload for " + name);
    std::vector<double> values(static_cast<size_t>(n));
    for (double& v : values) v = r.f64();
    ck.records.emplace_back(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  if (r.remaining() != 0) fail(ErrorKind::kFormat, "checkpoint: trailing bytes");
  return ck;
}

std::vector<uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_atomic(const std::filesystem::path& path, const std::vector<uint8_t>& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::kIo, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      fail(ErrorKind::kIo, "write failed for " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    fail(ErrorKind::kIo, "cannot rename into " + path.string() + ": " + ec.message());
  }
}

void save_checkpoint(const std::filesystem::path& path, const std::string& config_text,
                     const ParameterStore& store) {
  write_file_atomic(path, serialize_checkpoint(config_text, store));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return parse_checkpoint(read_file(path)); }

void apply_checkpoint(const Checkpoint& ckpt, ParameterStore& store) {
  if (ckpt.records.size() != store.size())
    fail(ErrorKind::kFormat, "checkpoint has " + std::to_string(ckpt.records.size()) +
                                 " parameters, model expects " + std::to_string(store.size()));
  for (const auto& [name, t] : ckpt.records) {
    if (!store.contains(name)) fail(ErrorKind::kFormat, "checkpoint parameter not in model: " + name);
    Tensor dst = store.get(name);
    if (dst.shape() != t.shape())
      fail(ErrorKind::kFormat, "checkpoint shape mismatch for " + name + ": " + shape_str(t.shape()) +
                                   " vs " + shape_str(dst.shape()));
    std::copy(t.values().begin(), t.values().end(), dst.mutable_values().begin());
  }
}

}  // namespace wincodec
