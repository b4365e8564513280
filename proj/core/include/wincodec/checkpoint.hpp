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
#include <string>
#include <vector>

#include "wincodec/params.hpp"

namespace wincodec {

// Layout (little-endian): "WCK1", u32 config length, config text (key=value
// lines), u32 record count, then per record: u32 name length, utf8 name,
// u32 ndim, ndim x u64 dims, float64 payload.
struct Checkpoint {
  std::string config_text;
  std::vector<std::pair<std::string, Tensor>> records;
};

std::vector<uint8_t> serialize_checkpoint(const std::string& config_text, const ParameterStore& store);
Checkpoint parse_checkpoint(const std::vector<uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const std::string& config_text,
                     const ParameterStore& store);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Copies every record into the store; names and shapes must match exactly.
void apply_checkpoint(const Checkpoint& ckpt, ParameterStore& store);

std::vector<uint8_t> read_file(const std::filesystem::path& path);
// Writes to a temporary sibling then renames, so failures leave no partial file.
void write_file_atomic(const std::filesystem::path& path, const std::vector<uint8_t>& bytes);

}  // namespace wincodec
