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
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "wincodec/bitstream.hpp"
#include "wincodec/entropy.hpp"
#include "wincodec/models.hpp"
#include "wincodec/params.hpp"

namespace wincodec {

enum class Metric { kMse, kMsSsim };
std::string to_string(Metric m);
Metric parse_metric(const std::string& s);

// The standard lambda grids; the bitstream stores an index into their
// concatenation (MSE first), or 255.
const std::vector<double>& lambda_grid(Metric m);
uint8_t lambda_index(Metric m, double lambda);

/// Everything needed to rebuild a model, serialized as key=value lines.
struct ModelConfig {
  Architecture architecture = Architecture::kStf;
  StfConfig stf;
  CnnConfig cnn;
  EntropyConfig entropy;
  uint64_t seed = 0;
  // Training target, recorded for the bitstream header.
  Metric metric = Metric::kMse;
  double lambda = 0.0;

  // Returns false for unknown keys; throws on malformed values.
  bool set(const std::string& key, const std::string& value);
  std::vector<std::pair<std::string, std::string>> items() const;
  std::string to_text() const;
  static ModelConfig from_text(const std::string& text);
  void validate() const;
};

class Model {
 public:
  explicit Model(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  ParameterStore& params() { return store_; }
  const ParameterStore& params() const { return store_; }
  const Transform& transform() const { return *transform_; }
  const EntropyModel& entropy() const { return *entropy_; }
  const CnnTransform* cnn() const { return dynamic_cast<const CnnTransform*>(transform_.get()); }
  const StfTransform* stf() const { return dynamic_cast<const StfTransform*>(transform_.get()); }

  // Inputs are padded to a multiple of this (transform x hyper downsampling).
  int64_t pad_multiple() const { return transform_->downsampling() * 4; }
  uint32_t model_id() const;

  struct Output {
    Tensor y;
    EntropyOutput entropy;
    Tensor x_hat;  // unclamped
  };
  // x must already be padded.
  Output forward(const Tensor& x, QuantMode mode, std::mt19937_64* rng = nullptr) const;

 private:
  ModelConfig config_;
  ParameterStore store_;
  std::unique_ptr<Transform> transform_;
  std::unique_ptr<EntropyModel> entropy_;
};

// Loads a checkpoint written by save_model.
std::unique_ptr<Model> load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const Model& model);

struct CompressResult {
  Bitstream bitstream;
  EncodedLatents latents;
};

CompressResult compress(const Model& model, const Tensor& image);

struct DecompressResult {
  Tensor image;  // cropped to the true size, in [0,1]
  DecodedLatents latents;
  bool model_id_matched = true;
};

// A model-id mismatch fails with ErrorKind::kFormat unless `allow_mismatch`.
DecompressResult decompress(const Model& model, const Bitstream& bs, bool allow_mismatch = false);

}  // namespace wincodec
