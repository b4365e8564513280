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


#include "wincodec/codec.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wincodec/checkpoint.hpp"
#include "wincodec/error.hpp"
#include "wincodec/image.hpp"

namespace wincodec {

namespace {

std::string join(const std::vector<int64_t>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

int64_t parse_int(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::kInvalidArgument, key + ": expected an integer, got '" + value + "'");
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const double v = std::stod(value, &used);
    if (used == value.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::kInvalidArgument, key + ": expected a number, got '" + value + "'");
}

std::vector<int64_t> parse_list(const std::string& key, const std::string& value) {
  std::vector<int64_t> out;
  if (value.empty()) return out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_int(key, item));
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "on") return true;
  if (value == "0" || value == "false" || value == "off") return false;
  fail(ErrorKind::kInvalidArgument, key + ": expected true/false, got '" + value + "'");
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string to_string(Metric m) { return m == Metric::kMse ? "mse" : "ms_ssim"; }

Metric parse_metric(const std::string& s) {
  if (s == "mse") return Metric::kMse;
  if (s == "ms_ssim" || s == "ms-ssim") return Metric::kMsSsim;
  fail(ErrorKind::kInvalidArgument, "unknown metric '" + s + "' (expected mse or ms_ssim)");
}

const std::vector<double>& lambda_grid(Metric m) {
  static const std::vector<double> mse{0.0018, 0.0035, 0.0067, 0.0130, 0.025, 0.0483};
  static const std::vector<double> msssim{2.4, 4.58, 8.73, 16.64, 31.73, 60.50};
  return m == Metric::kMse ? mse : msssim;
}

uint8_t lambda_index(Metric m, double lambda) {
  const auto& grid = lambda_grid(m);
  for (size_t i = 0; i < grid.size(); ++i)
    if (std::abs(grid[i] - lambda) <= 1e-9 * grid[i])
      return static_cast<uint8_t>(i + (m == Metric::kMse ? 0 : lambda_grid(Metric::kMse).size()));
  return BitstreamHeader::kNoLambda;
}

bool ModelConfig::set(const std::string& key, const std::string& value) {
  if (key == "arch") architecture = parse_architecture(value);
  else if (key == "seed") seed = static_cast<uint64_t>(parse_int(key, value));
  else if (key == "metric") metric = parse_metric(value);
  else if (key == "lambda") lambda = parse_double(key, value);
  else if (key == "latent_channels") entropy.latent_channels = parse_int(key, value);
  else if (key == "hyper_channels") entropy.hyper_channels = parse_int(key, value);
  else if (key == "slices") entropy.slices = parse_int(key, value);
  else if (key == "slice_hidden") entropy.slice_hidden = parse_int(key, value);
  else if (key == "lrp") entropy.lrp = parse_bool(key, value);
  else if (key == "stf.patch_size") stf.patch_size = parse_int(key, value);
  else if (key == "stf.window_size") stf.window_size = parse_int(key, value);
  else if (key == "stf.embed_dim") stf.embed_dim = parse_int(key, value);
  else if (key == "stf.depths") stf.depths = parse_list(key, value);
  else if (key == "stf.heads") stf.heads = parse_list(key, value);
  else if (key == "cnn.channels") cnn.channels = parse_int(key, value);
  else if (key == "cnn.wam") cnn.attention = parse_attention_mode(value);
  else if (key == "cnn.wam_positions") cnn.wam_positions = parse_list(key, value);
  else if (key == "cnn.wam_window") cnn.wam_window = parse_int(key, value);
  else if (key == "cnn.wam_heads") cnn.wam_heads = parse_int(key, value);
  else if (key == "cnn.wam_blocks") cnn.wam_blocks = parse_int(key, value);
  else return false;
  return true;
}

std::vector<std::pair<std::string, std::string>> ModelConfig::items() const {
  return {
      {"arch", to_string(architecture)},
      {"seed", std::to_string(seed)},
      {"metric", to_string(metric)},
      {"lambda", fmt_double(lambda)},
      {"latent_channels", std::to_string(entropy.latent_channels)},
      {"hyper_channels", std::to_string(entropy.hyper_channels)},
      {"slices", std::to_string(entropy.slices)},
      {"slice_hidden", std::to_string(entropy.slice_hidden)},
      {"lrp", entropy.lrp ? "true" : "false"},
      {"stf.patch_size", std::to_string(stf.patch_size)},
      {"stf.window_size", std::to_string(stf.window_size)},
      {"stf.embed_dim", std::to_string(stf.embed_dim)},
      {"stf.depths", join(stf.depths)},
      {"stf.heads", join(stf.heads)},
      {"cnn.channels", std::to_string(cnn.channels)},
      {"cnn.wam", to_string(cnn.attention)},
      {"cnn.wam_positions", join(cnn.wam_positions)},
      {"cnn.wam_window", std::to_string(cnn.wam_window)},
      {"cnn.wam_heads", std::to_string(cnn.wam_heads)},
      {"cnn.wam_blocks", std::to_string(cnn.wam_blocks)},
  };
}

std::string ModelConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : items()) out += k + "=" + v + "\n";
  return out;
}

ModelConfig ModelConfig::from_text(const std::string& text) {
  ModelConfig c;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::kFormat, "model config: malformed line '" + line + "'");
    const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    if (!c.set(key, value)) fail(ErrorKind::kFormat, "model config: unknown key '" + key + "'");
  }
  return c;
}

void ModelConfig::validate() const {
  entropy.validate();
  require(lambda >= 0.0, "lambda must be non-negative");
  if (architecture == Architecture::kStf) {
    StfConfig s = stf;
    s.latent_channels = entropy.latent_channels;
    s.validate();
  } else {
    CnnConfig c = cnn;
    c.latent_channels = entropy.latent_channels;
    c.validate();
  }
}

Model::Model(const ModelConfig& config) : config_(config), store_(config.seed) {
  config_.validate();
  config_.stf.latent_channels = config_.entropy.latent_channels;
  config_.cnn.latent_channels = config_.entropy.latent_channels;
  if (config_.architecture == Architecture::kStf)
    transform_ = std::make_unique<StfTransform>(store_, config_.stf);
  else
    transform_ = std::make_unique<CnnTransform>(store_, config_.cnn);
  entropy_ = std::make_unique<EntropyModel>(store_, config_.entropy);
}

uint32_t Model::model_id() const {
  // Lambda and metric describe how the weights were obtained; they do not
  // change decoding, so they are left out of the id.
  ModelConfig c = config_;
  c.lambda = 0.0;
  c.metric = Metric::kMse;
  const std::string text = c.to_text();
  uint64_t h = fnv1a64(text.data(), text.size());
  const std::vector<Tensor> tensors = store_.tensors();
  for (size_t i = 0; i < tensors.size(); ++i) {
    const Tensor& t = tensors[i];
    const std::string& name = store_.names()[i];
    h = fnv1a64(name.data(), name.size(), h);
    h = fnv1a64(t.values().data(), t.values().size() * sizeof(double), h);
  }
  return static_cast<uint32_t>(h ^ (h >> 32));
}

Model::Output Model::forward(const Tensor& x, QuantMode mode, std::mt19937_64* rng) const {
  Output out;
  out.y = transform_->encode(x);
  out.entropy = entropy_->forward(out.y, mode, rng);
  out.x_hat = transform_->decode(out.entropy.y_hat);
  return out;
}

std::unique_ptr<Model> load_model(const std::filesystem::path& path) {
  const Checkpoint ckpt = load_checkpoint(path);
  auto model = std::make_unique<Model>(ModelConfig::from_text(ckpt.config_text));
  apply_checkpoint(ckpt, model->params());
  return model;
}

void save_model(const std::filesystem::path& path, const Model& model) {
  save_checkpoint(path, model.config().to_text(), model.params());
}

CompressResult compress(const Model& model, const Tensor& image) {
  require(image.rank() == 3 && image.dim(0) == 3, "compress: expected an RGB image [3,H,W]");
  const int64_t h = image.dim(1), w = image.dim(2), m = model.pad_multiple();
  require(h >= 1 && w >= 1 && h <= 65535 && w <= 65535, "compress: image dims must be in 1..65535");
  const int64_t ph = round_up(h, m), pw = round_up(w, m);
  require(ph <= 65535 && pw <= 65535, "compress: padded dims exceed 65535");
  const Tensor x = pad_replicate(image, ph, pw);
  CompressResult r;
  r.latents = model.entropy().compress(model.transform().encode(x));
  BitstreamHeader& hd = r.bitstream.header;
  hd.model_id = model.model_id();
  hd.lambda_index = lambda_index(model.config().metric, model.config().lambda);
  hd.height = static_cast<uint16_t>(h);
  hd.width = static_cast<uint16_t>(w);
  hd.padded_height = static_cast<uint16_t>(ph);
  hd.padded_width = static_cast<uint16_t>(pw);
  hd.grid_version = GaussianTables::kVersion;
  hd.num_slices = static_cast<uint8_t>(model.config().entropy.slices);
  r.bitstream.z_segment = r.latents.z_segment;
  r.bitstream.slice_segments = r.latents.slice_segments;
  return r;
}

DecompressResult decompress(const Model& model, const Bitstream& bs, bool allow_mismatch) {
  const BitstreamHeader& h = bs.header;
  DecompressResult r;
  r.model_id_matched = h.model_id == model.model_id();
  if (!r.model_id_matched && !allow_mismatch)
    fail(ErrorKind::kFormat, "bitstream was produced by a different model (model id mismatch)");
  if (h.grid_version != GaussianTables::kVersion)
    fail(ErrorKind::kFormat, "bitstream uses sigma grid version " + std::to_string(h.grid_version) +
                                 ", this build supports " + std::to_string(GaussianTables::kVersion));
  const int64_t m = model.pad_multiple(), ds = model.transform().downsampling();
  if (h.padded_height % m != 0 || h.padded_width % m != 0 || h.padded_height - h.height >= m ||
      h.padded_width - h.width >= m)
    fail(ErrorKind::kFormat, "bitstream: padded dims do not match the model's padding");
  r.latents = model.entropy().decompress(bs.z_segment, bs.slice_segments, h.padded_height / ds,
                                         h.padded_width / ds);
  const Tensor x_hat = clamp01(model.transform().decode(r.latents.y_hat));
  r.image = crop(x_hat, 0, 0, h.height, h.width);
  return r;
}

}  // namespace wincodec
