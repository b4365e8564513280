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
#include <map>
#include <string>
#include <vector>

#include "wincodec/tensor.hpp"

namespace wincodec {

struct Init {
  enum class Kind { kZeros, kConstant, kUniform, kNormal, kValues } kind = Kind::kZeros;
  double a = 0.0;  // constant value, uniform half-width, or normal stddev
  std::vector<double> values;

  static Init zeros() { return {}; }
  static Init constant(double v) { return {Kind::kConstant, v, {}}; }
  static Init uniform(double half_width) { return {Kind::kUniform, half_width, {}}; }
  static Init normal(double stddev) { return {Kind::kNormal, stddev, {}}; }
  static Init from(std::vector<double> v) { return {Kind::kValues, 0.0, std::move(v)}; }
  // Uniform(+-1/sqrt(fan_in)), the usual default for conv and linear weights.
  static Init fan_in(int64_t fan_in);
};

/// Named parameters in creation order. Random initialization draws from a
/// stream keyed by (seed, name), so adding a parameter never perturbs the
/// initial values of the others.
class ParameterStore {
 public:
  explicit ParameterStore(uint64_t seed = 0) : seed_(seed) {}

  Tensor create(const std::string& name, Shape shape, const Init& init);
  Tensor get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  const std::vector<std::string>& names() const { return names_; }
  std::vector<Tensor> tensors() const;
  int64_t total_count() const;
  size_t size() const { return names_.size(); }

  void zero_grad();
  // Overwrites the values of an existing parameter.
  void assign(const std::string& name, const std::vector<double>& values);

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
  std::vector<std::string> names_;
  std::vector<Tensor> params_;
  std::map<std::string, size_t> index_;
};

uint64_t fnv1a64(const void* data, size_t len, uint64_t h = 1469598103934665603ull);

}  // namespace wincodec
