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


#include "wincodec/params.hpp"

#include <cmath>
#include <random>

#include "wincodec/error.hpp"

namespace wincodec {

uint64_t fnv1a64(const void* data, size_t len, uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

Init Init::fan_in(int64_t fan_in) {
  return uniform(1.0 / std::sqrt(static_cast<double>(std::max<int64_t>(fan_in, 1))));
}

Tensor ParameterStore::create(const std::string& name, Shape shape, const Init& init) {
  require(!contains(name), "duplicate parameter name: " + name);
  const int64_t n = numel_of(shape);
  std::vector<double> v(static_cast<size_t>(n), 0.0);
  std::mt19937_64 rng(fnv1a64(name.data(), name.size(), seed_ * 0x9E3779B97F4A7C15ull + 1));
  switch (init.kind) {
    case Init::Kind::kZeros:
      break;
    case Init::Kind::kConstant:
      std::fill(v.begin(), v.end(), init.a);
      break;
    case Init::Kind::kUniform: {
      std::uniform_real_distribution<double> d(-init.a, init.a);
      for (double& x : v) x = d(rng);
      break;
    }
    case Init::Kind::kNormal: {
      std::normal_distribution<double> d(0.0, init.a);
      for (double& x : v) x = d(rng);
      break;
    }
    case Init::Kind::kValues:
      require(static_cast<int64_t>(init.values.size()) == n, "initial values for " + name +
                                                                  " do not match shape " + shape_str(shape));
      v = init.values;
      break;
  }
  Tensor t = Tensor::parameter(std::move(shape), std::move(v));
  index_[name] = params_.size();
  names_.push_back(name);
  params_.push_back(t);
  return t;
}

Tensor ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  require(it != index_.end(), "unknown parameter: " + name);
  return params_[it->second];
}

std::vector<Tensor> ParameterStore::tensors() const { return params_; }

int64_t ParameterStore::total_count() const {
  int64_t n = 0;
  for (const Tensor& t : params_) n += t.numel();
  return n;
}

void ParameterStore::zero_grad() {
  for (Tensor& t : params_) t.zero_grad();
}

void ParameterStore::assign(const std::string& name, const std::vector<double>& values) {
  Tensor t = get(name);
  require(static_cast<int64_t>(values.size()) == t.numel(), "assign: size mismatch for " + name);
  std::copy(values.begin(), values.end(), t.mutable_values().begin());
}

}  // namespace wincodec
