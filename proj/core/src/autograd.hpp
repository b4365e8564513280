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

#include <initializer_list>
#include <memory>
#include <vector>

#include "wincodec/tensor.hpp"

namespace wincodec::detail {

using BackwardFn = std::function<void(Node&)>;

// Builds an op result. The backward closure is attached and the node is
// taped only when a tape is active and some input requires grad.
Tensor make_result(const char* op, Shape shape, std::vector<double> data,
                   std::initializer_list<const Tensor*> inputs, BackwardFn backward);
Tensor make_result(const char* op, Shape shape, std::vector<double> data,
                   const std::vector<Tensor>& inputs, BackwardFn backward);

inline bool wants_grad(const Node& n) { return n.requires_grad; }

// Adds `values` into input i's grad if that input requires grad.
inline double* input_grad(Node& self, size_t i) {
  Node& in = *self.inputs[i];
  return in.requires_grad ? in.grad_buffer() : nullptr;
}

}  // namespace wincodec::detail
