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
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace wincodec {

using Shape = std::vector<int64_t>;

int64_t numel_of(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // allocated on first accumulation
  bool requires_grad = false;
  bool is_leaf = true;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this node's grad and accumulates vector-Jacobian products into
  // the grads of `inputs` that require them.
  std::function<void(Node&)> backward;

  double* grad_buffer();
};

}  // namespace detail

/// Dense row-major float64 array. Copies share storage; ops return new
/// tensors. When a Tape is active and an input requires grad, the result is
/// recorded for reverse-mode differentiation.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double value);
  // Leaf that participates in differentiation.
  static Tensor parameter(Shape shape, std::vector<double> values);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  int64_t rank() const { return static_cast<int64_t>(shape().size()); }
  int64_t dim(int64_t axis) const;
  int64_t numel() const;

  std::span<const double> values() const;
  // Writes bypass the tape; only meaningful for leaves (parameters, inputs).
  std::span<double> mutable_values();
  double item() const;
  double operator[](int64_t flat_index) const;

  bool requires_grad() const;
  void set_requires_grad(bool on);
  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  // Value copy with no history.
  Tensor detach() const;
  const char* op_name() const;

  const std::shared_ptr<detail::Node>& node() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

/// Ordered record of differentiable ops. Ops append while the tape is
/// active on the current thread (see TapeScope); backward() replays the
/// record in reverse creation order, which is a topological order.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Populates grads of every requires-grad leaf reachable from `loss`.
  // Leaf grads accumulate across calls; intermediate grads are reset.
  void backward(const Tensor& loss);
  void clear();
  size_t size() const { return nodes_.size(); }

  void record(std::shared_ptr<detail::Node> node);
  static Tape* active();

 private:
  friend class TapeScope;
  std::vector<std::shared_ptr<detail::Node>> nodes_;
};

class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

// Runs backward on the tape active on this thread.
void backward(const Tensor& loss);

/// Collects the name of every op executed on this thread while alive,
/// whether or not it was taped.
class OpTrace {
 public:
  OpTrace();
  ~OpTrace();
  OpTrace(const OpTrace&) = delete;
  OpTrace& operator=(const OpTrace&) = delete;

  const std::vector<std::string>& ops() const { return ops_; }
  bool contains(const std::string& op) const;

  static void note(const char* op);

 private:
  std::vector<std::string> ops_;
  OpTrace* previous_;
};

}  // namespace wincodec
