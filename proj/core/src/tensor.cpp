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


#include "wincodec/tensor.hpp"

#include <algorithm>
#include <sstream>

#include "autograd.hpp"
#include "wincodec/error.hpp"

namespace wincodec {

namespace {
thread_local Tape* g_active_tape = nullptr;
thread_local OpTrace* g_active_trace = nullptr;
}  // namespace

int64_t numel_of(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

double* detail::Node::grad_buffer() {
  if (grad.empty()) grad.assign(data.size(), 0.0);
  return grad.data();
}

Tensor::Tensor(Shape shape, double fill) : node_(std::make_shared<detail::Node>()) {
  for (int64_t d : shape) require(d >= 0, "negative dimension in " + shape_str(shape));
  node_->data.assign(static_cast<size_t>(numel_of(shape)), fill);
  node_->shape = std::move(shape);
}

Tensor::Tensor(Shape shape, std::vector<double> values) : node_(std::make_shared<detail::Node>()) {
  require(numel_of(shape) == static_cast<int64_t>(values.size()),
          "value count " + std::to_string(values.size()) + " does not match shape " +
              shape_str(shape));
  node_->shape = std::move(shape);
  node_->data = std::move(values);
}

Tensor Tensor::scalar(double value) { return Tensor(Shape{}, std::vector<double>{value}); }

Tensor Tensor::parameter(Shape shape, std::vector<double> values) {
  Tensor t(std::move(shape), std::move(values));
  t.node_->requires_grad = true;
  return t;
}

const Shape& Tensor::shape() const { return node_->shape; }

int64_t Tensor::dim(int64_t axis) const {
  const int64_t r = rank();
  if (axis < 0) axis += r;
  require(axis >= 0 && axis < r, "axis out of range for " + shape_str(shape()));
  return shape()[static_cast<size_t>(axis)];
}

int64_t Tensor::numel() const { return static_cast<int64_t>(node_->data.size()); }

std::span<const double> Tensor::values() const { return node_->data; }
std::span<double> Tensor::mutable_values() { return node_->data; }

double Tensor::item() const {
  require(numel() == 1, "item() on tensor of shape " + shape_str(shape()));
  return node_->data[0];
}

double Tensor::operator[](int64_t flat_index) const {
  return node_->data[static_cast<size_t>(flat_index)];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }
void Tensor::set_requires_grad(bool on) { node_->requires_grad = on; }
bool Tensor::has_grad() const { return node_ && !node_->grad.empty(); }
std::span<const double> Tensor::grad() const { return node_->grad; }

std::span<double> Tensor::mutable_grad() {
  node_->grad_buffer();
  return node_->grad;
}

void Tensor::zero_grad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detach() const { return Tensor(node_->shape, node_->data); }

const char* Tensor::op_name() const { return node_->op; }

void Tape::record(std::shared_ptr<detail::Node> node) { nodes_.push_back(std::move(node)); }

void Tape::clear() { nodes_.clear(); }

Tape* Tape::active() { return g_active_tape; }

void Tape::backward(const Tensor& loss) {
  require(loss.defined() && loss.numel() == 1,
          "backward() needs a scalar loss, got " + (loss.defined() ? shape_str(loss.shape()) : "undefined"));
  const auto& root = loss.node();
  auto it = std::find(nodes_.begin(), nodes_.end(), root);
  if (it == nodes_.end()) {
    // A leaf loss (or one that never touched a parameter) has nothing to propagate.
    if (root->requires_grad && root->is_leaf) root->grad_buffer()[0] += 1.0;
    return;
  }
  for (auto& n : nodes_) n->grad.clear();
  root->grad_buffer()[0] = 1.0;
  for (auto rit = std::make_reverse_iterator(std::next(it)); rit != nodes_.rend(); ++rit) {
    detail::Node& n = **rit;
    if (n.grad.empty() || !n.backward) continue;
    n.backward(n);
  }
}

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }
TapeScope::~TapeScope() { g_active_tape = previous_; }

void backward(const Tensor& loss) {
  Tape* tape = Tape::active();
  require(tape != nullptr, "backward() called with no active tape");
  tape->backward(loss);
}

OpTrace::OpTrace() : previous_(g_active_trace) { g_active_trace = this; }
OpTrace::~OpTrace() { g_active_trace = previous_; }

bool OpTrace::contains(const std::string& op) const {
  return std::find(ops_.begin(), ops_.end(), op) != ops_.end();
}

void OpTrace::note(const char* op) {
  if (g_active_trace) g_active_trace->ops_.emplace_back(op);
}

namespace detail {

static Tensor build(const char* op, Shape shape, std::vector<double> data,
                    std::vector<std::shared_ptr<Node>> inputs, BackwardFn backward) {
  OpTrace::note(op);
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->op = op;
  node->is_leaf = false;
  Tape* tape = Tape::active();
  bool any = false;
  for (const auto& in : inputs) any = any || in->requires_grad;
  if (tape && any) {
    node->requires_grad = true;
    node->inputs = std::move(inputs);
    node->backward = std::move(backward);
    tape->record(node);
  }
  return Tensor(std::move(node));
}

Tensor make_result(const char* op, Shape shape, std::vector<double> data,
                   std::initializer_list<const Tensor*> inputs, BackwardFn backward) {
  std::vector<std::shared_ptr<Node>> ins;
  ins.reserve(inputs.size());
  for (const Tensor* t : inputs) ins.push_back(t->node());
  return build(op, std::move(shape), std::move(data), std::move(ins), std::move(backward));
}

Tensor make_result(const char* op, Shape shape, std::vector<double> data,
                   const std::vector<Tensor>& inputs, BackwardFn backward) {
  std::vector<std::shared_ptr<Node>> ins;
  ins.reserve(inputs.size());
  for (const Tensor& t : inputs) ins.push_back(t.node());
  return build(op, std::move(shape), std::move(data), std::move(ins), std::move(backward));
}

}  // namespace detail
}  // namespace wincodec
