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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "wincodec/ops.hpp"
#include "wincodec/tensor.hpp"

namespace wincodec::testing {

struct GradCheckResult {
  double max_rel = 0.0;  // worst relative error among entries with a non-negligible gradient
  int64_t checked = 0;
  int64_t failures = 0;
  std::string worst;
};

/// Central finite differences against reverse-mode grads.
/// An entry passes when |ad - fd| / (|fd| + 1e-8) < tol, or when
/// |ad - fd| is below the FD noise floor 1e-9 * max(1, |loss|).
/// At most `max_per_input` entries of each input are probed (seeded sample).
inline GradCheckResult grad_check(const std::function<Tensor()>& loss_fn,
                                  std::vector<std::pair<std::string, Tensor>> inputs, double tol,
                                  int64_t max_per_input = 64, uint64_t seed = 1, double h = 1e-5) {
  for (auto& [name, t] : inputs) {
    t.set_requires_grad(true);
    t.zero_grad();
  }
  double loss_value = 0.0;
  {
    Tape tape;
    TapeScope scope(tape);
    const Tensor loss = loss_fn();
    loss_value = loss.item();
    tape.backward(loss);
  }
  const double floor = 1e-9 * std::max(1.0, std::abs(loss_value));
  GradCheckResult r;
  std::mt19937_64 rng(seed);
  for (auto& [name, t] : inputs) {
    std::vector<double> ad(t.numel(), 0.0);
    if (t.has_grad()) ad.assign(t.grad().begin(), t.grad().end());
    std::vector<int64_t> idx(static_cast<size_t>(t.numel()));
    for (int64_t i = 0; i < t.numel(); ++i) idx[i] = i;
    if (t.numel() > max_per_input) {
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(static_cast<size_t>(max_per_input));
    }
    for (int64_t i : idx) {
      auto v = t.mutable_values();
      const double x0 = v[i];
      v[i] = x0 + h;
      const double fp = loss_fn().item();
      v[i] = x0 - h;
      const double fm = loss_fn().item();
      v[i] = x0;
      const double fd = (fp - fm) / (2 * h);
      const double diff = std::abs(ad[i] - fd);
      const double rel = diff / (std::abs(fd) + 1e-8);
      ++r.checked;
      const bool below_floor = diff < floor;
      // Entries with a vanishing gradient only report through the floor.
      if (below_floor && std::abs(fd) < 1e-3) continue;
      if (rel > r.max_rel) {
        r.max_rel = rel;
        r.worst = name + "[" + std::to_string(i) + "] ad=" + std::to_string(ad[i]) + " fd=" + std::to_string(fd);
      }
      if (!below_floor && rel >= tol) ++r.failures;
    }
  }
  return r;
}

// Uniform values in [lo, hi).
inline Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo = -2.0, double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(static_cast<size_t>(numel_of(shape)));
  for (double& x : v) x = u(rng);
  return Tensor(std::move(shape), std::move(v));
}

// Fixed random weighting so vector outputs reduce to a scalar with
// non-degenerate gradients.
inline Tensor weighted_sum(const Tensor& t, uint64_t seed = 99) {
  std::mt19937_64 rng(seed);
  return sum(mul(t, random_tensor(t.shape(), rng, -1.0, 1.0)));
}

}  // namespace wincodec::testing
