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


#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/gradcheck.hpp"
#include "wincodec/error.hpp"
#include "wincodec/ops.hpp"
#include "wincodec/tensor.hpp"

namespace wincodec {
namespace {

using testing::grad_check;
using testing::random_tensor;
using testing::weighted_sum;

TEST(Matmul, IdentityAndHandProduct) {
  const Tensor eye({2, 2}, std::vector<double>{1, 0, 0, 1});
  const Tensor b({2, 2}, std::vector<double>{5, 6, 7, 8});
  const Tensor p = matmul(eye, b);
  EXPECT_EQ(std::vector<double>(p.values().begin(), p.values().end()), (std::vector<double>{5, 6, 7, 8}));
  const Tensor r = matmul(Tensor({1, 2}, std::vector<double>{1, 2}), Tensor({2, 1}, std::vector<double>{3, 4}));
  EXPECT_EQ(r.shape(), (Shape{1, 1}));
  EXPECT_EQ(r.item(), 11.0);
}

TEST(Matmul, ShapeMismatchThrows) {
  EXPECT_THROW(matmul(Tensor({2, 3}, 0.0), Tensor({2, 3}, 0.0)), Error);
}

TEST(Matmul, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(1);
  Tensor a = random_tensor({3, 5}, rng), b = random_tensor({5, 4}, rng);
  const auto r = grad_check([&] { return sum(matmul(a, b)); }, {{"a", a}, {"b", b}}, 1e-6);
  EXPECT_EQ(r.failures, 0) << r.worst;
}

TEST(Elementwise, Basics) {
  EXPECT_EQ(exp(Tensor::scalar(0.0)).item(), 1.0);
  Tape tape;
  TapeScope scope(tape);
  Tensor x = Tensor::parameter({1}, {0.7});
  const Tensor y = round_ste(x);
  EXPECT_EQ(y.item(), 1.0);
  tape.backward(sum(y));
  EXPECT_EQ(x.grad()[0], 1.0);
}

TEST(Elementwise, ReciprocalGradient) {
  Tape tape;
  TapeScope scope(tape);
  Tensor x = Tensor::parameter({1}, {2.0});
  tape.backward(sum(reciprocal(x)));
  EXPECT_DOUBLE_EQ(x.grad()[0], -0.25);
}

TEST(Elementwise, NonBroadcastableShapesThrow) {
  EXPECT_THROW(add(Tensor({2, 3}, 1.0), Tensor({2}, 1.0)), Error);
  EXPECT_NO_THROW(add(Tensor({2, 3}, 1.0), Tensor({3}, 1.0)));
  EXPECT_NO_THROW(mul(Tensor::scalar(2.0), Tensor({4}, 1.0)));
}

TEST(Elementwise, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(2);
  Tensor a = random_tensor({4, 3}, rng), b = random_tensor({4, 3}, rng);
  Tensor pos = random_tensor({4, 3}, rng, 0.5, 2.0), row = random_tensor({3}, rng);
  const std::vector<std::pair<const char*, std::function<Tensor()>>> cases = {
      {"add", [&] { return weighted_sum(add(a, b)); }},
      {"sub", [&] { return weighted_sum(sub(a, b)); }},
      {"mul", [&] { return weighted_sum(mul(a, b)); }},
      {"div", [&] { return weighted_sum(div(a, pos)); }},
      {"broadcast", [&] { return weighted_sum(mul(a, row)); }},
      {"exp", [&] { return weighted_sum(exp(a)); }},
      {"log", [&] { return weighted_sum(log(pos)); }},
      {"tanh", [&] { return weighted_sum(tanh(a)); }},
      {"sigmoid", [&] { return weighted_sum(sigmoid(a)); }},
      {"sqrt", [&] { return weighted_sum(sqrt(pos)); }},
      {"reciprocal", [&] { return weighted_sum(reciprocal(pos)); }},
      {"square", [&] { return weighted_sum(square(a)); }},
      {"softplus", [&] { return weighted_sum(softplus(a)); }},
      {"gelu", [&] { return weighted_sum(gelu(a)); }},
      {"pow", [&] { return weighted_sum(pow_scalar(pos, 0.3)); }},
      {"mean", [&] { return mean(square(a)); }},
      {"softmax", [&] { return weighted_sum(softmax(a, 1)); }},
      {"softmax0", [&] { return weighted_sum(softmax(a, 0)); }},
      {"permute", [&] { return weighted_sum(permute(reshape(a, {2, 2, 3}), {2, 0, 1})); }},
      {"slice_concat",
       [&] {
         const std::vector<Tensor> parts{slice(a, 1, 3), b};
         return weighted_sum(concat(parts));
       }},
  };
  for (const auto& [name, fn] : cases) {
    const auto r = grad_check(fn, {{"a", a}, {"b", b}, {"pos", pos}, {"row", row}}, 1e-4);
    EXPECT_EQ(r.failures, 0) << name << ": " << r.worst;
  }
}

TEST(Softmax, KnownValues) {
  const Tensor u = softmax(Tensor({3}, 0.0), 0);
  for (double v : u.values()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
  const Tensor big = softmax(Tensor({2}, 1000.0), 0);
  EXPECT_DOUBLE_EQ(big[0], 0.5);
  EXPECT_DOUBLE_EQ(big[1], 0.5);
  const Tensor q = softmax(Tensor({2}, std::vector<double>{0.0, std::log(3.0)}), 0);
  EXPECT_NEAR(q[0], 0.25, 1e-15);
  EXPECT_NEAR(q[1], 0.75, 1e-15);
}

TEST(Softmax, NanInputIsAnError) {
  EXPECT_THROW(softmax(Tensor({2}, std::vector<double>{0.0, std::nan("")}), 0), Error);
}

TEST(Backward, LinearLeafGetsInput) {
  Tape tape;
  TapeScope scope(tape);
  Tensor w = Tensor::parameter({3}, {0.5, -1.0, 2.0});
  const Tensor x({3}, std::vector<double>{1.0, 2.0, 3.0});
  tape.backward(sum(mul(w, x)));
  EXPECT_EQ(std::vector<double>(w.grad().begin(), w.grad().end()), (std::vector<double>{1, 2, 3}));
}

TEST(Backward, NonScalarLossThrows) {
  Tape tape;
  TapeScope scope(tape);
  Tensor w = Tensor::parameter({3}, {1.0, 2.0, 3.0});
  EXPECT_THROW(tape.backward(mul(w, w)), Error);
}

TEST(Backward, TwoLayerMlpMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  Tensor x = random_tensor({5, 4}, rng), w1 = random_tensor({4, 6}, rng, -1, 1), b1 = random_tensor({6}, rng);
  Tensor w2 = random_tensor({6, 2}, rng, -1, 1), b2 = random_tensor({2}, rng);
  const auto r = grad_check([&] { return weighted_sum(add(matmul(tanh(add(matmul(x, w1), b1)), w2), b2)); },
                            {{"w1", w1}, {"b1", b1}, {"w2", w2}, {"b2", b2}}, 1e-4);
  EXPECT_EQ(r.failures, 0) << r.worst;
}

TEST(Backward, ResidualPathsAccumulate) {
  // f = sum(x * w + x): d/dx = w + 1 summed from both uses of x.
  Tape tape;
  TapeScope scope(tape);
  Tensor x = Tensor::parameter({2}, {1.0, -2.0});
  const Tensor w({2}, std::vector<double>{3.0, 0.5});
  tape.backward(sum(add(mul(x, w), x)));
  EXPECT_DOUBLE_EQ(x.grad()[0], 4.0);
  EXPECT_DOUBLE_EQ(x.grad()[1], 1.5);
}

TEST(Backward, SecondCallDoublesLeafGrads) {
  Tape tape;
  TapeScope scope(tape);
  Tensor w = Tensor::parameter({2}, {1.0, 2.0});
  const Tensor loss = sum(square(w));
  tape.backward(loss);
  const std::vector<double> once(w.grad().begin(), w.grad().end());
  tape.backward(loss);
  EXPECT_DOUBLE_EQ(w.grad()[0], 2 * once[0]);
  EXPECT_DOUBLE_EQ(w.grad()[1], 2 * once[1]);
}

TEST(Forward, BitDeterministic) {
  std::mt19937_64 rng(4);
  const Tensor a = random_tensor({17, 33}, rng), b = random_tensor({33, 9}, rng);
  const Tensor p = softmax(matmul(a, b), 1), q = softmax(matmul(a, b), 1);
  for (int64_t i = 0; i < p.numel(); ++i) EXPECT_EQ(p[i], q[i]);
}

TEST(Gather, NegativeIndexIsZero) {
  const Tensor a({3}, std::vector<double>{1, 2, 3});
  const Tensor g = gather(a, {2, -1, 0}, {3});
  EXPECT_EQ(g[0], 3.0);
  EXPECT_EQ(g[1], 0.0);
  EXPECT_EQ(g[2], 1.0);
}

}  // namespace
}  // namespace wincodec
