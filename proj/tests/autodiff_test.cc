// Copyright 2026 The Ambix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "ambix/attention.h"
#include "ambix/autodiff.h"
#include "ambix/error.h"
#include "ambix/ops.h"
#include "ambix/optim.h"
#include "gradcheck.h"

namespace ambix::nn {
namespace {

using testing::MaxGradError;
using testing::RandomParam;
using TD = Tensor<double>;
using In = const std::vector<TD>&;

constexpr double kTol = 1e-4;

StftParams SmallStft() {
  StftParams p;
  p.fft_size = 16;
  p.frame_length = 8;
  p.hop = 4;
  return p;
}

// Direct 6-loop convolution with the same padding rule.
std::vector<double> DirectConv(const TD& x, const TD& w, const TD& b) {
  const auto cin = x.dim(0), a = x.dim(1), bb = x.dim(2), cout = w.dim(0);
  const int k = static_cast<int>(w.dim(2));
  const int before = k / 2;
  std::vector<double> out(cout * a * bb);
  for (std::int64_t o = 0; o < cout; ++o)
    for (std::int64_t i = 0; i < a; ++i)
      for (std::int64_t j = 0; j < bb; ++j) {
        double s = b.value()[o];
        for (std::int64_t c = 0; c < cin; ++c)
          for (int ki = 0; ki < k; ++ki)
            for (int kj = 0; kj < k; ++kj) {
              const auto si = i + ki - before, sj = j + kj - before;
              if (si < 0 || si >= a || sj < 0 || sj >= bb) continue;
              s += w.value()[((o * cin + c) * k + ki) * k + kj] * x.value()[(c * a + si) * bb + sj];
            }
        out[(o * a + i) * bb + j] = s;
      }
  return out;
}

TEST(Conv2dTest, MatchesDirectConvolution) {
  std::mt19937_64 rng(1);
  const auto x = RandomParam({8, 9, 7}, rng);
  for (int k : {1, 3, 6}) {
    const auto w = RandomParam({5, 8, k, k}, rng);
    const auto b = RandomParam({5}, rng);
    const auto y = Conv2d(x, w, b);
    ASSERT_EQ(y.shape(), (Shape{5, 9, 7}));
    const auto ref = DirectConv(x, w, b);
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(y.value()[i], ref[i], 1e-10);
  }
}

TEST(Conv2dTest, PointwiseAndDeltaKernels) {
  std::mt19937_64 rng(2);
  const auto x = RandomParam({3, 5, 4}, rng);
  const auto w1 = RandomParam({2, 3, 1, 1}, rng);
  const auto zero2 = TD::Zeros({2});
  const auto y1 = Conv2d(x, w1, zero2);
  for (int o = 0; o < 2; ++o)
    for (int i = 0; i < 20; ++i) {
      double s = 0;
      for (int c = 0; c < 3; ++c) s += w1.value()[o * 3 + c] * x.value()[c * 20 + i];
      EXPECT_NEAR(y1.value()[o * 20 + i], s, 1e-12);
    }
  std::vector<double> delta(3 * 3 * 36, 0.0);
  for (int c = 0; c < 3; ++c) delta[((c * 3 + c) * 6 + 3) * 6 + 3] = 1.0;
  const auto y = Conv2d(x, TD::Constant({3, 3, 6, 6}, delta), TD::Zeros({3}));
  for (std::size_t i = 0; i < x.value().size(); ++i) EXPECT_NEAR(y.value()[i], x.value()[i], 1e-12);
}

TEST(Conv2dTest, ChannelMismatchIsShapeError) {
  try {
    Conv2d(TD::Zeros({3, 4, 4}), TD::Zeros({2, 4, 3, 3}), TD::Zeros({2}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeError);
  }
}

TEST(Conv2dTest, Gradient) {
  std::mt19937_64 rng(3);
  const double err = MaxGradError([](In v) { return Conv2d(v[0], v[1], v[2]); },
                                  {RandomParam({3, 7, 6}, rng), RandomParam({4, 3, 6, 6}, rng),
                                   RandomParam({4}, rng)});
  EXPECT_LT(err, kTol);
}

TEST(ConvTransposeTest, SizeArithmeticAndCrop) {
  const auto y = ConvTranspose2d(TD::Zeros({8, 3, 65}), TD::Zeros({8, 16, 1, 4}), TD::Zeros({16}), 2);
  EXPECT_EQ(y.shape(), (Shape{16, 3, 132}));
  EXPECT_EQ(SliceLast(y, 0, 129).shape(), (Shape{16, 3, 129}));
}

TEST(ConvTransposeTest, ImpulseSpreadsOverKernel) {
  std::vector<double> x(10, 0.0);
  x[4] = 1.0;
  const auto y = ConvTranspose2d(TD::Constant({1, 1, 10}, x),
                                 TD::Constant({1, 1, 1, 4}, {1, 1, 1, 1}), TD::Zeros({1}), 2);
  ASSERT_EQ(y.shape(), (Shape{1, 1, 22}));
  for (int i = 0; i < 22; ++i) EXPECT_EQ(y.value()[i], (i >= 8 && i < 12) ? 1.0 : 0.0);
}

TEST(ConvTransposeTest, RowsAlongDirectionsAreIndependent) {
  std::mt19937_64 rng(4);
  const auto x = RandomParam({4, 5, 9}, rng);
  const auto w = RandomParam({4, 6, 1, 4}, rng);
  const auto b = RandomParam({6}, rng);
  const std::vector<int> perm{3, 0, 4, 1, 2};
  std::vector<double> xp(x.value().size());
  for (int c = 0; c < 4; ++c)
    for (int d = 0; d < 5; ++d)
      for (int f = 0; f < 9; ++f) xp[(c * 5 + d) * 9 + f] = x.value()[(c * 5 + perm[d]) * 9 + f];
  const auto y = ConvTranspose2d(x, w, b, 2);
  const auto yp = ConvTranspose2d(TD::Constant({4, 5, 9}, xp), w, b, 2);
  const auto fo = y.dim(2);
  for (int o = 0; o < 6; ++o)
    for (int d = 0; d < 5; ++d)
      for (int f = 0; f < fo; ++f)
        EXPECT_NEAR(yp.value()[(o * 5 + d) * fo + f], y.value()[(o * 5 + perm[d]) * fo + f], 1e-12);
}

TEST(ConvTransposeTest, RejectsKernelHeightAboveOne) {
  try {
    ConvTranspose2d(TD::Zeros({2, 3, 5}), TD::Zeros({2, 2, 2, 4}), TD::Zeros({2}), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeError);
  }
}

TEST(ConvTransposeTest, Gradient) {
  std::mt19937_64 rng(5);
  const double err = MaxGradError(
      [](In v) { return SliceLast(ConvTranspose2d(v[0], v[1], v[2], 2), 0, 9); },
      {RandomParam({3, 4, 5}, rng), RandomParam({3, 5, 1, 4}, rng), RandomParam({5}, rng)});
  EXPECT_LT(err, kTol);
}

TEST(GroupNormTest, ConstantInputGivesZeros) {
  const auto y = GroupNorm(TD::Constant({8, 2, 3}, std::vector<double>(48, 3.7)),
                           TD::Constant({8}, std::vector<double>(8, 1.0)), TD::Zeros({8}), 4);
  for (double v : y.value()) EXPECT_NEAR(v, 0.0, 1e-9);
}

TEST(GroupNormTest, GroupStatistics) {
  std::mt19937_64 rng(6);
  const auto x = RandomParam({16, 5, 7}, rng, 3.0);
  const auto y = GroupNorm(x, TD::Constant({16}, std::vector<double>(16, 1.0)), TD::Zeros({16}), 8);
  const int per = 2 * 35;
  for (int g = 0; g < 8; ++g) {
    double mean = 0, var = 0;
    for (int i = 0; i < per; ++i) mean += y.value()[g * per + i];
    mean /= per;
    for (int i = 0; i < per; ++i) var += std::pow(y.value()[g * per + i] - mean, 2);
    var /= per;
    EXPECT_LT(std::abs(mean), 1e-6);
    EXPECT_GE(var, 1 - 1e-4);
    EXPECT_LE(var, 1 + 1e-4);
  }
}

TEST(GroupNormTest, IndivisibleChannelsIsShapeError) {
  try {
    GroupNorm(TD::Zeros({6, 2}), TD::Zeros({6}), TD::Zeros({6}), 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeError);
  }
}

TEST(GroupNormTest, Gradient) {
  std::mt19937_64 rng(7);
  const double err = MaxGradError([](In v) { return GroupNorm(v[0], v[1], v[2], 2); },
                                  {RandomParam({4, 3, 5}, rng), RandomParam({4}, rng),
                                   RandomParam({4}, rng)});
  EXPECT_LT(err, kTol);
}

AttentionParams<double> IdentityAttention(int c) {
  std::vector<double> eye(c * c, 0.0);
  for (int i = 0; i < c; ++i) eye[i * c + i] = 1.0;
  const auto w = TD::Constant({c, c}, eye);
  const auto z = TD::Zeros({c});
  return {w, z, w, z, w, z, w, z};
}

TEST(AttentionTest, HandEvaluatedTwoByTwo) {
  const auto q = TD::Constant({1, 1, 2}, {1, 0});
  const auto kv = TD::Constant({1, 2, 2}, {1, 0, 0, 1});
  const auto out = MultiheadAttention(q, kv, IdentityAttention(2), 1, 1.0 / std::sqrt(2.0));
  const double a = std::exp(1 / std::sqrt(2.0)), b = 1.0;
  EXPECT_NEAR(out.weights.value()[0], a / (a + b), 1e-12);
  EXPECT_NEAR(out.weights.value()[1], b / (a + b), 1e-12);
  EXPECT_NEAR(out.weights.value()[0], 0.6698, 1e-4);
  EXPECT_NEAR(out.weights.value()[1], 0.3302, 1e-4);
  EXPECT_NEAR(out.out.value()[0], a / (a + b), 1e-12);
  EXPECT_NEAR(out.out.value()[1], b / (a + b), 1e-12);
}

TEST(AttentionTest, SingleKeyBroadcastsValue) {
  std::mt19937_64 rng(8);
  AttentionParams<double> p;
  for (auto* t : {&p.wq, &p.wk, &p.wv, &p.wo}) *t = RandomParam({8, 8}, rng);
  for (auto* t : {&p.bq, &p.bk, &p.bv, &p.bo}) *t = RandomParam({8}, rng);
  const auto q = RandomParam({2, 5, 8}, rng);
  const auto kv = RandomParam({2, 1, 8}, rng);
  const auto out = MultiheadAttention(q, kv, p, 4, 0.5);
  const auto v = Linear(Linear(kv, p.wv, p.bv), p.wo, p.bo);
  for (int b = 0; b < 2; ++b)
    for (int t = 0; t < 5; ++t)
      for (int c = 0; c < 8; ++c)
        EXPECT_NEAR(out.out.value()[(b * 5 + t) * 8 + c], v.value()[b * 8 + c], 1e-12);
  for (double w : out.weights.value()) EXPECT_NEAR(w, 1.0, 1e-15);
}

TEST(AttentionTest, IdenticalKeysGiveUniformWeights) {
  std::mt19937_64 rng(9);
  const auto q = RandomParam({1, 3, 4}, rng);
  std::vector<double> row{0.3, -1.2, 0.7, 2.0}, kv;
  for (int d = 0; d < 6; ++d) kv.insert(kv.end(), row.begin(), row.end());
  const auto out = MultiheadAttention(q, TD::Constant({1, 6, 4}, kv), IdentityAttention(4), 2, 0.7);
  for (double w : out.weights.value()) EXPECT_NEAR(w, 1.0 / 6, 1e-12);
}

TEST(AttentionTest, RowsSumToOneAndHeadsMustDivide) {
  std::mt19937_64 rng(10);
  AttentionParams<double> p;
  for (auto* t : {&p.wq, &p.wk, &p.wv, &p.wo}) *t = RandomParam({8, 8}, rng);
  for (auto* t : {&p.bq, &p.bk, &p.bv, &p.bo}) *t = RandomParam({8}, rng);
  const auto out = MultiheadAttention(RandomParam({3, 4, 8}, rng), RandomParam({3, 7, 8}, rng), p, 4, 0.3);
  ASSERT_EQ(out.weights.shape(), (Shape{3, 4, 4, 7}));
  for (int r = 0; r < 3 * 4 * 4; ++r) {
    double s = 0;
    for (int d = 0; d < 7; ++d) s += out.weights.value()[r * 7 + d];
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
  try {
    MultiheadAttention(RandomParam({1, 2, 8}, rng), RandomParam({1, 2, 8}, rng), p, 3, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeError);
  }
}

TEST(AttentionTest, Gradient) {
  std::mt19937_64 rng(11);
  std::vector<TD> in{RandomParam({2, 3, 4}, rng), RandomParam({2, 5, 4}, rng)};
  for (int i = 0; i < 4; ++i) {
    in.push_back(RandomParam({4, 4}, rng, 0.5));
    in.push_back(RandomParam({4}, rng, 0.5));
  }
  const double err = MaxGradError(
      [](In v) {
        AttentionParams<double> p{v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9]};
        return MultiheadAttention(v[0], v[1], p, 2, 0.5).out;
      },
      in);
  EXPECT_LT(err, kTol);
}

TEST(SimpleOpsTest, ReluDropoutMse) {
  const auto x = TD::Constant({4}, {-2, -0.5, 0.5, 3});
  const auto r = Relu(x);
  EXPECT_EQ(r.value(), (std::vector<double>{0, 0, 0.5, 3}));
  std::mt19937_64 rng(1);
  EXPECT_EQ(Dropout(x, 0.0, true, rng).value(), x.value());
  EXPECT_EQ(Dropout(x, 0.7, false, rng).value(), x.value());
  EXPECT_EQ(MseLoss(x, x).item(), 0.0);
  for (double p : {-0.1, 1.0, 1.5}) {
    try {
      Dropout(x, p, true, rng);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
    }
  }
}

TEST(SimpleOpsTest, DropoutExpectation) {
  const auto x = TD::Constant({4}, {1.0, -2.0, 0.5, 4.0});
  std::mt19937_64 rng(2024);
  std::vector<double> mean(4, 0.0);
  const int masks = 10000;
  for (int i = 0; i < masks; ++i) {
    const auto y = Dropout(x, 0.5, true, rng);
    for (int j = 0; j < 4; ++j) mean[j] += y.value()[j] / masks;
  }
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(mean[j], x.value()[j], 0.02 * std::abs(x.value()[j]));
}

TEST(SimpleOpsTest, Gradients) {
  std::mt19937_64 rng(12);
  EXPECT_LT(MaxGradError([](In v) { return Relu(v[0]); }, {RandomParam({3, 5}, rng)}), kTol);
  EXPECT_LT(MaxGradError([](In v) { return Softmax(v[0]); }, {RandomParam({3, 5}, rng)}), kTol);
  EXPECT_LT(MaxGradError([](In v) { return Linear(v[0], v[1], v[2]); },
                         {RandomParam({2, 3, 4}, rng), RandomParam({5, 4}, rng),
                          RandomParam({5}, rng)}),
            kTol);
  EXPECT_LT(MaxGradError([](In v) { return BatchMatMul(v[0], v[1], true, true); },
                         {RandomParam({2, 4, 3}, rng), RandomParam({2, 5, 4}, rng)}),
            kTol);
  EXPECT_LT(MaxGradError([](In v) { return BatchMatMul(v[0], v[1], true, false); },
                         {RandomParam({2, 4, 3}, rng), RandomParam({2, 4, 5}, rng)}),
            kTol);
  EXPECT_LT(MaxGradError([](In v) { return Permute(v[0], {2, 0, 3, 1}); },
                         {RandomParam({2, 3, 4, 5}, rng)}),
            kTol);
  EXPECT_LT(MaxGradError([](In v) { return MseLoss(v[0], v[1]); },
                         {RandomParam({3, 4}, rng), RandomParam({3, 4}, rng)}),
            kTol);
  EXPECT_LT(MaxGradError([](In v) { return Mix(v[0], v[1]); },
                         {RandomParam({3, 4, 2, 5}, rng), RandomParam({4, 2, 5}, rng)}),
            kTol);
  EXPECT_LT(MaxGradError(
                [](In v) {
                  std::mt19937_64 local(77);  // same mask on every evaluation
                  return Dropout(v[0], 0.3, true, local);
                },
                {RandomParam({20}, rng)}),
            kTol);
}

TEST(IstftLayerTest, MatchesDspAndGradient) {
  const auto params = SmallStft();
  std::mt19937_64 rng(13);
  const int frames = 6;
  const auto x = RandomParam({4, params.bins(), frames}, rng);
  const std::size_t length = params.ReconstructableLength(frames);
  const auto y = IstftLayer(x, params, length);
  Spectrogram s(2, frames, params);
  const int ft = params.bins() * frames;
  for (int l = 0; l < 2; ++l)
    for (int i = 0; i < ft; ++i)
      s.data()[l * ft + i] = {x.value()[(2 * l) * ft + i], x.value()[(2 * l + 1) * ft + i]};
  const auto ref = Istft(s, length);
  for (int l = 0; l < 2; ++l)
    for (std::size_t i = 0; i < length; ++i) EXPECT_NEAR(y.value()[l * length + i], ref.channels[l][i], 1e-14);
  EXPECT_LT(MaxGradError([&](In v) { return IstftLayer(v[0], params, length); }, {x}), kTol);
}

TEST(IstftLayerTest, GradientAtPaperFraming) {
  std::mt19937_64 rng(14);
  const StftParams params;
  const auto x = RandomParam({2, params.bins(), 3}, rng);
  EXPECT_LT(MaxGradError([&](In v) { return IstftLayer(v[0], params, 100); }, {x}), kTol);
}

TEST(BackwardTest, SumOfParametersGivesOnes) {
  auto p = TD::Parameter({2, 3}, {1, 2, 3, 4, 5, 6});
  Backward(Sum(p));
  EXPECT_EQ(p.grad(), std::vector<double>(6, 1.0));
  Backward(Sum(p));
  EXPECT_EQ(p.grad(), std::vector<double>(6, 2.0));  // accumulates
}

TEST(BackwardTest, NonScalarLossIsInvalidArgument) {
  auto p = TD::Parameter({2}, {1, 2});
  try {
    Backward(Relu(p));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

TEST(BackwardTest, DetachedTensorsReceiveNoGradient) {
  auto p = TD::Parameter({3}, {1, -2, 3});
  auto d = Relu(p).Detach();
  auto q = TD::Parameter({3}, {0.5, 0.5, 0.5});
  Backward(Sum(Mul(d, q)));
  EXPECT_FALSE(p.has_grad());
  EXPECT_FALSE(d.has_grad());
  EXPECT_EQ(q.grad(), (std::vector<double>{1, 0, 3}));
}

TEST(BackwardTest, DiamondVisitsEachNodeOnce) {
  auto p = TD::Parameter({2}, {1.5, -0.5});
  const auto a = Scale(p, 2.0);
  const auto b = Relu(a);
  const auto c = Mul(a, b);
  const auto loss = Sum(Add(c, a));
  const auto order = TopologicalOrder(loss);
  std::set<Node<double>*> unique(order.begin(), order.end());
  EXPECT_EQ(unique.size(), order.size());
  EXPECT_EQ(order.size(), 6u);
  EXPECT_EQ(order.front(), loss.node());
  EXPECT_EQ(order.back(), p.node());
  Backward(loss);
  // d/dp sum(2p * relu(2p) + 2p) = 8p (p > 0) + 2, or 2 (p < 0).
  EXPECT_NEAR(p.grad()[0], 8 * 1.5 + 2, 1e-12);
  EXPECT_NEAR(p.grad()[1], 2.0, 1e-12);
}

TEST(BackwardTest, DeterministicAcrossRuns) {
  auto run = []() {
    std::mt19937_64 rng(3);
    auto x = RandomParam({3, 6, 5}, rng);
    auto w = RandomParam({4, 3, 6, 6}, rng);
    auto b = RandomParam({4}, rng);
    std::mt19937_64 drop(9);
    auto y = Dropout(Relu(Conv2d(x, w, b)), 0.2, true, drop);
    Backward(Sum(Mul(y, y)));
    return std::make_pair(y.value(), w.grad());
  };
  EXPECT_EQ(run(), run());
}

TEST(AdamTest, ZeroGradientLeavesParameters) {
  ParamStore<double> store;
  auto p = store.Add("p", {3}, {1, 2, 3});
  p.grad().assign(3, 0.0);
  AdamStep(store);
  EXPECT_EQ(p.value(), (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(store.step(), 1);
}

TEST(AdamTest, HandEvaluatedFirstStep) {
  ParamStore<double> store;
  auto p = store.Add("p", {2}, {0.25, -1.0});
  p.grad() = {0.5, -2.0};
  AdamOptions o;
  o.lr = 0.01;
  AdamStep(store, o);
  // m = 0.1 g, v = 0.001 g^2; bias correction restores g and g^2.
  EXPECT_NEAR(p.value()[0], 0.25 - 0.01 * 0.5 / (0.5 + 1e-8), 1e-15);
  EXPECT_NEAR(p.value()[1], -1.0 + 0.01 * 2.0 / (2.0 + 1e-8), 1e-15);
  EXPECT_NEAR(store.moment1("p")[0], 0.05, 1e-15);
  EXPECT_NEAR(store.moment2("p")[1], 0.004, 1e-15);
}

TEST(AdamTest, ConstantGradientStepApproachesLearningRate) {
  ParamStore<double> store;
  auto p = store.Add("p", {2}, {0.0, 0.0});
  double prev0 = 0.0, prev1 = 0.0;
  for (int i = 0; i < 2000; ++i) {
    p.grad() = {3.0, -0.01};
    prev0 = p.value()[0];
    prev1 = p.value()[1];
    AdamStep(store);
  }
  EXPECT_NEAR(p.value()[0] - prev0, -2e-4, 1e-9);
  EXPECT_NEAR(p.value()[1] - prev1, 2e-4, 1e-9);
}

TEST(AdamTest, MissingGradientIsStateError) {
  ParamStore<double> store;
  store.Add("a", {1}, {1.0});
  auto b = store.Add("b", {1}, {1.0});
  b.grad() = {1.0};
  try {
    AdamStep(store);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kStateError);
  }
}

TEST(ParamStoreTest, DuplicateNamesRejected) {
  ParamStore<float> store;
  store.Add("w", {1}, {0.f});
  EXPECT_THROW(store.Add("w", {1}, {0.f}), Error);
}

TEST(CheckpointTest, RoundTripIncludingAdamState) {
  ParamStore<float> store;
  auto a = store.Add("enc.w", {2, 3}, {1, 2, 3, 4, 5, 6});
  auto b = store.Add("enc.b", {2}, {-1, 1});
  a.grad().assign(6, 0.5f);
  b.grad().assign(2, -0.25f);
  AdamStep(store);
  const auto path = (std::filesystem::temp_directory_path() / "ambix_test.ckpt").string();
  SaveCheckpoint(store, path, {{"note", "x"}});
  ParamStore<float> other;
  other.Add("enc.w", {2, 3}, std::vector<float>(6, 0.f));
  other.Add("enc.b", {2}, std::vector<float>(2, 0.f));
  const auto extra = LoadCheckpoint(other, path);
  EXPECT_EQ(extra.at("note"), "x");
  EXPECT_EQ(other.step(), 1);
  EXPECT_EQ(other.Get("enc.w").value(), a.value());
  EXPECT_EQ(other.moment1("enc.b"), store.moment1("enc.b"));
  EXPECT_EQ(other.moment2("enc.w"), store.moment2("enc.w"));

  ParamStore<float> wrong;
  wrong.Add("enc.w", {3, 2}, std::vector<float>(6, 0.f));
  wrong.Add("enc.b", {2}, std::vector<float>(2, 0.f));
  try {
    LoadCheckpoint(wrong, path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormatError);
  }
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace ambix::nn
