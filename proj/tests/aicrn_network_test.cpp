// Copyright 2026 The AICRN Authors
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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "aicrn/aicrn.hpp"
#include "support/oracles.hpp"

using namespace aicrn;
namespace fs = std::filesystem;

namespace {

using D = Tensor<double>;

AicrnConfig tiny_config(bool attention = true) {
  AicrnConfig c;
  c.stem_width = 8;
  c.num_blocks = 2;
  c.input_len = 64;
  c.cbam_ratio = 4;
  c.attention = attention;
  return c;
}

fs::path scratch_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("aicrn_network_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<float> all_values(AicrnModel<float>& m) {
  std::vector<float> out;
  for (const auto& e : m.state()) out.insert(out.end(), e.tensor.data().begin(), e.tensor.data().end());
  return out;
}

oracle::Vec values(const D& t) { return {t.data().begin(), t.data().end()}; }

}  // namespace

TEST(Build, DefaultModelShapes) {
  Rng rng(0);
  auto model = build<float>(AicrnConfig{}, rng);
  EXPECT_EQ(model.blocks.size(), 8u);
  Rng drop(1);
  auto tape = Tape<float>::inference();
  auto y = forward(tape, model, Tensor<float>::zeros({2, 8, 1000}), Mode::eval, drop);
  EXPECT_EQ(y.shape(), (Shape{2, 1}));
}

TEST(Build, AttentionAddsParametersOnly) {
  Rng a(3), b(3);
  auto with = build<float>(tiny_config(true), a);
  auto without = build<float>(tiny_config(false), b);
  EXPECT_GT(with.parameter_count(), without.parameter_count());
  for (const auto& p : without.parameters()) {
    bool found = false;
    for (const auto& q : with.parameters())
      if (q.name == p.name) {
        found = true;
        EXPECT_EQ(q.tensor.shape(), p.tensor.shape()) << p.name;
      }
    EXPECT_TRUE(found) << p.name;
  }
}

TEST(Build, SameSeedSameParameters) {
  Rng a(42), b(42);
  auto m1 = build<float>(tiny_config(), a);
  auto m2 = build<float>(tiny_config(), b);
  EXPECT_EQ(all_values(m1), all_values(m2));
}

TEST(Build, InvalidConfigNamesField) {
  auto c = tiny_config();
  c.cbam_ratio = 3;
  c.block_kernel = 4;
  Rng rng(0);
  try {
    build<float>(c, rng);
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("cbam_ratio"), std::string::npos);
    EXPECT_NE(msg.find("block_kernel"), std::string::npos);
  }
}

TEST(Config, JsonRoundTrip) {
  auto c = tiny_config(false);
  c.output_scale = 17.25;
  c.output_shift = 80.5;
  EXPECT_EQ(nlohmann::json(c).get<AicrnConfig>(), c);
}

TEST(Residual, ZeroBranchIsLeakyOfInput) {
  ResidualAttentionModule<double> m{Conv1dParams<double>::zeros(4, 4, 7), BatchNorm1dParams<double>::make(4),
                                    Conv1dParams<double>::zeros(4, 4, 7), BatchNorm1dParams<double>::make(4),
                                    CbamParams<double>{ChannelAttentionParams<double>::zeros(4, 2),
                                                       SpatialAttentionParams<double>::zeros(7)}};
  std::mt19937_64 rng(2);
  auto xv = oracle::normal_vec(2 * 4 * 16, rng);
  Tape<double> tape;
  auto out = residual_forward(tape, D({2, 4, 16}, xv), m, Mode::train);
  for (std::size_t i = 0; i < xv.size(); ++i) EXPECT_EQ(out.data()[i], oracle::leaky(xv[i], 0.1));

  for (auto& v : xv) v = std::abs(v);
  auto pos = residual_forward(tape, D({2, 4, 16}, xv), m, Mode::train);
  EXPECT_EQ(values(pos), xv);
  auto zero = residual_forward(tape, D::zeros({2, 4, 16}), m, Mode::eval);
  for (double v : zero.data()) EXPECT_EQ(v, 0.0);
}

TEST(Residual, MatchesStraightLineComposition) {
  const std::size_t B = 2, W = 4, L = 16, K = 7, SK = 7;
  auto c = tiny_config();
  c.stem_width = W;
  c.cbam_ratio = 2;
  Rng init(11);
  auto m = ResidualAttentionModule<double>::make(c, init);
  // Non-trivial BN affine and biases so every term contributes.
  std::mt19937_64 rng(12);
  auto randomize = [&](Tensor<double>& t) { t.values() = oracle::normal_vec(t.numel(), rng, 0.5); };
  randomize(m.conv_a.bias);
  randomize(m.conv_b.bias);
  randomize(m.bn_a.beta);
  randomize(m.bn_b.beta);
  randomize(m.cbam->channel.b1);
  randomize(m.cbam->spatial.conv.bias);
  const auto xv = oracle::normal_vec(B * W * L, rng);

  Tape<double> tape;
  auto out = residual_forward(tape, D({B, W, L}, xv), m, Mode::train);

  auto h = oracle::batchnorm_train(oracle::conv1d(xv, B, W, L, values(m.conv_a.weight), values(m.conv_a.bias), W, K), B,
                                   W, L, values(m.bn_a.gamma), values(m.bn_a.beta), 1e-5);
  for (auto& v : h) v = oracle::leaky(v, 0.1);
  h = oracle::batchnorm_train(oracle::conv1d(h, B, W, L, values(m.conv_b.weight), values(m.conv_b.bias), W, K), B, W,
                              L, values(m.bn_b.gamma), values(m.bn_b.beta), 1e-5);
  oracle::ChannelWeights cw{values(m.cbam->channel.w1), values(m.cbam->channel.b1), values(m.cbam->channel.w2),
                            values(m.cbam->channel.b2), W, W / 2};
  oracle::SpatialWeights sw{values(m.cbam->spatial.conv.weight), m.cbam->spatial.conv.bias.data()[0], SK};
  h = oracle::cbam(h, B, L, cw, sw);
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = oracle::leaky(xv[i] + h[i], 0.1);
  EXPECT_LT(oracle::max_abs_diff(values(out), h), 1e-6);
}

TEST(Residual, WidthMismatchThrows) {
  Rng rng(0);
  auto c = tiny_config();
  auto m = ResidualAttentionModule<double>::make(c, rng);
  Tape<double> tape;
  EXPECT_THROW(residual_forward(tape, D::zeros({1, 4, 16}), m, Mode::eval), DimensionError);
}

TEST(Forward, EvalIsDeterministicAndPermutationSymmetric) {
  Rng rng(5);
  auto model = build<float>(tiny_config(), rng);
  std::mt19937_64 data(6);
  auto one = oracle::normal_vec(8 * 64, data);
  std::vector<float> two(one.begin(), one.end());
  two.insert(two.end(), one.begin(), one.end());
  Tensor<float> x({2, 8, 64}, two);
  Rng d1(1), d2(2);
  auto t1 = Tape<float>::inference();
  auto t2 = Tape<float>::inference();
  auto y1 = forward(t1, model, x, Mode::eval, d1);
  auto y2 = forward(t2, model, x, Mode::eval, d2);
  EXPECT_EQ(y1.values(), y2.values());
  EXPECT_EQ(y1.data()[0], y1.data()[1]);
}

TEST(Forward, TrainStepGivesFiniteGradients) {
  Rng rng(8);
  auto model = build<float>(tiny_config(), rng);
  std::mt19937_64 data(9);
  const auto xv = oracle::normal_vec(4 * 8 * 64, data);
  Tensor<float> x({4, 8, 64}, std::vector<float>(xv.begin(), xv.end()));
  Tape<float> tape;
  Rng drop(3);
  auto y = forward(tape, model, x, Mode::train, drop);
  EXPECT_TRUE(y.all_finite());
  tape.backward(mse_loss(tape, y, Tensor<float>({4, 1}, {1, 2, 3, 4})));
  for (const auto& p : model.parameters()) {
    ASSERT_TRUE(p.tensor.has_grad()) << p.name;
    for (float g : p.tensor.grad()) ASSERT_TRUE(std::isfinite(g)) << p.name;
  }
}

TEST(Forward, WrongInputShapeNamesDimensions) {
  Rng rng(0);
  auto model = build<float>(tiny_config(), rng);
  auto tape = Tape<float>::inference();
  try {
    forward(tape, model, Tensor<float>::zeros({1, 12, 64}), Mode::eval, rng);
    FAIL();
  } catch (const DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("B x 8 x 64"), std::string::npos) << e.what();
  }
}

TEST(Forward, OutputAffineAppliesScaleAndShift) {
  auto c = tiny_config();
  Rng a(4), b(4);
  auto plain = build<float>(c, a);
  c.output_scale = 2.0;
  c.output_shift = 10.0;
  auto scaled = build<float>(c, b);
  Tensor<float> x = Tensor<float>::full({2, 8, 64}, 0.3f);
  auto t1 = Tape<float>::inference();
  auto t2 = Tape<float>::inference();
  auto y1 = forward(t1, plain, x, Mode::eval, a);
  auto y2 = forward(t2, scaled, x, Mode::eval, b);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_FLOAT_EQ(y2.data()[i], 2.0f * y1.data()[i] + 10.0f);
}

TEST(Checkpoint, RoundTripIsBitwise) {
  const auto dir = scratch_dir("roundtrip");
  Rng rng(21);
  auto model = build<float>(AicrnConfig{}, rng);
  for (auto& e : model.state())
    if (!e.trainable) e.tensor.values()[0] = 0.123f;
  save_weights(model, dir / "m.aicn");
  auto loaded = load_weights<float>(dir / "m.aicn", model.config);
  EXPECT_EQ(all_values(loaded), all_values(model));
  EXPECT_EQ(loaded.config, model.config);

  Tensor<float> x = Tensor<float>::full({1, 8, 1000}, 0.5f);
  auto t1 = Tape<float>::inference();
  auto t2 = Tape<float>::inference();
  EXPECT_EQ(forward(t1, model, x, Mode::eval, rng).values(), forward(t2, loaded, x, Mode::eval, rng).values());
}

TEST(Checkpoint, TruncatedFileIsCorrupt) {
  const auto dir = scratch_dir("truncated");
  Rng rng(1);
  auto model = build<float>(tiny_config(), rng);
  save_weights(model, dir / "m.aicn");
  const auto size = fs::file_size(dir / "m.aicn");
  fs::resize_file(dir / "m.aicn", size / 2);
  EXPECT_THROW(load_weights<float>(dir / "m.aicn"), CorruptCheckpointError);
}

TEST(Checkpoint, BadMagicIsCorrupt) {
  const auto dir = scratch_dir("magic");
  std::ofstream(dir / "m.aicn") << "NOPE and some bytes";
  EXPECT_THROW(load_weights<float>(dir / "m.aicn"), CorruptCheckpointError);
}

TEST(Checkpoint, AttentionMismatchReportsShapeDisagreement) {
  const auto dir = scratch_dir("mismatch");
  Rng rng(1);
  auto model = build<float>(tiny_config(true), rng);
  save_weights(model, dir / "m.aicn");
  try {
    load_weights<float>(dir / "m.aicn", tiny_config(false));
    FAIL();
  } catch (const CorruptCheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("shape disagreement"), std::string::npos);
  }
}

TEST(Checkpoint, MissingFileIsIoError) {
  EXPECT_THROW(load_weights<float>(fs::temp_directory_path() / "aicrn_no_such_file.aicn"), IoError);
}

TEST(Forward, TimeExtentHalvedByStemPoolThenPreserved) {
  Rng rng(0);
  AicrnConfig c;
  c.stem_width = 8;
  c.num_blocks = 3;
  auto model = build<float>(c, rng);
  auto tape = Tape<float>::inference();
  Tensor<float> h = Tensor<float>::zeros({1, 8, 1000});
  for (auto& stage : model.stem) {
    h = leaky_relu(tape, batchnorm1d(tape, conv1d(tape, h, stage.conv), stage.bn, Mode::eval), 0.1f);
    EXPECT_EQ(h.dim(2), 1000u);
  }
  h = avg_pool1d(tape, h, c.pool_kernel);
  EXPECT_EQ(h.shape(), (Shape{1, 8, 500}));
  for (auto& block : model.blocks) {
    h = residual_forward(tape, h, block, Mode::eval);
    EXPECT_EQ(h.shape(), (Shape{1, 8, 500}));
  }
}
