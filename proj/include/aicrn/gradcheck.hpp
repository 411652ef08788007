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

// Central finite-difference verification of every backward rule.
//
// A case exposes its leaf tensors and a forward closure. The harness reduces
// the output to L = sum(out * R) for a fixed random R, compares dL/dleaf from
// the tape against (L(x+h) - L(x-h)) / 2h on sampled coordinates, and reports
//
//   rel = max|analytic - numeric| / max(|numeric|_inf, |analytic|_inf, 1e-8)

#ifndef AICRN_GRADCHECK_HPP_
#define AICRN_GRADCHECK_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "aicrn/cbam.hpp"
#include "aicrn/layers.hpp"
#include "aicrn/loss.hpp"
#include "aicrn/network.hpp"
#include "aicrn/ops.hpp"

namespace aicrn {

using GradTape = Tape<double>;
using GradTensor = Tensor<double>;

struct GradcheckCase {
  std::string op;
  std::vector<GradTensor> leaves;
  std::function<GradTensor(GradTape&)> forward;
  double threshold = 1e-4;
  double step = 1e-5;
};

struct GradcheckResult {
  std::string op;
  double max_rel_error = 0.0;
  double threshold = 0.0;
  std::size_t coordinates = 0;
  bool passed() const { return max_rel_error < threshold; }
};

struct GradcheckOptions {
  std::uint64_t seed = 0;
  std::size_t max_coords_per_leaf = 48;
};

namespace detail {

inline std::vector<double> normal_values(std::size_t n, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline GradTensor random_leaf(const Shape& s, Rng& rng, double scale = 1.0) {
  return GradTensor(s, normal_values(s.numel(), rng, scale), true);
}

/// Values spaced at least 0.05 apart in random order, so max reductions
/// never tie and small perturbations never swap the arg-max.
inline GradTensor separated_leaf(const Shape& s, Rng& rng) {
  std::vector<double> v(s.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.05 * static_cast<double>(i) - 0.025 * static_cast<double>(v.size());
  std::shuffle(v.begin(), v.end(), rng);
  return GradTensor(s, std::move(v), true);
}

/// Values kept at least 0.05 away from zero so activation kinks are not crossed.
inline GradTensor off_kink_leaf(const Shape& s, Rng& rng) {
  auto v = normal_values(s.numel(), rng);
  for (auto& x : v) x = x >= 0 ? x + 0.05 : x - 0.05;
  return GradTensor(s, std::move(v), true);
}

inline double weighted_sum(const GradTensor& out, const std::vector<double>& r) {
  double s = 0.0;
  auto v = out.data();
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * r[i];
  return s;
}

}  // namespace detail

inline GradcheckResult run_gradcheck_case(GradcheckCase& c, const GradcheckOptions& opts) {
  Rng rng(std::hash<std::string>{}(c.op) ^ opts.seed);
  std::vector<double> r;
  {
    GradTape tape;
    for (auto& leaf : c.leaves) leaf.zero_grad();
    auto out = c.forward(tape);
    r = detail::normal_values(out.numel(), rng);
    auto loss = sum_all(tape, mul(tape, out, GradTensor(out.shape(), r)));
    tape.backward(loss);
  }
  auto eval = [&]() {
    GradTape tape = GradTape::inference();
    return detail::weighted_sum(c.forward(tape), r);
  };

  GradcheckResult res;
  res.op = c.op;
  res.threshold = c.threshold;
  double max_diff = 0.0, max_num = 0.0, max_ana = 0.0;
  for (auto& leaf : c.leaves) {
    const std::size_t n = leaf.numel();
    std::vector<std::size_t> coords(n);
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (n > opts.max_coords_per_leaf) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(opts.max_coords_per_leaf);
    }
    const auto grad = leaf.has_grad() ? std::vector<double>(leaf.grad().begin(), leaf.grad().end())
                                      : std::vector<double>(n, 0.0);
    auto x = leaf.data();
    for (std::size_t k : coords) {
      const double orig = x[k];
      x[k] = orig + c.step;
      const double up = eval();
      x[k] = orig - c.step;
      const double down = eval();
      x[k] = orig;
      const double num = (up - down) / (2.0 * c.step);
      max_diff = std::max(max_diff, std::abs(num - grad[k]));
      max_num = std::max(max_num, std::abs(num));
      max_ana = std::max(max_ana, std::abs(grad[k]));
      ++res.coordinates;
    }
  }
  res.max_rel_error = max_diff / std::max({max_num, max_ana, 1e-8});
  return res;
}

/// The standard suite: every differentiable op plus a tiny end-to-end model.
inline std::vector<GradcheckCase> standard_gradcheck_cases(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<GradcheckCase> cases;
  using detail::random_leaf;

  auto binary = [&](BinaryKind k, const Shape& sa, const Shape& sb, std::string name) {
    auto a = random_leaf(sa, rng), b = random_leaf(sb, rng);
    cases.push_back({std::move(name), {a, b}, [a, b, k](GradTape& t) { return elementwise(t, a, b, k); }});
  };
  binary(BinaryKind::add, {2, 3, 4}, {2, 3, 4}, "add");
  binary(BinaryKind::sub, {2, 3, 4}, {2, 3, 4}, "sub");
  binary(BinaryKind::mul, {2, 3, 4}, {2, 3, 4}, "mul");
  binary(BinaryKind::add, {2, 3, 4}, {1, 3, 1}, "add_broadcast");
  binary(BinaryKind::mul, {2, 3, 4}, {2, 3, 1}, "mul_broadcast");
  binary(BinaryKind::sub, {2, 3, 4}, {1, 1, 4}, "sub_broadcast");
  {
    auto a = random_leaf({3, 4}, rng), w = random_leaf({4, 5}, rng);
    cases.push_back({"matmul", {a, w}, [a, w](GradTape& t) { return matmul(t, a, w); }});
  }
  for (auto k : {ReduceKind::mean, ReduceKind::sum}) {
    auto a = random_leaf({2, 3, 5}, rng);
    for (std::size_t axis = 0; axis < 3; ++axis) {
      cases.push_back({std::string(to_string(k)) + "_axis" + std::to_string(axis),
                       {a},
                       [a, axis, k](GradTape& t) { return reduce(t, a, axis, k); }});
    }
  }
  {
    auto a = detail::separated_leaf({2, 3, 5}, rng);
    for (std::size_t axis = 0; axis < 3; ++axis) {
      cases.push_back({std::string(to_string(ReduceKind::max)) + "_axis" + std::to_string(axis),
                       {a},
                       [a, axis](GradTape& t) { return reduce(t, a, axis, ReduceKind::max); }});
    }
  }
  {
    auto a = random_leaf({2, 3, 4}, rng);
    cases.push_back({"sum_all", {a}, [a](GradTape& t) { return sum_all(t, a); }});
    cases.push_back({"mean_all", {a}, [a](GradTape& t) { return mean_all(t, a); }});
    cases.push_back({"reshape", {a}, [a](GradTape& t) { return reshape(t, a, Shape{6, 4}); }});
    cases.push_back({"affine", {a}, [a](GradTape& t) { return affine(t, a, 2.5, -1.0); }});
  }
  {
    auto a = random_leaf({2, 3, 4}, rng), b = random_leaf({2, 2, 4}, rng), c = random_leaf({2, 3, 3}, rng);
    cases.push_back({"concat_axis1", {a, b}, [a, b](GradTape& t) { return concat(t, a, b, 1); }});
    cases.push_back({"concat_axis2", {a, c}, [a, c](GradTape& t) { return concat(t, a, c, 2); }});
  }
  for (auto k : {Activation::relu, Activation::leaky_relu, Activation::sigmoid}) {
    auto a = detail::off_kink_leaf({2, 3, 4}, rng);
    cases.push_back({to_string(k), {a}, [a, k](GradTape& t) { return activation(t, a, k, 0.1); }});
  }
  {
    auto p = random_leaf({4, 1}, rng), y = random_leaf({4, 1}, rng);
    cases.push_back({"mse_loss", {p, y}, [p, y](GradTape& t) { return mse_loss(t, p, y); }});
  }
  {
    auto x = random_leaf({2, 3, 9}, rng);
    auto conv = Conv1dParams<double>::he(4, 3, 5, rng);
    conv.bias = random_leaf({4}, rng);
    cases.push_back({"conv1d", {x, conv.weight, conv.bias}, [x, conv](GradTape& t) { return conv1d(t, x, conv); }});
  }
  {
    auto x = random_leaf({3, 2, 5}, rng);
    auto bn = BatchNorm1dParams<double>::make(2);
    bn.gamma = random_leaf({2}, rng);
    bn.beta = random_leaf({2}, rng);
    cases.push_back({"batchnorm1d_train", {x, bn.gamma, bn.beta}, [x, bn](GradTape& t) mutable {
                       return batchnorm1d(t, x, bn, Mode::train);
                     }});
    auto bn_eval = bn;
    bn_eval.running_mean = GradTensor({2}, {0.3, -0.2});
    bn_eval.running_var = GradTensor({2}, {1.7, 0.6});
    cases.push_back({"batchnorm1d_eval", {x, bn.gamma, bn.beta}, [x, bn_eval](GradTape& t) mutable {
                       return batchnorm1d(t, x, bn_eval, Mode::eval);
                     }});
  }
  {
    auto x = random_leaf({2, 3, 9}, rng);
    cases.push_back({"avg_pool1d", {x}, [x](GradTape& t) { return avg_pool1d(t, x, 2); }});
    cases.push_back({"global_avg_pool", {x}, [x](GradTape& t) { return global_avg_pool(t, x); }});
    const auto mask_seed = rng();
    cases.push_back({"dropout", {x}, [x, mask_seed](GradTape& t) {
                       Rng r(mask_seed);
                       return dropout(t, x, 0.5, Mode::train, r);
                     }});
  }
  {
    auto x = random_leaf({3, 4}, rng);
    auto lin = LinearParams<double>::he(4, 2, rng);
    lin.bias = random_leaf({2}, rng);
    cases.push_back({"linear", {x, lin.weight, lin.bias}, [x, lin](GradTape& t) { return linear(t, x, lin); }});
  }
  {
    auto f = detail::separated_leaf({2, 8, 6}, rng);
    auto cp = ChannelAttentionParams<double>::he(8, 4, rng);
    cp.b1 = random_leaf(cp.b1.shape(), rng, 0.3);
    cp.b2 = random_leaf(cp.b2.shape(), rng, 0.3);
    auto sp = SpatialAttentionParams<double>::he(3, rng);
    cases.push_back({"channel_attention",
                     {f, cp.w1, cp.b1, cp.w2, cp.b2},
                     [f, cp](GradTape& t) { return channel_attention(t, f, cp); }});
    cases.push_back({"spatial_attention",
                     {f, sp.conv.weight, sp.conv.bias},
                     [f, sp](GradTape& t) { return spatial_attention(t, f, sp); }});
    cases.push_back({"apply_cbam",
                     {f, cp.w1, cp.b1, cp.w2, cp.b2, sp.conv.weight, sp.conv.bias},
                     [f, cp, sp](GradTape& t) { return apply_cbam(t, f, cp, sp); }});
  }
  {
    AicrnConfig c;
    c.stem_width = 8;
    c.block_kernel = 3;
    c.spatial_kernel = 3;
    c.cbam_ratio = 4;
    auto m = ResidualAttentionModule<double>::make(c, rng);
    auto x = random_leaf({2, 8, 6}, rng);
    std::vector<GradTensor> leaves{x};
    for (auto* p : {&m.conv_a.weight, &m.conv_a.bias, &m.bn_a.gamma, &m.bn_a.beta, &m.conv_b.weight, &m.conv_b.bias,
                    &m.bn_b.gamma, &m.bn_b.beta, &m.cbam->channel.w1, &m.cbam->channel.w2,
                    &m.cbam->spatial.conv.weight})
      leaves.push_back(*p);
    cases.push_back({"residual_module", leaves, [x, m](GradTape& t) mutable {
                       return residual_forward(t, x, m, Mode::train, 0.1, true);
                     }});
  }
  {
    AicrnConfig c;
    c.stem_width = 8;
    c.num_blocks = 2;
    c.input_len = 64;
    c.cbam_ratio = 4;
    auto model = build<double>(c, rng);
    auto x = random_leaf({3, 8, 64}, rng);
    std::vector<GradTensor> leaves{x};
    for (auto& p : model.parameters()) leaves.push_back(p.tensor);
    const auto drop_seed = rng();
    GradcheckCase e2e{"aicrn_end_to_end", leaves, [x, model, drop_seed](GradTape& t) mutable {
                        Rng r(drop_seed);
                        return forward(t, model, x, Mode::train, r);
                      }};
    e2e.threshold = 1e-3;
    e2e.step = 1e-6;
    cases.push_back(std::move(e2e));
  }
  return cases;
}

/// Runs `cases`, prints one line per op and returns 0 iff all pass, 1 otherwise.
inline int run_gradcheck_suite(std::vector<GradcheckCase> cases, const GradcheckOptions& opts, std::ostream& out,
                               std::vector<GradcheckResult>* results = nullptr) {
  std::vector<std::string> failed;
  for (auto& c : cases) {
    const auto r = run_gradcheck_case(c, opts);
    out << (r.passed() ? "ok    " : "FAIL  ") << r.op << " max_rel_error=" << r.max_rel_error
        << " threshold=" << r.threshold << " coords=" << r.coordinates << '\n';
    if (!r.passed()) failed.push_back(r.op);
    if (results) results->push_back(r);
  }
  if (!failed.empty()) {
    out << "gradcheck failed for:";
    for (const auto& f : failed) out << ' ' << f;
    out << '\n';
    return 1;
  }
  out << "gradcheck passed (" << cases.size() << " ops)\n";
  return 0;
}

}  // namespace aicrn

#endif  // AICRN_GRADCHECK_HPP_
