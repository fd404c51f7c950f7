// Copyright 2026 The TAN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Independent oracles shared by the unit tests and the acceptance binary.
// None of these call the code paths they check.

#ifndef TAN_TESTS_ORACLES_HPP
#define TAN_TESTS_ORACLES_HPP

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tan/autodiff.hpp"
#include "tan/networks.hpp"
#include "tan/pivot.hpp"
#include "tan/tensor.hpp"

namespace tanet::testing {

using GraphFn = std::function<ad::Var(ad::Graph&, std::span<const ad::Var>)>;

inline constexpr double kFdStep = 1e-5;
/// Gradients below this magnitude are compared on an absolute scale.
inline constexpr double kRelFloor = 1e-6;

/// Max over every input element of |analytic - sign * central FD| /
/// max(|analytic|, |fd|, kRelFloor). `signs` (default all +1) is -1 for
/// inputs whose path to the loss crosses one gradient reversal.
double max_relative_error(const GraphFn& fn, const std::vector<Tensor>& inputs,
                          const std::vector<double>& signs = {}, double h = kFdStep);

Tensor random_tensor(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double lo = -2.0,
                     double hi = 2.0);

/// Binds parameter Vars (weight, bias per layer) as an MLP of `spec`.
BoundMlp bound_from_vars(const MlpSpec& spec, std::span<const ad::Var> vars);
std::vector<Tensor> flat_params(const MlpParams& p);

struct GradCheckRow {
  std::string name;
  std::size_t configurations = 0;
  double max_error = 0.0;
};

/// Every primitive op plus L_cls, L_feat (through the reversal), L_task in
/// both adaptor variants and L_val, each over `configurations` random draws.
std::vector<GradCheckRow> run_gradient_suite(std::uint64_t seed, std::size_t configurations);

/// Fraction of (positive, negative) pairs ordered correctly, ties as 1/2.
double brute_force_auc(std::span<const double> scores, std::span<const std::size_t> labels,
                       std::size_t positive = 1);

struct BruteCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};
BruteCounts brute_force_confusion(std::span<const std::size_t> preds,
                                  std::span<const std::size_t> labels, std::size_t positive = 1);

/// Full sort then prefix; random_m keys each candidate with one draw of
/// mt19937_64(seed) in candidate order. Output ordered by decreasing
/// confidence, ties by index.
std::vector<PivotEntry> brute_force_select(std::span<const PivotEntry> candidates, std::size_t m,
                                           PivotStrategy strategy, std::uint64_t seed);

}  // namespace tanet::testing

#endif  // TAN_TESTS_ORACLES_HPP
