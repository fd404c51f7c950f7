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

#ifndef TAN_OBJECTIVES_HPP
#define TAN_OBJECTIVES_HPP

#include <cstddef>
#include <span>
#include <string>

#include "tan/autodiff.hpp"
#include "tan/networks.hpp"

namespace tanet {

/// Floor applied to probabilities before any logarithm.
inline constexpr double kProbabilityFloor = 1e-12;

struct LossWeights {
  double lambda = 1.0;  // feature distribution adaptation
  double mu = 0.1;      // task semantic adaptation

  void validate() const;
};

enum class CriticActivation { kTanh, kSigmoid, kSoftplus, kRelu };

std::string to_string(CriticActivation a);
CriticActivation parse_critic_activation(const std::string& name);

/// How the source/target distance matrix is presented to the adaptor.
/// kLiteral feeds the flattened matrix. kPooled feeds the sorted per-row
/// means, the sorted per-column means, then the global mean, min and max,
/// which makes the adaptor blind to the order of sample rows.
enum class AdaptorVariant { kLiteral, kPooled };

std::string to_string(AdaptorVariant v);
AdaptorVariant parse_adaptor_variant(const std::string& name);

std::size_t adaptor_input_width(std::size_t source_rows, std::size_t target_rows,
                                AdaptorVariant variant);

/// Mean negative log-probability of the true class. Sets *clamped when a
/// true-class probability fell below kProbabilityFloor.
ad::Var classification_loss(ad::Var probabilities, std::span<const std::size_t> labels,
                            bool* clamped = nullptr);

/// Domain cross-entropy with source = 1 and target = 0:
/// -mean log D(F_s) - mean log(1 - D(F_t)). With `reverse` the features
/// pass through gradient_reversal first, so minimizing this trains the
/// discriminator and pushes the feature extractor the other way.
ad::Var domain_adversarial_loss(const BoundMlp& discriminator, ad::Var source_features,
                                ad::Var target_features, bool reverse = true);

/// Row-major flattening of the squared-distance matrix between feature rows.
ad::Var gram_features(ad::Var source_features, ad::Var target_features);

ad::Var adaptor_input(ad::Var source_features, ad::Var target_features, AdaptorVariant variant);

/// Scalar output of the adaptor on the distance matrix of the two batches.
ad::Var task_semantic_loss(const BoundMlp& adaptor, ad::Var source_features,
                           ad::Var target_features, AdaptorVariant variant);

ad::Var critic_activation(ad::Var x, CriticActivation kind);

/// Feature-critic loss on fixed feature matrices: sigma(M(new) - M(old)),
/// averaged over its single pivot evaluation. Only the adaptor receives
/// gradient; the four feature matrices enter as constants.
ad::Var feature_critic_loss(const BoundMlp& adaptor, const Tensor& source_old,
                            const Tensor& target_old, const Tensor& source_new,
                            const Tensor& target_new, CriticActivation sigma,
                            AdaptorVariant variant);

struct LossTerms {
  ad::Var total;
  ad::Var cls;
  ad::Var feat;  // invalid when lambda == 0
  ad::Var task;  // invalid when mu == 0
  bool clamped = false;
};

struct LossBreakdown {
  double total = 0.0;
  double cls = 0.0;
  double feat = 0.0;
  double task = 0.0;
  double weighted_feat = 0.0;
  double weighted_task = 0.0;
  bool clamped = false;
};

/// L_cls + lambda * L_feat + mu * L_task on one source/target batch pair.
/// A term whose weight is zero is not built at all, so lambda == 0 leaves
/// the discriminator out of the graph and mu == 0 never reads the adaptor.
LossTerms total_loss(ad::Graph& graph, const BoundMlp& feature, const BoundMlp& classifier,
                     const BoundMlp& discriminator, const BoundMlp* adaptor,
                     const Tensor& source_x, std::span<const std::size_t> source_labels,
                     const Tensor& target_x, const LossWeights& weights, AdaptorVariant variant);

LossBreakdown breakdown(const LossTerms& terms, const LossWeights& weights);

}  // namespace tanet

#endif  // TAN_OBJECTIVES_HPP
