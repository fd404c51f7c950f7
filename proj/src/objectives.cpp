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

#include "tan/objectives.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace tanet {

void LossWeights::validate() const {
  if (!std::isfinite(lambda) || !std::isfinite(mu) || lambda < 0.0 || mu < 0.0) {
    throw std::invalid_argument("loss weights must be finite and non-negative");
  }
}

std::string to_string(CriticActivation a) {
  switch (a) {
    case CriticActivation::kTanh: return "tanh";
    case CriticActivation::kSigmoid: return "sigmoid";
    case CriticActivation::kSoftplus: return "softplus";
    case CriticActivation::kRelu: return "relu";
  }
  return "unknown";
}

CriticActivation parse_critic_activation(const std::string& name) {
  for (auto a : {CriticActivation::kTanh, CriticActivation::kSigmoid, CriticActivation::kSoftplus,
                 CriticActivation::kRelu}) {
    if (to_string(a) == name) return a;
  }
  throw std::invalid_argument("unknown critic activation '" + name + "'");
}

std::string to_string(AdaptorVariant v) {
  return v == AdaptorVariant::kLiteral ? "literal" : "pooled";
}

AdaptorVariant parse_adaptor_variant(const std::string& name) {
  if (name == "literal") return AdaptorVariant::kLiteral;
  if (name == "pooled") return AdaptorVariant::kPooled;
  throw std::invalid_argument("unknown adaptor variant '" + name + "'");
}

std::size_t adaptor_input_width(std::size_t source_rows, std::size_t target_rows,
                                AdaptorVariant variant) {
  return variant == AdaptorVariant::kLiteral ? source_rows * target_rows
                                             : source_rows + target_rows + 3;
}

ad::Var classification_loss(ad::Var probabilities, std::span<const std::size_t> labels,
                            bool* clamped) {
  const Tensor& p = probabilities.value();
  if (labels.size() != p.rows()) {
    throw ShapeError("classification_loss: " + std::to_string(labels.size()) +
                     " labels for probabilities of shape " + to_string(p.shape()));
  }
  ad::Var picked = ad::pick_columns(probabilities, labels);
  if (clamped) {
    *clamped = false;
    for (double v : picked.value().values()) *clamped = *clamped || v < kProbabilityFloor;
  }
  return ad::scale(ad::mean(ad::log(ad::clamp(picked, kProbabilityFloor, 1.0))), -1.0);
}

ad::Var domain_adversarial_loss(const BoundMlp& discriminator, ad::Var source_features,
                                ad::Var target_features, bool reverse) {
  if (source_features.value().rows() == 0 || target_features.value().rows() == 0) {
    throw std::invalid_argument("domain_adversarial_loss: empty batch");
  }
  if (reverse) {
    source_features = ad::gradient_reversal(source_features);
    target_features = ad::gradient_reversal(target_features);
  }
  constexpr double hi = 1.0 - kProbabilityFloor;
  ad::Var d_s = ad::clamp(forward(discriminator, source_features), kProbabilityFloor, hi);
  ad::Var d_t = ad::clamp(forward(discriminator, target_features), kProbabilityFloor, hi);
  ad::Var source_term = ad::mean(ad::log(d_s));
  ad::Var target_term = ad::mean(ad::log(ad::shift(ad::scale(d_t, -1.0), 1.0)));
  return ad::scale(ad::add(source_term, target_term), -1.0);
}

ad::Var gram_features(ad::Var source_features, ad::Var target_features) {
  return ad::flatten(ad::pairwise_sq_dist(source_features, target_features));
}

ad::Var adaptor_input(ad::Var source_features, ad::Var target_features, AdaptorVariant variant) {
  if (variant == AdaptorVariant::kLiteral) return gram_features(source_features, target_features);
  ad::Var gram = ad::pairwise_sq_dist(source_features, target_features);
  const std::array<ad::Var, 5> parts{
      ad::sort_values(ad::row_means(gram)), ad::sort_values(ad::col_means(gram)), ad::mean(gram),
      ad::min_all(gram), ad::max_all(gram)};
  return ad::concat(parts);
}

ad::Var task_semantic_loss(const BoundMlp& adaptor, ad::Var source_features,
                           ad::Var target_features, AdaptorVariant variant) {
  ad::Var in = adaptor_input(source_features, target_features, variant);
  if (in.value().cols() != adaptor.spec->input_width()) {
    throw ShapeError("task_semantic_loss: adaptor expects width " +
                     std::to_string(adaptor.spec->input_width()) + ", batches give " +
                     to_string(in.shape()) + " from feature shapes " +
                     to_string(source_features.shape()) + " and " +
                     to_string(target_features.shape()));
  }
  return ad::mean(forward(adaptor, in));
}

ad::Var critic_activation(ad::Var x, CriticActivation kind) {
  switch (kind) {
    case CriticActivation::kTanh: return ad::tanh(x);
    case CriticActivation::kSigmoid: return ad::sigmoid(x);
    case CriticActivation::kSoftplus: return ad::softplus(x);
    case CriticActivation::kRelu: return ad::relu(x);
  }
  return x;
}

ad::Var feature_critic_loss(const BoundMlp& adaptor, const Tensor& source_old,
                            const Tensor& target_old, const Tensor& source_new,
                            const Tensor& target_new, CriticActivation sigma,
                            AdaptorVariant variant) {
  if (source_old.rows() != target_old.rows() || source_new.rows() != target_new.rows() ||
      source_old.rows() != source_new.rows()) {
    throw std::invalid_argument("feature_critic_loss: pivot halves differ in size (" +
                                to_string(source_new.shape()) + " vs " +
                                to_string(target_new.shape()) + ")");
  }
  if (source_new.rows() == 0) throw std::invalid_argument("feature_critic_loss: empty pivot set");
  ad::Graph& g = adaptor.layers.front().first.graph();
  ad::Var score_new = task_semantic_loss(adaptor, g.constant(source_new), g.constant(target_new), variant);
  ad::Var score_old = task_semantic_loss(adaptor, g.constant(source_old), g.constant(target_old), variant);
  return ad::mean(critic_activation(ad::sub(score_new, score_old), sigma));
}

LossTerms total_loss(ad::Graph& graph, const BoundMlp& feature, const BoundMlp& classifier,
                     const BoundMlp& discriminator, const BoundMlp* adaptor,
                     const Tensor& source_x, std::span<const std::size_t> source_labels,
                     const Tensor& target_x, const LossWeights& weights, AdaptorVariant variant) {
  weights.validate();
  LossTerms t;
  ad::Var f_s = forward(feature, graph.constant(source_x));
  t.cls = classification_loss(forward(classifier, f_s), source_labels, &t.clamped);
  t.total = t.cls;
  if (weights.lambda == 0.0 && weights.mu == 0.0) return t;

  ad::Var f_t = forward(feature, graph.constant(target_x));
  if (weights.lambda > 0.0) {
    t.feat = domain_adversarial_loss(discriminator, f_s, f_t, true);
    t.total = ad::add(t.total, ad::scale(t.feat, weights.lambda));
  }
  if (weights.mu > 0.0) {
    if (adaptor == nullptr) throw std::invalid_argument("total_loss: mu > 0 needs an adaptor");
    t.task = task_semantic_loss(*adaptor, f_s, f_t, variant);
    t.total = ad::add(t.total, ad::scale(t.task, weights.mu));
  }
  return t;
}

LossBreakdown breakdown(const LossTerms& terms, const LossWeights& weights) {
  LossBreakdown b;
  b.total = terms.total.value().item();
  b.cls = terms.cls.value().item();
  if (terms.feat.valid()) {
    b.feat = terms.feat.value().item();
    b.weighted_feat = weights.lambda * b.feat;
  }
  if (terms.task.valid()) {
    b.task = terms.task.value().item();
    b.weighted_task = weights.mu * b.task;
  }
  b.clamped = terms.clamped;
  return b;
}

}  // namespace tanet
