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

#include "tan/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>

namespace tanet {

void TrainConfig::validate() const {
  weights.validate();
  for (double r : {alpha, beta, gamma, upsilon}) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw std::invalid_argument("learning rates and schedule constants must be positive");
    }
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must lie in [0, 1)");
  if (m == 0 || num_classes < 2) throw std::invalid_argument("m must be >= 1 and num_classes >= 2");
  if (batch_per_domain != m * num_classes) {
    throw std::invalid_argument("batch_per_domain (" + std::to_string(batch_per_domain) +
                                ") must equal m * num_classes (" +
                                std::to_string(m * num_classes) + ")");
  }
  if (feature_dim == 0 || mmd_probe < 2) {
    throw std::invalid_argument("feature_dim must be positive and mmd_probe at least 2");
  }
  if (adaptor_output != Activation::kIdentity && adaptor_output != Activation::kSoftplus) {
    throw std::invalid_argument("adaptor_output must be identity or softplus");
  }
}

NetworkSpecs TrainConfig::network_specs(std::size_t input_dim) const {
  NetworkSpecs s;
  s.feature.widths.push_back(input_dim);
  s.feature.widths.insert(s.feature.widths.end(), feature_hidden.begin(), feature_hidden.end());
  s.feature.widths.push_back(feature_dim);
  s.classifier = {{feature_dim, num_classes}, Activation::kRelu, Activation::kSoftmax};
  s.discriminator.widths.push_back(feature_dim);
  s.discriminator.widths.insert(s.discriminator.widths.end(), discriminator_hidden.begin(),
                                discriminator_hidden.end());
  s.discriminator.widths.push_back(1);
  s.discriminator.output = Activation::kSigmoid;
  s.adaptor.widths.push_back(
      adaptor_input_width(batch_per_domain, batch_per_domain, adaptor_variant));
  s.adaptor.widths.insert(s.adaptor.widths.end(), adaptor_hidden.begin(), adaptor_hidden.end());
  s.adaptor.widths.push_back(1);
  s.adaptor.output = adaptor_output;
  return s;
}

double lr_schedule(double alpha, double gamma, double upsilon, std::size_t k) {
  return alpha * std::pow(1.0 + gamma * static_cast<double>(k), -upsilon);
}

std::vector<Tensor> NesterovSgd::lookahead(std::span<const Tensor* const> params) const {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor t = *params[i];
    if (i < velocity_.size()) {
      for (std::size_t j = 0; j < t.size(); ++j) t[j] += momentum_ * velocity_[i][j];
    }
    out.push_back(std::move(t));
  }
  return out;
}

void NesterovSgd::apply(std::span<Tensor* const> params, std::span<const Tensor> grads, double lr) {
  if (grads.size() != params.size()) throw std::invalid_argument("NesterovSgd: gradient count mismatch");
  if (velocity_.empty()) {
    for (const Tensor* p : params) velocity_.emplace_back(p->shape());
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& v = velocity_[i];
    Tensor& w = *params[i];
    if (!grads[i].same_shape(w) || !v.same_shape(w)) {
      throw ShapeError("NesterovSgd: shape mismatch " + to_string(w.shape()) + " vs " +
                       to_string(grads[i].shape()));
    }
    for (std::size_t j = 0; j < w.size(); ++j) {
      v[j] = momentum_ * v[j] - lr * grads[i][j];
      w[j] += v[j];
    }
  }
}

namespace {

std::vector<Tensor> gradients_of(const ad::Graph& g, const std::vector<const BoundMlp*>& nets,
                                 const std::vector<const MlpParams*>& params) {
  std::vector<Tensor> out;
  for (std::size_t n = 0; n < nets.size(); ++n) {
    MlpParams grads = collect_gradients(g, *nets[n], *params[n]);
    for (DenseLayer& l : grads.layers) {
      out.push_back(std::move(l.weight));
      out.push_back(std::move(l.bias));
    }
  }
  return out;
}

bool all_finite(const std::vector<Tensor>& ts) {
  return std::all_of(ts.begin(), ts.end(), [](const Tensor& t) { return t.all_finite(); });
}

}  // namespace

std::vector<Tensor> main_gradients(const NetworkParams& params, const AdaptorParams& adaptor,
                                   const Tensor& source_x,
                                   std::span<const std::size_t> source_labels,
                                   const Tensor& target_x, const LossWeights& weights,
                                   AdaptorVariant variant, LossBreakdown* out) {
  ad::Graph g;
  const BoundMlp phi = bind(g, params.phi, true);
  const BoundMlp psi = bind(g, params.psi, true);
  const BoundMlp omega = bind(g, params.omega, true);
  std::optional<BoundMlp> theta;
  if (weights.mu > 0.0) theta = bind(g, adaptor.theta, false);

  const LossTerms terms = total_loss(g, phi, psi, omega, theta ? &*theta : nullptr, source_x,
                                     source_labels, target_x, weights, variant);
  const std::vector<const BoundMlp*> nets{&phi, &psi, &omega};
  const std::vector<const MlpParams*> layout{&params.phi, &params.psi, &params.omega};
  g.backward(terms.total);
  std::vector<Tensor> grads = gradients_of(g, nets, layout);
  if (out) *out = breakdown(terms, weights);

  if (!all_finite(grads)) {
    std::string culprit = "total";
    const std::pair<const char*, ad::Var> named[] = {
        {"L_cls", terms.cls}, {"L_feat", terms.feat}, {"L_task", terms.task}};
    for (const auto& [name, term] : named) {
      if (!term.valid()) continue;
      if (!term.value().all_finite()) {
        culprit = name;
        break;
      }
      g.backward(term);
      if (!all_finite(gradients_of(g, nets, layout))) {
        culprit = name;
        break;
      }
    }
    throw TrainingAborted("non-finite gradient in the main update, from " + culprit);
  }
  return grads;
}

LossBreakdown update_main(NetworkParams& params, const AdaptorParams& adaptor,
                          const Tensor& source_x, std::span<const std::size_t> source_labels,
                          const Tensor& target_x, const LossWeights& weights,
                          AdaptorVariant variant, NesterovSgd& optimizer, double lr) {
  NetworkParams ahead = params;
  {
    const std::vector<Tensor> shifted = optimizer.lookahead(parameter_tensors(params));
    std::vector<Tensor*> slots = parameter_tensors(ahead);
    for (std::size_t i = 0; i < slots.size(); ++i) *slots[i] = shifted[i];
  }
  LossBreakdown b;
  const std::vector<Tensor> grads =
      main_gradients(ahead, adaptor, source_x, source_labels, target_x, weights, variant, &b);
  optimizer.apply(parameter_tensors(params), grads, lr);
  return b;
}

namespace {

struct PivotFeatures {
  Tensor source_old, target_old, source_new, target_new;
};

PivotFeatures pivot_features(const PivotSet& pivot, const Tensor& source_x, const Tensor& target_x,
                             const NetworkParams& previous, const NetworkParams& current) {
  const PivotRows rows = pivot_rows(pivot);
  const Tensor xs = source_x.gather_rows(rows.source);
  const Tensor xt = target_x.gather_rows(rows.target);
  return {forward_feature(previous, xs), forward_feature(previous, xt),
          forward_feature(current, xs), forward_feature(current, xt)};
}

}  // namespace

double feature_critic_gradient(const AdaptorParams& adaptor, const PivotSet& pivot,
                               const Tensor& source_x, const Tensor& target_x,
                               const NetworkParams& previous, const NetworkParams& current,
                               CriticActivation sigma, AdaptorVariant variant,
                               MlpParams* gradient) {
  const PivotFeatures f = pivot_features(pivot, source_x, target_x, previous, current);
  ad::Graph g;
  const BoundMlp theta = bind(g, adaptor.theta, true);
  ad::Var loss = feature_critic_loss(theta, f.source_old, f.target_old, f.source_new,
                                     f.target_new, sigma, variant);
  g.backward(loss);
  if (gradient) *gradient = collect_gradients(g, theta, adaptor.theta);
  return loss.value().item();
}

std::optional<double> update_adaptor(AdaptorParams& adaptor, const PivotSet& pivot,
                                     const Tensor& source_x, const Tensor& target_x,
                                     const NetworkParams& previous, const NetworkParams& current,
                                     double beta, CriticActivation sigma, AdaptorVariant variant) {
  if (!pivot.class_complete()) return std::nullopt;
  MlpParams grad;
  const double loss = feature_critic_gradient(adaptor, pivot, source_x, target_x, previous,
                                              current, sigma, variant, &grad);
  std::vector<Tensor*> slots = parameter_tensors(adaptor.theta);
  std::vector<Tensor*> grads = parameter_tensors(grad);
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!grads[i]->all_finite()) throw TrainingAborted("non-finite gradient in the adaptor update, from L_val");
  }
  for (std::size_t i = 0; i < slots.size(); ++i) {
    for (std::size_t j = 0; j < slots[i]->size(); ++j) (*slots[i])[j] -= beta * (*grads[i])[j];
  }
  return loss;
}

void TrainLog::write_csv_row(std::ostream& out, const EpochRecord& r) {
  out << r.epoch << std::setprecision(17) << ',' << r.l_cls << ',' << r.l_feat << ','
      << r.l_task << ',' << r.l_val << ',' << r.mmd << ',' << r.validation.precision << ','
      << r.validation.recall << ',' << r.validation.f1 << ',' << r.validation.accuracy << ','
      << r.lr << '\n';
}

void TrainLog::write_csv(std::ostream& out) const {
  out << kCsvHeader << '\n';
  for (const EpochRecord& r : epochs) write_csv_row(out, r);
}

Prediction predict(const NetworkParams& params, const Tensor& x) {
  Prediction p;
  p.probabilities = forward_classifier(params, forward_feature(params, x));
  p.labels = pseudo_label_from_probabilities(p.probabilities).labels;
  return p;
}

MetricsReport evaluate(const NetworkParams& params, const LabeledSplit& split, std::size_t positive) {
  const Prediction p = predict(params, split.x);
  MetricsReport r = compute_prf(p.labels, split.labels, positive);
  const bool both = std::any_of(split.labels.begin(), split.labels.end(),
                                [positive](std::size_t l) { return l == positive; }) &&
                    std::any_of(split.labels.begin(), split.labels.end(),
                                [positive](std::size_t l) { return l != positive; });
  if (both) {
    std::vector<double> scores(split.size());
    for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = p.probabilities(i, positive);
    r.auc = roc_auc(scores, split.labels, positive);
  }
  return r;
}

namespace {

/// Independent stream per (seed, purpose, index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t purpose, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    purpose, static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

enum : std::uint32_t { kInitStream = 0, kShuffleStream = 1, kPivotStream = 2 };

Tensor head_rows(const Tensor& x, std::size_t n) {
  std::vector<std::size_t> idx(std::min(n, x.rows()));
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return x.gather_rows(idx);
}

}  // namespace

FitResult fit(const TrainConfig& config, const DomainDataset& data, const FitHooks& hooks) {
  config.validate();
  auto [params, adaptor] =
      init_networks(config.network_specs(data.feature_width()), derive_seed(config.seed, kInitStream, 0));
  return fit_from(config, data, std::move(params), std::move(adaptor), hooks);
}

FitResult fit_from(const TrainConfig& config, const DomainDataset& data, NetworkParams params,
                   AdaptorParams adaptor, const FitHooks& hooks) {
  config.validate();
  data.validate();
  const std::size_t batch = config.batch_per_domain;
  const std::size_t ns = data.source.size(), nt = data.target_train.rows();
  const std::size_t iterations = (std::max(ns, nt) + batch - 1) / batch;

  FitResult result{std::move(params), std::move(adaptor), {}};
  NetworkParams& main = result.params;
  NesterovSgd optimizer(config.momentum);
  std::mt19937_64 shuffle_rng(derive_seed(config.seed, kShuffleStream, 0));
  const Tensor probe_source = head_rows(data.source.x, config.mmd_probe);
  const Tensor probe_target = head_rows(data.target_train, config.mmd_probe);

  std::vector<std::size_t> perm_s(ns), perm_t(nt), rows_s(batch), rows_t(batch);
  std::vector<std::size_t> labels(batch);
  std::size_t k = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const NetworkParams assist = clone_params(main);
    std::iota(perm_s.begin(), perm_s.end(), std::size_t{0});
    std::iota(perm_t.begin(), perm_t.end(), std::size_t{0});
    std::shuffle(perm_s.begin(), perm_s.end(), shuffle_rng);
    std::shuffle(perm_t.begin(), perm_t.end(), shuffle_rng);

    EpochRecord rec;
    rec.epoch = epoch;
    for (std::size_t b = 0; b < iterations; ++b) {
      for (std::size_t i = 0; i < batch; ++i) {
        rows_s[i] = perm_s[(b * batch + i) % ns];
        rows_t[i] = perm_t[(b * batch + i) % nt];
        labels[i] = data.source.labels[rows_s[i]];
      }
      const Tensor xs = data.source.x.gather_rows(rows_s);
      const Tensor xt = data.target_train.gather_rows(rows_t);
      rec.lr = lr_schedule(config.alpha, config.gamma, config.upsilon, k);
      const LossBreakdown bd = update_main(main, result.adaptor, xs, labels, xt, config.weights,
                                           config.adaptor_variant, optimizer, rec.lr);
      ++k;
      rec.l_cls += bd.cls;
      rec.l_feat += bd.feat;
      rec.l_task += bd.task;
      if (hooks.on_batch) hooks.on_batch(main, assist);
    }
    rec.l_cls /= static_cast<double>(iterations);
    rec.l_feat /= static_cast<double>(iterations);
    rec.l_task /= static_cast<double>(iterations);

    const PivotSet pivot = select_pivot(main, data.source.x, data.source.labels, data.target_train,
                                        config.num_classes, config.m, config.pivot_strategy,
                                        derive_seed(config.seed, kPivotStream, epoch));
    rec.pivot_warnings = pivot.warnings;
    if (hooks.on_pivot) hooks.on_pivot(epoch, pivot);
    if (config.weights.mu > 0.0) {
      const std::optional<double> l_val =
          update_adaptor(result.adaptor, pivot, data.source.x, data.target_train, assist, main,
                         config.beta, config.sigma, config.adaptor_variant);
      if (l_val) {
        rec.l_val = *l_val;
        rec.adaptor_updated = true;
        if (hooks.on_adaptor_update) hooks.on_adaptor_update(epoch, result.adaptor);
      } else {
        rec.pivot_warnings.push_back("adaptor update skipped: pivot set has an empty class");
      }
    }

    rec.mmd = mmd(forward_feature(main, probe_source), forward_feature(main, probe_target));
    rec.validation = evaluate(main, data.target_validation);
    result.log.epochs.push_back(rec);
    if (hooks.on_epoch) hooks.on_epoch(result.log.epochs.back());
  }
  return result;
}

}  // namespace tanet
