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

#ifndef TAN_TRAINER_HPP
#define TAN_TRAINER_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tan/datasets.hpp"
#include "tan/evaluation.hpp"
#include "tan/networks.hpp"
#include "tan/objectives.hpp"
#include "tan/pivot.hpp"

namespace tanet {

/// Raised when training cannot continue, e.g. a non-finite gradient.
class TrainingAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  LossWeights weights{1.0, 0.1};
  double alpha = 0.004;     // base learning rate of the main model
  double beta = 0.0005;     // adaptor learning rate
  double gamma = 0.001;     // schedule rate
  double upsilon = 0.75;    // schedule decay exponent
  double momentum = 0.9;    // Nesterov momentum of the main model
  std::size_t batch_per_domain = 16;
  std::size_t m = 8;
  std::size_t epochs = 40;
  std::uint64_t seed = 0;
  CriticActivation sigma = CriticActivation::kTanh;
  AdaptorVariant adaptor_variant = AdaptorVariant::kLiteral;
  PivotStrategy pivot_strategy = PivotStrategy::kTopM;

  std::size_t num_classes = 2;
  std::vector<std::size_t> feature_hidden{64};
  std::size_t feature_dim = 32;
  std::vector<std::size_t> discriminator_hidden{32};
  std::vector<std::size_t> adaptor_hidden{128, 64};
  /// Output activation of the adaptor; identity or softplus.
  Activation adaptor_output = Activation::kSoftplus;
  /// Rows of each domain used for the per-epoch MMD diagnostic.
  std::size_t mmd_probe = 256;

  /// Requires batch_per_domain == m * num_classes and positive rates.
  void validate() const;
  NetworkSpecs network_specs(std::size_t input_dim) const;
};

/// alpha * (1 + gamma * k)^(-upsilon).
double lr_schedule(double alpha, double gamma, double upsilon, std::size_t k);

/// Nesterov momentum in look-ahead form: the gradient is taken at
/// w + momentum * v, then v <- momentum * v - lr * g and w <- w + v.
class NesterovSgd {
 public:
  explicit NesterovSgd(double momentum) : momentum_(momentum) {}

  /// params + momentum * velocity, in the same layout.
  std::vector<Tensor> lookahead(std::span<const Tensor* const> params) const;
  void apply(std::span<Tensor* const> params, std::span<const Tensor> grads, double lr);

  double momentum() const { return momentum_; }
  const std::vector<Tensor>& velocity() const { return velocity_; }

 private:
  double momentum_;
  std::vector<Tensor> velocity_;
};

/// One Nesterov step on phi, psi and omega. The adaptor is read as a
/// constant; it is not touched at all when weights.mu == 0.
LossBreakdown update_main(NetworkParams& params, const AdaptorParams& adaptor,
                          const Tensor& source_x, std::span<const std::size_t> source_labels,
                          const Tensor& target_x, const LossWeights& weights,
                          AdaptorVariant variant, NesterovSgd& optimizer, double lr);

/// Gradients of the total loss with respect to phi, psi and omega at the
/// given parameters, in parameter_tensors() order.
std::vector<Tensor> main_gradients(const NetworkParams& params, const AdaptorParams& adaptor,
                                   const Tensor& source_x,
                                   std::span<const std::size_t> source_labels,
                                   const Tensor& target_x, const LossWeights& weights,
                                   AdaptorVariant variant, LossBreakdown* out = nullptr);

/// One plain gradient step theta <- theta - beta * grad of the
/// feature-critic loss. Returns the loss, or nullopt (theta untouched) when
/// the pivot set has an empty class.
std::optional<double> update_adaptor(AdaptorParams& adaptor, const PivotSet& pivot,
                                     const Tensor& source_x, const Tensor& target_x,
                                     const NetworkParams& previous, const NetworkParams& current,
                                     double beta, CriticActivation sigma, AdaptorVariant variant);

/// Feature-critic loss value and theta gradient without applying a step.
double feature_critic_gradient(const AdaptorParams& adaptor, const PivotSet& pivot,
                               const Tensor& source_x, const Tensor& target_x,
                               const NetworkParams& previous, const NetworkParams& current,
                               CriticActivation sigma, AdaptorVariant variant,
                               MlpParams* gradient);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double l_cls = 0.0;
  double l_feat = 0.0;
  double l_task = 0.0;
  double l_val = 0.0;
  double mmd = 0.0;
  MetricsReport validation;
  double lr = 0.0;
  bool adaptor_updated = false;
  std::vector<std::string> pivot_warnings;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;

  static constexpr const char* kCsvHeader =
      "epoch,l_cls,l_feat,l_task,l_val,mmd,val_precision,val_recall,val_f1,val_accuracy,lr";
  static void write_csv_row(std::ostream& out, const EpochRecord& r);
  void write_csv(std::ostream& out) const;
};

struct FitHooks {
  /// After each completed epoch.
  std::function<void(const EpochRecord&)> on_epoch;
  /// After each pivot selection.
  std::function<void(std::size_t epoch, const PivotSet&)> on_pivot;
  /// After each main-model step, with the epoch's assist snapshot.
  std::function<void(const NetworkParams& main, const NetworkParams& assist)> on_batch;
  /// After each applied adaptor step.
  std::function<void(std::size_t epoch, const AdaptorParams&)> on_adaptor_update;
};

struct FitResult {
  NetworkParams params;
  AdaptorParams adaptor;
  TrainLog log;
};

/// Per epoch: snapshot the assist model, step the main model over every
/// mini-batch pair, select pivots, then take one adaptor step.
FitResult fit(const TrainConfig& config, const DomainDataset& data, const FitHooks& hooks = {});

/// fit() starting from the given parameters instead of a fresh init.
FitResult fit_from(const TrainConfig& config, const DomainDataset& data, NetworkParams params,
                   AdaptorParams adaptor, const FitHooks& hooks = {});

struct Prediction {
  std::vector<std::size_t> labels;
  Tensor probabilities;
};

Prediction predict(const NetworkParams& params, const Tensor& x);

/// Validation metrics including AUC on the probability of class `positive`.
MetricsReport evaluate(const NetworkParams& params, const LabeledSplit& split,
                       std::size_t positive = 1);

}  // namespace tanet

#endif  // TAN_TRAINER_HPP
