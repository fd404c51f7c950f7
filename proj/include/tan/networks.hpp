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

#ifndef TAN_NETWORKS_HPP
#define TAN_NETWORKS_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "tan/autodiff.hpp"
#include "tan/tensor.hpp"

namespace tanet {

enum class Activation { kIdentity, kRelu, kTanh, kSigmoid, kSoftmax, kSoftplus };

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);

struct MlpSpec {
  /// Input width first, output width last.
  std::vector<std::size_t> widths;
  Activation hidden = Activation::kRelu;
  Activation output = Activation::kIdentity;

  std::size_t input_width() const { return widths.front(); }
  std::size_t output_width() const { return widths.back(); }
  /// Throws std::invalid_argument on fewer than two widths, a zero width,
  /// or activations outside their allowed sets.
  void validate() const;
};

struct DenseLayer {
  Tensor weight;  // fan_in x fan_out
  Tensor bias;    // 1 x fan_out
};

struct MlpParams {
  MlpSpec spec;
  std::vector<DenseLayer> layers;

  friend bool operator==(const MlpParams& a, const MlpParams& b) {
    if (a.spec.widths != b.spec.widths || a.layers.size() != b.layers.size()) return false;
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
      if (!(a.layers[i].weight == b.layers[i].weight) || !(a.layers[i].bias == b.layers[i].bias))
        return false;
    }
    return true;
  }
};

/// Feature extractor, classifier and domain discriminator, updated together.
struct NetworkParams {
  MlpParams phi;
  MlpParams psi;
  MlpParams omega;

  friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

/// Task semantic adaptor, updated by the feature-critic step only.
struct AdaptorParams {
  MlpParams theta;

  friend bool operator==(const AdaptorParams&, const AdaptorParams&) = default;
};

struct NetworkSpecs {
  MlpSpec feature;
  MlpSpec classifier;
  MlpSpec discriminator;
  MlpSpec adaptor;

  /// input_dim -> 64 -> 32 features, 32 -> classes softmax classifier,
  /// 32 -> 32 -> 1 sigmoid discriminator, adaptor_input -> 128 -> 64 -> 1.
  static NetworkSpecs defaults(std::size_t input_dim, std::size_t num_classes,
                               std::size_t adaptor_input);
};

/// Zero biases; weights uniform in +-sqrt(6 / (fan_in + fan_out)).
MlpParams init_mlp(const MlpSpec& spec, std::uint64_t seed);

/// Draws phi, psi, omega and theta from one seeded stream. Rejects
/// inconsistent widths between the four networks.
std::pair<NetworkParams, AdaptorParams> init_networks(const NetworkSpecs& specs,
                                                      std::uint64_t seed);

MlpParams zero_params(const MlpSpec& spec);

NetworkParams clone_params(const NetworkParams& params);

/// Parameters of one MLP entered into a graph.
struct BoundMlp {
  const MlpSpec* spec = nullptr;
  std::vector<std::pair<ad::Var, ad::Var>> layers;  // (weight, bias)
};

/// Trainable binds create parameter leaves; otherwise constants.
BoundMlp bind(ad::Graph& graph, const MlpParams& params, bool trainable);
ad::Var forward(const BoundMlp& net, ad::Var x);

/// Gradients collected for a trainable bind, laid out like the parameters.
MlpParams collect_gradients(const ad::Graph& graph, const BoundMlp& net, const MlpParams& like);

// Value-level forwards on a throwaway graph.
Tensor forward(const MlpParams& params, const Tensor& x);
Tensor forward_feature(const NetworkParams& params, const Tensor& x);
Tensor forward_classifier(const NetworkParams& params, const Tensor& features);
Tensor forward_discriminator(const NetworkParams& params, const Tensor& features);

/// Flat views in a fixed order: phi, psi, omega; per layer weight then bias.
std::vector<Tensor*> parameter_tensors(NetworkParams& params);
std::vector<const Tensor*> parameter_tensors(const NetworkParams& params);
std::vector<Tensor*> parameter_tensors(MlpParams& params);
std::vector<std::string> parameter_names(const NetworkParams& params);

void save_checkpoint(const std::filesystem::path& path, const NetworkParams& params,
                     const AdaptorParams& adaptor);
/// Loads values into bundles whose specs are already set; shapes must match.
void load_checkpoint(const std::filesystem::path& path, NetworkParams& params,
                     AdaptorParams& adaptor);

}  // namespace tanet

#endif  // TAN_NETWORKS_HPP
