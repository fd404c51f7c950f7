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

#include "tan/networks.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace tanet {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kSoftmax: return "softmax";
    case Activation::kSoftplus: return "softplus";
  }
  return "unknown";
}

Activation parse_activation(const std::string& name) {
  for (Activation a : {Activation::kIdentity, Activation::kRelu, Activation::kTanh,
                       Activation::kSigmoid, Activation::kSoftmax, Activation::kSoftplus}) {
    if (to_string(a) == name) return a;
  }
  throw std::invalid_argument("unknown activation '" + name + "'");
}

void MlpSpec::validate() const {
  if (widths.size() < 2) throw std::invalid_argument("MLP needs at least an input and an output width");
  for (std::size_t w : widths) {
    if (w == 0) throw std::invalid_argument("MLP widths must be positive");
  }
  if (hidden != Activation::kRelu && hidden != Activation::kTanh) {
    throw std::invalid_argument("hidden activation must be relu or tanh, got " + to_string(hidden));
  }
  if (output != Activation::kIdentity && output != Activation::kSigmoid &&
      output != Activation::kSoftmax && output != Activation::kSoftplus) {
    throw std::invalid_argument("output activation must be identity, sigmoid, softmax or softplus, got " +
                                to_string(output));
  }
}

NetworkSpecs NetworkSpecs::defaults(std::size_t input_dim, std::size_t num_classes,
                                    std::size_t adaptor_input) {
  NetworkSpecs s;
  s.feature = {{input_dim, 64, 32}, Activation::kRelu, Activation::kIdentity};
  s.classifier = {{32, num_classes}, Activation::kRelu, Activation::kSoftmax};
  s.discriminator = {{32, 32, 1}, Activation::kRelu, Activation::kSigmoid};
  s.adaptor = {{adaptor_input, 128, 64, 1}, Activation::kRelu, Activation::kIdentity};
  return s;
}

namespace {

MlpParams init_with(const MlpSpec& spec, std::mt19937_64& rng) {
  spec.validate();
  MlpParams p{spec, {}};
  for (std::size_t l = 0; l + 1 < spec.widths.size(); ++l) {
    const std::size_t fan_in = spec.widths[l], fan_out = spec.widths[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    DenseLayer layer{Tensor({fan_in, fan_out}), Tensor({1, fan_out})};
    for (double& w : layer.weight.values()) w = dist(rng);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

}  // namespace

MlpParams init_mlp(const MlpSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return init_with(spec, rng);
}

std::pair<NetworkParams, AdaptorParams> init_networks(const NetworkSpecs& specs,
                                                      std::uint64_t seed) {
  const std::size_t feature_width = specs.feature.widths.empty() ? 0 : specs.feature.output_width();
  auto check = [feature_width](const MlpSpec& s, const char* name) {
    s.validate();
    if (s.input_width() != feature_width) {
      throw std::invalid_argument(std::string(name) + " input width " +
                                  std::to_string(s.input_width()) +
                                  " does not match feature width " + std::to_string(feature_width));
    }
  };
  specs.feature.validate();
  check(specs.classifier, "classifier");
  check(specs.discriminator, "discriminator");
  specs.adaptor.validate();
  if (specs.adaptor.output_width() != 1) throw std::invalid_argument("adaptor must output a scalar");
  if (specs.discriminator.output_width() != 1)
    throw std::invalid_argument("discriminator must output one probability");

  std::mt19937_64 rng(seed);
  NetworkParams net;
  net.phi = init_with(specs.feature, rng);
  net.psi = init_with(specs.classifier, rng);
  net.omega = init_with(specs.discriminator, rng);
  AdaptorParams adaptor{init_with(specs.adaptor, rng)};
  return {std::move(net), std::move(adaptor)};
}

MlpParams zero_params(const MlpSpec& spec) {
  spec.validate();
  MlpParams p{spec, {}};
  for (std::size_t l = 0; l + 1 < spec.widths.size(); ++l) {
    p.layers.push_back({Tensor({spec.widths[l], spec.widths[l + 1]}), Tensor({1, spec.widths[l + 1]})});
  }
  return p;
}

NetworkParams clone_params(const NetworkParams& params) { return params; }

BoundMlp bind(ad::Graph& graph, const MlpParams& params, bool trainable) {
  BoundMlp out{&params.spec, {}};
  out.layers.reserve(params.layers.size());
  for (const DenseLayer& layer : params.layers) {
    if (trainable) {
      out.layers.emplace_back(graph.parameter(layer.weight), graph.parameter(layer.bias));
    } else {
      out.layers.emplace_back(graph.constant(layer.weight), graph.constant(layer.bias));
    }
  }
  return out;
}

namespace {

ad::Var activate(ad::Var x, Activation a) {
  switch (a) {
    case Activation::kIdentity: return x;
    case Activation::kRelu: return ad::relu(x);
    case Activation::kTanh: return ad::tanh(x);
    case Activation::kSigmoid: return ad::sigmoid(x);
    case Activation::kSoftmax: return ad::softmax_rows(x);
    case Activation::kSoftplus: return ad::softplus(x);
  }
  return x;
}

}  // namespace

ad::Var forward(const BoundMlp& net, ad::Var x) {
  if (x.value().cols() != net.spec->input_width()) {
    throw ShapeError("MLP input width " + std::to_string(net.spec->input_width()) +
                     " does not match batch of shape " + to_string(x.shape()));
  }
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    x = ad::add_bias(ad::matmul(x, net.layers[l].first), net.layers[l].second);
    x = activate(x, l + 1 == net.layers.size() ? net.spec->output : net.spec->hidden);
  }
  return x;
}

MlpParams collect_gradients(const ad::Graph& graph, const BoundMlp& net, const MlpParams& like) {
  MlpParams g{like.spec, {}};
  for (const auto& [w, b] : net.layers) g.layers.push_back({graph.grad(w), graph.grad(b)});
  return g;
}

Tensor forward(const MlpParams& params, const Tensor& x) {
  ad::Graph g;
  const BoundMlp net = bind(g, params, false);
  return forward(net, g.constant(x)).value();
}

Tensor forward_feature(const NetworkParams& params, const Tensor& x) { return forward(params.phi, x); }

Tensor forward_classifier(const NetworkParams& params, const Tensor& features) {
  return forward(params.psi, features);
}

Tensor forward_discriminator(const NetworkParams& params, const Tensor& features) {
  return forward(params.omega, features);
}

std::vector<Tensor*> parameter_tensors(MlpParams& params) {
  std::vector<Tensor*> out;
  for (DenseLayer& l : params.layers) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::vector<Tensor*> parameter_tensors(NetworkParams& params) {
  std::vector<Tensor*> out;
  for (MlpParams* p : {&params.phi, &params.psi, &params.omega}) {
    auto part = parameter_tensors(*p);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::vector<const Tensor*> parameter_tensors(const NetworkParams& params) {
  auto mutable_view = parameter_tensors(const_cast<NetworkParams&>(params));
  return {mutable_view.begin(), mutable_view.end()};
}

namespace {

void append_names(std::vector<std::string>& out, const std::string& prefix, const MlpParams& p) {
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    out.push_back(prefix + "." + std::to_string(l) + ".weight");
    out.push_back(prefix + "." + std::to_string(l) + ".bias");
  }
}

void to_json_into(nlohmann::json& out, const std::string& prefix, const MlpParams& p) {
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto put = [&](const std::string& name, const Tensor& t) {
      out[prefix + "." + std::to_string(l) + "." + name] = {
          {"shape", t.shape()},
          {"values", std::vector<double>(t.values().begin(), t.values().end())}};
    };
    put("weight", p.layers[l].weight);
    put("bias", p.layers[l].bias);
  }
}

void from_json_into(const nlohmann::json& in, const std::string& prefix, MlpParams& p) {
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto get = [&](const std::string& name, Tensor& t) {
      const std::string key = prefix + "." + std::to_string(l) + "." + name;
      if (!in.contains(key)) throw std::runtime_error("checkpoint is missing '" + key + "'");
      Tensor loaded(in.at(key).at("shape").get<Shape>(), in.at(key).at("values").get<std::vector<double>>());
      if (!loaded.same_shape(t)) {
        throw ShapeError("checkpoint entry '" + key + "' has shape " + to_string(loaded.shape()) +
                         ", expected " + to_string(t.shape()));
      }
      t = std::move(loaded);
    };
    get("weight", p.layers[l].weight);
    get("bias", p.layers[l].bias);
  }
}

}  // namespace

std::vector<std::string> parameter_names(const NetworkParams& params) {
  std::vector<std::string> out;
  append_names(out, "phi", params.phi);
  append_names(out, "psi", params.psi);
  append_names(out, "omega", params.omega);
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const NetworkParams& params,
                     const AdaptorParams& adaptor) {
  nlohmann::json j = nlohmann::json::object();
  to_json_into(j, "phi", params.phi);
  to_json_into(j, "psi", params.psi);
  to_json_into(j, "omega", params.omega);
  to_json_into(j, "theta", adaptor.theta);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write checkpoint " + tmp.string());
    out << j.dump(1) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

void load_checkpoint(const std::filesystem::path& path, NetworkParams& params,
                     AdaptorParams& adaptor) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  const nlohmann::json j = nlohmann::json::parse(in);
  from_json_into(j, "phi", params.phi);
  from_json_into(j, "psi", params.psi);
  from_json_into(j, "omega", params.omega);
  from_json_into(j, "theta", adaptor.theta);
}

}  // namespace tanet
