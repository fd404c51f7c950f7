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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <utility>

#include "tan/objectives.hpp"

namespace tanet::testing {

namespace {

double evaluate(const GraphFn& fn, const std::vector<Tensor>& inputs) {
  ad::Graph g;
  std::vector<ad::Var> vars;
  for (const Tensor& t : inputs) vars.push_back(g.parameter(t));
  return fn(g, vars).value().item();
}

std::size_t uniform_int(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Contracts an op's output with fixed random weights so every output
// element carries a distinct upstream gradient.
ad::Var readout(ad::Var y, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Tensor w = random_tensor(rng, y.value().rows(), y.value().cols(), -1.0, 1.0);
  return ad::sum(ad::mul(y, y.graph().constant(w)));
}

struct Check {
  GraphFn fn;
  std::vector<Tensor> inputs;
  std::vector<double> signs;
};

using Maker = std::function<Check(std::mt19937_64&)>;

Maker unary(ad::Var (*op)(ad::Var), double lo = -2.0, double hi = 2.0) {
  return [op, lo, hi](std::mt19937_64& rng) {
    const std::size_t r = uniform_int(rng, 1, 4), c = uniform_int(rng, 1, 4);
    const std::uint64_t s = rng();
    GraphFn fn = [op, s](ad::Graph&, std::span<const ad::Var> v) { return readout(op(v[0]), s); };
    return Check{fn, std::vector<Tensor>{random_tensor(rng, r, c, lo, hi)}, {}};
  };
}

Maker binary_same(ad::Var (*op)(ad::Var, ad::Var)) {
  return [op](std::mt19937_64& rng) {
    const std::size_t r = uniform_int(rng, 1, 4), c = uniform_int(rng, 1, 4);
    const std::uint64_t s = rng();
    GraphFn fn = [op, s](ad::Graph&, std::span<const ad::Var> v) { return readout(op(v[0], v[1]), s); };
    return Check{fn, std::vector<Tensor>{random_tensor(rng, r, c), random_tensor(rng, r, c)}, {}};
  };
}

MlpParams random_mlp(const MlpSpec& spec, std::mt19937_64& rng) {
  MlpParams p = init_mlp(spec, rng());
  for (DenseLayer& l : p.layers) l.bias = random_tensor(rng, 1, l.bias.cols(), -0.5, 0.5);
  return p;
}

std::vector<std::size_t> random_labels(std::mt19937_64& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> y(n);
  for (auto& v : y) v = uniform_int(rng, 0, k - 1);
  return y;
}

void append(std::vector<Tensor>& out, const MlpParams& p) {
  for (const Tensor& t : flat_params(p)) out.push_back(t);
}

const MlpSpec kPhi{{2, 4, 3}, Activation::kTanh, Activation::kIdentity};
const MlpSpec kPsi{{3, 2}, Activation::kRelu, Activation::kSoftmax};
const MlpSpec kOmega{{3, 3, 1}, Activation::kTanh, Activation::kSigmoid};

std::size_t param_count(const MlpSpec& s) { return 2 * (s.widths.size() - 1); }

Maker task_loss(AdaptorVariant variant) {
  return [variant](std::mt19937_64& rng) {
    const std::size_t b = 4;
    const Activation out = rng() % 2 == 0 ? Activation::kIdentity : Activation::kSoftplus;
    const MlpSpec theta{{adaptor_input_width(b, b, variant), 5, 4, 1}, Activation::kTanh, out};
    std::vector<Tensor> in;
    append(in, random_mlp(kPhi, rng));
    append(in, random_mlp(theta, rng));
    const Tensor xs = random_tensor(rng, b, 2), xt = random_tensor(rng, b, 2);
    GraphFn fn = [theta, xs, xt, variant](ad::Graph& g, std::span<const ad::Var> v) {
      const std::size_t np = param_count(kPhi);
      const BoundMlp phi = bound_from_vars(kPhi, v.subspan(0, np));
      const BoundMlp m = bound_from_vars(theta, v.subspan(np));
      return task_semantic_loss(m, forward(phi, g.constant(xs)), forward(phi, g.constant(xt)),
                                variant);
    };
    return Check{fn, in, {}};
  };
}

}  // namespace

Tensor random_tensor(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double lo,
                     double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t({rows, cols});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = u(rng);
  return t;
}

BoundMlp bound_from_vars(const MlpSpec& spec, std::span<const ad::Var> vars) {
  BoundMlp b;
  b.spec = &spec;
  for (std::size_t i = 0; i + 1 < spec.widths.size(); ++i) b.layers.emplace_back(vars[2 * i], vars[2 * i + 1]);
  return b;
}

std::vector<Tensor> flat_params(const MlpParams& p) {
  std::vector<Tensor> out;
  for (const DenseLayer& l : p.layers) {
    out.push_back(l.weight);
    out.push_back(l.bias);
  }
  return out;
}

double max_relative_error(const GraphFn& fn, const std::vector<Tensor>& inputs,
                          const std::vector<double>& signs, double h) {
  ad::Graph g;
  std::vector<ad::Var> vars;
  for (const Tensor& t : inputs) vars.push_back(g.parameter(t));
  g.backward(fn(g, vars));
  double worst = 0.0;
  std::vector<Tensor> probe = inputs;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor analytic = g.grad(vars[k]);
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      probe[k][i] = inputs[k][i] + h;
      const double up = evaluate(fn, probe);
      probe[k][i] = inputs[k][i] - h;
      const double down = evaluate(fn, probe);
      probe[k][i] = inputs[k][i];
      const double numeric = (signs.empty() ? 1.0 : signs[k]) * (up - down) / (2.0 * h);
      const double a = analytic[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), kRelFloor});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

std::vector<GradCheckRow> run_gradient_suite(std::uint64_t seed, std::size_t configurations) {
  std::vector<std::pair<std::string, Maker>> cases;
  cases.emplace_back("matmul", [](std::mt19937_64& rng) {
    const std::size_t n = uniform_int(rng, 1, 4), k = uniform_int(rng, 1, 4), m = uniform_int(rng, 1, 4);
    const std::uint64_t s = rng();
    GraphFn fn = [s](ad::Graph&, std::span<const ad::Var> v) { return readout(ad::matmul(v[0], v[1]), s); };
    return Check{fn, std::vector<Tensor>{random_tensor(rng, n, k), random_tensor(rng, k, m)}, {}};
  });
  cases.emplace_back("add_bias", [](std::mt19937_64& rng) {
    const std::size_t n = uniform_int(rng, 1, 4), m = uniform_int(rng, 1, 4);
    const std::uint64_t s = rng();
    GraphFn fn = [s](ad::Graph&, std::span<const ad::Var> v) { return readout(ad::add_bias(v[0], v[1]), s); };
    return Check{fn, std::vector<Tensor>{random_tensor(rng, n, m), random_tensor(rng, 1, m)}, {}};
  });
  cases.emplace_back("add", binary_same(&ad::add));
  cases.emplace_back("sub", binary_same(&ad::sub));
  cases.emplace_back("mul", binary_same(&ad::mul));
  cases.emplace_back("scale", [](std::mt19937_64& rng) {
    const double f = std::uniform_real_distribution<double>(-3.0, 3.0)(rng);
    const std::uint64_t s = rng();
    GraphFn fn = [f, s](ad::Graph&, std::span<const ad::Var> v) { return readout(ad::scale(v[0], f), s); };
    return Check{fn, std::vector<Tensor>{random_tensor(rng, 3, 2)}, {}};
  });
  cases.emplace_back("shift", [](std::mt19937_64& rng) {
    const double o = std::uniform_real_distribution<double>(-3.0, 3.0)(rng);
    const std::uint64_t s = rng();
    GraphFn fn = [o, s](ad::Graph&, std::span<const ad::Var> v) { return readout(ad::shift(v[0], o), s); };
    return Check{fn, std::vector<Tensor>{random_tensor(rng, 2, 3)}, {}};
  });
  cases.emplace_back("tanh", unary(&ad::tanh));
  cases.emplace_back("sigmoid", unary(&ad::sigmoid));
  cases.emplace_back("relu", unary(&ad::relu));
  cases.emplace_back("softplus", unary(&ad::softplus));
  cases.emplace_back("log", unary(&ad::log, 0.2, 2.0));
  cases.emplace_back("clamp", unary([](ad::Var x) { return ad::clamp(x, -1.0, 1.0); }));
  cases.emplace_back("softmax_rows", unary(&ad::softmax_rows));
  cases.emplace_back("sum", unary(&ad::sum));
  cases.emplace_back("mean", unary(&ad::mean));
  cases.emplace_back("row_means", unary(&ad::row_means));
  cases.emplace_back("col_means", unary(&ad::col_means));
  cases.emplace_back("min_all", unary(&ad::min_all));
  cases.emplace_back("max_all", unary(&ad::max_all));
  cases.emplace_back("flatten", unary(&ad::flatten));
  cases.emplace_back("sort_values", unary(&ad::sort_values));
  cases.emplace_back("gradient_reversal", [](std::mt19937_64& rng) {
    Check c = unary(&ad::gradient_reversal)(rng);
    c.signs = {-1.0};
    return c;
  });
  cases.emplace_back("pairwise_sq_dist", [](std::mt19937_64& rng) {
    const std::size_t n = uniform_int(rng, 1, 4), k = uniform_int(rng, 1, 4), d = uniform_int(rng, 1, 4);
    const std::uint64_t s = rng();
    GraphFn fn = [s](ad::Graph&, std::span<const ad::Var> v) {
      return readout(ad::pairwise_sq_dist(v[0], v[1]), s);
    };
    return Check{fn, std::vector<Tensor>{random_tensor(rng, n, d), random_tensor(rng, k, d)}, {}};
  });
  cases.emplace_back("concat", [](std::mt19937_64& rng) {
    const std::uint64_t s = rng();
    GraphFn fn = [s](ad::Graph&, std::span<const ad::Var> v) {
      const ad::Var parts[] = {ad::flatten(v[0]), v[1], ad::flatten(v[0])};
      return readout(ad::concat(parts), s);
    };
    return Check{fn, std::vector<Tensor>{random_tensor(rng, uniform_int(rng, 1, 3), 2),
                                                   random_tensor(rng, 1, uniform_int(rng, 1, 4))}, {}};
  });
  cases.emplace_back("pick_columns", [](std::mt19937_64& rng) {
    const std::size_t n = uniform_int(rng, 1, 5), k = uniform_int(rng, 2, 4);
    std::vector<std::size_t> cols = random_labels(rng, n, k);
    const std::uint64_t s = rng();
    GraphFn fn = [cols, s](ad::Graph&, std::span<const ad::Var> v) {
      return readout(ad::pick_columns(v[0], cols), s);
    };
    return Check{fn, std::vector<Tensor>{random_tensor(rng, n, k)}, {}};
  });
  cases.emplace_back("diamond", [](std::mt19937_64& rng) {
    const std::uint64_t s = rng();
    GraphFn fn = [s](ad::Graph&, std::span<const ad::Var> v) {
      const ad::Var h = ad::tanh(v[0]);  // two consumers
      return readout(ad::add(ad::mul(h, h), ad::scale(h, 2.0)), s);
    };
    return Check{fn, std::vector<Tensor>{random_tensor(rng, 3, 3)}, {}};
  });

  cases.emplace_back("L_cls", [](std::mt19937_64& rng) {
    std::vector<Tensor> in;
    append(in, random_mlp(kPhi, rng));
    append(in, random_mlp(kPsi, rng));
    const Tensor x = random_tensor(rng, 5, 2);
    const std::vector<std::size_t> y = random_labels(rng, 5, 2);
    GraphFn fn = [x, y](ad::Graph& g, std::span<const ad::Var> v) {
      const std::size_t np = param_count(kPhi);
      const BoundMlp phi = bound_from_vars(kPhi, v.subspan(0, np));
      const BoundMlp psi = bound_from_vars(kPsi, v.subspan(np));
      return classification_loss(forward(psi, forward(phi, g.constant(x))), y);
    };
    return Check{fn, in, {}};
  });
  cases.emplace_back("L_feat", [](std::mt19937_64& rng) {
    std::vector<Tensor> in;
    append(in, random_mlp(kPhi, rng));
    append(in, random_mlp(kOmega, rng));
    const Tensor xs = random_tensor(rng, 4, 2), xt = random_tensor(rng, 5, 2);
    GraphFn fn = [xs, xt](ad::Graph& g, std::span<const ad::Var> v) {
      const std::size_t np = param_count(kPhi);
      const BoundMlp phi = bound_from_vars(kPhi, v.subspan(0, np));
      const BoundMlp omega = bound_from_vars(kOmega, v.subspan(np));
      return domain_adversarial_loss(omega, forward(phi, g.constant(xs)),
                                     forward(phi, g.constant(xt)), true);
    };
    std::vector<double> signs(in.size(), 1.0);
    std::fill_n(signs.begin(), param_count(kPhi), -1.0);
    return Check{fn, in, signs};
  });
  cases.emplace_back("L_task(literal)", task_loss(AdaptorVariant::kLiteral));
  cases.emplace_back("L_task(pooled)", task_loss(AdaptorVariant::kPooled));
  cases.emplace_back("L_val", [](std::mt19937_64& rng) {
    static const CriticActivation kinds[] = {CriticActivation::kTanh, CriticActivation::kSigmoid,
                                             CriticActivation::kSoftplus, CriticActivation::kRelu};
    const CriticActivation sigma = kinds[rng() % 4];
    const AdaptorVariant variant = rng() % 2 == 0 ? AdaptorVariant::kLiteral : AdaptorVariant::kPooled;
    const std::size_t b = 4;
    const MlpSpec theta{{adaptor_input_width(b, b, variant), 5, 4, 1}, Activation::kTanh,
                        Activation::kIdentity};
    std::vector<Tensor> in;
    append(in, random_mlp(theta, rng));
    const Tensor so = random_tensor(rng, b, 3), to = random_tensor(rng, b, 3);
    const Tensor sn = random_tensor(rng, b, 3), tn = random_tensor(rng, b, 3);
    GraphFn fn = [theta, so, to, sn, tn, sigma, variant](ad::Graph&, std::span<const ad::Var> v) {
      return feature_critic_loss(bound_from_vars(theta, v), so, to, sn, tn, sigma, variant);
    };
    return Check{fn, in, {}};
  });

  std::vector<GradCheckRow> rows;
  std::mt19937_64 rng(seed);
  for (const auto& [name, make] : cases) {
    GradCheckRow row{name, 0, 0.0};
    for (std::size_t c = 0; c < configurations; ++c) {
      const Check check = make(rng);
      row.max_error = std::max(row.max_error, max_relative_error(check.fn, check.inputs, check.signs));
      ++row.configurations;
    }
    rows.push_back(row);
  }
  return rows;
}

double brute_force_auc(std::span<const double> scores, std::span<const std::size_t> labels,
                       std::size_t positive) {
  double correct = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != positive) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] == positive) continue;
      ++pairs;
      if (scores[i] > scores[j]) correct += 1.0;
      else if (scores[i] == scores[j]) correct += 0.5;
    }
  }
  return correct / static_cast<double>(pairs);
}

BruteCounts brute_force_confusion(std::span<const std::size_t> preds,
                                  std::span<const std::size_t> labels, std::size_t positive) {
  BruteCounts c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool p = preds[i] == positive, t = labels[i] == positive;
    if (p && t) ++c.tp;
    else if (p) ++c.fp;
    else if (t) ++c.fn;
    else ++c.tn;
  }
  return c;
}

std::vector<PivotEntry> brute_force_select(std::span<const PivotEntry> candidates, std::size_t m,
                                           PivotStrategy strategy, std::uint64_t seed) {
  std::vector<PivotEntry> all(candidates.begin(), candidates.end());
  const auto desc = [](const PivotEntry& a, const PivotEntry& b) {
    return a.confidence != b.confidence ? a.confidence > b.confidence : a.index < b.index;
  };
  const auto asc = [](const PivotEntry& a, const PivotEntry& b) {
    return a.confidence != b.confidence ? a.confidence < b.confidence : a.index < b.index;
  };
  if (strategy == PivotStrategy::kTopM) {
    std::sort(all.begin(), all.end(), desc);
  } else if (strategy == PivotStrategy::kBottomM) {
    std::sort(all.begin(), all.end(), asc);
  } else {
    std::mt19937_64 rng(seed);
    std::vector<std::pair<std::uint64_t, PivotEntry>> keyed;
    for (const PivotEntry& e : all) keyed.emplace_back(rng(), e);
    std::sort(keyed.begin(), keyed.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = keyed[i].second;
  }
  all.resize(std::min(m, all.size()));
  std::sort(all.begin(), all.end(), desc);
  return all;
}

}  // namespace tanet::testing
